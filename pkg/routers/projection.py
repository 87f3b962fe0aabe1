from fastapi import APIRouter, HTTPException
from schemas.families import AxiomsRequest, ComplexRequest
from schemas.run_config import RunConfig
from services.errors import ConfigError, HypStructError
from services.runner import run

router = APIRouter()


@router.post("/axioms")
def check_axioms(request: AxiomsRequest):
    """Check the projection axioms on a posted family, posted configurations or generated ones."""
    try:
        families = [request.family.to_family()] if request.family else []
        configs = [c.to_config() for c in request.configs or []]
        config = RunConfig.build(subcommand="axioms", **request.model_dump(exclude={"family", "configs"}))
        report = run(config, families, configs)
        return {"status": "ok", "passed": report.passed, "records": report.sorted_records()}
    except ConfigError as e:
        raise HTTPException(status_code=400, detail=f"Invalid configuration: {e.message}")
    except HypStructError as e:
        raise HTTPException(status_code=422, detail=f"Axiom check failed: {e.message}")
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Error checking axioms: {str(e)}")


@router.post("/complex")
def build_complex(request: ComplexRequest):
    """Build the projection graph and quasi-tree of spaces and run the bottleneck check."""
    try:
        families = [request.family.to_family()] if request.family else []
        config = RunConfig.build(subcommand="complex", **request.model_dump(exclude={"family"}))
        report = run(config, families)
        response = {"status": "ok", "passed": report.passed, "records": report.sorted_records()}
        if config.format == "dot":
            response["dot"] = report.artifacts
        return response
    except ConfigError as e:
        raise HTTPException(status_code=400, detail=f"Invalid configuration: {e.message}")
    except HypStructError as e:
        raise HTTPException(status_code=422, detail=f"Complex construction failed: {e.message}")
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Error building complex: {str(e)}")
