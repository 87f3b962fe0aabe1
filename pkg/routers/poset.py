from fastapi import APIRouter, HTTPException
from schemas.descriptors import PosetRequest
from schemas.run_config import RunConfig
from services.errors import ConfigError, HypStructError
from services.runner import run

router = APIRouter()


@router.post("/poset")
def build_poset(request: PosetRequest):
    """Assemble the certified poset of hyperbolic structures for an Anosov matrix."""
    try:
        config = RunConfig.build(subcommand="poset", **request.model_dump())
        report = run(config)
        response = {"status": "ok", "passed": report.passed, "records": report.sorted_records()}
        if config.format == "dot":
            response["dot"] = report.artifacts.get("poset")
        return response
    except ConfigError as e:
        raise HTTPException(status_code=400, detail=f"Invalid configuration: {e.message}")
    except HypStructError as e:
        raise HTTPException(status_code=422, detail=f"Poset assembly failed: {e.message}")
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Error building poset: {str(e)}")
