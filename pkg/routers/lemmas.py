from fastapi import APIRouter, HTTPException
from schemas.descriptors import MainLemmaRequest, QuasimorphismRequest
from schemas.run_config import RunConfig
from services.errors import ConfigError, HypStructError
from services.runner import run

router = APIRouter()


@router.post("/mainlemma")
def main_lemma(request: MainLemmaRequest):
    """Certify incomparability of two actions from commuting elements."""
    try:
        report = run(RunConfig.build(subcommand="mainlemma", seed=0, **request.model_dump()))
        return {"status": "ok", "passed": report.passed, "records": report.sorted_records()}
    except ConfigError as e:
        raise HTTPException(status_code=400, detail=f"Invalid configuration: {e.message}")
    except HypStructError as e:
        raise HTTPException(status_code=422, detail=f"Certificate failed: {e.message}")
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Error checking main lemma: {str(e)}")


@router.post("/qm")
def quasimorphism(request: QuasimorphismRequest):
    """Defect, homogenization and Busemann estimates for a quasimorphism."""
    try:
        report = run(RunConfig.build(subcommand="qm", **request.model_dump()))
        return {"status": "ok", "passed": report.passed, "records": report.sorted_records()}
    except ConfigError as e:
        raise HTTPException(status_code=400, detail=f"Invalid configuration: {e.message}")
    except HypStructError as e:
        raise HTTPException(status_code=422, detail=f"Quasimorphism estimate failed: {e.message}")
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Error estimating quasimorphism: {str(e)}")
