from fastapi import APIRouter, HTTPException
from schemas.descriptors import ClassifyRequest, ConfiningRequest
from schemas.run_config import RunConfig
from services.errors import ConfigError, HypStructError
from services.runner import run

router = APIRouter()


@router.post("/classify")
def classify_elements(request: ClassifyRequest):
    """Classify an isometry (or the H2 images of t, e1, e2) by trace and by orbit growth."""
    try:
        report = run(RunConfig.build(subcommand="classify", **request.model_dump()))
        return {"status": "ok", "passed": report.passed, "records": report.sorted_records()}
    except ConfigError as e:
        raise HTTPException(status_code=400, detail=f"Invalid configuration: {e.message}")
    except HypStructError as e:
        raise HTTPException(status_code=422, detail=f"Classification failed: {e.message}")
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Error classifying: {str(e)}")


@router.post("/confining")
def check_confining(request: ConfiningRequest):
    """Verify the confining conditions for Q_eps and the density claim."""
    try:
        report = run(RunConfig.build(subcommand="confining", **request.model_dump()))
        return {"status": "ok", "passed": report.passed, "records": report.sorted_records()}
    except ConfigError as e:
        raise HTTPException(status_code=400, detail=f"Invalid configuration: {e.message}")
    except HypStructError as e:
        raise HTTPException(status_code=422, detail=f"Confinement check failed: {e.message}")
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Error checking confinement: {str(e)}")
