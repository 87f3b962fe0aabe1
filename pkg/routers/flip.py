from fastapi import APIRouter, HTTPException
from schemas.families import FlipRequest
from schemas.run_config import RunConfig
from services.errors import ConfigError, HypStructError
from services.runner import run

router = APIRouter()


@router.post("/flip")
def flip_tree(request: FlipRequest):
    """Build a flip tree, export both colour families and run the bounded projection scan."""
    try:
        config = RunConfig.build(subcommand="flip", seed=0, **request.model_dump())
        report = run(config)
        response = {"status": "ok", "passed": report.passed, "records": report.sorted_records()}
        if config.format == "dot":
            response["dot"] = report.artifacts.get("flip_tree")
        return response
    except ConfigError as e:
        raise HTTPException(status_code=400, detail=f"Invalid configuration: {e.message}")
    except HypStructError as e:
        raise HTTPException(status_code=422, detail=f"Flip tree failed: {e.message}")
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Error building flip tree: {str(e)}")
