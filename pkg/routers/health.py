from fastapi import APIRouter
from services.runner import subcommand_runner
from services.settings import get_settings

router = APIRouter()


@router.get("/health")
def health():
    """Report service status and the active settings."""
    return {"status": "ok", "subcommands": sorted(subcommand_runner.handlers), "settings": get_settings().model_dump()}
