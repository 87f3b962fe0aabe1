"""Runtime settings read from the environment (.env supported)"""
import os
import logging
from pydantic import BaseModel, Field, ValidationError
from dotenv import load_dotenv

from .errors import ConfigError

load_dotenv()

logger = logging.getLogger(__name__)


class Settings(BaseModel):
    seed: int = 7
    ball_cap: int = Field(default=200_000, gt=0)
    orbit_powers: int = Field(default=64, ge=16)
    epsilon: float = Field(default=3.6, gt=0)
    log_level: str = "INFO"
    output_dir: str = "reports"


_ENV_KEYS = {
    "seed": "HYPSTRUCT_SEED",
    "ball_cap": "HYPSTRUCT_BALL_CAP",
    "orbit_powers": "HYPSTRUCT_ORBIT_POWERS",
    "epsilon": "HYPSTRUCT_EPSILON",
    "log_level": "HYPSTRUCT_LOG_LEVEL",
    "output_dir": "HYPSTRUCT_OUTPUT_DIR",
}


def _read_settings() -> Settings:
    values = {}
    for field, key in _ENV_KEYS.items():
        raw = os.getenv(key)
        if raw is not None and raw.strip() != "":
            values[field] = raw.strip()
    try:
        return Settings(**values)
    except ValidationError as e:
        first = e.errors()[0]
        field = str(first["loc"][0]) if first.get("loc") else None
        raise ConfigError(f"Invalid environment setting {_ENV_KEYS.get(field, field)}: {first['msg']}",
                          field=field)


settings = _read_settings()


def get_settings() -> Settings:
    """Return the active settings."""
    return settings


def reload_settings() -> Settings:
    """Re-read the environment and replace the active settings."""
    global settings
    settings = _read_settings()
    logger.debug("Settings reloaded: %s", settings)
    return settings
