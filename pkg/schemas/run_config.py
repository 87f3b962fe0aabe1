"""Run configuration shared by the command line and the HTTP routers"""
from typing import Any, List, Literal, Optional

from pydantic import BaseModel, Field, ValidationError, field_validator

from services.errors import ConfigError

SUBCOMMANDS = ("classify", "confining", "axioms", "complex", "flip", "poset", "mainlemma", "qm")


def _split_numbers(value: Any, size: int, kind, name: str):
    if value is None:
        return None
    if isinstance(value, str):
        value = [part for part in value.replace(" ", "").split(",") if part != ""]
    try:
        numbers = [kind(x) for x in value]
    except (TypeError, ValueError):
        raise ValueError(f"{name} must be {size} comma-separated numbers")
    if len(numbers) != size:
        raise ValueError(f"{name} must have exactly {size} entries, got {len(numbers)}")
    return numbers


class RunConfig(BaseModel):
    subcommand: Literal["classify", "confining", "axioms", "complex", "flip", "poset", "mainlemma", "qm"]
    phi: Optional[List[int]] = None
    isometry: Optional[List[float]] = None
    reversing: bool = False
    eps: float = Field(default=1.0, gt=0)
    delta: Optional[float] = Field(default=None, gt=0)
    box: int = Field(default=50, gt=0)
    k_cap: int = Field(default=20, gt=0)
    depth: int = Field(default=3, gt=0)
    radius: int = Field(default=4, gt=0)
    samples: int = Field(default=20, gt=0)
    count: int = Field(default=20, ge=2)
    R: float = Field(default=0.1, gt=0)
    K: Optional[float] = Field(default=None, gt=0)
    L: Optional[float] = Field(default=None, gt=0)
    lengths: List[float] = Field(default_factory=lambda: [4.0, 4.0])
    word_cap: int = Field(default=1, ge=0)
    scan_bound: int = Field(default=10, gt=0)
    instance: Literal["z2", "bs22", "broken"] = "z2"
    qm: Optional[dict] = None
    seed: int
    inputs: List[str] = Field(default_factory=list)
    format: Literal["json", "dot", "text"] = "json"
    out: Optional[str] = None

    @field_validator("phi", mode="before")
    @classmethod
    def parse_phi(cls, value):
        return _split_numbers(value, 4, int, "phi")

    @field_validator("isometry", mode="before")
    @classmethod
    def parse_isometry(cls, value):
        return _split_numbers(value, 4, float, "isometry")

    @field_validator("lengths", mode="before")
    @classmethod
    def parse_lengths(cls, value):
        lengths = _split_numbers(value, 2, float, "lengths")
        if any(x <= 0 for x in lengths):
            raise ValueError("lengths must be positive")
        return lengths

    @classmethod
    def build(cls, **values) -> "RunConfig":
        """Validate raw values; unset (None) entries fall back to the defaults."""
        try:
            return cls(**{k: v for k, v in values.items() if v is not None})
        except ValidationError as e:
            first = e.errors()[0]
            field = str(first["loc"][0]) if first.get("loc") else None
            raise ConfigError(f"Invalid value for {field}: {first['msg']}", field=field)
