from pydantic import BaseModel
from typing import Optional, List


class ConfiningRequest(BaseModel):
    phi: List[int]
    seed: int = 7
    eps: float = 1.0
    box: int = 50
    k_cap: int = 20
    delta: Optional[float] = None


class ClassifyRequest(BaseModel):
    isometry: Optional[List[float]] = None
    reversing: bool = False
    phi: Optional[List[int]] = None
    samples: int = 20
    seed: int = 7


class PosetRequest(BaseModel):
    phi: List[int]
    seed: int = 7
    format: str = "json"


class MainLemmaRequest(BaseModel):
    instance: str = "z2"


class QuasimorphismRequest(BaseModel):
    qm: Optional[dict] = None
    phi: Optional[List[int]] = None
    samples: int = 20
    seed: int = 7
