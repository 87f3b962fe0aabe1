from pydantic import BaseModel
from typing import Optional, List, Union

from schemas.geometry import GeodesicConfigModel
from services.projection_complex import DomainFamily


class DomainModel(BaseModel):
    id: Union[int, str]
    line: bool = True


class ProjectionModel(BaseModel):
    on: Union[int, str]
    of: Union[int, str]
    points: List[float]


class DomainFamilyModel(BaseModel):
    theta: float
    domains: List[DomainModel]
    projections: List[ProjectionModel]
    metadata: Optional[dict] = None

    def to_family(self) -> DomainFamily:
        return DomainFamily.from_json(self.model_dump(exclude_none=True))


class AxiomsRequest(BaseModel):
    family: Optional[DomainFamilyModel] = None
    configs: Optional[List[GeodesicConfigModel]] = None
    samples: int = 5
    count: int = 20
    R: float = 0.1
    seed: int = 7


class ComplexRequest(BaseModel):
    family: Optional[DomainFamilyModel] = None
    K: Optional[float] = None
    L: Optional[float] = None
    count: int = 12
    R: float = 0.1
    seed: int = 7
    format: str = "json"


class FlipRequest(BaseModel):
    lengths: List[float] = [4.0, 4.0]
    depth: int = 3
    word_cap: int = 1
    scan_bound: int = 10
    format: str = "json"
