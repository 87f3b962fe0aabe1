from pydantic import BaseModel
from typing import Optional, List

from services.geodesic_families import GeodesicConfig


class GeodesicModel(BaseModel):
    type: str
    foot: Optional[float] = None
    center: Optional[float] = None
    radius: Optional[float] = None


class GeodesicConfigModel(BaseModel):
    geodesics: List[GeodesicModel]
    min_separation: float
    seed: Optional[int] = None

    def to_config(self) -> GeodesicConfig:
        return GeodesicConfig.from_json(self.model_dump(exclude_none=True))
