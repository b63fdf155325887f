"""Census and Bench Schemas"""

from typing import List, Optional

from pydantic import BaseModel, Field

from cubepaths.schemas.pairset import SCHEMA_VERSION
from cubepaths.services.census_service import CensusSummary


class CensusRecordModel(BaseModel):
    """Schema for one census class"""
    schema_version: int = SCHEMA_VERSION
    n: int
    predicate: str
    canonical: List[List[str]]
    verdict: str
    certificate: str
    orbit_size: int = Field(..., ge=1)


class CensusSummaryModel(BaseModel):
    """Schema for census totals under both counting conventions"""
    schema_version: int = SCHEMA_VERSION
    n: int
    predicate: str
    classes: int
    raw: int
    non_connectable_classes: int
    non_connectable_raw: int
    matches_53: Optional[str] = None

    @classmethod
    def from_summary(cls, summary: CensusSummary) -> "CensusSummaryModel":
        return cls(
            n=summary.n,
            predicate=summary.predicate,
            classes=summary.classes,
            raw=summary.raw,
            non_connectable_classes=summary.non_connectable_classes,
            non_connectable_raw=summary.non_connectable_raw,
            matches_53=summary.matches_53,
        )


class BenchRowModel(BaseModel):
    """Schema for one bench row"""
    schema_version: int = SCHEMA_VERSION
    n: int
    samples: int
    connected: int
    verified: int
    unresolved: int
    median_seconds: float
