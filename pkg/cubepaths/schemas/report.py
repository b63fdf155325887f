"""Solve, Verify, Classify and Trace Schemas"""

from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field

from cubepaths.schemas.pairset import SCHEMA_VERSION, ConnectorModel, pair_of, pairs_of
from cubepaths.services.classification_service import PairSetProfile
from cubepaths.services.completion_service import CompletionTrace
from cubepaths.services.solver_service import SolveReport
from cubepaths.services.verify_service import Violation


class SolveReportModel(BaseModel):
    """Schema for a solve result"""
    schema_version: int = SCHEMA_VERSION
    verdict: str
    reason: Optional[str] = None
    connector: Optional[ConnectorModel] = None
    strategy_path: List[str] = Field(default_factory=list)
    stats: Dict[str, int] = Field(default_factory=dict)

    @classmethod
    def from_report(cls, report: SolveReport) -> "SolveReportModel":
        return cls(
            verdict=report.verdict.value,
            reason=report.reason.value if report.reason else None,
            connector=ConnectorModel.from_connector(report.connector) if report.connector else None,
            strategy_path=report.strategy_path,
            stats=vars(report.stats).copy(),
        )


class ViolationModel(BaseModel):
    clause: str
    detail: str
    witnesses: List[str] = Field(default_factory=list)

    @classmethod
    def from_violation(cls, v: Violation) -> "ViolationModel":
        return cls(clause=v.clause, detail=v.detail, witnesses=list(v.witnesses))


class VerifyResultModel(BaseModel):
    """Schema for a verification result"""
    schema_version: int = SCHEMA_VERSION
    ok: bool
    violation: Optional[ViolationModel] = None


class ClassifyModel(BaseModel):
    """Schema for the classify report"""
    schema_version: int = SCHEMA_VERSION
    n: int
    size: int
    norm: int
    odd: bool
    balanced: bool
    pure: bool
    diminishable: Optional[bool] = None
    diminishable_reason: str = ""
    sigma: List[Tuple[int, int]]
    separating: List[int]
    bad: List[int]
    enc: List[str]

    @classmethod
    def from_profile(cls, profile: PairSetProfile) -> "ClassifyModel":
        return cls(**vars(profile))


class TraceStepModel(BaseModel):
    step: str
    consumed: List[int]
    chosen: List[str]
    produced: List[List[str]]
    merges: List[List[str]]


class TraceModel(BaseModel):
    """Schema for a completion trace, as written by --dump-trace"""
    schema_version: int = SCHEMA_VERSION
    coordinate: int
    seed: int
    matching: List[List[int]]
    steps: List[TraceStepModel]
    merge_script: List[List[str]]
    input: List[List[str]]
    output: List[List[str]]

    @classmethod
    def from_trace(cls, trace: CompletionTrace) -> "TraceModel":
        return cls(
            coordinate=trace.coordinate,
            seed=trace.seed,
            matching=[list(c) for c in trace.matching.couples],
            steps=[
                TraceStepModel(
                    step=s.kind.value,
                    consumed=list(s.consumed),
                    chosen=[str(v) for v in s.chosen],
                    produced=[pair_of(p) for p in s.produced],
                    merges=[[str(u), str(v)] for u, v in s.merges],
                )
                for s in trace.steps
            ],
            merge_script=[[str(u), str(v)] for u, v in trace.merge_script],
            input=pairs_of(trace.source),
            output=pairs_of(trace.result),
        )
