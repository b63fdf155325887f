"""Pair-Set and Connector Schemas"""

from typing import List

from pydantic import BaseModel, Field, field_validator, model_validator

from cubepaths.models.connector import Connector
from cubepaths.models.hypercube import MAX_DIMENSION, Vertex
from cubepaths.models.pairset import Pair, PairSet

SCHEMA_VERSION = 1


def _check_bitstring(v: str) -> str:
    if not v or set(v) - {"0", "1"}:
        raise ValueError(f"Not a bitstring: {v!r}")
    return v


class PairSetModel(BaseModel):
    """Schema for a pair-set on the wire; vertices are bitstrings, coordinate 0 first"""
    schema_version: int = SCHEMA_VERSION
    n: int = Field(..., ge=1, le=MAX_DIMENSION)
    pairs: List[List[str]]

    @field_validator('pairs')
    @classmethod
    def validate_pairs(cls, v: List[List[str]]) -> List[List[str]]:
        """Every entry is two bitstrings"""
        for entry in v:
            if len(entry) != 2:
                raise ValueError('Each pair must list exactly two vertices')
            for text in entry:
                _check_bitstring(text)
        return v

    @model_validator(mode='after')
    def validate_lengths(self) -> "PairSetModel":
        for entry in self.pairs:
            for text in entry:
                if len(text) != self.n:
                    raise ValueError(f'Vertex {text!r} does not have length n={self.n}')
        return self

    def to_pairset(self) -> PairSet:
        """Raises InvalidPairSetError when pairs overlap or are all degenerate"""
        return PairSet.from_strings([tuple(p) for p in self.pairs], self.n)

    @classmethod
    def from_pairset(cls, A: PairSet) -> "PairSetModel":
        return cls(n=A.dim, pairs=[[str(p.a), str(p.b)] for p in A.pairs])


class ConnectorModel(BaseModel):
    """Schema for a connector; one path per pair, in pair order"""
    schema_version: int = SCHEMA_VERSION
    n: int = Field(..., ge=1, le=MAX_DIMENSION)
    paths: List[List[str]]

    def to_connector(self) -> Connector:
        return Connector(
            self.n, tuple(tuple(Vertex.parse(v, self.n) for v in path) for path in self.paths)
        )

    @classmethod
    def from_connector(cls, C: Connector) -> "ConnectorModel":
        return cls(n=C.dim, paths=[[str(v) for v in path] for path in C.paths])


def pairs_of(A: PairSet) -> List[List[str]]:
    return [[str(p.a), str(p.b)] for p in A.pairs]


def pair_of(p: Pair) -> List[str]:
    return [str(p.a), str(p.b)]
