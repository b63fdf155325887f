"""Hypercube Vertex Model"""

from dataclasses import dataclass
from typing import Iterable, Iterator, List, Optional, Set

MAX_DIMENSION = 30


class CubePathsError(Exception):
    """Base exception for all cubepaths errors"""
    pass


class DimensionMismatchError(CubePathsError):
    """Exception raised when vertices of different dimensions are combined"""
    pass


class UndefinedProjectionError(CubePathsError):
    """Exception raised when rho is applied to a vertex outside the half-cube"""
    pass


class VertexFormatError(CubePathsError):
    """Exception raised when a vertex cannot be parsed or is out of range"""
    pass


@dataclass(frozen=True, order=True)
class Vertex:
    """
    A vertex of the hypercube Q_n stored as an n-bit mask.

    Coordinate i is bit i of ``bits``; coordinate 0 is the least
    significant bit. Bitstrings are written coordinate 0 first, so
    ``Vertex.parse("1000")`` has bits == 1.
    """

    bits: int
    dim: int

    def __post_init__(self):
        if not 1 <= self.dim <= MAX_DIMENSION:
            raise VertexFormatError(
                f"Dimension {self.dim} out of range 1..{MAX_DIMENSION}"
            )
        if self.bits < 0 or self.bits >> self.dim:
            raise VertexFormatError(
                f"Bits {self.bits} do not fit in dimension {self.dim}"
            )

    @classmethod
    def zero(cls, dim: int) -> "Vertex":
        return cls(0, dim)

    @classmethod
    def unit(cls, i: int, dim: int) -> "Vertex":
        """The unit vector e_i"""
        return cls(1 << i, dim)

    @classmethod
    def parse(cls, text: str, dim: Optional[int] = None) -> "Vertex":
        """
        Parse a bitstring ("1010") or a decimal integer with explicit dim.

        Raises:
            VertexFormatError: If the text is neither form or does not fit
        """
        text = text.strip()
        if dim is not None and text.isdigit() and (len(text) != dim or set(text) - {"0", "1"}):
            return cls(int(text), dim)
        if not text or set(text) - {"0", "1"}:
            raise VertexFormatError(f"Not a bitstring: {text!r}")
        if dim is not None and len(text) != dim:
            raise VertexFormatError(
                f"Bitstring {text!r} has length {len(text)}, expected {dim}"
            )
        bits = 0
        for i, ch in enumerate(text):
            if ch == "1":
                bits |= 1 << i
        return cls(bits, len(text))

    def __str__(self) -> str:
        return "".join("1" if self.bits >> i & 1 else "0" for i in range(self.dim))

    def __repr__(self) -> str:
        return f"<Vertex({self})>"

    def coord(self, i: int) -> int:
        return self.bits >> i & 1

    @property
    def weight(self) -> int:
        return self.bits.bit_count()

    @property
    def parity(self) -> int:
        return -1 if self.bits.bit_count() & 1 else 1

    def flip(self, i: int) -> "Vertex":
        """Return v XOR e_i"""
        return Vertex(self.bits ^ (1 << i), self.dim)

    def _check_dim(self, other: "Vertex") -> None:
        if self.dim != other.dim:
            raise DimensionMismatchError(
                f"Dimension mismatch: {self.dim} vs {other.dim}"
            )

    def __xor__(self, other: "Vertex") -> "Vertex":
        self._check_dim(other)
        return Vertex(self.bits ^ other.bits, self.dim)

    def hamming(self, other: "Vertex") -> int:
        self._check_dim(other)
        return (self.bits ^ other.bits).bit_count()

    def is_adjacent(self, other: "Vertex") -> bool:
        return self.hamming(other) == 1

    def neighbors(self) -> List["Vertex"]:
        return [Vertex(self.bits ^ (1 << i), self.dim) for i in range(self.dim)]


def parity(v: Vertex) -> int:
    """chi(v) = (-1)^popcount"""
    return v.parity


def xor(u: Vertex, v: Vertex) -> Vertex:
    return u ^ v


def hamming(u: Vertex, v: Vertex) -> int:
    return u.hamming(v)


def neighbors(v: Vertex) -> List[Vertex]:
    """The n neighbours of v, ordered by coordinate"""
    return v.neighbors()


def rho_bits(i: int, bits: int) -> int:
    """Delete coordinate i of a mask (no check on the deleted value)"""
    low = bits & ((1 << i) - 1)
    return low | (bits >> (i + 1)) << i


def iota_bits(i: int, k: int, bits: int) -> int:
    """Insert value k at coordinate i of a mask"""
    low = bits & ((1 << i) - 1)
    return low | (k << i) | (bits >> i) << (i + 1)


def rho(i: int, k: int, v: Vertex) -> Vertex:
    """
    Project v onto the half-cube {alpha(i) = k}, deleting coordinate i.

    Raises:
        UndefinedProjectionError: If v(i) != k
        VertexFormatError: If v.dim < 2 or i is out of range
    """
    if v.dim < 2 or not 0 <= i < v.dim:
        raise VertexFormatError(f"Cannot delete coordinate {i} from dimension {v.dim}")
    if v.coord(i) != k:
        raise UndefinedProjectionError(
            f"rho_{{{i}={k}}} undefined for {v}: coordinate {i} is {v.coord(i)}"
        )
    return Vertex(rho_bits(i, v.bits), v.dim - 1)


def iota(i: int, k: int, v: Vertex) -> Vertex:
    """Insert value k as coordinate i; inverse of rho(i, k, .)"""
    if not 0 <= i <= v.dim:
        raise VertexFormatError(f"Cannot insert coordinate {i} into dimension {v.dim}")
    return Vertex(iota_bits(i, k, v.bits), v.dim + 1)


def all_vertices(dim: int) -> Iterator[Vertex]:
    for bits in range(1 << dim):
        yield Vertex(bits, dim)


def neighbourhood(vertices: Iterable[Vertex]) -> Set[Vertex]:
    """Vertices adjacent to at least one member of the given set"""
    result: Set[Vertex] = set()
    for v in vertices:
        result.update(v.neighbors())
    return result


def reflected_gray_code(dim: int) -> List[Vertex]:
    """The binary-reflected Gray code of Q_dim, a Hamiltonian cycle"""
    return [Vertex(x ^ (x >> 1), dim) for x in range(1 << dim)]
