"""Bit-exact linear algebra over GF(2) on packed integer words."""
from __future__ import annotations

from dataclasses import dataclass
from random import Random
from typing import Iterable, Iterator

from .errors import ContractViolation

__all__ = [
    "Gf2Vector",
    "Gf2Matrix",
    "matvec",
    "xor",
    "rank",
    "random_matrix",
    "random_vector",
]


@dataclass(frozen=True, slots=True)
class Gf2Vector:
    """Immutable bit vector; bit i of `bits` is symbol i."""

    bits: int
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ContractViolation(f"vector length must be non-negative, got {self.n}")
        if self.bits < 0 or self.bits >> self.n:
            raise ContractViolation(f"value {self.bits:#x} does not fit in {self.n} bits")

    @classmethod
    def from_bits(cls, values: Iterable[int]) -> "Gf2Vector":
        word = 0
        n = 0
        for v in values:
            if v not in (0, 1):
                raise ContractViolation(f"entries must be 0 or 1, got {v!r}")
            word |= v << n
            n += 1
        return cls(word, n)

    @classmethod
    def from_string(cls, text: str) -> "Gf2Vector":
        """Parse a '0'/'1' string; character 0 is symbol 0."""
        if not set(text) <= {"0", "1"}:
            raise ContractViolation(f"not a bit string: {text!r}")
        return cls.from_bits(int(c) for c in text)

    @classmethod
    def zeros(cls, n: int) -> "Gf2Vector":
        return cls(0, n)

    def to_string(self) -> str:
        return "".join(str(self[i]) for i in range(self.n))

    def weight(self) -> int:
        return self.bits.bit_count()

    def concat(self, other: "Gf2Vector") -> "Gf2Vector":
        return Gf2Vector(self.bits | other.bits << self.n, self.n + other.n)

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(i)
        return (self.bits >> i) & 1

    def __iter__(self) -> Iterator[int]:
        return ((self.bits >> i) & 1 for i in range(self.n))

    def __xor__(self, other: "Gf2Vector") -> "Gf2Vector":
        if self.n != other.n:
            raise ContractViolation(f"length mismatch: {self.n} vs {other.n}")
        return Gf2Vector(self.bits ^ other.bits, self.n)

    def __repr__(self) -> str:
        return f"Gf2Vector('{self.to_string()}')"


@dataclass(frozen=True, slots=True)
class Gf2Matrix:
    """Immutable matrix; rows are packed words, bit j of a row is column j."""

    rows: tuple[int, ...]
    cols: int

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        if self.cols < 0:
            raise ContractViolation(f"column count must be non-negative, got {self.cols}")
        for r in self.rows:
            if r < 0 or r >> self.cols:
                raise ContractViolation(f"row {r:#x} does not fit in {self.cols} columns")

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]]) -> "Gf2Matrix":
        packed = [Gf2Vector.from_bits(r) for r in rows]
        if not packed:
            raise ContractViolation("a matrix needs an explicit column count; got no rows")
        width = packed[0].n
        if any(v.n != width for v in packed):
            raise ContractViolation("rows have unequal lengths")
        return cls(tuple(v.bits for v in packed), width)

    @classmethod
    def from_string(cls, text: str) -> "Gf2Matrix":
        """Parse ';'-separated '0'/'1' row strings."""
        return cls.from_rows([int(c) for c in part] for part in text.split(";"))

    @property
    def m(self) -> int:
        return len(self.rows)

    @property
    def n(self) -> int:
        return self.cols

    def row(self, i: int) -> Gf2Vector:
        return Gf2Vector(self.rows[i], self.cols)

    def to_string(self) -> str:
        return ";".join(self.row(i).to_string() for i in range(self.m))

    def matvec(self, vec: Gf2Vector) -> Gf2Vector:
        if vec.n != self.cols:
            raise ContractViolation(f"matrix has {self.cols} columns, vector has {vec.n}")
        word = 0
        for i, row in enumerate(self.rows):
            word |= ((row & vec.bits).bit_count() & 1) << i
        return Gf2Vector(word, self.m)

    def rank(self) -> int:
        """Rank by Gaussian elimination, pivoting on the leftmost live column."""
        rows = list(self.rows)
        r = 0
        for col in range(self.cols):
            pivot = next((i for i in range(r, len(rows)) if (rows[i] >> col) & 1), None)
            if pivot is None:
                continue
            rows[r], rows[pivot] = rows[pivot], rows[r]
            for i in range(len(rows)):
                if i != r and (rows[i] >> col) & 1:
                    rows[i] ^= rows[r]
            r += 1
        return r

    def __repr__(self) -> str:
        return f"Gf2Matrix('{self.to_string()}')"


def matvec(mat: Gf2Matrix, vec: Gf2Vector) -> Gf2Vector:
    return mat.matvec(vec)


def xor(a: Gf2Vector, b: Gf2Vector) -> Gf2Vector:
    return a ^ b


def rank(mat: Gf2Matrix) -> int:
    return mat.rank()


def random_matrix(m: int, n: int, rng: Random) -> Gf2Matrix:
    """m-by-n matrix with i.i.d. uniform entries drawn from rng; requires m <= n."""
    if m < 0 or n < 0:
        raise ContractViolation(f"dimensions must be non-negative, got {m}x{n}")
    if m > n:
        raise ContractViolation(f"need m <= n, got m={m} > n={n}")
    return Gf2Matrix(tuple(rng.getrandbits(n) if n else 0 for _ in range(m)), n)


def random_vector(n: int, rng: Random) -> Gf2Vector:
    return Gf2Vector(rng.getrandbits(n) if n else 0, n)
