"""Doubly symmetric binary source: pairs of uniform bits that disagree with rate p."""
from __future__ import annotations

import math
from dataclasses import dataclass
from random import Random

from .errors import ContractViolation
from .gf2 import Gf2Vector, random_vector

__all__ = ["DsbsParams", "sample_pair", "pair_probability", "binary_entropy"]


@dataclass(frozen=True, slots=True)
class DsbsParams:
    """Flip rate p in [0, 1/2] and block length n >= 1."""

    p: float
    n: int

    def __post_init__(self):
        if not 0.0 <= self.p <= 0.5:
            raise ContractViolation(f"p must lie in [0, 1/2], got {self.p}")
        if self.n < 1:
            raise ContractViolation(f"block length must be positive, got {self.n}")


def sample_pair(params: DsbsParams, rng: Random) -> tuple[Gf2Vector, Gf2Vector]:
    """Draw (x, y): x uniform, y = x xor z with z i.i.d. Bernoulli(p)."""
    x = random_vector(params.n, rng)
    noise = 0
    for i in range(params.n):
        if rng.random() < params.p:
            noise |= 1 << i
    return x, Gf2Vector(x.bits ^ noise, params.n)


def pair_probability(params: DsbsParams, x: Gf2Vector, y: Gf2Vector) -> float:
    """Exact joint probability of observing the pair (x, y)."""
    if x.n != params.n or y.n != params.n:
        raise ContractViolation(f"vectors must have length {params.n}, got {x.n} and {y.n}")
    agree = (1.0 - params.p) / 2.0
    differ = params.p / 2.0
    diff = x.bits ^ y.bits
    prob = 1.0
    for i in range(params.n):
        prob *= differ if (diff >> i) & 1 else agree
    return prob


def binary_entropy(q: float) -> float:
    """H2(q) in bits; defined as 0 at the endpoints."""
    if not 0.0 <= q <= 1.0:
        raise ContractViolation(f"entropy argument must lie in [0, 1], got {q}")
    if q in (0.0, 1.0):
        return 0.0
    return -q * math.log2(q) - (1.0 - q) * math.log2(1.0 - q)
