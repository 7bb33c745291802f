"""Exact joint-distribution accounting for protocol runs.

The verification core is `enumerate_joint`: it walks every (x, y, k)
combination, replays the protocol algebra on all of them at once, and
returns the exact joint pmf of inputs, messages, and output. Privacy and
conditional-entropy quantities are only ever computed from this exhaustive
pmf; sampling is used for error rates alone.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from random import Random
from typing import Sequence

import numpy as np

from .codes import ENUMERATION_GUARD_BITS, LinearCode
from .errors import CapacityError, ConfigurationError, ContractViolation
from .gf2 import Gf2Vector
from .protocol import (
    PROTOCOL_IDS,
    PartyId,
    run_plain_km,
    run_secure_km,
    run_with_sampling,
    run_zero_error_otp,
)
from .source import DsbsParams, binary_entropy

__all__ = [
    "JointPmf",
    "LeakageReport",
    "RateReport",
    "Lemma1Report",
    "MonteCarloError",
    "ReportRow",
    "CSV_COLUMNS",
    "enumerate_joint",
    "entropy",
    "conditional_entropy",
    "conditional_mutual_information",
    "leakage_report",
    "rate_report",
    "check_rate_region",
    "check_lemma1",
    "monte_carlo_error",
    "csv_header",
    "REGION_SLACK",
]

# Tolerance used when deciding membership of a rate quadruple.
REGION_SLACK = 1e-9

# Link payloads concatenated in this order form the transcript digest.
_SCHEDULE = {
    "secure-km": ("m12", "m13", "m23"),
    "zero-error-otp": ("m12", "m13", "m23"),
    "plain-km": ("m13", "m23"),
}

_CHUNK = 1 << 20
_BINCOUNT_MAX_BITS = 22


@dataclass(eq=False)
class JointPmf:
    """Exact joint pmf over (x, y, k, per-link payloads, zhat), one atom each.

    Columns hold the packed integer value of each variable per atom; `widths`
    gives the bit width of every variable. The variable name "transcript"
    may be used anywhere a variable set is accepted and expands to the
    schedule-ordered link payloads.
    """

    protocol: str
    n: int
    m: int
    p: float
    widths: dict[str, int]
    columns: dict[str, np.ndarray]
    probs: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def size(self) -> int:
        return len(self.probs)

    def total(self) -> float:
        return float(self.probs.sum())

    def variables(self) -> tuple[str, ...]:
        return tuple(self.widths)

    def _expand(self, variables) -> tuple[str, ...]:
        if isinstance(variables, str):
            variables = (variables,)
        names: list[str] = []
        for name in variables:
            if name == "transcript":
                names.extend(_SCHEDULE[self.protocol])
            elif name in self.widths:
                names.append(name)
            else:
                raise ConfigurationError(f"unknown variable {name!r}; have {sorted(self.widths)}")
        return tuple(sorted(set(names)))

    def entropy(self, variables) -> float:
        """Exact joint entropy (bits) of a set of atom variables."""
        key = self._expand(variables)
        if key in self._cache:
            return self._cache[key]
        comp = None
        shift = 0
        for name in key:
            w = self.widths[name]
            if w == 0:
                continue
            col = self.columns[name].astype(np.int64) << shift
            comp = col if comp is None else comp | col
            shift += w
        if comp is None:
            h = 0.0
        else:
            if shift <= _BINCOUNT_MAX_BITS:
                grouped = np.bincount(comp, weights=self.probs, minlength=1 << shift)
            else:
                _, inverse = np.unique(comp, return_inverse=True)
                grouped = np.bincount(inverse, weights=self.probs)
            nz = grouped[grouped > 0.0]
            h = float(-np.sum(nz * np.log2(nz)))
        self._cache[key] = h
        return h


def entropy(pmf: JointPmf, variables) -> float:
    return pmf.entropy(variables)


def conditional_entropy(pmf: JointPmf, target, given=()) -> float:
    """H(target | given) = H(target, given) - H(given)."""
    t = target if not isinstance(target, str) else (target,)
    g = given if not isinstance(given, str) else (given,)
    return pmf.entropy(tuple(t) + tuple(g)) - pmf.entropy(g)


def conditional_mutual_information(pmf: JointPmf, a, b, given=()) -> float:
    """I(a; b | given), exact up to floating-point cancellation."""
    a = (a,) if isinstance(a, str) else tuple(a)
    b = (b,) if isinstance(b, str) else tuple(b)
    c = (given,) if isinstance(given, str) else tuple(given)
    return pmf.entropy(a + c) + pmf.entropy(b + c) - pmf.entropy(a + b + c) - pmf.entropy(c)


def enumerate_joint(
    protocol_id: str,
    code: LinearCode | None,
    params: DsbsParams,
    *,
    guard_bits: int = ENUMERATION_GUARD_BITS,
    replay_samples: int = 64,
) -> JointPmf:
    """Exhaustive pmf over every (x, y, k); one atom per combination.

    A strided subset of atoms is replayed through the message-passing engine
    on every call, so the vectorised algebra cannot drift from the protocols
    it claims to summarise.
    """
    if protocol_id not in PROTOCOL_IDS:
        raise ConfigurationError(f"unknown protocol id: {protocol_id!r}")
    n = params.n
    if protocol_id == "zero-error-otp":
        if code is not None and code.n != n:
            raise ContractViolation(f"code length {code.n} != source length {n}")
        m, mlen, klen = n, n, n
        synd = leaders = None
    else:
        if code is None:
            raise ConfigurationError(f"{protocol_id} needs a code")
        if code.n != n:
            raise ContractViolation(f"code length {code.n} != source length {n}")
        m, mlen = code.m, code.m
        klen = code.m if protocol_id == "secure-km" else 0
        synd, leaders = code.syndrome_table(), code.leaders
    total_bits = 2 * n + klen
    if total_bits > guard_bits:
        raise CapacityError(
            f"joint pmf needs 2^{total_bits} = {1 << total_bits} atoms, guard is 2^{guard_bits}"
        )
    size = 1 << total_bits
    names = ("x", "y", "z", "k", "m12", "m13", "m23", "zhat")
    widths = {
        "x": n, "y": n, "z": n,
        "k": klen, "m12": klen,
        "m13": mlen, "m23": mlen,
        "zhat": n,
    }
    columns = {name: np.empty(size, dtype=np.int32) for name in names}
    probs = np.empty(size, dtype=np.float64)
    nmask = (1 << n) - 1
    kmask = (1 << klen) - 1
    differ, agree = params.p / 2.0, (1.0 - params.p) / 2.0
    ptable = np.array([differ**d * agree ** (n - d) for d in range(n + 1)]) * 0.5**klen
    for lo in range(0, size, _CHUNK):
        hi = min(lo + _CHUNK, size)
        idx = np.arange(lo, hi, dtype=np.int64)
        k = idx & kmask
        y = (idx >> klen) & nmask
        x = idx >> (klen + n)
        z = x ^ y
        if protocol_id == "secure-km":
            m13, m23 = k ^ synd[x], k ^ synd[y]
            zhat = leaders[m13 ^ m23]
        elif protocol_id == "plain-km":
            m13, m23 = synd[x], synd[y]
            zhat = leaders[m13 ^ m23]
        else:
            m13, m23 = k ^ x, k ^ y
            zhat = m13 ^ m23
        for name, col in (("x", x), ("y", y), ("z", z), ("k", k),
                          ("m12", k), ("m13", m13), ("m23", m23), ("zhat", zhat)):
            columns[name][lo:hi] = col
        probs[lo:hi] = ptable[np.bitwise_count(z)]
    pmf = JointPmf(protocol=protocol_id, n=n, m=m, p=params.p,
                   widths=widths, columns=columns, probs=probs)
    if replay_samples > 0:
        _replay_check(pmf, code, min(replay_samples, size))
    return pmf


def _replay_check(pmf: JointPmf, code: LinearCode | None, samples: int) -> None:
    stride = max(pmf.size // samples, 1)
    cols = pmf.columns
    for i in range(0, pmf.size, stride):
        x = Gf2Vector(int(cols["x"][i]), pmf.n)
        y = Gf2Vector(int(cols["y"][i]), pmf.n)
        k = Gf2Vector(int(cols["k"][i]), pmf.widths["k"])
        if pmf.protocol == "secure-km":
            out = run_secure_km(code, x, y, k)
        elif pmf.protocol == "plain-km":
            out = run_plain_km(code, x, y)
        else:
            out = run_zero_error_otp(x, y, k)
        t = out.transcript
        ok = (
            t.link_payload(PartyId.ALICE, PartyId.BOB).bits == int(cols["m12"][i])
            and t.link_payload(PartyId.ALICE, PartyId.CHARLIE).bits == int(cols["m13"][i])
            and t.link_payload(PartyId.BOB, PartyId.CHARLIE).bits == int(cols["m23"][i])
            and out.z_hat.bits == int(cols["zhat"][i])
        )
        if not ok:
            raise RuntimeError(f"enumerated atom {i} disagrees with protocol replay")


@dataclass(frozen=True)
class LeakageReport:
    """Per-symbol leakage: eps1/eps2 are the Alice/Bob-facing conditional
    mutual informations, eps3 the Charlie-facing one, eps4 the residual
    equivocation of the true sum given the decoded sum."""

    eps1: float
    eps2: float
    eps3: float
    eps4: float


def leakage_report(pmf: JointPmf) -> LeakageReport:
    n = pmf.n
    return LeakageReport(
        eps1=conditional_mutual_information(pmf, ("m13", "m12"), "y", "x") / n,
        eps2=conditional_mutual_information(pmf, ("m23", "m12"), "x", "y") / n,
        eps3=conditional_mutual_information(pmf, ("m13", "m23"), ("x", "y"), "z") / n,
        eps4=conditional_entropy(pmf, "z", "zhat") / n,
    )


@dataclass(frozen=True)
class RateReport:
    """Per-symbol link rates, randomness rate rho, and the code rate m/n."""

    r13: float
    r23: float
    r12: float
    rho: float
    realized_R: float

    def quadruple(self) -> tuple[float, float, float, float]:
        return (self.r13, self.r23, self.r12, self.rho)


def rate_report(pmf: JointPmf) -> RateReport:
    n = pmf.n
    return RateReport(
        r13=pmf.widths["m13"] / n,
        r23=pmf.widths["m23"] / n,
        r12=pmf.widths["m12"] / n,
        rho=conditional_entropy(pmf, ("m12", "m13", "m23"), ("x", "y")) / n,
        realized_R=pmf.m / n,
    )


def check_rate_region(quad: Sequence[float], p: float, *, slack: float = REGION_SLACK) -> bool:
    """True when min(r13, r23, r12, rho) clears the binary entropy of p."""
    values = tuple(float(v) for v in quad)
    if len(values) != 4:
        raise ContractViolation(f"need a quadruple, got {len(values)} values")
    return min(values) >= binary_entropy(p) - slack


@dataclass(frozen=True)
class Lemma1Report:
    """Zero-error structure checks for the uncoded one-time-pad scheme."""

    h_x_given_alice_links: float
    h_y_given_bob_links: float
    i_link12_inputs: float
    i_link13_inputs: float
    i_link23_inputs: float
    tol: float = 1e-10

    @property
    def x_recoverable(self) -> bool:
        return abs(self.h_x_given_alice_links) <= self.tol

    @property
    def y_recoverable(self) -> bool:
        return abs(self.h_y_given_bob_links) <= self.tol

    @property
    def link12_independent(self) -> bool:
        return abs(self.i_link12_inputs) <= self.tol

    @property
    def link13_independent(self) -> bool:
        return abs(self.i_link13_inputs) <= self.tol

    @property
    def link23_independent(self) -> bool:
        return abs(self.i_link23_inputs) <= self.tol

    @property
    def all_hold(self) -> bool:
        return (
            self.x_recoverable
            and self.y_recoverable
            and self.link12_independent
            and self.link13_independent
            and self.link23_independent
        )


def check_lemma1(pmf: JointPmf, *, tol: float = 1e-10) -> Lemma1Report:
    """Five exact conditions: x and y recoverable from their owners' links,
    and every single link statistically independent of the input pair."""
    return Lemma1Report(
        h_x_given_alice_links=conditional_entropy(pmf, "x", ("m12", "m13")),
        h_y_given_bob_links=conditional_entropy(pmf, "y", ("m12", "m23")),
        i_link12_inputs=conditional_mutual_information(pmf, "m12", ("x", "y")),
        i_link13_inputs=conditional_mutual_information(pmf, "m13", ("x", "y")),
        i_link23_inputs=conditional_mutual_information(pmf, "m23", ("x", "y")),
        tol=tol,
    )


@dataclass(frozen=True)
class MonteCarloError:
    trials: int
    errors: int
    p_err: float
    half_width_3sigma: float


def monte_carlo_error(
    protocol_id: str,
    code: LinearCode | None,
    params: DsbsParams,
    trials: int,
    rng: Random,
) -> MonteCarloError:
    """Fraction of incorrect runs over fresh samples, with a 3-sigma half-width."""
    if trials < 1:
        raise ContractViolation(f"need at least one trial, got {trials}")
    errors = 0
    for _ in range(trials):
        if not run_with_sampling(protocol_id, params, code, rng).correct:
            errors += 1
    p_hat = errors / trials
    half_width = 3.0 * math.sqrt(p_hat * (1.0 - p_hat) / trials)
    return MonteCarloError(trials=trials, errors=errors, p_err=p_hat, half_width_3sigma=half_width)


CSV_COLUMNS = (
    "protocol", "n", "m", "p", "seed",
    "r12", "r13", "r23", "rho",
    "eps1", "eps2", "eps3", "eps4",
    "p_err_exact", "p_err_mc", "mc_ci", "in_region",
)


@dataclass
class ReportRow:
    """One CSV row of the reporting schema; unset fields serialize empty."""

    protocol: str
    n: int
    m: int
    p: float
    seed: int
    r12: float | None = None
    r13: float | None = None
    r23: float | None = None
    rho: float | None = None
    eps1: float | None = None
    eps2: float | None = None
    eps3: float | None = None
    eps4: float | None = None
    p_err_exact: float | None = None
    p_err_mc: float | None = None
    mc_ci: float | None = None
    in_region: bool | None = None

    def csv_line(self) -> str:
        def fmt(value) -> str:
            if value is None:
                return ""
            if isinstance(value, bool):
                return "true" if value else "false"
            if isinstance(value, float):
                return repr(value)
            return str(value)

        return ",".join(fmt(getattr(self, col)) for col in CSV_COLUMNS)


def csv_header() -> str:
    return ",".join(CSV_COLUMNS)
