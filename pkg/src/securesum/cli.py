"""Command-line front end: simulate, leakage, sweep, region."""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import chain
from random import Random
from statistics import fmean

from .analysis import (
    ReportRow,
    check_rate_region,
    csv_header,
    enumerate_joint,
    leakage_report,
    monte_carlo_error,
    rate_report,
)
from .codes import build_code, exact_error_probability, m_for_rate
from .errors import CapacityError, ConfigurationError, ContractViolation
from .protocol import PROTOCOL_IDS, nominal_rates
from .source import DsbsParams, binary_entropy

CSV_VERSION_COMMENT = "# securesum-csv v1"

_MODES = ("exact", "monte-carlo", "both")
_SWEEP_MODES = _MODES + ("leakage",)
_DEFAULT_TRIALS = 100000


class UsageError(Exception):
    """Bad or inconsistent command-line input."""


def derive_run_seed(master: int, protocol_id: str, n: int, m: int, p: float, index: int) -> int:
    """Stable per-instance seed; builtin hash() is salted, so use sha256."""
    text = f"{master}|{protocol_id}|{n}|{m}|{p:.12g}|{index}"
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


@dataclass
class ExperimentConfig:
    """One resolved experiment: protocol, block length, code size, source, seeds."""

    protocol: str
    n: int
    m: int
    p: float
    seed: int
    trials: int
    mode: str
    out: str | None

    @classmethod
    def resolve(cls, raw: dict) -> "ExperimentConfig":
        protocol = _req(raw, "protocol", str)
        if protocol not in PROTOCOL_IDS:
            raise UsageError(f"unknown protocol {protocol!r}; choose from {', '.join(PROTOCOL_IDS)}")
        n = _req(raw, "n", int)
        if n < 1:
            raise UsageError(f"--n must be positive, got {n}")
        p = _req(raw, "p", float)
        if not 0.0 <= p <= 0.5:
            raise UsageError(f"--p must lie in [0, 1/2], got {p}")
        m = _resolve_m(protocol, n, raw.get("m"), raw.get("rate"))
        mode = raw.get("mode") or "both"
        if mode not in _SWEEP_MODES:
            raise UsageError(f"unknown mode {mode!r}")
        trials = int(raw.get("trials") or _DEFAULT_TRIALS)
        if trials < 1:
            raise UsageError(f"--trials must be positive, got {trials}")
        return cls(
            protocol=protocol,
            n=n,
            m=m,
            p=p,
            seed=int(raw.get("seed") or 0),
            trials=trials,
            mode=mode,
            out=raw.get("out"),
        )


def _req(raw: dict, key: str, cast):
    value = raw.get(key)
    if value is None:
        raise UsageError(f"missing required option --{key}")
    try:
        return cast(value)
    except (TypeError, ValueError) as e:
        raise UsageError(f"bad value for --{key}: {value!r} ({e})")


def _resolve_m(protocol: str, n: int, m_raw, rate_raw) -> int:
    if protocol == "zero-error-otp":
        if m_raw is not None or rate_raw is not None:
            raise UsageError("zero-error-otp takes neither --m nor --rate")
        return n
    if (m_raw is None) == (rate_raw is None):
        raise UsageError(f"{protocol} needs exactly one of --m or --rate")
    if m_raw is not None:
        m = int(m_raw)
        if not 0 <= m <= n:
            raise UsageError(f"--m must lie in [0, n], got m={m}, n={n}")
        return m
    return m_for_rate(n, float(rate_raw))


def _merge_config(args: argparse.Namespace, keys: tuple[str, ...]) -> dict:
    """Explicit flags win; a JSON --config supplies anything left unset."""
    raw = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            doc = json.load(fh)
        if not isinstance(doc, dict):
            raise UsageError(f"config file must hold a JSON object, got {type(doc).__name__}")
        for key, value in doc.items():
            raw[key.replace("-", "_")] = value
    for key in keys:
        value = getattr(args, key, None)
        if value is not None:
            raw[key] = value
    return raw


def _ints(value) -> list[int]:
    if isinstance(value, (list, tuple)):
        return [int(v) for v in value]
    return [int(part) for part in str(value).split(",") if part != ""]


def _floats(value) -> list[float]:
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    return [float(part) for part in str(value).split(",") if part != ""]


def _quad(value) -> tuple[float, float, float, float]:
    parts = _floats(value)
    if len(parts) != 4:
        raise UsageError(f"--quad needs four comma-separated rates, got {len(parts)}")
    if any(v < 0.0 for v in parts):
        raise UsageError("rates cannot be negative")
    return tuple(parts)  # type: ignore[return-value]


def _instance_row(protocol: str, n: int, m: int, p: float, master_seed: int,
                  index: int, mode: str, trials: int) -> ReportRow:
    seed = derive_run_seed(master_seed, protocol, n, m, p, index)
    rng = Random(seed)
    code = None
    if protocol in ("secure-km", "plain-km"):
        code = build_code(n, m, seed=rng.getrandbits(63))
    row = ReportRow(protocol=protocol, n=n, m=m, p=p, seed=seed)
    if mode == "leakage":
        pmf = enumerate_joint(protocol, code, DsbsParams(p, n))
        leak = leakage_report(pmf)
        rates = rate_report(pmf)
        row.eps1, row.eps2, row.eps3, row.eps4 = leak.eps1, leak.eps2, leak.eps3, leak.eps4
        row.r13, row.r23, row.r12, row.rho = rates.quadruple()
        row.p_err_exact = exact_error_probability(code, p) if code else 0.0
    else:
        row.r13, row.r23, row.r12, row.rho = nominal_rates(protocol, n, m)
        if mode in ("exact", "both"):
            row.p_err_exact = exact_error_probability(code, p) if code else 0.0
        if mode in ("monte-carlo", "both"):
            mc = monte_carlo_error(protocol, code, DsbsParams(p, n), trials, rng)
            row.p_err_mc = mc.p_err
            row.mc_ci = mc.half_width_3sigma
    row.in_region = check_rate_region((row.r13, row.r23, row.r12, row.rho), p)
    return row


def _write(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _emit_rows(rows: list[ReportRow], out: str | None) -> None:
    lines = [CSV_VERSION_COMMENT, csv_header()] + [r.csv_line() for r in rows]
    _write("\n".join(lines) + "\n", out)


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = ExperimentConfig.resolve(_merge_config(args, _SINGLE_KEYS))
    if cfg.mode == "leakage":
        raise UsageError("mode 'leakage' belongs to the leakage/sweep commands")
    row = _instance_row(cfg.protocol, cfg.n, cfg.m, cfg.p, cfg.seed, 0, cfg.mode, cfg.trials)
    _emit_rows([row], cfg.out)
    return 0


def cmd_leakage(args: argparse.Namespace) -> int:
    cfg = ExperimentConfig.resolve(_merge_config(args, _SINGLE_KEYS))
    row = _instance_row(cfg.protocol, cfg.n, cfg.m, cfg.p, cfg.seed, 0, "leakage", cfg.trials)
    _emit_rows([row], cfg.out)
    return 0


def _aggregate_rows(groups: list[list[ReportRow]], master_seed: int) -> list[ReportRow]:
    out = []
    mean_fields = ("eps1", "eps2", "eps3", "eps4", "p_err_exact", "p_err_mc", "mc_ci")
    for group in groups:
        first = group[0]
        row = ReportRow(protocol=first.protocol, n=first.n, m=first.m, p=first.p, seed=master_seed)
        row.r12, row.r13, row.r23, row.rho = first.r12, first.r13, first.r23, first.rho
        for name in mean_fields:
            values = [getattr(r, name) for r in group]
            if all(v is not None for v in values):
                setattr(row, name, fmean(values))
        row.in_region = first.in_region
        out.append(row)
    return out


def cmd_sweep(args: argparse.Namespace) -> int:
    raw = _merge_config(args, _SWEEP_KEYS)
    out = raw.get("out")
    master_seed = int(raw.get("seed") or 0)
    ps = _floats(_req_any(raw, "p"))
    if not ps:
        raise UsageError("--p list is empty")
    for p in ps:
        if not 0.0 <= p <= 0.5:
            raise UsageError(f"--p entries must lie in [0, 1/2], got {p}")
    if raw.get("quad") is not None:
        quad = _quad(raw["quad"])
        rows = []
        for p in ps:
            row = ReportRow(protocol=None, n=None, m=None, p=p, seed=None)
            row.r13, row.r23, row.r12, row.rho = quad
            row.in_region = check_rate_region(quad, p)
            rows.append(row)
        _emit_rows(rows, out)
        return 0

    protocols = [s.strip() for s in str(_req_any(raw, "protocol")).split(",")] \
        if not isinstance(raw.get("protocol"), (list, tuple)) else list(raw["protocol"])
    for proto in protocols:
        if proto not in PROTOCOL_IDS:
            raise UsageError(f"unknown protocol {proto!r}")
    ns = _ints(_req_any(raw, "n"))
    if not ns:
        raise UsageError("--n list is empty")
    mode = raw.get("mode") or "exact"
    if mode not in _SWEEP_MODES:
        raise UsageError(f"unknown mode {mode!r}")
    trials = int(raw.get("trials") or _DEFAULT_TRIALS)
    instances = int(raw.get("seeds") or 1)
    if instances < 1:
        raise UsageError(f"--seeds must be positive, got {instances}")
    m_raw, rate_raw = raw.get("m"), raw.get("rate")

    points: list[tuple[str, int, int, float]] = []
    for proto in protocols:
        for n in ns:
            if proto == "zero-error-otp":
                m_values = [n]
            elif (m_raw is None) == (rate_raw is None):
                raise UsageError(f"{proto} needs exactly one of --m or --rate")
            elif m_raw is not None:
                m_values = _ints(m_raw)
            else:
                m_values = [m_for_rate(n, r) for r in _floats(rate_raw)]
            if not m_values:
                raise UsageError("--m/--rate list is empty")
            for p in ps:
                for m in m_values:
                    if not 0 <= m <= n:
                        raise UsageError(f"need 0 <= m <= n, got m={m}, n={n}")
                    points.append((proto, n, m, p))

    def compute(point):
        proto, n, m, p = point
        return [_instance_row(proto, n, m, p, master_seed, idx, mode, trials)
                for idx in range(instances)]

    workers = min(4, os.cpu_count() or 1, max(len(points), 1))
    with ThreadPoolExecutor(max_workers=workers) as ex:
        groups = list(ex.map(compute, points))
    if raw.get("aggregate"):
        rows = _aggregate_rows(groups, master_seed)
    else:
        rows = list(chain.from_iterable(groups))
    _emit_rows(rows, out)
    return 0


def _req_any(raw: dict, key: str):
    value = raw.get(key)
    if value is None:
        raise UsageError(f"missing required option --{key}")
    return value


def cmd_region(args: argparse.Namespace) -> int:
    raw = _merge_config(args, ("quad", "p", "out"))
    quad = _quad(_req_any(raw, "quad"))
    p = float(_req_any(raw, "p"))
    if not 0.0 <= p <= 0.5:
        raise UsageError(f"--p must lie in [0, 1/2], got {p}")
    h2 = binary_entropy(p)
    ok = check_rate_region(quad, p)
    verdict = "in-region" if ok else "out-of-region"
    _write(f"min_component={min(quad)!r} h2={h2!r} verdict={verdict}\n", raw.get("out"))
    return 0


_SINGLE_KEYS = ("protocol", "n", "m", "rate", "p", "seed", "trials", "mode", "out")
_SWEEP_KEYS = ("protocol", "n", "m", "rate", "p", "seed", "seeds", "trials", "mode",
               "aggregate", "quad", "out")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="securesum",
        description="Simulate and audit three-party secure XOR computation protocols.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp, keys):
        sp.add_argument("--config", help="JSON file supplying any unset options")
        if "protocol" in keys:
            sp.add_argument("--protocol", help=f"one of {', '.join(PROTOCOL_IDS)}")
        if "n" in keys:
            sp.add_argument("--n", help="block length (sweep: comma list)")
        if "m" in keys:
            sp.add_argument("--m", help="syndrome length (sweep: comma list)")
        if "rate" in keys:
            sp.add_argument("--rate", help="target rate; m = ceil(n*rate) (sweep: comma list)")
        if "p" in keys:
            sp.add_argument("--p", help="source flip rate in [0, 1/2] (sweep: comma list)")
        if "seed" in keys:
            sp.add_argument("--seed", help="master seed (default 0)")
        if "seeds" in keys:
            sp.add_argument("--seeds", help="independent code instances per point (default 1)")
        if "trials" in keys:
            sp.add_argument("--trials", help=f"Monte Carlo trials (default {_DEFAULT_TRIALS})")
        if "mode" in keys:
            sp.add_argument("--mode", help="exact | monte-carlo | both | leakage (sweep only)")
        if "quad" in keys:
            sp.add_argument("--quad", help="rate quadruple r13,r23,r12,rho")
        if "aggregate" in keys:
            sp.add_argument("--aggregate", action="store_const", const=True, default=None,
                            help="emit one mean row per sweep point")
        if "out" in keys:
            sp.add_argument("--out", help="output path (default stdout)")

    sp = sub.add_parser("simulate", help="error analysis of one protocol instance")
    add_common(sp, _SINGLE_KEYS)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("leakage", help="exact leakage and rate audit of one instance")
    add_common(sp, _SINGLE_KEYS)
    sp.set_defaults(func=cmd_leakage)

    sp = sub.add_parser("sweep", help="cartesian sweep over protocols, n, p, rates")
    add_common(sp, _SWEEP_KEYS)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("region", help="check a rate quadruple against the achievable region")
    add_common(sp, ("quad", "p", "out"))
    sp.set_defaults(func=cmd_region)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    except (ContractViolation, ConfigurationError) as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    except CapacityError as e:
        print(f"capacity error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
