"""Command-line front end: ``threshold``, ``iterate``, ``simulate``, ``verify-oracle``.

Every flag has a config-file twin (same name, dashes or underscores); a JSON
file given with ``--config`` supplies defaults that explicit flags override.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, fields

from . import maps, oracle, sim
from . import solver as th
from .errors import ConfigError, PreconditionError, QkdError
from .rates import ChannelFamily, FamilyKind, PauliRates, ProtocolVariant, make_channel

SPEC_VERSION = "1.0"
COMMANDS = ("threshold", "iterate", "simulate", "verify-oracle")


@dataclass
class RunConfig:
    command: str
    out: str | None = None
    format: str = "json"
    seed: int = 0
    eta: float = maps.DEFAULT_ETA
    variant: str = "four-state"
    workers: int = 1
    family: str = "symmetric"
    q: float | None = None
    channel: str | None = None
    tol: float = th.DEFAULT_TOL
    g_max: int = th.DEFAULT_G_MAX
    r_max: int = th.DEFAULT_R_MAX
    sensitivity: bool = False
    no_decode: bool = False
    g: int = 3
    reps: int | None = None
    n_codes: int = 100_000
    abort_threshold: float | None = None
    check_fraction: float = 0.0

    def protocol_variant(self) -> ProtocolVariant:
        return ProtocolVariant(self.variant)

    def family_kind(self) -> FamilyKind:
        return FamilyKind(self.family)

    def channel_rates(self) -> PauliRates:
        if self.channel is not None:
            return PauliRates.from_sequence(self.channel.split(","))
        if self.q is None:
            raise ConfigError("channel", "give --channel pI,px,py,pz or --family with --q")
        return make_channel(ChannelFamily(self.family_kind(), self.q))


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(name: str, value):
    kind = _FIELD_TYPES[name]
    if value is None:
        return None
    try:
        if kind.startswith("int"):
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        if kind.startswith("float"):
            return float(value)
        if kind == "bool":
            if isinstance(value, str):
                return value.strip().lower() in ("1", "true", "yes")
            return bool(value)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(name, f"cannot interpret {value!r} as {kind}") from None


def validate(cfg: RunConfig) -> RunConfig:
    """Check every parameter the invoked command will use before any work happens."""
    if cfg.command not in COMMANDS:
        raise ConfigError("command", f"one of {COMMANDS}")
    if cfg.format not in ("json", "csv"):
        raise ConfigError("format", "json or csv")
    if not 0 <= cfg.seed < 2**64:
        raise ConfigError("seed", "unsigned 64-bit integer")
    if not 0.0 < cfg.eta < 1.0:
        raise ConfigError("eta", "must lie in (0, 1)")
    if cfg.workers < 1:
        raise ConfigError("workers", "must be >= 1")
    try:
        cfg.protocol_variant()
    except ValueError:
        raise ConfigError("variant", "four-state or six-state") from None
    try:
        cfg.family_kind()
    except ValueError:
        raise ConfigError("family", "symmetric or asymmetric-no-y") from None
    if cfg.command == "threshold":
        if cfg.family_kind() is FamilyKind.EXPLICIT:
            raise ConfigError("family", "threshold needs a one-parameter family")
        if cfg.tol < 1e-5:
            raise ConfigError("tol", "must be >= 1e-5")
        if cfg.g_max < 0:
            raise ConfigError("g_max", "must be >= 0")
        if cfg.r_max < 1:
            raise ConfigError("r_max", "must be >= 1")
    if cfg.command in ("iterate", "simulate"):
        try:
            cfg.channel_rates()
        except ValueError as exc:
            raise ConfigError("channel" if cfg.channel is not None else "q", str(exc)) from None
        if cfg.g < 0:
            raise ConfigError("g", "must be >= 0")
        if cfg.reps is not None and (cfg.reps < 1 or cfg.reps % 2 == 0):
            raise ConfigError("reps", "positive odd integer")
    if cfg.command == "simulate":
        if cfg.n_codes < 1:
            raise ConfigError("n_codes", "must be positive")
        if cfg.abort_threshold is not None and not 0.0 < cfg.abort_threshold < 1.0:
            raise ConfigError("abort_threshold", "must lie in (0, 1)")
        if not 0.0 <= cfg.check_fraction < 1.0:
            raise ConfigError("check_fraction", "must lie in [0, 1)")
    return cfg


def _fmt(x):
    """Round floats to 12 significant digits; repr() switches to exponent form below 1e-4."""
    if isinstance(x, float):
        if not math.isfinite(x):
            return None
        return float(f"{x:.12g}")
    if isinstance(x, dict):
        return {k: _fmt(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_fmt(v) for v in x]
    return x


def dumps(payload: dict) -> str:
    return json.dumps(_fmt(payload), sort_keys=True, indent=2) + "\n"


def _rates_dict(r: PauliRates) -> dict:
    return dict(zip(("p_I", "p_x", "p_y", "p_z"), r.as_tuple()))


def _schedule_dict(s: th.Schedule | None):
    return None if s is None else {"g": s.g, "reps": s.reps}


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join("" if v is None else repr(_fmt(v)) if isinstance(v, float) else str(v) for v in row))
    return "\n".join(lines) + "\n"


def run_threshold(cfg: RunConfig) -> tuple[dict, str, int]:
    report = th.threshold(
        cfg.family_kind(), cfg.protocol_variant(), eta=cfg.eta, tol=cfg.tol,
        g_max=cfg.g_max, r_max=cfg.r_max, decode=not cfg.no_decode, workers=cfg.workers,
    )
    scan = [{"q": p.q, "feasible": p.feasible, "schedule": _schedule_dict(p.schedule)} for p in report.scan]
    payload = {
        "family": report.family.value,
        "variant": report.variant.value,
        "threshold_bit_flip_rate": report.threshold_bit_flip_rate,
        "q_star": report.q_star,
        "witness_schedule": _schedule_dict(report.witness_schedule),
        "search_tolerance": report.search_tolerance,
        "eta": report.eta,
        "g_max": report.g_max,
        "r_max": report.r_max,
        "decode": report.decode,
        "scan": scan,
    }
    if cfg.sensitivity:
        payload["sensitivity"] = th.sensitivity_table(cfg.family_kind(), cfg.protocol_variant(), tol=cfg.tol)
    rows = [(p.q, int(p.feasible), p.schedule and p.schedule.g, p.schedule and p.schedule.reps) for p in report.scan]
    return payload, _csv(["q", "feasible", "g", "reps"], rows), 0


def run_iterate(cfg: RunConfig) -> tuple[dict, str, int]:
    channel = cfg.channel_rates()
    stages = th.pipeline_stages(channel, cfg.protocol_variant(), cfg.g, decode=not cfg.no_decode)
    final = stages[-1].rates if stages else channel
    reps = cfg.reps
    if reps is None:
        try:
            reps = maps.min_r_for_phase(final, cfg.eta, th.DEFAULT_R_MAX)
        except QkdError:
            reps = None
    check = {"reps": reps, "converges": None, "pec_bounds": None}
    if reps is not None:
        check["converges"] = maps.converges(final, reps, cfg.eta)
        try:
            b = maps.pec_bounds(final, reps)
            check["pec_bounds"] = {
                "bitphase_bound": b.bitphase_bound, "phase_bound": b.phase_bound,
                "chernoff_bound": b.chernoff_bound, "chain_holds": b.chain_holds,
            }
        except PreconditionError:
            pass
    payload = {
        "channel": _rates_dict(channel),
        "variant": cfg.variant,
        "g": cfg.g,
        "stages": [
            {"stage": s.name, "rates": _rates_dict(s.rates), "survival": s.survival, "yield": s.yield_}
            for s in stages
        ],
        "convergence": check,
    }
    rows = [(s.name, *s.rates.as_tuple(), s.survival, s.yield_) for s in stages]
    return payload, _csv(["stage", "p_I", "p_x", "p_y", "p_z", "survival", "yield"], rows), 0


def run_simulate(cfg: RunConfig) -> tuple[dict, str, int]:
    sc = sim.SimConfig(
        channel=cfg.channel_rates(), variant=cfg.protocol_variant(), n_codes=cfg.n_codes,
        g=cfg.g, reps=3 if cfg.reps is None else cfg.reps, seed=cfg.seed,
        check_fraction=cfg.check_fraction, abort_threshold=cfg.abort_threshold,
        eta=cfg.eta, workers=cfg.workers,
    )
    report = sim.run_protocol(sc)
    payload = {
        "config": {
            "channel": _rates_dict(sc.channel), "variant": sc.variant.value, "n_codes": sc.n_codes,
            "g": sc.g, "reps": sc.reps, "seed": sc.seed, "check_fraction": sc.check_fraction,
            "eta": sc.eta,
        },
        "report": report.to_dict(),
    }
    return payload, report.rounds_csv(), 0


def run_verify_oracle(cfg: RunConfig) -> tuple[dict, str, int]:
    rows = oracle.enumerate_joint_errors()
    problems = oracle.table_mismatches(rows)
    payload = {
        "rows": [
            {"e1": r.e1, "e2": r.e2, "kept": r.kept, "bell": r.bell and r.bell.value, "raw_error": r.raw_error}
            for r in rows
        ],
        "pass": not problems,
        "mismatches": problems,
    }
    return payload, oracle.table_to_csv(rows), 0 if not problems else 1


RUNNERS = {
    "threshold": run_threshold,
    "iterate": run_iterate,
    "simulate": run_simulate,
    "verify-oracle": run_verify_oracle,
}


def run(cfg: RunConfig) -> tuple[int, str]:
    """Execute ``cfg``; returns the exit status and the rendered report."""
    validate(cfg)
    payload, csv_text, status = RUNNERS[cfg.command](cfg)
    if cfg.format == "csv":
        return status, csv_text
    return status, dumps({"spec_version": SPEC_VERSION, "command": cfg.command, **payload})


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    common = argparse.ArgumentParser(add_help=False, argument_default=S)
    common.add_argument("--config", help="JSON file with default parameters")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=["json", "csv"])
    common.add_argument("--seed", type=int)
    common.add_argument("--eta", type=float, help="convergence bound (default 0.05)")
    common.add_argument("--variant", choices=["four-state", "six-state"])
    common.add_argument("--workers", type=int, help="worker threads")

    parser = argparse.ArgumentParser(prog="qpfer", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("threshold", parents=[common], argument_default=S, help="binary-search the tolerable channel error")
    p.add_argument("--family", choices=["symmetric", "asymmetric-no-y"])
    p.add_argument("--tol", type=float)
    p.add_argument("--g-max", type=int, dest="g_max")
    p.add_argument("--r-max", type=int, dest="r_max")
    p.add_argument("--sensitivity", action="store_true", help="append a g_max/r_max/eta sensitivity table")
    p.add_argument("--no-decode", action="store_true", dest="no_decode", help="skip the 2-qubit code")

    for name, text in (("iterate", "trace the analytic rate maps"), ("simulate", "run the Monte Carlo")):
        p = sub.add_parser(name, parents=[common], argument_default=S, help=text)
        p.add_argument("--channel", help="pI,px,py,pz")
        p.add_argument("--family", choices=["symmetric", "asymmetric-no-y"])
        p.add_argument("--q", type=float)
        p.add_argument("--g", type=int)
        p.add_argument("--reps", type=int)
        if name == "iterate":
            p.add_argument("--no-decode", action="store_true", dest="no_decode")
        else:
            p.add_argument("--n-codes", type=int, dest="n_codes")
            p.add_argument("--abort-threshold", type=float, dest="abort_threshold")
            p.add_argument("--check-fraction", type=float, dest="check_fraction")

    sub.add_parser("verify-oracle", parents=[common], argument_default=S, help="check the joint-error table")
    return parser


def config_from_args(argv=None) -> RunConfig:
    args = vars(build_parser().parse_args(argv))
    values = {}
    path = args.pop("config", None)
    if path is not None:
        try:
            with open(path) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", f"cannot read {path}: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config", "top level must be an object")
        for key, value in loaded.items():
            name = key.replace("-", "_")
            if name not in _FIELD_TYPES or name == "command":
                raise ConfigError(key, "unknown config key")
            values[name] = value
    values.update(args)
    command = values.pop("command")
    return RunConfig(command=command, **{k: _coerce(k, v) for k, v in values.items()})


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
        status, text = run(cfg)
    except QkdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
