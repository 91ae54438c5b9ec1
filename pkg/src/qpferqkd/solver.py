"""Feasibility predicate and threshold search over one-parameter channel families.

The pipeline is: decode map of the 2-qubit code, the 4-state worst-case
assignment (FOUR_STATE only), ``g`` rounds of bit-flip rejection, then one
[reps,1,reps]_2 phase-correction step judged by :func:`maps.converges`.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

from . import maps
from .errors import DomainError, NoSolutionError, NonMonotoneFeasibilityError
from .maps import DEFAULT_ETA, MapResult
from .rates import (
    FAMILY_Q_MAX,
    ChannelFamily,
    FamilyKind,
    PauliRates,
    ProtocolVariant,
    make_channel,
    worst_case_4state,
)

DEFAULT_G_MAX = 40
DEFAULT_R_MAX = 2_000_001
DEFAULT_TOL = 1e-4
SCAN_STEP = 0.005


@dataclass(frozen=True)
class Schedule:
    g: int
    reps: int

    def __post_init__(self):
        if self.g < 0:
            raise DomainError(f"g must be >= 0, got {self.g}")
        if self.reps < 1 or self.reps % 2 == 0:
            raise DomainError(f"reps must be a positive odd integer, got {self.reps}")


@dataclass(frozen=True)
class Stage:
    """One row of a pipeline trace."""

    name: str
    rates: PauliRates
    survival: float  # post-selection probability of this stage alone
    yield_: float  # cumulative yield including structural losses


@dataclass(frozen=True)
class ScanPoint:
    q: float
    schedule: Schedule | None

    @property
    def feasible(self) -> bool:
        return self.schedule is not None


@dataclass(frozen=True)
class ThresholdReport:
    family: FamilyKind
    variant: ProtocolVariant
    threshold_bit_flip_rate: float
    q_star: float
    witness_schedule: Schedule
    search_tolerance: float
    eta: float
    g_max: int
    r_max: int
    decode: bool = True
    scan: tuple[ScanPoint, ...] = field(default=(), repr=False)


def pipeline_stages(
    channel: PauliRates, variant: ProtocolVariant, g: int, decode: bool = True
) -> list[Stage]:
    """Trace every stage of the analytic pipeline.

    With ``decode=False`` the 2-qubit code is skipped and ``channel`` is fed
    straight into the plain rejection pipeline.
    """
    if g < 0:
        raise DomainError(f"g must be >= 0, got {g}")
    stages = []
    rates, total = channel, 1.0
    if decode:
        res = maps.qpfer_decode_map(channel)
        rates, total = res.rates, res.survival
        stages.append(Stage("decode", rates, res.survival, total))
    if variant is ProtocolVariant.FOUR_STATE:
        rates = worst_case_4state(rates)
        stages.append(Stage("worst_case", rates, 1.0, total))
    for k in range(1, g + 1):
        res = maps.bitflip_rejection_map(rates)
        rates = res.rates
        # two bits in, at most one out
        total *= res.survival * 0.5
        stages.append(Stage(f"bitflip_{k}", rates, res.survival, total))
    return stages


def pipeline_rates(
    channel: PauliRates, variant: ProtocolVariant, g: int, decode: bool = True
) -> MapResult:
    stages = pipeline_stages(channel, variant, g, decode)
    if not stages:
        return MapResult(channel, 1.0)
    return MapResult(stages[-1].rates, stages[-1].yield_)


def find_schedule(
    post_decode: PauliRates,
    g_max: int = DEFAULT_G_MAX,
    r_max: int = DEFAULT_R_MAX,
    eta: float = DEFAULT_ETA,
) -> Schedule | None:
    """Smallest ``g`` (then smallest odd ``reps``) that passes the convergence test.

    For fixed rates the exponential condition only gets easier and the linear
    bit-flip condition only harder as ``reps`` grows, so the smallest ``reps``
    meeting the former is the only candidate worth testing.
    """
    if g_max < 0 or r_max < 1:
        raise DomainError("g_max must be >= 0 and r_max >= 1")
    rates = post_decode
    for g in range(g_max + 1):
        try:
            reps = maps.min_r_for_phase(rates, eta, r_max)
        except NoSolutionError:
            reps = None
        if reps is not None and maps.converges(rates, reps, eta):
            return Schedule(g, reps)
        if g < g_max:
            rates = maps.bitflip_rejection_map(rates).rates
    return None


def effective_rates(channel: PauliRates, variant: ProtocolVariant, decode: bool = True) -> PauliRates:
    """Rates entering the rejection rounds: decoded and, for FOUR_STATE, worst-cased."""
    return pipeline_rates(channel, variant, 0, decode).rates


def schedule_for_channel(
    channel: PauliRates,
    variant: ProtocolVariant,
    g_max: int = DEFAULT_G_MAX,
    r_max: int = DEFAULT_R_MAX,
    eta: float = DEFAULT_ETA,
    decode: bool = True,
) -> Schedule | None:
    try:
        start = effective_rates(channel, variant, decode)
    except DomainError:
        # detected rates too large for any p_y = 0 assignment
        return None
    return find_schedule(start, g_max, r_max, eta)


def family_channel(kind: FamilyKind) -> Callable[[float], PauliRates]:
    if kind is FamilyKind.EXPLICIT:
        raise DomainError("threshold search needs a one-parameter family")
    return lambda q: make_channel(ChannelFamily(kind, q))


def feasibility_scan(
    channel_of_q: Callable[[float], PauliRates],
    variant: ProtocolVariant,
    q_max: float,
    step: float = SCAN_STEP,
    g_max: int = DEFAULT_G_MAX,
    r_max: int = DEFAULT_R_MAX,
    eta: float = DEFAULT_ETA,
    decode: bool = True,
    workers: int = 1,
) -> list[ScanPoint]:
    n = int(q_max / step + 1e-9)
    grid = [round(i * step, 12) for i in range(n + 1)]

    def point(q):
        return ScanPoint(q, schedule_for_channel(channel_of_q(q), variant, g_max, r_max, eta, decode))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(point, grid))
    return [point(q) for q in grid]


def _check_antitone(scan: list[ScanPoint]) -> int:
    """Index of the last feasible scan point; raise unless feasibility is a prefix."""
    flags = [p.feasible for p in scan]
    if not flags or not flags[0]:
        raise NoSolutionError("infeasible already at q=0")
    last = max(i for i, f in enumerate(flags) if f)
    if not all(flags[: last + 1]):
        raise NonMonotoneFeasibilityError("feasibility is not antitone in q", scan)
    return last


def threshold(
    family: FamilyKind,
    variant: ProtocolVariant,
    eta: float = DEFAULT_ETA,
    tol: float = DEFAULT_TOL,
    g_max: int = DEFAULT_G_MAX,
    r_max: int = DEFAULT_R_MAX,
    decode: bool = True,
    channel_of_q: Callable[[float], PauliRates] | None = None,
    workers: int = 1,
) -> ThresholdReport:
    """Largest family parameter ``q`` for which some schedule passes.

    A coarse scan checks that feasibility is antitone before bisecting
    between the last feasible and first infeasible grid points.
    ``channel_of_q`` overrides the family's own channel constructor (used to
    feed pre-decoded rates into the plain pipeline).

    Raises
    ------
    NonMonotoneFeasibilityError
        Carrying the scan, if feasibility switches back on after failing.
    """
    if tol < 1e-5:
        raise DomainError(f"tol must be >= 1e-5, got {tol!r}")
    if channel_of_q is None:
        channel_of_q = family_channel(family)
    q_max = FAMILY_Q_MAX[family]
    scan = feasibility_scan(channel_of_q, variant, q_max, SCAN_STEP, g_max, r_max, eta, decode, workers)
    last = _check_antitone(scan)

    def sched(q):
        return schedule_for_channel(channel_of_q(q), variant, g_max, r_max, eta, decode)

    lo, witness = scan[last].q, scan[last].schedule
    hi = scan[last + 1].q if last + 1 < len(scan) else None
    if hi is None:
        q_star = lo
    else:
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            s = sched(mid)
            if s is not None:
                lo, witness = mid, s
            else:
                hi = mid
        q_star = 0.5 * (lo + hi)
    return ThresholdReport(
        family=family,
        variant=variant,
        threshold_bit_flip_rate=make_channel(ChannelFamily(family, q_star)).bit_flip,
        q_star=q_star,
        witness_schedule=witness,
        search_tolerance=tol,
        eta=eta,
        g_max=g_max,
        r_max=r_max,
        decode=decode,
        scan=tuple(scan),
    )


def sensitivity_table(
    family: FamilyKind,
    variant: ProtocolVariant,
    etas=(0.01, 0.05, 0.1, 0.2),
    g_maxes=(5, 10, 40, 80),
    r_maxes=(1001, 100_001, DEFAULT_R_MAX, 200_000_001),
    tol: float = 1e-4,
) -> list[dict]:
    """Threshold as each of eta, g_max and r_max is varied away from its default."""
    rows = []
    configs = [("eta", e, dict(eta=e)) for e in etas]
    configs += [("g_max", g, dict(g_max=g)) for g in g_maxes]
    configs += [("r_max", r, dict(r_max=r)) for r in r_maxes]
    for name, value, kw in configs:
        try:
            rep = threshold(family, variant, tol=tol, **kw)
            rows.append(
                dict(parameter=name, value=value, q_star=rep.q_star,
                     threshold_bit_flip_rate=rep.threshold_bit_flip_rate,
                     witness_g=rep.witness_schedule.g, witness_reps=rep.witness_schedule.reps)
            )
        except (NoSolutionError, NonMonotoneFeasibilityError) as exc:
            rows.append(dict(parameter=name, value=value, error=str(exc)))
    return rows
