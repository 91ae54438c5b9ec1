"""Analytic maps on Pauli rates.

All maps are rational functions of the input rates; ``survival`` is always
the renormalization denominator, i.e. the probability that an input passes
the post-selection.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateInputError, DomainError, NoSolutionError, PreconditionError
from .rates import PauliRates

DEFAULT_ETA = 0.05


@dataclass(frozen=True)
class MapResult:
    rates: PauliRates
    survival: float


@dataclass(frozen=True)
class PecBounds:
    """Upper bounds on the error rates after one [r,1,r]_2 phase-correction step."""

    bitphase_bound: float
    phase_bound: float
    chernoff_bound: float
    # whether 4(p_I+p_z)(p_x+p_y) <= exp(-4(0.5-p_z-p_y)^2), i.e. whether
    # phase_bound <= chernoff_bound is guaranteed for this input
    chain_holds: bool


def _parity_survival(r: PauliRates) -> float:
    d = (r.p_I + r.p_z) ** 2 + (r.p_x + r.p_y) ** 2
    if d <= 0.0:
        raise DegenerateInputError(f"zero survival probability for {r}")
    return d


def _normalized(p_I: float, p_x: float, p_y: float, p_z: float, d: float) -> PauliRates:
    return PauliRates(p_I / d, p_x / d, p_y / d, p_z / d)


def bitflip_rejection_map(r: PauliRates) -> MapResult:
    """One round of two-pair bit-flip error rejection (Z-basis parity comparison).

    Pairs whose parities disagree are discarded; of the agreeing ones the
    control pair is kept.
    """
    d = _parity_survival(r)
    rates = _normalized(
        r.p_I**2 + r.p_z**2,
        r.p_x**2 + r.p_y**2,
        2.0 * r.p_x * r.p_y,
        2.0 * r.p_I * r.p_z,
        d,
    )
    return MapResult(rates, d)


def phaseflip_rejection_map(r: PauliRates) -> MapResult:
    """X-basis counterpart of :func:`bitflip_rejection_map`."""
    res = bitflip_rejection_map(r.swap_xz())
    return MapResult(res.rates.swap_xz(), res.survival)


def qpfer_decode_map(r0: PauliRates) -> MapResult:
    """Raw-pair error distribution after the 2-qubit code's parity check and decoding.

    ``r0`` is the per-qubit channel acting independently on both code qubits.
    A code is kept iff both or neither qubit suffered a bit flip. Kept
    single-qubit phase errors turn into a bit flip of the decoded pair and
    kept double bit flips into a phase flip.

    Examples
    --------
    >>> res = qpfer_decode_map(PauliRates(0.8, 0.0, 0.0, 0.2))
    >>> round(res.rates.p_x, 12), res.survival
    (0.32, 1.0)
    """
    d = _parity_survival(r0)
    rates = _normalized(
        r0.p_I**2 + r0.p_z**2,
        2.0 * r0.p_I * r0.p_z,
        2.0 * r0.p_x * r0.p_y,
        r0.p_x**2 + r0.p_y**2,
        d,
    )
    return MapResult(rates, d)


def _check_reps(reps: int) -> None:
    if int(reps) != reps or reps < 1 or reps % 2 == 0:
        raise DomainError(f"reps must be a positive odd integer, got {reps!r}")


def pec_bounds(r: PauliRates, reps: int) -> PecBounds:
    """Bounds on the rates after replacing each group of ``reps`` bits by its parity.

    Raises
    ------
    PreconditionError
        If ``p_I <= 1/2``; the bounds are only claimed above that.
    """
    _check_reps(reps)
    if not r.p_I > 0.5:
        raise PreconditionError(f"pec_bounds requires p_I > 1/2, got {r.p_I!r}")
    bit = r.p_x + r.p_y
    phase = r.p_z + r.p_y
    base = 4.0 * (r.p_I + r.p_z) * bit
    gap = 0.5 - phase
    return PecBounds(
        bitphase_bound=min(1.0, max(0.0, reps * bit)),
        phase_bound=min(1.0, max(0.0, base ** (reps / 2.0))),
        chernoff_bound=math.exp(-2.0 * reps * gap * gap),
        chain_holds=base <= math.exp(-4.0 * gap * gap),
    )


def min_r_for_phase(r: PauliRates, eta: float = DEFAULT_ETA, r_max: int | None = None) -> int:
    """Smallest odd ``reps`` with ``exp(-2 reps (0.5 - p_z - p_y)^2) <= eta``.

    Raises
    ------
    NoSolutionError
        If the phase mass is ``>= 0.5`` or the answer exceeds ``r_max``.
    """
    if not 0.0 < eta < 1.0:
        raise DomainError(f"eta must lie in (0, 1), got {eta!r}")
    gap = 0.5 - (r.p_z + r.p_y)
    if gap <= 0.0:
        raise NoSolutionError(f"phase mass {r.p_z + r.p_y:.6g} >= 0.5")
    estimate = math.log(1.0 / eta) / (2.0 * gap * gap)
    if r_max is not None and estimate > r_max + 1:
        raise NoSolutionError(f"required reps ~{estimate:.3g} exceeds r_max={r_max}")
    reps = max(1, math.ceil(estimate))
    if reps < 2**50:
        # ceil() of a rounded quotient can be off by one either way
        while reps > 1 and math.exp(-2.0 * (reps - 1) * gap * gap) <= eta:
            reps -= 1
        while math.exp(-2.0 * reps * gap * gap) > eta:
            reps += 1
    if reps % 2 == 0:
        reps += 1
    if r_max is not None and reps > r_max:
        raise NoSolutionError(f"required reps {reps} exceeds r_max={r_max}")
    return reps


def converges(r: PauliRates, reps: int, eta: float = DEFAULT_ETA) -> bool:
    """Whether one [reps,1,reps]_2 step brings both bounds below ``eta``."""
    _check_reps(reps)
    gap = 0.5 - (r.p_z + r.p_y)
    if gap <= 0.0:
        return False
    return bool(reps * (r.p_x + r.p_y) <= eta and math.exp(-2.0 * reps * gap * gap) <= eta)
