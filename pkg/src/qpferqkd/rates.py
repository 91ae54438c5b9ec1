"""Pauli-rate data model, channel families and the 4-state worst-case assignment."""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import DomainError

NORM_TOL = 1e-12

PAULI_LABELS = ("I", "X", "Y", "Z")


@dataclass(frozen=True)
class PauliRates:
    """Probabilities of the four Pauli errors ``(p_I, p_x, p_y, p_z)``.

    Used both for a physical channel acting on one qubit and for the error
    distribution of a shared raw pair.
    """

    p_I: float
    p_x: float
    p_y: float
    p_z: float

    def __post_init__(self):
        for name, value in zip(("p_I", "p_x", "p_y", "p_z"), self.as_tuple()):
            if not value >= 0.0:
                raise DomainError(f"{name}={value!r} is negative or NaN")
        total = sum(self.as_tuple())
        if abs(total - 1.0) > NORM_TOL:
            raise DomainError(f"rates sum to {total!r}, not 1")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.p_I, self.p_x, self.p_y, self.p_z)

    @classmethod
    def from_sequence(cls, values) -> PauliRates:
        values = [float(v) for v in values]
        if len(values) != 4:
            raise DomainError(f"expected 4 rates, got {len(values)}")
        return cls(*values)

    @property
    def bit_flip(self) -> float:
        return self.p_x + self.p_y

    @property
    def phase_flip(self) -> float:
        return self.p_z + self.p_y

    def swap_xz(self) -> PauliRates:
        """Exchange the ``p_x`` and ``p_z`` components."""
        return PauliRates(self.p_I, self.p_z, self.p_y, self.p_x)


IDENTITY = PauliRates(1.0, 0.0, 0.0, 0.0)


class FamilyKind(enum.Enum):
    SYMMETRIC = "symmetric"
    ASYMMETRIC_NO_Y = "asymmetric-no-y"
    EXPLICIT = "explicit"


class ProtocolVariant(enum.Enum):
    FOUR_STATE = "four-state"
    SIX_STATE = "six-state"


# largest legal q for each one-parameter family
FAMILY_Q_MAX = {
    FamilyKind.SYMMETRIC: 1.0 / 3.0,
    FamilyKind.ASYMMETRIC_NO_Y: 0.5,
}


@dataclass(frozen=True)
class ChannelFamily:
    kind: FamilyKind
    q: float = 0.0
    rates: PauliRates | None = None


def make_channel(family: ChannelFamily) -> PauliRates:
    """Instantiate the Pauli channel described by ``family``."""
    if family.kind is FamilyKind.EXPLICIT:
        if family.rates is None:
            raise DomainError("explicit family requires rates")
        return family.rates
    q = float(family.q)
    q_max = FAMILY_Q_MAX[family.kind]
    if not 0.0 <= q <= q_max:
        raise DomainError(f"q={q!r} outside [0, {q_max:.6g}] for {family.kind.value}")
    if family.kind is FamilyKind.SYMMETRIC:
        return PauliRates(max(0.0, 1.0 - 3.0 * q), q, q, q)
    return PauliRates(max(0.0, 1.0 - 2.0 * q), q, 0.0, q)


def symmetric(q: float) -> PauliRates:
    return make_channel(ChannelFamily(FamilyKind.SYMMETRIC, q))


def asymmetric_no_y(q: float) -> PauliRates:
    return make_channel(ChannelFamily(FamilyKind.ASYMMETRIC_NO_Y, q))


def detected_rates(r: PauliRates) -> tuple[float, float]:
    """Return the measurable ``(bit_flip, phase_flip)`` rates.

    A sigma_y error flips both the Z-basis and the X-basis value, so it counts
    towards both.
    """
    return r.p_x + r.p_y, r.p_z + r.p_y


def worst_case_4state(r: PauliRates) -> PauliRates:
    """Pessimistic rates for a protocol that cannot observe sigma_y errors.

    Keeps the detected bit-flip and phase-flip rates and attributes all of
    them to sigma_x and sigma_z respectively.

    Raises
    ------
    DomainError
        If ``p_y > p_I``, where the reassignment would need a negative
        identity weight.
    """
    bit, phase = detected_rates(r)
    p_I = 1.0 - bit - phase
    if p_I < 0.0:
        if p_I > -NORM_TOL:
            p_I = 0.0
        else:
            raise DomainError(
                f"detected rates {bit:.6g} + {phase:.6g} exceed 1; no p_y=0 assignment exists"
            )
    return PauliRates(p_I, bit, 0.0, phase)
