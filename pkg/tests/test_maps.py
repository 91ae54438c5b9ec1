import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qpferqkd.errors import DegenerateInputError, DomainError, NoSolutionError, PreconditionError
from qpferqkd.maps import (
    bitflip_rejection_map,
    converges,
    min_r_for_phase,
    pec_bounds,
    phaseflip_rejection_map,
    qpfer_decode_map,
)
from qpferqkd.rates import PAULI_LABELS, PauliRates, symmetric

from conftest import pauli_rates

PAULI = {
    "I": np.eye(2),
    "X": np.array([[0, 1], [1, 0]]),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.diag([1, -1]),
}
BELL_ERROR = {
    "I": np.array([1, 0, 0, 1]) / np.sqrt(2),
    "X": np.array([0, 1, 1, 0]) / np.sqrt(2),
    "Y": np.array([0, 1, -1, 0]) / np.sqrt(2),
    "Z": np.array([1, 0, 0, -1]) / np.sqrt(2),
}


def _two_pair_rejection(e1, e2):
    """Brute-force one bilateral-CNOT rejection step on |Phi+>_(A1,B1) |Phi+>_(A2,B2).

    Returns the Pauli error left on the control pair, or None if the Z-basis
    parities disagree.
    """
    bell = BELL_ERROR["I"].reshape(2, 2)
    t = np.einsum("ab,cd->abcd", bell, bell).astype(complex)  # axes A1, B1, A2, B2
    t = np.einsum("xb,abcd->axcd", PAULI[e1], t)
    t = np.einsum("xd,abcd->abcx", PAULI[e2], t)
    # CNOT A1->A2 and B1->B2
    t = t.copy()
    t[1, :, :, :] = t[1, :, ::-1, :]
    t[:, 1, :, :] = t[:, 1, :, ::-1]
    kept_state = None
    keep = 0.0
    for a2, b2 in itertools.product((0, 1), repeat=2):
        branch = t[:, :, a2, b2]
        prob = float(np.sum(np.abs(branch) ** 2))
        if prob < 1e-12:
            continue
        if a2 != b2:
            return None
        keep += prob
        kept_state = branch.reshape(4) / np.sqrt(prob)
    assert keep == pytest.approx(1.0)
    for label, vec in BELL_ERROR.items():
        if abs(np.vdot(vec, kept_state)) ** 2 > 1 - 1e-9:
            return label
    raise AssertionError("control pair left in a non-Bell state")


TWO_PAIR_TABLE = {pair: _two_pair_rejection(*pair) for pair in itertools.product(PAULI_LABELS, repeat=2)}


def brute_force_bitflip(r):
    p = dict(zip(PAULI_LABELS, r.as_tuple()))
    mass = dict.fromkeys(PAULI_LABELS, 0.0)
    for (e1, e2), out in TWO_PAIR_TABLE.items():
        if out is not None:
            mass[out] += p[e1] * p[e2]
    keep = sum(mass.values())
    return tuple(mass[k] / keep for k in PAULI_LABELS), keep


def test_two_pair_table_shape():
    kept = {pair: out for pair, out in TWO_PAIR_TABLE.items() if out is not None}
    assert len(kept) == 8
    assert kept[("X", "X")] == "X"
    assert kept[("Y", "Y")] == "X"
    assert kept[("X", "Y")] == "Y"
    assert kept[("I", "Z")] == "Z"
    assert kept[("Z", "Z")] == "I"


@pytest.mark.parametrize(
    "r, expected, survival",
    [
        ((1, 0, 0, 0), (1, 0, 0, 0), 1.0),
        ((0.7, 0.1, 0.1, 0.1), (25 / 34, 1 / 34, 1 / 34, 7 / 34), 0.68),
        ((0.5, 0.5, 0, 0), (0.5, 0.5, 0, 0), 0.5),
    ],
)
def test_bitflip_examples(r, expected, survival):
    res = bitflip_rejection_map(PauliRates(*r))
    assert res.rates.as_tuple() == pytest.approx(expected, abs=1e-12)
    assert res.survival == pytest.approx(survival, abs=1e-12)
    oracle_rates, oracle_keep = brute_force_bitflip(PauliRates(*r))
    assert oracle_rates == pytest.approx(expected, abs=1e-12)
    assert oracle_keep == pytest.approx(survival, abs=1e-12)


@given(pauli_rates())
def test_bitflip_matches_brute_force(r):
    if (r.p_I + r.p_z) ** 2 + (r.p_x + r.p_y) ** 2 < 1e-6:
        return
    res = bitflip_rejection_map(r)
    rates, keep = brute_force_bitflip(r)
    assert res.rates.as_tuple() == pytest.approx(rates, abs=1e-12)
    assert res.survival == pytest.approx(keep, abs=1e-12)


@pytest.mark.parametrize(
    "r, expected, survival",
    [
        ((1, 0, 0, 0), (1, 0, 0, 0), 1.0),
        ((0.7, 0.1, 0.1, 0.1), (25 / 34, 7 / 34, 1 / 34, 1 / 34), 0.68),
        ((0.5, 0, 0, 0.5), (0.5, 0, 0, 0.5), 0.5),
    ],
)
def test_phaseflip_examples(r, expected, survival):
    res = phaseflip_rejection_map(PauliRates(*r))
    assert res.rates.as_tuple() == pytest.approx(expected, abs=1e-12)
    assert res.survival == pytest.approx(survival, abs=1e-12)


@pytest.mark.parametrize(
    "r, expected, survival",
    [
        ((1, 0, 0, 0), (1, 0, 0, 0), 1.0),
        ((0.7, 0.1, 0.1, 0.1), (25 / 34, 7 / 34, 1 / 34, 1 / 34), 0.68),
        ((0.8, 0, 0, 0.2), (0.68, 0.32, 0, 0), 1.0),
    ],
)
def test_decode_examples(r, expected, survival):
    res = qpfer_decode_map(PauliRates(*r))
    assert res.rates.as_tuple() == pytest.approx(expected, abs=1e-12)
    assert res.survival == pytest.approx(survival, abs=1e-12)


def test_degenerate_input():
    # only a non-physical all-zero vector has zero survival; bypass validation
    zero = object.__new__(PauliRates)
    for name in ("p_I", "p_x", "p_y", "p_z"):
        object.__setattr__(zero, name, 0.0)
    with pytest.raises(DegenerateInputError):
        bitflip_rejection_map(zero)
    with pytest.raises(DegenerateInputError):
        qpfer_decode_map(zero)


@given(pauli_rates())
def test_maps_preserve_normalization(r):
    for fn in (bitflip_rejection_map, phaseflip_rejection_map, qpfer_decode_map):
        res = fn(r)
        assert sum(res.rates.as_tuple()) == pytest.approx(1.0, abs=1e-12)
        assert min(res.rates.as_tuple()) >= 0.0
        assert 0.0 < res.survival <= 1.0 + 1e-15


@given(pauli_rates())
def test_decode_is_swapped_bitflip(r):
    a = qpfer_decode_map(r)
    b = bitflip_rejection_map(r)
    assert a.rates == b.rates.swap_xz()
    assert a.survival == b.survival


@given(pauli_rates())
def test_phaseflip_is_conjugated_bitflip(r):
    a = phaseflip_rejection_map(r)
    b = bitflip_rejection_map(r.swap_xz())
    assert a.rates == b.rates.swap_xz()


def _alternate(r):
    return phaseflip_rejection_map(bitflip_rejection_map(r).rates).rates


@given(st.floats(0.0, 0.15))
def test_alternating_rejection_purifies_symmetric_input(q):
    r = symmetric(q)
    prev = r.p_I
    for _ in range(200):
        if 1.0 - prev < 1e-9:
            break
        r = _alternate(r)
        assert r.p_I > prev
        prev = r.p_I
    assert 1.0 - prev < 1e-9


def test_alternating_rejection_stalls_near_half_fidelity():
    # p_I = 0.52 > 1/2, yet bit-then-phase alternation is drawn to p_I = 1/2
    r = symmetric(0.16)
    for _ in range(300):
        r = _alternate(r)
    assert r.p_I == pytest.approx(0.5, abs=1e-6)


def test_pec_bounds_examples():
    r = PauliRates(0.9, 0.05, 0.0, 0.05)
    b1 = pec_bounds(r, 1)
    assert b1.bitphase_bound == pytest.approx(0.05)
    assert b1.phase_bound == pytest.approx(math.sqrt(4 * 0.95 * 0.05))
    b3 = pec_bounds(r, 3)
    assert b3.bitphase_bound == pytest.approx(0.15)
    assert b3.phase_bound == pytest.approx(0.19**1.5)
    assert b3.phase_bound == pytest.approx(0.08282, abs=5e-6)
    zero = pec_bounds(PauliRates(1, 0, 0, 0), 5)
    assert (zero.bitphase_bound, zero.phase_bound) == (0, 0)
    assert zero.chernoff_bound == pytest.approx(math.exp(-2.5))


def test_pec_bounds_errors():
    with pytest.raises(PreconditionError):
        pec_bounds(PauliRates(0.5, 0.25, 0, 0.25), 3)
    with pytest.raises(DomainError):
        pec_bounds(PauliRates(0.9, 0.05, 0, 0.05), 4)


@given(pauli_rates(min_identity=0.5), st.sampled_from([1, 3, 5, 11, 101]))
def test_pec_bound_chain_when_it_holds(r, reps):
    if r.p_I <= 0.5:
        return
    b = pec_bounds(r, reps)
    assert 0 <= b.bitphase_bound <= 1 and 0 <= b.phase_bound <= 1
    if b.chain_holds:
        assert b.phase_bound <= b.chernoff_bound + 1e-15


def _phase(mass):
    return PauliRates(1 - mass, 0.0, 0.0, mass)


def test_min_r_examples():
    assert min_r_for_phase(_phase(0.1), 0.05) == 11
    assert min_r_for_phase(_phase(0.0), 0.05) == 7
    # math.ceil(log(20) / (2 * 0.001**2)) = 1497867, already odd
    big = min_r_for_phase(_phase(0.499), 0.05)
    assert big % 2 == 1
    assert big == pytest.approx(math.log(20) / (2 * 0.001**2), abs=2.5)
    assert math.exp(-2 * big * 0.001**2) <= 0.05
    assert math.exp(-2 * (big - 2) * 0.001**2) > 0.05
    assert min_r_for_phase(_phase(0.499), 0.05, r_max=2_000_001) == big
    with pytest.raises(NoSolutionError):
        min_r_for_phase(_phase(0.499), 0.05, r_max=1_000_001)


def test_min_r_no_solution():
    with pytest.raises(NoSolutionError):
        min_r_for_phase(_phase(0.5), 0.05)
    with pytest.raises(DomainError):
        min_r_for_phase(_phase(0.1), 1.5)


@given(st.floats(0.0, 0.49), st.floats(1e-6, 0.5))
def test_min_r_is_minimal_odd(mass, eta):
    r = _phase(mass)
    reps = min_r_for_phase(r, eta)
    gap = 0.5 - mass
    assert reps % 2 == 1
    assert math.exp(-2 * reps * gap * gap) <= eta
    if reps > 1:
        assert math.exp(-2 * (reps - 2) * gap * gap) > eta


def test_converges_examples():
    assert converges(PauliRates(1, 0, 0, 0), 7, 0.05)
    assert converges(PauliRates(0.9, 0.002, 0, 0.098), 11, 0.05)
    assert not converges(PauliRates(0.6, 0.2, 0, 0.2), 3, 0.05)
    assert not converges(PauliRates(0.05, 0.0, 0.0, 0.95), 1001, 0.05)


@given(pauli_rates(), st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.sampled_from([1, 3, 7, 11, 51, 301]))
def test_converges_monotone(r, shrink_bit, shrink_phase, reps):
    if not converges(r, reps):
        return
    # move mass from X and Z back to I only; p_y stays, so both masses shrink
    p_x, p_z = r.p_x * shrink_bit, r.p_z * shrink_phase
    smaller = PauliRates(1 - p_x - r.p_y - p_z, p_x, r.p_y, p_z)
    assert converges(smaller, reps) or min_r_for_phase(smaller, 0.05) <= reps
