import pytest
from hypothesis import given

from qpferqkd.errors import DomainError
from qpferqkd.rates import (
    ChannelFamily,
    FamilyKind,
    PauliRates,
    detected_rates,
    make_channel,
    worst_case_4state,
)

from conftest import pauli_rates


def approx_rates(r, expected, abs=1e-12):
    assert r.as_tuple() == pytest.approx(expected, abs=abs)


def test_pauli_rates_rejects_unnormalized():
    with pytest.raises(DomainError):
        PauliRates(0.5, 0.1, 0.1, 0.1)
    with pytest.raises(DomainError):
        PauliRates(1.1, -0.1, 0.0, 0.0)
    with pytest.raises(DomainError):
        PauliRates(float("nan"), 0, 0, 0)


@pytest.mark.parametrize(
    "family, expected",
    [
        (ChannelFamily(FamilyKind.SYMMETRIC, 0.0), (1, 0, 0, 0)),
        (ChannelFamily(FamilyKind.SYMMETRIC, 0.1), (0.7, 0.1, 0.1, 0.1)),
        (ChannelFamily(FamilyKind.ASYMMETRIC_NO_Y, 0.217), (0.566, 0.217, 0, 0.217)),
        (ChannelFamily(FamilyKind.EXPLICIT, rates=PauliRates(0.5, 0.5, 0, 0)), (0.5, 0.5, 0, 0)),
    ],
)
def test_make_channel(family, expected):
    approx_rates(make_channel(family), expected)


@pytest.mark.parametrize(
    "family",
    [
        ChannelFamily(FamilyKind.SYMMETRIC, 0.34),
        ChannelFamily(FamilyKind.SYMMETRIC, -0.01),
        ChannelFamily(FamilyKind.ASYMMETRIC_NO_Y, 0.51),
        ChannelFamily(FamilyKind.EXPLICIT),
    ],
)
def test_make_channel_out_of_range(family):
    with pytest.raises(DomainError):
        make_channel(family)


def test_detected_rates():
    assert detected_rates(PauliRates(1, 0, 0, 0)) == (0, 0)
    assert detected_rates(PauliRates(0.7, 0.1, 0.1, 0.1)) == pytest.approx((0.2, 0.2))
    assert detected_rates(PauliRates(25 / 34, 7 / 34, 1 / 34, 1 / 34)) == pytest.approx((8 / 34, 2 / 34))


def test_worst_case_examples():
    approx_rates(worst_case_4state(PauliRates(1, 0, 0, 0)), (1, 0, 0, 0))
    approx_rates(worst_case_4state(PauliRates(0.7, 0.1, 0.1, 0.1)), (0.6, 0.2, 0, 0.2))
    approx_rates(
        worst_case_4state(PauliRates(25 / 34, 7 / 34, 1 / 34, 1 / 34)), (24 / 34, 8 / 34, 0, 2 / 34)
    )


def test_worst_case_needs_identity_weight():
    # p_y > p_I: no p_y = 0 assignment reproduces both detected rates
    with pytest.raises(DomainError):
        worst_case_4state(PauliRates(0.1, 0.2, 0.5, 0.2))


@given(pauli_rates())
def test_worst_case_properties(r):
    if r.p_y > r.p_I:
        return
    w = worst_case_4state(r)
    assert w.p_y == 0
    assert worst_case_4state(w) == w
    assert w.p_x + w.p_y >= r.p_x + r.p_y
    assert w.p_z >= r.p_z
    assert detected_rates(w) == pytest.approx(detected_rates(r), abs=1e-15)


@given(pauli_rates())
def test_swap_xz_involution(r):
    assert r.swap_xz().swap_xz() == r
