from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from zgkn.params import (
    A_MAX,
    ALPHA_S,
    InadmissibleError,
    ModelParams,
    WindingTarget,
    is_half_integer,
    spectroscopic_label,
    spin_orbit_k,
    validate,
)

half_integers = st.integers(-5, 4).map(lambda m: m + 0.5)


def admissible_targets():
    return st.one_of(
        st.tuples(st.integers(0, 6), st.integers(0, 6)),
        st.tuples(st.integers(-6, -1), st.integers(1, 6)),
    ).map(lambda t: WindingTarget(*t))


def test_validate_accepts_ground_state_in_region():
    rep = validate(ModelParams(0.1, -0.3, 0.5), WindingTarget(0, 0))
    assert rep.accepted and rep.in_guaranteed_region


def test_validate_rejects_negative_theta_without_radial_winding():
    rep = validate(ModelParams(0.1, -0.3, 0.5), WindingTarget(-1, 0))
    assert not rep.accepted
    assert any("n_omega >= 1" in r for r in rep.reasons)


def test_validate_flags_outside_region_without_rejecting():
    rep = validate(ModelParams(0.5, -2.0, 0.5), WindingTarget(0, 0))
    assert rep.accepted and not rep.in_guaranteed_region


@pytest.mark.parametrize("params", [
    ModelParams(0.1, -0.3, 0.0),
    ModelParams(0.1, -0.3, 1.0),
    ModelParams(0.0, -0.3, 0.5),
    ModelParams(0.1, 0.0, 0.5),
    ModelParams(0.1, 0.2, 0.5),
])
def test_validate_rejects_bad_parameters(params):
    assert not validate(params, WindingTarget(0, 0)).accepted


def test_region_boundary_is_open():
    assert not ModelParams(A_MAX, -0.3, 0.5).in_guaranteed_region
    assert not ModelParams(0.1, -0.5, 0.5).in_guaranteed_region
    assert ModelParams(0.29, -0.49, 0.5).in_guaranteed_region


def test_charge_conversion():
    p = ModelParams.from_charge(0.1, 1, 0.5)
    assert p.gamma == -ALPHA_S
    assert p.Z == pytest.approx(1.0)


def test_half_integer_predicate():
    assert is_half_integer(0.5) and is_half_integer(-2.5)
    assert not is_half_integer(1.0) and not is_half_integer(0.0) and not is_half_integer(0.3)


@pytest.mark.parametrize("target,kappa,text", [
    ((0, 0), 0.5, "1s_1/2 m_j=+1/2"),
    ((0, 0), -0.5, "1s_1/2 m_j=-1/2"),
    ((0, 1), 0.5, "2s_1/2 m_j=+1/2"),
    ((0, 1), -0.5, "2s_1/2 m_j=-1/2"),
    ((-1, 1), 0.5, "2p_1/2 m_j=+1/2"),
    ((-1, 1), -0.5, "2p_1/2 m_j=-1/2"),
])
def test_hydrogenic_table_first_three_rows(target, kappa, text):
    assert str(spectroscopic_label(WindingTarget(*target), kappa)) == text


def test_table_row_four_as_printed_is_inadmissible():
    # (-2, 0) carries no bound state; the j = 3/2, m_j = 1/2 level sits at (1, 0)
    with pytest.raises(InadmissibleError):
        spectroscopic_label(WindingTarget(-2, 0), 0.5)
    assert str(spectroscopic_label(WindingTarget(1, 0), 0.5)) == "2p_3/2 m_j=+1/2"


def test_table_row_five_as_printed_is_inadmissible():
    with pytest.raises(InadmissibleError):
        spectroscopic_label(WindingTarget(-1, 0), 1.5)
    assert str(spectroscopic_label(WindingTarget(0, 0), 1.5)) == "2p_3/2 m_j=+3/2"
    assert str(spectroscopic_label(WindingTarget(0, 0), -1.5)) == "2p_3/2 m_j=-3/2"


def test_worked_example_two_p_half():
    lab = spectroscopic_label(WindingTarget(-1, 1), -0.5)
    assert (lab.n, lab.ell, lab.j, lab.m_j, lab.k, lab.M) == (2, 1, Fraction(1, 2), Fraction(-1, 2), 1, 1)


def test_spin_orbit_k_values():
    assert spin_orbit_k(1, 0.5) == -1
    assert spin_orbit_k(-1, 0.5) == 1
    assert spin_orbit_k(2, 1.5) == -3
    with pytest.raises(ValueError):
        spin_orbit_k(0, 0.5)


@given(admissible_targets(), half_integers)
def test_label_round_trip(target, kappa):
    lab = spectroscopic_label(target, kappa)
    assert lab.to_winding() == (target.n_theta, target.n_omega)


@given(admissible_targets(), half_integers)
def test_label_invariants(target, kappa):
    lab = spectroscopic_label(target, kappa)
    assert lab.j == abs(lab.k) - Fraction(1, 2)
    assert lab.ell == lab.j + Fraction(1 if lab.k > 0 else -1, 2)
    assert lab.n == lab.M + abs(lab.k)
    assert lab.m_j == Fraction(int(2 * kappa), 2)
    assert not (lab.k > 0 and lab.M == 0)
    assert abs(lab.m_j) <= lab.j


@given(st.integers(-6, -1), half_integers)
def test_inadmissible_targets_raise(n_theta, kappa):
    with pytest.raises(InadmissibleError):
        spectroscopic_label(WindingTarget(n_theta, 0), kappa)
