import math

import pytest

from zgkn.omega_system import OmegaContext, find_E
from zgkn.oracles import SommerfeldIndex, sommerfeld_energy
from zgkn.params import ALPHA_S, InadmissibleError, ModelParams, WindingTarget
from zgkn.solver import NonConvergenceError, contraction_probe, initial_energy, solve_pair
from zgkn.theta_system import ThetaContext, find_lambda

from conftest import solved


def test_hydrogen_ground_state():
    st = solved(1e-4, -ALPHA_S, 0.5, 0, 0)
    assert st.E == pytest.approx(math.sqrt(1 - ALPHA_S ** 2), abs=1e-3)
    assert st.E == pytest.approx(0.99997337, abs=1e-7)
    assert st.label.notation == "1s_1/2"
    assert st.converged and st.in_region


def test_radial_excitation_raises_energy():
    assert solved(1e-4, -0.5, 0.5, 0, 0).E <= solved(1e-4, -0.5, 0.5, 0, 1).E


def test_ring_breaks_two_s_two_p_degeneracy():
    s = solve_pair(ModelParams(4e-4, -0.3, 0.5), WindingTarget(0, 1), tol=1e-10, inner_tol=1e-11)
    p = solve_pair(ModelParams(4e-4, -0.3, 0.5), WindingTarget(-1, 1), tol=1e-10, inner_tol=1e-11)
    assert abs(s.E - p.E) > 100 * 1e-10


@pytest.mark.parametrize("args", [(0.1, -0.3, 0.5, 0, 0), (0.1, -0.3, -0.5, -1, 1), (0.2, -0.45, 1.5, 1, 2),
                                  (0.05, -0.2, -2.5, -2, 1)])
def test_fixed_point_residuals_and_signs(args):
    a, g, kappa, nt, no = args
    st = solved(*args)
    tol = 1e-8
    lam = find_lambda(ThetaContext(st.params, st.E), nt).mu_star
    E = find_E(OmegaContext(st.params, st.lam), no).mu_star
    assert abs(lam - st.lam) <= 2 * tol
    assert abs(E - st.E) <= 2 * tol
    assert (st.lam < 0) == (nt >= 0)
    assert 0 < st.E < 1
    assert st.reflected_E == -st.E


def test_iteration_count_bound():
    params, target = ModelParams(0.1, -0.3, 0.5), WindingTarget(0, 1)
    E0 = 0.5
    st = solve_pair(params, target, tol=1e-8, E0=E0)
    first = find_E(OmegaContext(params, find_lambda(ThetaContext(params, E0), 0).mu_star), 1).mu_star
    ratio = st.contraction
    assert ratio < 1
    bound = math.ceil(math.log(1e-8 / abs(first - E0)) / math.log(ratio)) + 2
    assert st.iterations <= bound


def test_initial_energy_uses_sommerfeld():
    params = ModelParams(0.1, -0.3, 0.5)
    assert initial_energy(params, WindingTarget(0, 1)) == pytest.approx(
        sommerfeld_energy(SommerfeldIndex(1, -1, -0.3)))
    assert initial_energy(ModelParams(0.1, -1.2, 0.5), WindingTarget(0, 0)) == 0.5


def test_inadmissible_target_rejected():
    with pytest.raises(InadmissibleError):
        solve_pair(ModelParams(0.1, -0.3, 0.5), WindingTarget(-1, 0))


def test_non_convergence_reports_last_iterate():
    with pytest.raises(NonConvergenceError) as info:
        solve_pair(ModelParams(0.1, -0.3, 0.5), WindingTarget(0, 0), tol=1e-14, max_iter=1, E0=0.2)
    st = info.value.state
    assert not st.converged and 0 < st.E < 1


def test_outside_region_flagged():
    st = solve_pair(ModelParams(0.05, -1.1, 0.5), WindingTarget(0, 0))
    assert not st.in_region
    assert st.to_dict()["in_guaranteed_region"] is False


def test_contraction_probe_in_region():
    assert contraction_probe(ModelParams(0.25, -0.45, 0.5), WindingTarget(0, 1), 0.6, 1e-4) < 1


def test_contraction_probe_small_radius():
    assert contraction_probe(ModelParams(1e-4, -0.3, 0.5), WindingTarget(0, 0), 0.9, 1e-4) < 1e-2


def test_contraction_probe_zero_step():
    with pytest.raises(ValueError):
        contraction_probe(ModelParams(0.1, -0.3, 0.5), WindingTarget(0, 0), 0.5, 0.0)


def test_record_fields():
    rec = solved(0.1, -0.3, 0.5, 0, 0).to_dict()
    for key in ("E", "lambda", "n_theta", "n_omega", "kappa", "label", "residual_E", "residual_lambda",
                "in_guaranteed_region"):
        assert key in rec
