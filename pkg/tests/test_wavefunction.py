import math

import numpy as np
import pytest
from scipy.interpolate import CubicSpline
from scipy.integrate import simpson

from zgkn.oracles import SommerfeldIndex, jacobi_theta_connector
from zgkn.params import ALPHA_S
from zgkn.wavefunction import angular_grid, radial_grid, wave_profile

from conftest import solved


@pytest.fixture(scope="module")
def ground():
    st = solved(1e-4, -0.3, 0.5, 0, 0)
    return st, wave_profile(st, 8001)


def test_amplitudes_positive(ground):
    _, p = ground
    assert np.all(p.R > 0) and np.all(p.S > 0)
    assert np.all(np.isfinite(p.density))


def test_small_radius_ground_state_matches_closed_form(ground):
    # R ~ r^E exp(-eta r) for the a -> 0 ground state
    st, p = ground
    eta = math.sqrt(1 - st.E ** 2)
    m = (p.r > 1) & (p.r < 30)
    resid = np.log(p.R[m]) - (st.E * np.log(p.r[m]) - eta * p.r[m])
    assert np.ptp(resid) < 1e-3


def test_small_radius_angular_profile(ground):
    # S ~ sqrt(sin theta): the first spinor component S |cos(Theta/2)| ~ sin(theta) sqrt(cot(theta/2))
    st, p = ground
    m = (p.theta > 0.05) & (p.theta < math.pi - 0.05)
    th = p.theta[m]
    ratio = p.S[m] * np.abs(np.cos(p.Theta[m] / 2)) / (np.sin(th) * np.sqrt(1 / np.tan(th / 2)))
    assert np.ptp(ratio) / ratio.mean() < 1e-4
    assert np.allclose(p.Theta[m], jacobi_theta_connector(1, 0.5, th), atol=1e-3)


def test_both_sheets_sampled(ground):
    _, p = ground
    assert np.allclose(p.r, -p.r[::-1])
    assert p.r[0] < 0 < p.r[-1]


def test_grid_size_validated(ground):
    st, _ = ground
    with pytest.raises(ValueError):
        radial_grid(st, 0)
    with pytest.raises(ValueError):
        angular_grid(1)


def test_radial_quadrature_consistent_with_phase_equation(ground):
    st, p = ground
    u, r, s = radial_grid(st, 8001)
    deriv = CubicSpline(u, np.log(p.R))(u, 1) / (s * np.cosh(u))
    w = np.hypot(r, st.params.a)
    rate = (r / w) * np.sin(p.Omega) - (st.lam / w) * np.cos(p.Omega)
    rel = np.abs(deriv - rate) / np.maximum(1.0, np.abs(rate))
    assert rel[10:-10].max() < 1e-6


def test_exponential_decay_on_both_sheets(ground):
    st, p = ground
    eta = math.sqrt(1 - st.E ** 2)
    for edge in (slice(0, 200), slice(-200, None)):
        rate = -np.diff(np.log(p.R[edge])) / np.diff(np.abs(p.r[edge]))
        assert np.allclose(rate, eta, rtol=0.05)


def test_normalization(ground):
    _, p = ground
    radial = simpson(p.R ** 2, x=p.r)
    assert radial == pytest.approx(1.0, rel=1e-4)
    tau = np.log(np.tan(p.theta / 2))
    angular = simpson(p.S ** 2 * np.sin(p.theta) ** 2, x=tau)
    assert angular == pytest.approx(1.0, rel=1e-3)


def test_density_definition(ground):
    _, p = ground
    s_eq = np.interp(math.pi / 2, p.theta, p.S)
    assert np.allclose(p.density, 2 * p.R ** 2 * s_eq ** 2, rtol=1e-6)


@pytest.mark.parametrize("args", [(1e-4, -0.3, 0.5, 0, 0), (0.05, -40 * ALPHA_S, 0.5, 0, 1),
                                  (0.1, -20 * ALPHA_S, -1.5, -1, 2), (0.3, -0.45, 0.5, 1, 0)])
def test_norm_stable_under_grid_doubling(args):
    st = solved(*args)
    norms = [wave_profile(st, g).norm for g in (2001, 4001, 8001)]
    assert abs(norms[1] / norms[0] - 1) < 1e-6
    assert abs(norms[2] / norms[1] - 1) < 1e-6


def test_hydrogen_peak_location():
    st = solved(1e-4, -ALPHA_S, 0.5, 0, 0)
    idx = SommerfeldIndex(0, -1, -ALPHA_S)
    assert wave_profile(st, 8001).r_peak == pytest.approx(idx.rho / idx.eta, rel=0.05)


def test_peak_moves_inward_with_charge():
    peaks = [wave_profile(solved(1e-4, -Z * ALPHA_S, 0.5, 0, 0), 4001).r_peak for Z in (20, 40, 60)]
    assert peaks[0] > peaks[1] > peaks[2] > 0
