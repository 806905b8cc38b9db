import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy.optimize import brentq

from carlsim.analytic import (
    ParticipationModel,
    beta_steady,
    chirp_duration,
    coupling_strength,
    cubic_chirp,
    cubic_chirp_residual,
    depressed_cubic_root,
    integrate_meanfield,
    meanfield_rhs,
    predicted_asymptotic_deviation,
    steady_velocity,
)
from carlsim.params import recoil_parameter


def test_participation_bounds():
    with pytest.raises(ValueError):
        ParticipationModel(0.0)
    with pytest.raises(ValueError):
        ParticipationModel(1.5)


def test_beta_far_detuned_vanishes(locked_params):
    p = locked_params
    assert abs(beta_steady(1e6 * p.kappa, p)) < 1e-6 * abs(beta_steady(0.0, p))


def test_beta_at_rest(locked_params):
    p = locked_params
    expected = -1j * p.n_atoms * p.u0 * p.eta_plus / p.kappa**2
    assert beta_steady(0.0, p) == pytest.approx(expected, rel=1e-14)


def test_beta_balances_friction_at_steady_state(molasses_params):
    p = molasses_params
    kv = steady_velocity(p).exact
    beta = beta_steady(kv, p)
    # per-atom force of the comoving probe: -4 eps U0 eta Im(beta / chi*)
    force = -4 * recoil_parameter(p) * p.u0 * p.eta_plus * (beta / p.kappa).imag
    assert force == pytest.approx(p.gamma_fric * kv, rel=1e-10)


def test_meanfield_rhs_at_rest(locked_params):
    p = locked_params
    C = recoil_parameter(p) * p.n_atoms * p.u0**2 * p.eta_plus**2
    assert meanfield_rhs(0.0, p) == pytest.approx(4 * C / p.kappa**3, rel=1e-13)


@given(st.floats(0, 1e8))
def test_meanfield_frictionless_always_accelerates(kv):
    from carlsim.params import SystemParams

    p = SystemParams(eta_plus=1e10)
    assert meanfield_rhs(kv, p) > 0


@given(st.floats(0, 1e7), st.floats(0.05, 1.0))
def test_meanfield_reduced_form_and_sign_of_u0(kv, fraction):
    from carlsim.params import SystemParams

    p = SystemParams(eta_plus=6e9, u0=-0.077, gamma_fric=1e6)
    C = coupling_strength(p, fraction)
    reduced = 4 * C * p.kappa / (p.kappa**2 * (p.kappa**2 + 4 * kv**2)) - p.gamma_fric * kv
    assert meanfield_rhs(kv, p, fraction) == pytest.approx(reduced, rel=1e-12, abs=1e-9 * abs(p.gamma_fric * kv))
    flipped = p.replace(u0=-p.u0, eta_plus=-p.eta_plus)
    assert meanfield_rhs(kv, flipped, fraction) == pytest.approx(meanfield_rhs(kv, p, fraction), rel=1e-14)


@given(st.floats(1e-3, 1e12), st.floats(-1e20, 1e20))
def test_depressed_cubic_root_matches_companion_matrix(pc, qc):
    x = depressed_cubic_root(pc, qc)
    roots = np.roots([1.0, 0.0, pc, -qc])
    real = roots[np.abs(roots.imag) <= 1e-6 * np.abs(roots).max()].real
    assert real.size == 1
    assert x == pytest.approx(real[0], rel=1e-6, abs=1e-9 * max(1.0, np.abs(roots).max()))
    scale = max(abs(x) ** 3, pc * abs(x), abs(qc))
    assert abs(x**3 + pc * x - qc) <= 1e-12 * scale + 1e-300


def test_depressed_cubic_small_q_has_no_cancellation():
    # for tiny q the root is q/p to leading order
    assert depressed_cubic_root(1e10, 1e-3) == pytest.approx(1e-13, rel=1e-12)


def test_cubic_chirp_at_zero(locked_params):
    assert cubic_chirp(0.0, locked_params) == 0.0


def test_cubic_chirp_long_time_limit(locked_params):
    p = locked_params
    t = chirp_duration(10 * p.kappa, p) * np.array([1, 3, 10, 100])
    kv = cubic_chirp(t, p)
    assert np.all(kv > 10 * p.kappa)
    limit = np.cbrt(3 * coupling_strength(p) * t / p.kappa)
    assert np.all(np.abs(kv / limit - 1) < 0.01)


@settings(max_examples=50)
@given(st.floats(0, 1e-2), st.floats(0.01, 1.0))
def test_cubic_chirp_residual_property(t, fraction):
    from carlsim.params import SystemParams

    p = SystemParams(eta_plus=6.6e9)
    kv = cubic_chirp(t, p, fraction)
    res, scale = cubic_chirp_residual(kv, t, p, fraction)
    assert abs(res) <= 1e-9 * max(scale, 1e-300)


def test_cubic_chirp_is_increasing(locked_params):
    t = np.linspace(0, 2e-3, 2001)
    kv = cubic_chirp(t, locked_params)
    assert np.all(np.diff(kv) > 0)


def test_cubic_chirp_is_first_integral(locked_params):
    # central difference of the closed form reproduces the mean-field acceleration
    p = locked_params
    for t in (1e-9, 1e-7, 1e-5, 1e-3):
        h = 1e-4 * t
        deriv = (cubic_chirp(t + h, p) - cubic_chirp(t - h, p)) / (2 * h)
        assert deriv == pytest.approx(meanfield_rhs(cubic_chirp(t, p), p), rel=1e-6)


def test_cubic_chirp_matches_rk4(locked_params):
    p = locked_params
    t_end = chirp_duration(20 * p.kappa, p)
    t = np.concatenate([[0.0], np.geomspace(t_end * 1e-7, t_end, 3000)])
    kv = integrate_meanfield(t, p)
    ref = cubic_chirp(t, p)
    assert np.max(np.abs(kv[1:] / ref[1:] - 1)) < 1e-8


def test_steady_velocity_requires_friction(locked_params):
    with pytest.raises(ValueError):
        steady_velocity(locked_params)


def test_steady_root_is_fixed_point(molasses_params):
    p = molasses_params
    sv = steady_velocity(p)
    assert abs(meanfield_rhs(sv.exact, p)) < 1e-10 * p.gamma_fric * sv.exact
    # independent bracketing root of the mean-field acceleration
    root = brentq(lambda x: meanfield_rhs(x, p), 1.0, 100 * p.kappa, xtol=1e-12, rtol=1e-15)
    assert sv.exact == pytest.approx(root, rel=1e-12)


def test_steady_root_is_unique(molasses_params):
    p = molasses_params
    sv = steady_velocity(p)
    grid = np.linspace(0, 10 * sv.exact, 20001)
    acc = meanfield_rhs(grid, p)
    assert np.all(acc[grid < 0.999 * sv.exact] > 0)
    assert np.all(acc[grid > 1.001 * sv.exact] < 0)


def test_asymptotic_ratio_approaches_one_as_kappa_shrinks(molasses_params):
    p = molasses_params
    ratios = []
    for scale in (1.0, 0.1, 0.01):
        q = p.replace(kappa=scale * p.kappa)
        sv = steady_velocity(q)
        ratios.append(sv.asymptotic / sv.exact)
        assert sv.relative_deviation == pytest.approx(
            predicted_asymptotic_deviation(sv.exact, q.kappa), rel=1e-9)
    assert ratios[0] > ratios[1] > ratios[2] > 1
    assert ratios[2] - 1 < 1e-5


@pytest.mark.parametrize("name, expected", [("eta_plus", 2 / 3), ("n_atoms", 1 / 3), ("gamma_fric", -1 / 3)])
def test_asymptotic_scaling_exponents(molasses_params, name, expected):
    p = molasses_params
    base = getattr(p, name)
    values = base * np.geomspace(1, 10, 5)
    kv = [steady_velocity(p.replace(**{name: v})).asymptotic for v in values]
    assert np.polyfit(np.log(values), np.log(kv), 1)[0] == pytest.approx(expected, abs=1e-12)


def test_analytic_results_even_in_u0(molasses_params):
    p = molasses_params
    q = p.replace(u0=-p.u0)
    assert steady_velocity(q).exact == pytest.approx(steady_velocity(p).exact, rel=1e-15)
    assert cubic_chirp(1e-3, q) == pytest.approx(cubic_chirp(1e-3, p), rel=1e-15)
    assert abs(beta_steady(1e5, q)) == pytest.approx(abs(beta_steady(1e5, p)), rel=1e-15)


def test_participation_rescales_atom_number(locked_params):
    p = locked_params
    assert cubic_chirp(1e-3, p, 0.1) == pytest.approx(cubic_chirp(1e-3, p.replace(n_atoms=1e5)), rel=1e-15)
    assert coupling_strength(p, 0.1) == pytest.approx(0.1 * coupling_strength(p), rel=1e-14)
