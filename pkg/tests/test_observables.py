import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from carlsim.dynamics import EnsembleState
from carlsim.observables import (
    beat_frequency_phase_slope,
    beat_frequency_zero_crossing,
    beat_power,
    bunching,
    center_of_mass,
    contrast_floor,
    drift_frequency,
)
from carlsim.params import SystemParams, beat_to_velocity

P = SystemParams()


def ens(phases, velocities=None, weight=1.0):
    phases = np.asarray(phases, float)
    if velocities is None:
        velocities = np.zeros_like(phases)
    return EnsembleState(phases, velocities, weight)


def test_beat_power_examples():
    a = 4.7e4 + 0j
    unit = P.mirror_T * P.photon_power
    assert beat_power(a, 0, P) == pytest.approx(unit * abs(a) ** 2)
    assert beat_power(a, -a, P) == 0
    t = np.linspace(0, 3e-5, 3001)
    dw = 2 * np.pi * 1e5
    pb = beat_power(a, a * np.exp(1j * dw * t), P)
    assert pb.min() == pytest.approx(0, abs=1e-6 * pb.max())
    assert pb.max() == pytest.approx(4 * unit * abs(a) ** 2, rel=1e-6)
    spectrum = np.abs(np.fft.rfft(pb - pb.mean()))
    freqs = np.fft.rfftfreq(t.size, t[1] - t[0])
    assert freqs[np.argmax(spectrum)] == pytest.approx(1e5, rel=0.04)


@given(st.floats(0, 2 * np.pi), st.complex_numbers(max_magnitude=1e5), st.complex_numbers(max_magnitude=1e5))
def test_beat_power_global_phase_invariance(psi, a, b):
    rot = np.exp(1j * psi)
    assert beat_power(a * rot, b * rot, P) == pytest.approx(beat_power(a, b, P), rel=1e-9, abs=1e-20)


def test_bunching_examples():
    assert bunching(ens([0.3] * 5)) == pytest.approx(1.0)
    assert bunching(ens([0, np.pi / 2, np.pi, 3 * np.pi / 2])) == pytest.approx(0, abs=1e-15)
    assert bunching(ens([0, np.pi / 2])) == pytest.approx(math.sqrt(2) / 2, rel=1e-15)


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=50), st.floats(-10, 10))
def test_bunching_bounds_and_translation(phases, psi):
    b = bunching(ens(phases))
    assert 0 <= b <= 1
    assert bunching(ens(np.asarray(phases) + psi)) == pytest.approx(b, abs=1e-9)


def test_center_of_mass():
    k = P.k
    e = ens([0.4, -0.4, 1.0, -1.0], [3e5, -3e5, 1e4, -1e4])
    assert center_of_mass(e, P) == pytest.approx((0.0, 0.0), abs=1e-20)
    x, v = center_of_mass(ens([2.0], [5e5]), P)
    assert x == pytest.approx(2.0 / (2 * k))
    assert v == pytest.approx(5e5 / k)


def test_one_megahertz_drift_displacement():
    v = beat_to_velocity(2 * np.pi * 1e6, P)
    assert v == pytest.approx(0.40, abs=0.005)
    assert v * 6e-3 == pytest.approx(2.4e-3, rel=0.01)
    assert drift_frequency(v, P) == pytest.approx(1e6)


def test_phase_slope_linear_phase():
    t = np.arange(0, 400e-6, 1e-7)
    alpha = 3.0 * np.exp(1j * 2 * np.pi * 1e5 * t)
    f = beat_frequency_phase_slope(t, alpha, 100e-6)
    assert np.all(np.isnan(f[:1000]))
    assert np.allclose(f[1000:], 1e5, rtol=1e-9)


def test_phase_slope_constant_phase():
    t = np.arange(0, 200e-6, 1e-7)
    f = beat_frequency_phase_slope(t, np.full(t.size, 2 - 1j), 100e-6)
    assert np.allclose(f[1000:], 0, atol=1e-6)


def test_phase_slope_chirp_bias_bound():
    c = 5e8  # Hz/s
    t = np.arange(0, 2e-3, 5e-8)
    alpha = np.exp(1j * np.pi * c * t**2)
    window = 100e-6
    f = beat_frequency_phase_slope(t, alpha, window)
    i = np.searchsorted(t, 1e-3)
    assert abs(f[i] - c * t[i]) <= c * window / 2 * (1 + 1e-6)


def test_phase_slope_window_too_short():
    t = np.arange(0, 1e-5, 1e-6)
    with pytest.raises(ValueError):
        beat_frequency_phase_slope(t, np.ones(t.size), 1e-7)


def test_zero_crossing_170kHz():
    t = np.arange(0, 1e-3, 2e-8)
    a = 4.7e4
    pb = beat_power(a, 0.05 * a * np.exp(1j * (2 * np.pi * 170e3 * t + 0.3)), P)
    floor = contrast_floor(a, P)
    centres, f = beat_frequency_zero_crossing(t, pb, 100e-6, floor)
    assert centres.size == 10
    assert np.all(np.abs(f - 170e3) <= 1 / (2 * 100e-6))


def test_zero_crossing_flat_signal_is_absent():
    t = np.arange(0, 1e-3, 1e-7)
    _, f = beat_frequency_zero_crossing(t, np.full(t.size, 3.2e-3), 100e-6, 0.0)
    assert np.all(np.isnan(f))


def test_zero_crossing_low_contrast_is_absent():
    t = np.arange(0, 1e-3, 1e-7)
    a = 4.7e4
    pb = beat_power(a, 1e-3 * a * np.exp(1j * 2 * np.pi * 1e5 * t), P)
    _, f = beat_frequency_zero_crossing(t, pb, 100e-6, contrast_floor(a, P))
    assert np.all(np.isnan(f))


def test_estimators_need_uniform_sampling():
    t = np.array([0, 1e-6, 3e-6, 4e-6])
    with pytest.raises(ValueError):
        beat_frequency_phase_slope(t, np.ones(4), 2e-6)
