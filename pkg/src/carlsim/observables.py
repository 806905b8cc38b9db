"""Measured quantities: beat power, bunching, centre of mass, beat frequency.

Two beat-frequency estimators are provided and deliberately share no code:
:func:`beat_frequency_phase_slope` reads the probe phase (available only in
simulation), :func:`beat_frequency_zero_crossing` reads the interference
power that the experiment records.

Frequencies are positive when the probe is red of the pump. With fields
evolving as ``alpha * exp(-i omega t)`` in the pump frame, a red probe has an
advancing phase, ``alpha_minus ~ exp(+i delta_omega t)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .params import SystemParams

DEFAULT_WINDOW = 100e-6
DEFAULT_CONTRAST_FRACTION = 0.01


@dataclass(frozen=True)
class TimeSeriesRecord:
    t: float
    alpha_minus: complex
    p_beat: float
    p_probe_out: float
    bunching: float
    x_cm: float
    v_cm: float
    beat_freq: Optional[float] = None


def beat_power(alpha_plus, alpha_minus, p: SystemParams):
    """Outcoupled interference power T hbar omega fsr |alpha_+ + alpha_-|**2."""
    return p.mirror_T * p.photon_power * np.abs(alpha_plus + alpha_minus) ** 2


def probe_power(alpha_minus, p: SystemParams):
    """Outcoupled probe power."""
    return p.mirror_T * p.photon_power * np.abs(alpha_minus) ** 2


def bunching(ens) -> float:
    """|<exp(i phi)>| over the weighted ensemble; 0 for an empty cloud."""
    if ens.weight == 0:
        return 0.0
    phases = np.asarray(ens.phases)
    return float(min(1.0, abs(np.exp(1j * phases).mean())))


def center_of_mass(ens, p: SystemParams) -> tuple[float, float]:
    k = p.k
    return (
        float(np.mean(ens.phases)) / (2.0 * k),
        float(np.mean(ens.scaled_velocities)) / k,
    )


def contrast_floor(alpha_plus, p: SystemParams, fraction: float = DEFAULT_CONTRAST_FRACTION) -> float:
    """Peak-to-peak beat power below which a window is considered flat."""
    return fraction * p.mirror_T * p.photon_power * abs(alpha_plus) ** 2


def _uniform_step(t: np.ndarray) -> float:
    dt = np.diff(t)
    if dt.size == 0:
        raise ValueError("need at least two samples")
    step = float(np.mean(dt))
    if not np.allclose(dt, step, rtol=1e-6, atol=0):
        raise ValueError("estimators require uniformly sampled series")
    return step


def beat_frequency_phase_slope(t, alpha_minus, window: float = DEFAULT_WINDOW) -> np.ndarray:
    """Beat frequency (Hz) at each record from the trailing-window phase slope.

    The slope of unwrapped ``arg(alpha_minus)`` is a least-squares fit over
    the samples in ``[t_i - window, t_i]``. Records whose window reaches
    before the first sample are NaN.
    """
    t = np.asarray(t, dtype=float)
    step = _uniform_step(t)
    m = int(round(window / step)) + 1
    if m < 2:
        raise ValueError(f"window {window} s spans fewer than 2 samples (spacing {step} s)")
    theta = np.unwrap(np.angle(np.asarray(alpha_minus)))
    out = np.full(t.shape, np.nan)
    if m > t.size:
        return out
    centred = np.arange(m) - (m - 1) / 2.0
    weights = centred / (np.sum(centred**2) * step)
    slopes = np.convolve(theta, weights[::-1], mode="valid")
    out[m - 1:] = slopes / (2.0 * np.pi)
    return out


def beat_frequency_zero_crossing(
    t, p_beat, window: float = DEFAULT_WINDOW, floor: float = 0.0
) -> tuple[np.ndarray, np.ndarray]:
    """Beat frequency from mean crossings of the beat power.

    The series is cut into consecutive windows. In each, crossings of the
    window mean are counted and converted with ``crossings / (2 * window)``.
    Windows whose peak-to-peak excursion is not above ``floor`` yield NaN.
    Returns ``(window_centres, frequencies)``.
    """
    t = np.asarray(t, dtype=float)
    p_beat = np.asarray(p_beat, dtype=float)
    step = _uniform_step(t)
    m = int(round(window / step))
    if m < 2:
        raise ValueError(f"window {window} s spans fewer than 2 samples (spacing {step} s)")
    n_win = t.size // m
    centres = np.empty(n_win)
    freqs = np.full(n_win, np.nan)
    span = m * step
    for j in range(n_win):
        seg = p_beat[j * m:(j + 1) * m]
        centres[j] = t[j * m] + 0.5 * (m - 1) * step
        if np.ptp(seg) <= floor:
            continue
        above = seg > seg.mean()
        crossings = np.count_nonzero(above[1:] != above[:-1])
        freqs[j] = crossings / (2.0 * span)
    return centres, freqs


def drift_frequency(v_cm, p: SystemParams):
    """Beat frequency (Hz) implied by the centre-of-mass velocity, 2 k v / 2 pi."""
    return 2.0 * p.k * np.asarray(v_cm) / (2.0 * np.pi)
