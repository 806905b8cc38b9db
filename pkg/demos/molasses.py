"""
Self-bunching in an optical molasses
====================================

Only the forward pump is on and the cloud starts homogeneous, so there is no
grating for the probe to scatter from. Shot noise of the macro-particles and
a tiny probe seed break the symmetry; the molasses friction balances the
recoil and the grating settles into a steady drift.
"""
import warnings

import numpy as np

from carlsim import analytic
from carlsim.config import load_params, load_scenario, preset
from carlsim.dynamics import run_scenario
from carlsim.observables import beat_frequency_zero_crossing, contrast_floor, drift_frequency

p = load_params(preset("molasses_params.cfg"))
cfg = load_scenario(preset("molasses_scenario.cfg"), p).config

with warnings.catch_warnings():
    warnings.simplefilter("ignore", RuntimeWarning)
    ts = run_scenario(cfg, p)

print("   t/us   bunching   |alpha_-|   beat/kHz")
for target in (0, 10, 20, 40, 80, 160, 320, 640, 1000):
    i = min(np.searchsorted(ts.t, target * 1e-6), len(ts) - 1)
    f = ts.beat_freq[i]
    print(f"{ts.t[i] * 1e6:7.0f} {ts.bunching[i]:10.4f} {abs(ts.alpha_minus[i]):11.2f} "
          f"{f / 1e3 if np.isfinite(f) else float('nan'):10.2f}")

###############################################################################
# Three readings of the same drift, and the fixed point they should hit.

last = ts.t >= ts.t[3 * len(ts) // 4]
centres, zc = beat_frequency_zero_crossing(ts.t, ts.p_beat, cfg.window, contrast_floor(ts.alpha_plus, ts.params))
sv = analytic.steady_velocity(ts.params)
print(f"phase slope      {np.mean(ts.beat_freq[last]) / 1e3:.3f} kHz")
print(f"zero crossings   {np.nanmean(zc[centres >= ts.t[last][0]]) / 1e3:.3f} kHz")
print(f"2 k v_cm / 2pi   {np.mean(drift_frequency(ts.v_cm[last], ts.params)) / 1e3:.3f} kHz")
print(f"exact root       {2 * sv.exact / (2 * np.pi) / 1e3:.3f} kHz "
      f"(cube-root law {2 * sv.asymptotic / (2 * np.pi) / 1e3:.3f} kHz)")
