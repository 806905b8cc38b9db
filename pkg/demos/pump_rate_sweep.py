"""
Steady drift versus pump rate
=============================

A quasi-static version of a slow pump ramp: each pump rate gets its own
molasses run, and the steady beat frequency is read off the last quarter.
For ``2kv >> kappa`` the drift scales as ``eta_plus**(2/3)``.
"""
import tempfile
import warnings
from pathlib import Path

import numpy as np

from carlsim.cli import loglog_slope, run_sweep
from carlsim.config import load_params, load_scenario, load_sweep, preset

spec = load_sweep(preset("sweep_eta_plus.cfg"))
base = load_params(spec.params_path)
# 300 us is plenty for this friction; the bundled scenario runs 1 ms
cfg = load_scenario(spec.scenario_path, base).config.replace(t_end=300e-6)

with tempfile.TemporaryDirectory() as out, warnings.catch_warnings():
    warnings.simplefilter("ignore", RuntimeWarning)
    rows = run_sweep(spec, base, cfg, Path(out))

print(" eta_plus/1e10   status       beat/kHz   exact/kHz   cube-root/kHz")
for value, status, _, mean, _, (exact, asym) in rows:
    print(f"{value / 1e10:14.3f}   {status:<11} {mean / 1e3:9.2f} {exact / 1e3:11.2f} {asym / 1e3:15.2f}")

values = np.array([r[0] for r in rows])
print(f"log-log slope: {loglog_slope(values, [r[3] for r in rows]):.4f} (cube-root law: 0.6667)")
