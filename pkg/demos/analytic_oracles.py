"""
Closed-form chirp and friction fixed point
==========================================

With every atom at the same position the probe rides along with the cloud
and the whole system reduces to one ODE for ``kv``. Without friction its
first integral is a depressed cubic in ``kv`` that grows linearly in time;
with friction the steady drift solves a second cubic. This script checks
both against a direct RK4 integration.
"""
import numpy as np

from carlsim import analytic
from carlsim.config import load_params, preset

p = load_params(preset("switch_off_params.cfg"))
print(f"kappa = {p.kappa:.5g} rad/s, coupling eps N U0^2 eta^2 = {analytic.coupling_strength(p):.4g}")

###############################################################################
# Frictionless chirp. The grid is geometric because the probe builds up on a
# ~10 ns scale while the chirp itself takes milliseconds.

t_end = analytic.chirp_duration(50 * p.kappa, p)
t = np.concatenate([[0.0], np.geomspace(t_end * 1e-10, t_end, 3000)])
kv_rk4 = analytic.integrate_meanfield(t, p, substeps=4)
kv_cubic = analytic.cubic_chirp(t, p)
print(f"chirp to kv = 50 kappa takes {t_end * 1e3:.3f} ms; "
      f"max rel. difference RK4 vs cubic = {np.max(np.abs(kv_rk4[1:] / kv_cubic[1:] - 1)):.1e}")

for ti in (1e-6, 1e-5, 1e-4, 1e-3):
    kv = analytic.cubic_chirp(ti, p)
    print(f"  t = {ti * 1e3:7.3f} ms   beat 2kv/2pi = {2 * kv / (2 * np.pi) / 1e3:9.2f} kHz")

###############################################################################
# Late in the chirp kv grows as t**(1/3).

late = t > 0.1 * t_end
slope = np.polyfit(np.log(t[late]), np.log(kv_cubic[late]), 1)[0]
print(f"late-time log-log slope of kv(t): {slope:.4f}")

###############################################################################
# Friction fixed point with the molasses parameters. The exact root keeps
# the kappa**2/4 term; the cube-root law drops it.

m = load_params(preset("molasses_params.cfg"))
m = m.replace(gamma_fric=9 * m.kappa)
sv = analytic.steady_velocity(m)
print(f"gamma = 9 kappa: exact beat {2 * sv.exact / (2 * np.pi) / 1e3:.2f} kHz, "
      f"cube-root law {2 * sv.asymptotic / (2 * np.pi) / 1e3:.2f} kHz "
      f"(excess {sv.relative_deviation:.2%}, predicted "
      f"{analytic.predicted_asymptotic_deviation(sv.exact, m.kappa):.2%})")
