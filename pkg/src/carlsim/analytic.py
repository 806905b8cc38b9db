"""Mean-field (perfect bunching) reduction and its closed-form solutions.

With all atoms at a common position ``x`` the probe follows the comoving
ansatz ``alpha_minus = beta * exp(2ikx)`` and the ensemble reduces to one
scalar ODE for ``kv``. Every function takes a ``participation`` fraction:
only that share of the atoms is treated as bunched, and the reduction is
evaluated with ``N_eff = participation * N`` throughout (including in chi
when the cavity detuning is locked).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import SystemParams, recoil_parameter, susceptibility


@dataclass(frozen=True)
class ParticipationModel:
    fraction: float = 1.0

    def __post_init__(self):
        if not 0 < self.fraction <= 1:
            raise ValueError(f"participation fraction must lie in (0, 1], got {self.fraction}")

    def apply(self, p: SystemParams) -> SystemParams:
        return p.replace(n_atoms=self.fraction * p.n_atoms)


@dataclass(frozen=True)
class MeanFieldState:
    kv: float
    beta: complex


@dataclass(frozen=True)
class SteadyVelocity:
    """Friction-limited steady ``kv`` (rad/s).

    ``exact`` is the positive root of the full fixed-point cubic,
    ``asymptotic`` the large-velocity approximation that drops the
    ``kappa**2 / 4`` term.
    """

    exact: float
    asymptotic: float

    @property
    def relative_deviation(self) -> float:
        return self.asymptotic / self.exact - 1.0


def _effective(p: SystemParams, participation: float) -> SystemParams:
    return ParticipationModel(participation).apply(p)


def coupling_strength(p: SystemParams, participation: float = 1.0) -> float:
    """epsilon * N_eff * U0**2 * eta_plus**2, the combination driving the chirp."""
    pe = _effective(p, participation)
    return recoil_parameter(pe) * pe.n_atoms * pe.u0**2 * pe.eta_plus**2


def beta_steady(kv, p: SystemParams, participation: float = 1.0):
    """Comoving probe envelope for atoms drifting at ``kv``."""
    pe = _effective(p, participation)
    chi = susceptibility(pe)
    kv = np.asarray(kv, dtype=float)
    beta = -1j * pe.n_atoms * pe.u0 * pe.eta_plus / (chi * (chi + 2j * kv))
    return beta if beta.ndim else complex(beta)


def meanfield_state(kv: float, p: SystemParams, participation: float = 1.0) -> MeanFieldState:
    return MeanFieldState(kv=float(kv), beta=beta_steady(kv, p, participation))


def meanfield_rhs(kv, p: SystemParams, participation: float = 1.0):
    """d(kv)/dt of the centre of mass, including friction."""
    pe = _effective(p, participation)
    chi = susceptibility(pe)
    drive = 4.0 * coupling_strength(p, participation) / abs(chi) ** 2
    kv = np.asarray(kv, dtype=float)
    acc = drive * np.real(1.0 / (chi + 2j * kv)) - pe.gamma_fric * kv
    return acc if acc.ndim else float(acc)


def depressed_cubic_root(p_coef, q_coef):
    """Real root of ``x**3 + p*x = q`` for ``p > 0``.

    Cardano's single-real-root branch. The root is assembled as
    ``q / (a**2 + p/3 + b**2)`` with ``a - b`` the textbook form, which has
    no cancellation at either small or large ``q``.
    """
    p_coef = np.asarray(p_coef, dtype=float)
    q_coef = np.asarray(q_coef, dtype=float)
    if np.any(p_coef <= 0):
        raise ValueError("depressed_cubic_root needs p > 0 (single real root branch)")
    p3 = p_coef / 3.0
    half_q = np.abs(q_coef) / 2.0
    s = np.sqrt(half_q**2 + p3**3)
    a = np.cbrt(half_q + s)
    b = p3 / a
    root = np.sign(q_coef) * np.abs(q_coef) / (a * a + p3 + b * b)
    return root if root.ndim else float(root)


def cubic_chirp(t, p: SystemParams, participation: float = 1.0):
    """Frictionless chirp kv(t) from rest, assuming the locked detuning.

    Solves ``(kv)**3 + (3 kappa**2 / 4) kv = 3 eps N U0**2 eta**2 t / kappa``.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("cubic_chirp is defined for t >= 0")
    rhs = 3.0 * coupling_strength(p, participation) * t / p.kappa
    return depressed_cubic_root(0.75 * p.kappa**2, rhs)


def cubic_chirp_residual(kv, t, p: SystemParams, participation: float = 1.0):
    """Residual of the chirp cubic and the magnitude of its largest term."""
    lin = 0.75 * p.kappa**2 * kv
    rhs = 3.0 * coupling_strength(p, participation) * t / p.kappa
    return kv**3 + lin - rhs, np.maximum.reduce([np.abs(kv) ** 3, np.abs(lin), np.abs(rhs)])


def steady_velocity(p: SystemParams, participation: float = 1.0) -> SteadyVelocity:
    if not p.gamma_fric > 0:
        raise ValueError(f"steady state needs gamma_fric > 0, got {p.gamma_fric}")
    rhs = coupling_strength(p, participation) / (p.kappa * p.gamma_fric)
    exact = depressed_cubic_root(0.25 * p.kappa**2, rhs)
    return SteadyVelocity(exact=exact, asymptotic=float(np.cbrt(rhs)))


def predicted_asymptotic_deviation(kv_exact: float, kappa: float) -> float:
    """Relative excess of the asymptotic over the exact steady root."""
    return np.cbrt(1.0 + kappa**2 / (4.0 * kv_exact**2)) - 1.0


def integrate_meanfield(t, p: SystemParams, participation: float = 1.0, kv0: float = 0.0,
                        substeps: int = 1) -> np.ndarray:
    """Fixed-step RK4 solution of :func:`meanfield_rhs` on the grid ``t``.

    Each grid interval is split into ``substeps`` equal steps. Returns kv at
    every grid time.
    """
    t = np.asarray(t, dtype=float)
    pe = _effective(p, participation)
    chi = susceptibility(pe)
    drive = 4.0 * coupling_strength(p, participation) / abs(chi) ** 2
    gamma = pe.gamma_fric

    def f(x):
        return drive * (1.0 / (chi + 2j * x)).real - gamma * x

    out = np.empty_like(t)
    kv = float(kv0)
    out[0] = kv
    for i in range(1, t.size):
        h = (t[i] - t[i - 1]) / substeps
        for _ in range(substeps):
            k1 = f(kv)
            k2 = f(kv + 0.5 * h * k1)
            k3 = f(kv + 0.5 * h * k2)
            k4 = f(kv + h * k3)
            kv += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        out[i] = kv
    return out


def chirp_duration(kv_target: float, p: SystemParams, participation: float = 1.0) -> float:
    """Time at which the frictionless chirp reaches ``kv_target``."""
    return ((kv_target**3 + 0.75 * p.kappa**2 * kv_target) * p.kappa
            / (3.0 * coupling_strength(p, participation)))
