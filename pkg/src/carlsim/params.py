"""Physical parameters of the ring-cavity / atom system and unit conversions.

All angular rates are stored in rad/s. Field amplitudes are scaled to the
field per photon, so that the intracavity photon number is ``|alpha|**2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

# CODATA 2018
HBAR = 1.054571817e-34  # J s
C_LIGHT = 299_792_458.0  # m/s
K_B = 1.380649e-23  # J/K
AMU = 1.66053906660e-27  # kg
RB85_MASS_AMU = 84.911789738

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SystemParams:
    """Cavity, atom and drive parameters.

    ``delta_c=None`` means the laser is locked to the atom-shifted cavity
    resonance, i.e. the detuning tracks ``n_atoms * u0``.
    """

    kappa: float = TWO_PI * 22e3
    fsr: float = C_LIGHT / 0.085
    wavelength: float = 797.0e-9
    mirror_T: float = 1.8e-6
    u0: float = -0.077
    delta_c: Optional[float] = None
    n_atoms: float = 1e6
    mass: float = RB85_MASS_AMU * AMU
    eta_plus: float = 0.0
    eta_minus: float = 0.0
    gamma_fric: float = 0.0

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if not self.fsr > 0:
            raise ValueError(f"fsr must be positive, got {self.fsr}")
        if not self.wavelength > 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")
        if not 0 < self.mirror_T < 1:
            raise ValueError(f"mirror_T must lie in (0, 1), got {self.mirror_T}")
        if self.n_atoms < 0:
            raise ValueError(f"n_atoms must be >= 0, got {self.n_atoms}")
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if self.gamma_fric < 0:
            raise ValueError(f"gamma_fric must be >= 0, got {self.gamma_fric}")

    @property
    def k(self) -> float:
        return TWO_PI / self.wavelength

    @property
    def omega(self) -> float:
        return TWO_PI * C_LIGHT / self.wavelength

    @property
    def detuning(self) -> float:
        """Cavity detuning, resolving the locked case."""
        if self.delta_c is None:
            return self.n_atoms * self.u0
        return self.delta_c

    @property
    def photon_power(self) -> float:
        """hbar * omega * fsr: intracavity power of one photon, W."""
        return HBAR * self.omega * self.fsr

    def derived(self) -> "DerivedParams":
        return DerivedParams(
            chi=susceptibility(self),
            alpha_plus=stationary_pump(self),
            epsilon=recoil_parameter(self),
            k=self.k,
        )

    def replace(self, **changes) -> "SystemParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class DerivedParams:
    chi: complex
    alpha_plus: complex
    epsilon: float
    k: float


def susceptibility(p: SystemParams) -> complex:
    """chi = kappa + i N U0 - i Delta_c."""
    return complex(p.kappa, p.n_atoms * p.u0 - p.detuning)


def stationary_pump(p: SystemParams) -> complex:
    chi = susceptibility(p)
    if chi == 0:
        raise ValueError("susceptibility vanishes; stationary pump undefined")
    return p.eta_plus / chi


def recoil_parameter(p: SystemParams) -> float:
    """epsilon = hbar k^2 / m, twice the recoil shift (rad/s)."""
    return HBAR * p.k**2 / p.mass


def power_from_amplitude(alpha, p: SystemParams, outcoupled: bool = False) -> float:
    power = p.photon_power * abs(alpha) ** 2
    return p.mirror_T * power if outcoupled else power


def amplitude_from_power(power: float, p: SystemParams, outcoupled: bool = False) -> float:
    """Inverse of :func:`power_from_amplitude`; returns the non-negative |alpha|."""
    if power < 0:
        raise ValueError(f"power must be >= 0, got {power}")
    if outcoupled:
        power = power / p.mirror_T
    return math.sqrt(power / p.photon_power)


def pump_rate_from_input(alpha_in, p: SystemParams):
    """eta = sqrt(fsr * kappa) * alpha_in."""
    return math.sqrt(p.fsr * p.kappa) * alpha_in


def pump_rate_for_cavity_power(power: float, p: SystemParams) -> float:
    """Pump rate that sustains ``power`` W in the pump mode, given ``p``'s chi."""
    return amplitude_from_power(power, p) * abs(susceptibility(p))


def velocity_to_beat(v, p: SystemParams):
    """Pump-probe frequency difference (rad/s) for atoms moving at ``v``."""
    return 2.0 * p.k * v


def beat_to_velocity(delta_omega, p: SystemParams):
    return delta_omega / (2.0 * p.k)
