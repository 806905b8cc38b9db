"""Integration of the coupled probe / macro-particle equations.

Atoms enter only through ``phi_n = 2 k x_n`` and ``u_n = k v_n``; each
macro-particle stands for ``weight`` physical atoms. The pump mode is held at
its stationary value ``eta_plus / chi``.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from . import _kernel
from .observables import (
    DEFAULT_WINDOW,
    TimeSeriesRecord,
    beat_frequency_phase_slope,
    beat_power,
    probe_power,
)
from .params import K_B, HBAR, SystemParams, recoil_parameter, stationary_pump, susceptibility

STABILITY_LIMIT = 0.05
BLOWUP_RATIO = 10.0
MAX_BARRIER = 1e6  # V0 / kT beyond which rejection sampling is refused

CSV_COLUMNS = (
    "t",
    "re_alpha_minus",
    "im_alpha_minus",
    "p_beat_W",
    "p_probe_out_W",
    "bunching",
    "x_cm_m",
    "v_cm_mps",
    "beat_freq_hz",
)

EVENT_NAMES = ("set_eta_minus", "set_gamma_fric")
DISTRIBUTIONS = ("bunched_thermal", "homogeneous_thermal")


class IntegrationError(RuntimeError):
    """Raised when the state stops being finite."""

    def __init__(self, t: float, message: str = ""):
        self.t = t
        super().__init__(message or f"non-finite state at t = {t:.9g} s")


@dataclass
class EnsembleState:
    phases: np.ndarray
    scaled_velocities: np.ndarray
    weight: float

    def __post_init__(self):
        self.phases = np.array(self.phases, dtype=float)
        self.scaled_velocities = np.array(self.scaled_velocities, dtype=float)
        if self.phases.ndim != 1 or self.phases.shape != self.scaled_velocities.shape:
            raise ValueError("phases and scaled_velocities must be 1-d arrays of equal length")
        if self.phases.size < 1:
            raise ValueError("ensemble needs at least one macro-particle")
        if self.weight < 0:
            raise ValueError(f"weight must be >= 0, got {self.weight}")

    @property
    def count(self) -> int:
        return self.phases.size

    @property
    def n_atoms(self) -> float:
        return self.weight * self.count

    def copy(self) -> "EnsembleState":
        return EnsembleState(self.phases.copy(), self.scaled_velocities.copy(), self.weight)

    def check_atoms(self, p: SystemParams) -> None:
        if not math.isclose(self.n_atoms, p.n_atoms, rel_tol=1e-9, abs_tol=1e-9):
            raise ValueError(
                f"ensemble represents {self.n_atoms:g} atoms but params have n_atoms={p.n_atoms:g}"
            )


@dataclass(frozen=True)
class ProbeField:
    alpha_minus: complex

    def __post_init__(self):
        if not (math.isfinite(self.alpha_minus.real) and math.isfinite(self.alpha_minus.imag)):
            raise ValueError("probe amplitude must be finite")


@dataclass(frozen=True)
class Event:
    time: float
    name: str
    value: float

    def __post_init__(self):
        if self.name not in EVENT_NAMES:
            raise ValueError(f"unknown event {self.name!r}; expected one of {EVENT_NAMES}")


@dataclass(frozen=True)
class ScenarioConfig:
    """Declarative description of one run.

    ``probe_seed_amplitude=None`` selects ``1e-3 |alpha_+| / sqrt(count)``.
    ``chunk`` fixes the summation blocking of the phasor sum (0: one block).
    """

    initial_distribution: str = "homogeneous_thermal"
    temperature: float = 200e-6
    seed: int = 0
    events: tuple = ()
    t_end: float = 1e-3
    dt: float = 2e-8
    sample_every: int = 10
    probe_seed_amplitude: Optional[float] = None
    n_particles: int = 100
    chunk: int = 0
    window: float = DEFAULT_WINDOW

    def __post_init__(self):
        if self.initial_distribution not in DISTRIBUTIONS:
            raise ValueError(
                f"unknown initial_distribution {self.initial_distribution!r}; expected one of {DISTRIBUTIONS}"
            )
        if not self.temperature > 0:
            raise ValueError(f"temperature must be positive, got {self.temperature}")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")
        if not self.dt > 0 or not self.t_end > 0:
            raise ValueError("dt and t_end must be positive")
        if self.sample_every < 1:
            raise ValueError("sample_every must be >= 1")
        if self.n_particles < 1:
            raise ValueError("n_particles must be >= 1")
        if self.probe_seed_amplitude is not None and self.probe_seed_amplitude < 0:
            raise ValueError("probe_seed_amplitude must be >= 0")
        events = tuple(e if isinstance(e, Event) else Event(*e) for e in self.events)
        if any(b.time < a.time for a, b in zip(events, events[1:])):
            raise ValueError("events must be sorted by time")
        object.__setattr__(self, "events", events)

    def replace(self, **changes) -> "ScenarioConfig":
        from dataclasses import replace

        return replace(self, **changes)


# --------------------------------------------------------------------------
# equations of motion


def rhs(alpha_minus: complex, ens: EnsembleState, p: SystemParams):
    """Time derivatives ``(d alpha/dt, d phi/dt, d u/dt)``."""
    chi = susceptibility(p)
    eps = recoil_parameter(p)
    phases = ens.phases
    total = ens.weight * np.sum(np.exp(1j * phases))
    dalpha = -chi * alpha_minus + p.eta_minus - 1j * p.u0 * p.eta_plus / chi * total
    du = -4.0 * eps * p.u0 * p.eta_plus * np.imag(
        alpha_minus / np.conj(chi) * np.exp(-1j * phases)
    ) - p.gamma_fric * ens.scaled_velocities
    return dalpha, 2.0 * ens.scaled_velocities, du


def _coefs(p: SystemParams):
    chi = susceptibility(p)
    eps = recoil_parameter(p)
    return (
        chi,
        chi.conjugate(),
        -1j * p.u0 * p.eta_plus / chi,
        -4.0 * eps * p.u0 * p.eta_plus,
        float(p.gamma_fric),
        complex(p.eta_minus),
    )


def step(alpha_minus: complex, ens: EnsembleState, p: SystemParams, dt: float, chunk: int = 0):
    """One classical RK4 step; returns a new ``(alpha_minus, ensemble)``."""
    out = ens.copy()
    alpha, failed = _kernel.advance(
        complex(alpha_minus), out.phases, out.scaled_velocities, float(ens.weight),
        *_coefs(p), float(dt), 1, int(chunk),
    )
    if failed >= 0:
        raise IntegrationError(dt)
    return alpha, out


def stability_number(ens: EnsembleState, p: SystemParams, dt: float) -> float:
    """Largest of |chi| dt, 2 max|u| dt and gamma dt; keep below 0.05."""
    vmax = float(np.max(np.abs(ens.scaled_velocities)))
    return max(abs(susceptibility(p)), 2.0 * vmax, p.gamma_fric) * dt


# --------------------------------------------------------------------------
# initial conditions


def _boltzmann_barrier(p: SystemParams, temperature: float) -> float:
    """V0 / kT for the symmetric standing wave of depth 4 hbar |U0| |alpha_+|^2."""
    depth = 4.0 * HBAR * abs(p.u0) * abs(stationary_pump(p)) ** 2
    return depth / (K_B * temperature)


def sample_phases_boltzmann(rng: np.random.Generator, count: int, barrier: float, minimum: float = 0.0):
    """Draw phases with density proportional to ``exp((barrier/2) cos(phi - minimum))``.

    Rejection sampling against a uniform proposal over one period.
    """
    if not math.isfinite(barrier) or barrier > MAX_BARRIER:
        raise ValueError(f"V0/kT = {barrier:g} is too large to sample")
    a = 0.5 * barrier
    out = np.empty(0)
    while out.size < count:
        need = count - out.size
        accept_rate = 1.0 if a < 1 else 1.0 / math.sqrt(2 * math.pi * a)
        batch = int(min(4 * need / accept_rate + 16, 5_000_000))
        phi = rng.uniform(0.0, 2.0 * math.pi, batch)
        keep = rng.uniform(0.0, 1.0, batch) < np.exp(a * (np.cos(phi) - 1.0))
        out = np.concatenate([out, phi[keep][:need]])
    return np.mod(out + minimum, 2.0 * math.pi)


def sample_initial(cfg: ScenarioConfig, p: SystemParams, rng: Optional[np.random.Generator] = None) -> EnsembleState:
    """Thermal macro-particle ensemble, deterministic in ``cfg.seed``."""
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    count = cfg.n_particles
    v_rms = math.sqrt(K_B * cfg.temperature / p.mass)
    u = p.k * rng.normal(0.0, v_rms, count)
    if cfg.initial_distribution == "homogeneous_thermal":
        phases = rng.uniform(0.0, 2.0 * math.pi, count)
    else:
        barrier = _boltzmann_barrier(p, cfg.temperature)
        # red detuning (U0 < 0) traps at the intensity maxima, phi = 0
        minimum = 0.0 if p.u0 <= 0 else math.pi
        phases = sample_phases_boltzmann(rng, count, barrier, minimum)
    return EnsembleState(phases, u, p.n_atoms / count)


def initial_probe(cfg: ScenarioConfig, p: SystemParams, rng: np.random.Generator, count: int) -> complex:
    """Reverse-mode steady state ``eta_minus / chi`` plus a random-phase seed."""
    alpha_plus = stationary_pump(p)
    amp = cfg.probe_seed_amplitude
    if amp is None:
        amp = 1e-3 * abs(alpha_plus) / math.sqrt(count)
    phase = rng.uniform(0.0, 2.0 * math.pi)
    return p.eta_minus / susceptibility(p) + amp * complex(math.cos(phase), math.sin(phase))


# --------------------------------------------------------------------------
# scenario runner


@dataclass
class TimeSeries:
    """Sampled observables of one run, column-oriented."""

    t: np.ndarray
    alpha_minus: np.ndarray
    p_beat: np.ndarray
    p_probe_out: np.ndarray
    bunching: np.ndarray
    x_cm: np.ndarray
    v_cm: np.ndarray
    beat_freq: np.ndarray
    alpha_plus: complex
    params: SystemParams
    final_alpha_minus: complex = 0j
    final_ensemble: Optional[EnsembleState] = None
    warnings: list = field(default_factory=list)

    def __len__(self) -> int:
        return self.t.size

    @property
    def kv_cm(self) -> np.ndarray:
        return self.params.k * self.v_cm

    def records(self) -> Iterator[TimeSeriesRecord]:
        for i in range(len(self)):
            f = self.beat_freq[i]
            yield TimeSeriesRecord(
                t=float(self.t[i]),
                alpha_minus=complex(self.alpha_minus[i]),
                p_beat=float(self.p_beat[i]),
                p_probe_out=float(self.p_probe_out[i]),
                bunching=float(self.bunching[i]),
                x_cm=float(self.x_cm[i]),
                v_cm=float(self.v_cm[i]),
                beat_freq=None if math.isnan(f) else float(f),
            )

    def write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for i in range(len(self)):
            a = self.alpha_minus[i]
            w.writerow([repr(float(v)) for v in (
                self.t[i], a.real, a.imag, self.p_beat[i], self.p_probe_out[i],
                self.bunching[i], self.x_cm[i], self.v_cm[i], self.beat_freq[i],
            )])

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def _event_steps(events: Sequence[Event], dt: float) -> list[tuple[int, Event]]:
    return [(max(0, int(round(e.time / dt))), e) for e in events]


def _apply(p: SystemParams, e: Event) -> SystemParams:
    if e.name == "set_eta_minus":
        return p.replace(eta_minus=e.value)
    return p.replace(gamma_fric=e.value)


def run_scenario(
    cfg: ScenarioConfig,
    p: SystemParams,
    ensemble: Optional[EnsembleState] = None,
    alpha0: Optional[complex] = None,
) -> TimeSeries:
    """Integrate a scenario and sample observables every ``cfg.sample_every`` steps.

    ``ensemble`` and ``alpha0`` override the sampled initial state. Parameters
    are piecewise constant between events; an event is applied before the
    step whose start time is nearest to it.
    """
    rng = np.random.default_rng(cfg.seed)
    if ensemble is None:
        ensemble = sample_initial(cfg, p, rng)
    else:
        ensemble = ensemble.copy()
    ensemble.check_atoms(p)
    if alpha0 is None:
        alpha0 = initial_probe(cfg, p, rng, ensemble.count)
    alpha = complex(alpha0)

    alpha_plus = stationary_pump(p)
    dt = cfg.dt
    n_steps = int(round(cfg.t_end / dt))
    n_samples = n_steps // cfg.sample_every + 1
    pending = _event_steps(cfg.events, dt)

    ts = np.empty(n_samples)
    alphas = np.empty(n_samples, dtype=complex)
    bunch = np.empty(n_samples)
    xs = np.empty(n_samples)
    vs = np.empty(n_samples)
    notes: list[str] = []
    warned_stability = False
    warned_blowup = False

    phi = ensemble.phases
    u = ensemble.scaled_velocities
    w = float(ensemble.weight)
    k = p.k
    alpha_bound = BLOWUP_RATIO * abs(alpha_plus)
    coefs = _coefs(p)

    i = 0
    j = 0
    while True:
        changed = False
        while pending and pending[0][0] <= i:
            p = _apply(p, pending.pop(0)[1])
            changed = True
        if changed:
            coefs = _coefs(p)
        if i % cfg.sample_every == 0:
            s, mean_phi, mean_u = _kernel.moments(phi, u, w, cfg.chunk)
            ts[j] = i * dt
            alphas[j] = alpha
            bunch[j] = min(1.0, abs(s) / p.n_atoms) if p.n_atoms > 0 else 0.0
            xs[j] = mean_phi / (2.0 * k)
            vs[j] = mean_u / k
            j += 1
            if not warned_stability:
                sn = max(abs(coefs[0]), 2.0 * float(np.max(np.abs(u))), p.gamma_fric) * dt
                if sn > STABILITY_LIMIT:
                    warned_stability = True
                    notes.append(f"t={i * dt:.6g}: step stability number {sn:.3g} exceeds {STABILITY_LIMIT}")
            if not warned_blowup and alpha_bound > 0 and abs(alpha) > alpha_bound:
                warned_blowup = True
                notes.append(f"t={i * dt:.6g}: |alpha_minus| exceeds {BLOWUP_RATIO:g} |alpha_plus|")
        if i >= n_steps:
            break
        stop = min(n_steps, (i // cfg.sample_every + 1) * cfg.sample_every)
        if pending:
            stop = min(stop, max(pending[0][0], i + 1))
        alpha, failed = _kernel.advance(alpha, phi, u, w, *coefs, dt, stop - i, cfg.chunk)
        if failed >= 0:
            raise IntegrationError((i + failed + 1) * dt)
        i = stop

    for note in notes:
        warnings.warn(note, RuntimeWarning, stacklevel=2)

    freq = beat_frequency_phase_slope(ts, alphas, cfg.window) if n_samples >= 2 else np.full(n_samples, np.nan)
    return TimeSeries(
        t=ts,
        alpha_minus=alphas,
        p_beat=beat_power(alpha_plus, alphas, p),
        p_probe_out=probe_power(alphas, p),
        bunching=bunch,
        x_cm=xs,
        v_cm=vs,
        beat_freq=freq,
        alpha_plus=alpha_plus,
        params=p,
        final_alpha_minus=alpha,
        final_ensemble=EnsembleState(phi, u, w),
        warnings=notes,
    )
