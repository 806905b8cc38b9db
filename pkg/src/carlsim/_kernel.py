"""Compiled RK4 kernel for the probe + macro-particle system.

State layout: complex probe ``alpha``, phases ``phi = 2 k x`` and scaled
velocities ``u = k v`` (float arrays, updated in place), uniform weight ``w``.
The phasor sum is accumulated sequentially inside fixed-size chunks and the
chunk partials are then added in order, so results depend on ``chunk`` but
never on scheduling.
"""
import numpy as np
from numba import njit

# coefs = (chi, chi_conj, source, force, gamma, drive)
#   d alpha / dt = -chi alpha + drive + source * sum_n w e^{i phi_n}
#   d u_n / dt   = force * Im[(alpha / chi_conj) e^{-i phi_n}] - gamma u_n


@njit(cache=True)
def phasor_sum(phi, w, chunk):
    n = phi.shape[0]
    if chunk <= 0:
        chunk = n if n > 0 else 1
    total_re = 0.0
    total_im = 0.0
    start = 0
    while start < n:
        stop = min(start + chunk, n)
        re = 0.0
        im = 0.0
        for i in range(start, stop):
            re += np.cos(phi[i])
            im += np.sin(phi[i])
        total_re += re
        total_im += im
        start = stop
    return complex(w * total_re, w * total_im)


@njit(cache=True)
def _deriv(alpha, phi, u, w, chi, chi_conj, source, force, gamma, drive, chunk, dphi, du):
    n = phi.shape[0]
    if chunk <= 0:
        chunk = n
    a = alpha / chi_conj
    ar = a.real
    ai = a.imag
    total_re = 0.0
    total_im = 0.0
    re = 0.0
    im = 0.0
    for i in range(n):
        c = np.cos(phi[i])
        sn = np.sin(phi[i])
        re += c
        im += sn
        if (i + 1) % chunk == 0 or i == n - 1:
            total_re += re
            total_im += im
            re = 0.0
            im = 0.0
        # Im[a e^{-i phi}] = ai cos(phi) - ar sin(phi)
        du[i] = force * (ai * c - ar * sn) - gamma * u[i]
        dphi[i] = 2.0 * u[i]
    return -chi * alpha + drive + source * complex(w * total_re, w * total_im)


@njit(cache=True)
def advance(alpha, phi, u, w, chi, chi_conj, source, force, gamma, drive, dt, nsteps, chunk):
    """Take ``nsteps`` RK4 steps in place.

    Returns ``(alpha, failed_step)`` where ``failed_step`` is -1 on success or
    the index (within this call) of the first step producing non-finite values.
    """
    n = phi.shape[0]
    k1p = np.empty(n)
    k1u = np.empty(n)
    k2p = np.empty(n)
    k2u = np.empty(n)
    k3p = np.empty(n)
    k3u = np.empty(n)
    k4p = np.empty(n)
    k4u = np.empty(n)
    tp = np.empty(n)
    tu = np.empty(n)
    half = 0.5 * dt
    for step in range(nsteps):
        k1a = _deriv(alpha, phi, u, w, chi, chi_conj, source, force, gamma, drive, chunk, k1p, k1u)
        for i in range(n):
            tp[i] = phi[i] + half * k1p[i]
            tu[i] = u[i] + half * k1u[i]
        k2a = _deriv(alpha + half * k1a, tp, tu, w, chi, chi_conj, source, force, gamma, drive, chunk, k2p, k2u)
        for i in range(n):
            tp[i] = phi[i] + half * k2p[i]
            tu[i] = u[i] + half * k2u[i]
        k3a = _deriv(alpha + half * k2a, tp, tu, w, chi, chi_conj, source, force, gamma, drive, chunk, k3p, k3u)
        for i in range(n):
            tp[i] = phi[i] + dt * k3p[i]
            tu[i] = u[i] + dt * k3u[i]
        k4a = _deriv(alpha + dt * k3a, tp, tu, w, chi, chi_conj, source, force, gamma, drive, chunk, k4p, k4u)
        sixth = dt / 6.0
        alpha = alpha + sixth * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
        finite = np.isfinite(alpha.real) and np.isfinite(alpha.imag)
        for i in range(n):
            phi[i] += sixth * (k1p[i] + 2.0 * k2p[i] + 2.0 * k3p[i] + k4p[i])
            u[i] += sixth * (k1u[i] + 2.0 * k2u[i] + 2.0 * k3u[i] + k4u[i])
            if not (np.isfinite(phi[i]) and np.isfinite(u[i])):
                finite = False
        if not finite:
            return alpha, step
    return alpha, -1


@njit(cache=True)
def moments(phi, u, w, chunk):
    """Phasor sum, mean phase and mean scaled velocity."""
    s = phasor_sum(phi, w, chunk)
    n = phi.shape[0]
    sp = 0.0
    su = 0.0
    for i in range(n):
        sp += phi[i]
        su += u[i]
    return s, sp / n, su / n
