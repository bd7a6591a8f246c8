"""Brute-force reference computations, independent of the package's quadrature.

Everything here uses fixed uniform grids (trapezoid rule on the triangle,
optionally Richardson-extrapolated) or closed forms.
"""

import math

import numpy as np


def qubit_amplitudes(t, eps, delta, theta, phi):
    """r1, r2 from the Bloch-rotation formulas, written out independently."""
    om = math.hypot(eps, delta)
    if om == 0:
        ax, ay, az = 0 * t, 0 * t, 1 + 0 * t
    else:
        e, d = eps / om, delta / om
        ax = 2 * e * d * np.sin(om * t / 2) ** 2
        ay = d * np.sin(om * t)
        az = 1 - 2 * d * d * np.sin(om * t / 2) ** 2
    r1 = -ax * math.cos(phi) * math.cos(theta) - ay * math.sin(phi) * math.cos(theta) + az * math.sin(theta)
    r2 = ay * math.cos(phi) - ax * math.sin(phi)
    return r1, r2


def _triangle_kernels(r1, r2, h):
    """K1[j], K2[j] = sum_i w_ij X(i, j) h^2 with trapezoid weights on the triangle j <= i.

    X1 = r1[i-j] r1[i] + r2[i-j] r2[i]; X2 = r1[i-j] r2[i] - r1[i] r2[i-j].
    D1(w) = sum_j cos(w j h) K1[j], D2(w) = sum_j sin(w j h) K2[j].
    """
    n = len(r1) - 1
    k1 = np.zeros(n + 1)
    k2 = np.zeros(n + 1)
    outer_w = np.ones(n + 1)
    outer_w[0] = outer_w[-1] = 0.5
    for j in range(n + 1):
        i = np.arange(j, n + 1)
        x1 = r1[i - j] * r1[i] + r2[i - j] * r2[i]
        x2 = r1[i - j] * r2[i] - r1[i] * r2[i - j]
        # inner trapezoid over j' in [0, i]: half weight at j' = 0 and j' = i
        wi = outer_w[i] * np.where(j == 0, 0.5, 1.0) * np.where(i == j, 0.5, 1.0)
        wi = np.where((i == 0) & (j == 0), 0.0, wi)
        k1[j] = h * h * np.sum(wi * x1)
        k2[j] = h * h * np.sum(wi * x2)
    return k1, k2


def d_pair_trapezoid(omegas, tau, eps, delta, theta, phi, n):
    t = np.linspace(0.0, tau, n + 1)
    h = tau / n
    r1, r2 = qubit_amplitudes(t, eps, delta, theta, phi)
    k1, k2 = _triangle_kernels(r1, r2, h)
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    d1 = np.array([np.sum(np.cos(w * t) * k1) for w in omegas])
    d2 = np.array([np.sum(np.sin(w * t) * k2) for w in omegas])
    return d1, d2


def d_pair_richardson(omegas, tau, eps, delta, theta, phi, n):
    """Trapezoid at n and n/2 panels combined to cancel the h^2 error (Simpson-order)."""
    a1, a2 = d_pair_trapezoid(omegas, tau, eps, delta, theta, phi, n)
    b1, b2 = d_pair_trapezoid(omegas, tau, eps, delta, theta, phi, n // 2)
    return a1 + (a1 - b1) / 3, a2 + (a2 - b2) / 3


def gamma_triple_grid(tau, eps, delta, theta, phi, G, s, wc, n_t=2000, d_omega=0.02, omega_max=300.0):
    """Gamma = int J(w) (2/tau)(D1 + D2) dw on fixed grids in w, t and t' (zero temperature)."""
    t = np.linspace(0.0, tau, n_t + 1)
    r1, r2 = qubit_amplitudes(t, eps, delta, theta, phi)
    k1a, k2a = _triangle_kernels(r1, r2, tau / n_t)
    t2 = np.linspace(0.0, tau, n_t // 2 + 1)
    q1, q2 = qubit_amplitudes(t2, eps, delta, theta, phi)
    k1b, k2b = _triangle_kernels(q1, q2, 2 * tau / n_t)
    n_w = int(round(omega_max / d_omega))
    w = np.linspace(0.0, omega_max, n_w + 1)
    simpson = np.ones(n_w + 1)
    simpson[1:-1:2], simpson[2:-1:2] = 4.0, 2.0
    simpson *= d_omega / 3
    total = 0.0
    for chunk in np.array_split(np.arange(n_w + 1), 50):
        wc_ = w[chunk]
        da = np.cos(np.outer(wc_, t)) @ k1a + np.sin(np.outer(wc_, t)) @ k2a
        db = np.cos(np.outer(wc_, t2)) @ k1b + np.sin(np.outer(wc_, t2)) @ k2b
        d = da + (da - db) / 3
        jw = G * wc_**s * wc ** (1 - s) * np.exp(-wc_ / wc)
        total += np.sum(simpson[chunk] * jw * (2 / tau) * d)
    return total
