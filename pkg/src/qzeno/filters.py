"""Filter functions Q(w, tau) whose overlap with J(w) gives the decay rate.

Conventions: sinc(x) = sin(x)/x. The general spin-boson filter is

    Q = (2/tau) [coth(beta w/2) D1(w, tau) + D2(w, tau)]

with D1, D2 the ordered double integrals of the coupling-operator overlap
amplitudes r1, r2 against cos(w t') and sin(w t'). Two preparations
(theta=pi/2, phi=0 and theta=0, phi=0) have closed forms; everything else
goes through nested quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import (
    AccuracyError,
    DomainError,
    SingularBandError,
    StatePrep,
    SystemParams,
    Temperature,
    thermal_factor,
)
from .quad import NODES, QuadConfig, composite_rule, integrate_interval, integrate_triangle

D_ABS_TOL = 1e-10
SINGULAR_BAND_REL = 1e-3

BRANCH_X = "theta=pi/2,phi=0"
BRANCH_Z = "theta=0,phi=0"


@dataclass(frozen=True)
class PrecessionCoeffs:
    """Bloch components of the interaction-picture coupling operator."""

    ax: float
    ay: float
    az: float


@dataclass(frozen=True)
class OverlapAmplitudes:
    r1: float
    r2: float


@dataclass(frozen=True)
class DPair:
    d1: float
    d2: float


def _coeff_arrays(t, epsilon, delta):
    t = np.asarray(t, dtype=float)
    omega = math.hypot(epsilon, delta)
    if omega == 0.0:
        zero = np.zeros_like(t)
        return zero, zero.copy(), np.ones_like(t)
    e, d = epsilon / omega, delta / omega  # ratios first: omega**2 can underflow
    s2 = np.sin(0.5 * omega * t) ** 2
    ax = 2.0 * e * d * s2
    ay = d * np.sin(omega * t)
    az = 1.0 - 2.0 * d * d * s2
    return ax, ay, az


def precession_coeffs(t, sys: SystemParams) -> PrecessionCoeffs:
    ax, ay, az = _coeff_arrays(t, sys.epsilon, sys.delta)
    return PrecessionCoeffs(*(float(c) if c.ndim == 0 else c for c in (ax, ay, az)))


def rotated_coeffs(t, sys: SystemParams) -> PrecessionCoeffs:
    """Coefficients in the frame where the J_x-maximal state becomes |j>.

    The rotated system has eps_r = delta, delta_r = -epsilon.
    """
    t = np.asarray(t, dtype=float)
    eps_r, del_r = sys.delta, -sys.epsilon
    omega = math.hypot(eps_r, del_r)
    if omega == 0.0:
        bx, by, bz = np.ones_like(t), np.zeros_like(t), np.zeros_like(t)
    else:
        e, d = eps_r / omega, del_r / omega
        s2 = np.sin(0.5 * omega * t) ** 2
        bx = 1.0 - 2.0 * e * e * s2
        by = -e * np.sin(omega * t)
        bz = 2.0 * e * d * s2
    return PrecessionCoeffs(*(float(c) if c.ndim == 0 else c for c in (bx, by, bz)))


def _amplitude_fn(sys: SystemParams, prep: StatePrep):
    """Return t -> (r1(t), r2(t)) for a qubit prep or a large-spin prep (per particle)."""
    eps, dlt = sys.epsilon, sys.delta
    if prep.kind == "qubit":
        ct, st = math.cos(prep.theta), math.sin(prep.theta)
        cp, sp = math.cos(prep.phi), math.sin(prep.phi)
        if prep.theta == 0.0:
            ct, st = 1.0, 0.0
        if prep.phi == 0.0:
            cp, sp = 1.0, 0.0

        def amps(t):
            ax, ay, az = _coeff_arrays(t, eps, dlt)
            return -ax * cp * ct - ay * sp * ct + az * st, ay * cp - ax * sp

    elif prep.kind == "jz":

        def amps(t):
            ax, ay, _ = _coeff_arrays(t, eps, dlt)
            return -ax, ay

    else:  # jx: single-particle amplitudes built from the rotated-frame coefficients

        def amps(t):
            b = rotated_coeffs(t, sys)  # fields hold (b_x, b_y, b_z)
            return np.asarray(b.ax), -np.asarray(b.ay)

    return amps


def overlap_amplitudes(t, prep: StatePrep, sys: SystemParams) -> OverlapAmplitudes:
    if prep.kind != "qubit":
        raise DomainError("overlap_amplitudes needs a qubit preparation")
    r1, r2 = _amplitude_fn(sys, prep)(t)
    r1, r2 = np.asarray(r1), np.asarray(r2)
    return OverlapAmplitudes(float(r1) if r1.ndim == 0 else r1, float(r2) if r2.ndim == 0 else r2)


def filter_population_decay(omega, tau, epsilon):
    """tau * sinc^2((epsilon - omega) tau / 2)."""
    if not tau > 0:
        raise DomainError("tau must be positive")
    x = (epsilon - np.asarray(omega, dtype=float)) * tau / 2.0
    out = tau * np.sinc(x / np.pi) ** 2
    return float(out) if out.ndim == 0 else out


def _one_minus_cos_over_w2(w, tau):
    """(1 - cos(w tau)) / w^2 with its w -> 0 limit tau^2/2."""
    w = np.asarray(w, dtype=float)
    half = 0.5 * tau * np.sinc(0.5 * w * tau / np.pi)
    return 2.0 * half**2


def filter_pure_dephasing(omega, tau, T: Temperature = Temperature()):
    """(2/tau) coth(beta w/2) (1 - cos w tau)/w^2.

    At w = 0 the zero-temperature limit tau is returned; a thermal bath
    diverges there (the divergence is integrable against J).
    """
    if not tau > 0:
        raise DomainError("tau must be positive")
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise DomainError("omega must be non-negative")
    base = (2.0 / tau) * _one_minus_cos_over_w2(w, tau)
    if T.is_zero:
        out = base
    else:
        pos = w > 0
        coth = np.full_like(w, np.inf)
        if np.any(pos):
            coth[pos] = thermal_factor(w[pos], T)
        out = base * coth
    return float(out) if out.ndim == 0 else out


def singular_band_width(sys: SystemParams):
    return SINGULAR_BAND_REL * max(sys.omega_big, 1.0)


def in_singular_band(omega, sys: SystemParams):
    w = np.asarray(omega, dtype=float)
    band = singular_band_width(sys)
    if sys.omega_big < band:
        return np.ones_like(w, dtype=bool)
    return (np.abs(w - sys.omega_big) <= band) | (w <= band)


def closed_form_branch(prep: StatePrep):
    """Name of the closed-form branch matching ``prep``, or None."""
    if prep.kind == "qubit" and prep.phi == 0.0:
        if prep.theta == math.pi / 2:
            return BRANCH_X
        if prep.theta == 0.0:
            return BRANCH_Z
    if prep.kind == "jz":
        return BRANCH_Z
    if prep.kind == "jx":
        return BRANCH_X
    return None


def _closed_x(w, tau, eps, dlt, om):
    e2, d2, w2, o2 = eps**2, dlt**2, w**2, om**2
    cw, sw = np.cos(w * tau), np.sin(w * tau)
    cO, sO, c2O = math.cos(om * tau), math.sin(om * tau), math.cos(2 * om * tau)
    x1 = (
        3 * d2**2 * w2**2
        + 4 * o2 * cw * (e2 * (e2 - w2) * (w2 - o2) - d2 * w2 * (d2 + w2) * cO)
        + d2 * w * (4 * om**3 * (e2 - 2 * w2) * sw * sO - w * e2 * (w2 - o2) * (c2O - 4 * cO))
        - 8 * o2**3 * (d2 + w2)
        - 3 * d2 * w2 * o2 * (d2 + w2)
        + o2**2 * (4 * d2**2 + 15 * d2 * w2 + 4 * w2**2)
        + 4 * o2**4
    )
    x2 = 4 * o2**2 * w2 * (w2 - o2) ** 2
    x3 = dlt * (
        w * om * (e2 - d2 - w2) * sw * sO
        + cw * (e2 * (o2 - w2) - (o2 * (d2 + w2) + d2 * w2 - o2**2) * cO)
        + o2 * (d2 + w2)
        + d2 * w2
        + e2 * (w2 - o2) * cO
        - o2**2
    )
    x4 = w * o2 * (w2 - o2) ** 2
    return x1 / x2, x3 / x4


def _closed_z(w, tau, eps, dlt, om):
    e2, d2, w2, o2 = eps**2, dlt**2, w**2, om**2
    cw, sw = np.cos(w * tau), np.sin(w * tau)
    cO, sO, c2O = math.cos(om * tau), math.sin(om * tau), math.cos(2 * om * tau)
    x1 = d2 * (
        w2 * o2 * (w2 + 3 * o2)
        - 4 * w * om**3 * (w2 + e2) * sw * sO
        + 4 * o2 * cw * (e2 * (w2 - o2) - w2 * (o2 + e2) * cO)
        + w2 * (o2 - w2) * (d2 * c2O + 4 * e2 * cO)
        + e2 * (3 * w2**2 - 3 * w2 * o2 + 4 * o2**2)
    )
    x2 = 4 * o2**2 * w2 * (w2 - o2) ** 2
    x3 = 4 * d2 * eps * (
        w * np.cos(0.5 * w * tau) * math.sin(0.5 * om * tau)
        - om * np.sin(0.5 * w * tau) * math.cos(0.5 * om * tau)
    ) ** 2
    x4 = w * o2 * (w2 - o2) ** 2
    return x1 / x2, x3 / x4


def d_pair_closed(omega, tau, sys: SystemParams, prep: StatePrep):
    """Closed-form (D1, D2) for the two printed preparations.

    Vectorized over ``omega``; returns a ``DPair`` of floats or arrays.
    Raises ``SingularBandError`` if any frequency falls within the guard
    band around w = 0 or w = Omega, where the rational expressions are 0/0.
    """
    branch = closed_form_branch(prep)
    if branch is None:
        raise DomainError("no closed form for this preparation; use d_pair_numeric")
    w = np.asarray(omega, dtype=float)
    if tau == 0:
        z = np.zeros_like(w)
        return DPair(float(z) if z.ndim == 0 else z, float(z) if z.ndim == 0 else z.copy())
    if np.any(in_singular_band(w, sys)):
        raise SingularBandError(
            "omega inside the singular band around 0 or Omega; use d_pair_numeric"
        )
    fn = _closed_x if branch == BRANCH_X else _closed_z
    d1, d2 = fn(w, tau, sys.epsilon, sys.delta, sys.omega_big)
    if d1.ndim == 0:
        return DPair(float(d1), float(d2))
    return DPair(d1, d2)


def d_pair_numeric(omega, tau, sys: SystemParams, prep: StatePrep, abs_tol=D_ABS_TOL,
                   cfg: QuadConfig | None = None) -> DPair:
    """(D1, D2) for any preparation by nested quadrature over the triangle."""
    if tau < 0:
        raise DomainError("tau must be non-negative")
    if tau == 0:
        return DPair(0.0, 0.0)
    w = float(omega)
    amps = _amplitude_fn(sys, prep)
    cfg = cfg or QuadConfig(rel_tol=1e-13, abs_tol=abs_tol)
    osc = max(abs(w), sys.omega_big, 1.0 / tau)

    def g1(t, tp):
        a1, a2 = amps(t)
        b1, b2 = amps(t - tp)
        return np.cos(w * tp) * (b1 * a1 + b2 * a2)

    def g2(t, tp):
        a1, a2 = amps(t)
        b1, b2 = amps(t - tp)
        return np.sin(w * tp) * (b1 * a2 - a1 * b2)

    r1 = integrate_triangle(g1, tau, osc, cfg, abs_tol=abs_tol)
    r2 = integrate_triangle(g2, tau, osc, cfg, abs_tol=abs_tol)
    if r1.error_estimate > abs_tol or r2.error_estimate > abs_tol:
        raise AccuracyError("D-pair tolerance not reached", estimate=(r1.value, r2.value),
                            error=max(r1.error_estimate, r2.error_estimate))
    return DPair(r1.value, r2.value)


# Largest phase step per 15-point panel; the Kronrod rule is then exact to ~1e-16.
_PHASE_PER_PANEL = 2.0
_CHUNK = 1 << 20


@lru_cache(maxsize=32)
def _lag_kernels(tau, sys: SystemParams, prep: StatePrep, n_lag):
    """Lag nodes u with weighted kernels w_u K1(u), w_u K2(u).

    With the order of integration swapped,
    D1(w) = int_0^tau cos(w u) K1(u) du and D2(w) = int_0^tau sin(w u) K2(u) du, where
    K1(u) = int_0^{tau-u} [r1(s) r1(s+u) + r2(s) r2(s+u)] ds and
    K2(u) = int_0^{tau-u} [r1(s) r2(s+u) - r1(s+u) r2(s)] ds
    do not depend on w.
    """
    u, wu = composite_rule(0.0, tau, n_lag)
    n_s = max(1, math.ceil(tau * max(2.0 * sys.omega_big, 1.0) / _PHASE_PER_PANEL))
    x, wx = composite_rule(0.0, 1.0, n_s)
    span = tau - u
    s_ = span[:, None] * x[None, :]
    amps = _amplitude_fn(sys, prep)
    r1s, r2s = amps(s_)
    r1u, r2u = amps(s_ + u[:, None])
    k1 = span * ((r1s * r1u + r2s * r2u) @ wx)
    k2 = span * ((r1s * r2u - r1u * r2s) @ wx)
    shape = (n_lag, NODES.size)
    return (wu * k1).reshape(shape), (wu * k2).reshape(shape)


def d_pair_lagged(omega, tau, sys: SystemParams, prep: StatePrep):
    """(D1, D2) on a whole frequency array from one pair of lag kernels.

    Fast companion of ``d_pair_numeric`` for vectorized use; valid for any
    preparation and smooth through w = 0 and w = Omega. Lag panels are sized
    so that neither w*u nor Omega*u advances more than two radians per panel.
    """
    w = np.asarray(omega, dtype=float)
    if tau == 0:
        z = np.zeros_like(w)
        return DPair(z, z.copy())
    flat = w.reshape(-1)
    top = max(float(np.max(np.abs(flat), initial=0.0)), sys.omega_big, 1.0)
    need = tau * top / _PHASE_PER_PANEL
    n_lag = 1 << max(0, math.ceil(math.log2(need))) if need > 1 else 1
    c1, c2 = _lag_kernels(float(tau), sys, prep, n_lag)
    half = 0.5 * tau / n_lag
    mid = half * (2.0 * np.arange(n_lag) + 1.0)
    d1 = np.empty_like(flat)
    d2 = np.empty_like(flat)
    step = max(1, _CHUNK // n_lag)
    # exp(i w u) with u = mid_p + half x_k factorizes into panel and node phases
    for i in range(0, flat.size, step):
        w_ = flat[i : i + step, None]
        panel = np.exp(1j * w_ * mid[None, :])
        node = np.exp(1j * w_ * (half * NODES)[None, :])
        d1[i : i + step] = np.real(np.sum(panel * (node @ c1.T), axis=1))
        d2[i : i + step] = np.imag(np.sum(panel * (node @ c2.T), axis=1))
    if w.ndim == 0:
        return DPair(float(d1[0]), float(d2[0]))
    return DPair(d1.reshape(w.shape), d2.reshape(w.shape))


def _assemble(d1, d2, tau, w, T):
    if T.is_zero:
        return (2.0 / tau) * (d1 + d2)
    w = np.asarray(w, dtype=float)
    d1 = np.asarray(d1, dtype=float)
    pos = w > 0
    coth = np.full_like(w, np.inf)
    if np.any(pos):
        coth[pos] = thermal_factor(w[pos], T)
    # 0 * inf at w = 0 only when D1 vanishes identically
    term = np.where(d1 == 0, 0.0, coth * np.where(d1 == 0, 1.0, d1))
    return (2.0 / tau) * (term + d2)


def _filter_single(omega, tau, sys, prep, T):
    """Single-particle filter for a qubit or (per-particle) large-spin prep."""
    if not tau > 0:
        raise DomainError("tau must be positive")
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise DomainError("omega must be non-negative")
    flat = w.reshape(-1).astype(float)
    d1 = np.empty_like(flat)
    d2 = np.empty_like(flat)
    if closed_form_branch(prep) is not None:
        band = in_singular_band(flat, sys)
    else:
        band = np.ones_like(flat, dtype=bool)
    if np.any(~band):
        pair = d_pair_closed(flat[~band], tau, sys, prep)
        d1[~band], d2[~band] = pair.d1, pair.d2
    if np.any(band):
        pair = d_pair_lagged(flat[band], tau, sys, prep)
        d1[band], d2[band] = pair.d1, pair.d2
    q = _assemble(d1, d2, tau, flat, T)
    return float(q[0]) if w.ndim == 0 else q.reshape(w.shape)


def filter_general(omega, tau, sys: SystemParams, prep: StatePrep, T: Temperature = Temperature()):
    """Spin-boson filter for a qubit prepared at Bloch angles (theta, phi).

    Vectorized over ``omega``. Closed forms are used where available,
    nested quadrature elsewhere.
    """
    if prep.kind != "qubit":
        raise DomainError("filter_general needs a qubit preparation")
    return _filter_single(omega, tau, sys, prep, T)


def zero_temperature_amplitude_form(omega, tau, sys: SystemParams, prep: StatePrep,
                                    abs_tol=1e-12):
    """(1/tau) |int_0^tau exp(-i w t) (r1 + i r2) dt|^2 by 1D quadrature.

    Equivalent to the zero-temperature filter, and computed along an
    independent route (no double integral, no closed form).
    """
    if not tau > 0:
        raise DomainError("tau must be positive")
    w = float(omega)
    amps = _amplitude_fn(sys, prep)
    cfg = QuadConfig(rel_tol=1e-13, abs_tol=abs_tol)
    osc = max(abs(w), sys.omega_big, 1.0 / tau)

    def re(t):
        r1, r2 = amps(t)
        return np.cos(w * t) * r1 + np.sin(w * t) * r2

    def im(t):
        r1, r2 = amps(t)
        return np.cos(w * t) * r2 - np.sin(w * t) * r1

    a = integrate_interval(re, 0.0, tau, osc, cfg)
    b = integrate_interval(im, 0.0, tau, osc, cfg)
    return (a.value**2 + b.value**2) / tau


def filter_large_spin(omega, tau, sys: SystemParams, prep: StatePrep, T: Temperature = Temperature()):
    """Collective filter: 2j times the single-particle filter.

    ``jz`` uses the (theta=0, phi=0) single-particle amplitudes, ``jx`` the
    rotated-frame amplitudes, which coincide with (theta=pi/2, phi=0).
    """
    if not prep.is_large_spin:
        raise DomainError("filter_large_spin needs a jz or jx preparation")
    return prep.n_spins * _filter_single(omega, tau, sys, prep, T)
