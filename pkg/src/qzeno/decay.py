"""Effective decay rate, survival probability and Zeno/anti-Zeno regimes."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import (
    DomainError,
    MeasurementProtocol,
    SpectralDensity,
    StatePrep,
    SystemParams,
    Temperature,
    spectral_density,
    thermal_factor,
)
from .filters import (
    _one_minus_cos_over_w2,
    filter_general,
    filter_large_spin,
    filter_population_decay,
    filter_pure_dephasing,
)
from .quad import QuadConfig, integrate_semi_infinite

POPULATION_DECAY = "decay"
PURE_DEPHASING = "dephasing"
GENERAL = "general"
LARGE_SPIN = "large"
FAMILIES = (POPULATION_DECAY, PURE_DEPHASING, GENERAL, LARGE_SPIN)

WORKERS_ENV = "QZENO_WORKERS"
NO_DECAY_THRESHOLD = 1e-14


@dataclass(frozen=True)
class ModelSpec:
    """Which filter family to use, with system, preparation, bath and temperature.

    ``decay`` is the rotating-wave population-decay model prepared in the
    excited state (theta=0). ``dephasing`` uses only the sigma_z coupling.
    """

    family: str
    sys: SystemParams
    prep: StatePrep
    bath: SpectralDensity
    T: Temperature = Temperature()

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.family == LARGE_SPIN and not self.prep.is_large_spin:
            raise DomainError("large-spin family needs a jz or jx preparation")
        if self.family != LARGE_SPIN and self.prep.is_large_spin:
            raise DomainError(f"{self.family} family needs a qubit preparation")
        if self.family == POPULATION_DECAY and (self.prep.theta != 0.0 or self.prep.phi != 0.0):
            raise DomainError("population-decay family prepares the excited state (theta=0)")


def filter_for(model: ModelSpec, tau):
    """Vectorized w -> Q(w, tau) for ``model``."""
    fam = model.family
    if fam == POPULATION_DECAY:
        return lambda w: filter_population_decay(w, tau, model.sys.epsilon)
    if fam == PURE_DEPHASING:
        weight = math.sin(model.prep.theta) ** 2
        return lambda w: weight * filter_pure_dephasing(w, tau, model.T)
    if fam == GENERAL:
        return lambda w: filter_general(w, tau, model.sys, model.prep, model.T)
    return lambda w: filter_large_spin(w, tau, model.sys, model.prep, model.T)


def effective_decay_rate(tau, model: ModelSpec, cfg: QuadConfig = QuadConfig()):
    """Gamma(tau) = int_0^inf J(w) Q(w, tau) dw."""
    if not tau > 0:
        raise DomainError("tau must be positive")
    if model.family == LARGE_SPIN and model.prep.n_spins != 1:
        # exact linearity in the particle number
        single = StatePrep(model.prep.kind, n_spins=1)
        one = effective_decay_rate(tau, ModelSpec(LARGE_SPIN, model.sys, single, model.bath, model.T), cfg)
        return model.prep.n_spins * one
    q = filter_for(model, tau)
    bath = model.bath
    osc = tau + 2 * math.pi / max(model.sys.omega_big, 1.0)
    res = integrate_semi_infinite(lambda w: spectral_density(w, bath) * q(w), bath.cutoff_wc, osc, cfg)
    return res.value


def survival_probability(protocol: MeasurementProtocol, gamma):
    if not gamma >= 0:
        raise DomainError("gamma must be non-negative")
    return math.exp(-gamma * protocol.n_measurements * protocol.tau)


def pure_dephasing_exact(tau, bath: SpectralDensity, T: Temperature = Temperature(),
                         cfg: QuadConfig = QuadConfig()):
    """Exact dephasing rate -(1/tau) ln[1 - (1 - exp(-gamma))/2].

    gamma(tau) = int J(w) (4/w^2)(1 - cos w tau) coth(beta w/2) dw.
    """
    if not tau > 0:
        raise DomainError("tau must be positive")

    def integrand(w):
        return 4.0 * spectral_density(w, bath) * _one_minus_cos_over_w2(w, tau) * thermal_factor(w, T)

    gam = integrate_semi_infinite(integrand, bath.cutoff_wc, tau, cfg).value
    return -math.log1p(0.5 * math.expm1(-gam)) / tau


@dataclass
class DecayCurve:
    """Gamma on a tau grid with its extrema and regime segments.

    ``status`` is ``"ok"``, ``"degenerate-flat"`` (constant non-zero
    Gamma, labelled Zeno by convention) or ``"no-decay"`` (Gamma == 0).
    Segments are ``(tau_start, tau_end, label)`` with label ``"Zeno"`` or
    ``"AntiZeno"``.
    """

    taus: np.ndarray
    gammas: np.ndarray
    extrema: list = field(default_factory=list)
    segments: list = field(default_factory=list)
    status: str = "ok"

    def label_at(self, tau):
        for lo, hi, lab in self.segments:
            if lo <= tau <= hi:
                return lab
        return "none"

    def labels(self):
        return [self.label_at(t) for t in self.taus]


def _signs(slopes, eps):
    sign = np.where(slopes > eps, 1, np.where(slopes < -eps, -1, 0))
    nz = np.flatnonzero(sign)
    if nz.size == 0:
        return sign
    # flat stretches inherit the preceding direction (leading ones the following)
    filled = sign.copy()
    filled[: nz[0]] = sign[nz[0]]
    for i in range(nz[0] + 1, len(filled)):
        if filled[i] == 0:
            filled[i] = filled[i - 1]
    return filled


def classify_regimes(taus, gammas, slope_eps=None):
    """Locate local extrema and label Zeno (rising) / anti-Zeno (falling) stretches.

    Returns ``(extrema, segments, status)``; extrema are ``(tau*, "max"|"min")``
    from a quadratic through the three grid points around each slope sign change.
    """
    taus = np.asarray(taus, dtype=float)
    gammas = np.asarray(gammas, dtype=float)
    if taus.size < 5 or taus.shape != gammas.shape:
        raise DomainError("classify_regimes needs at least 5 matching grid points")
    if np.any(np.diff(taus) <= 0):
        raise DomainError("tau grid must be strictly increasing")
    if slope_eps is None:
        slope_eps = 1e-6 * float(np.max(np.abs(gammas)))
    slopes = np.diff(gammas) / np.diff(taus)
    sign = _signs(slopes, slope_eps)
    lo, hi = float(taus[0]), float(taus[-1])
    if not np.any(sign):
        return [], [(lo, hi, "Zeno")], "degenerate-flat"

    extrema = []
    for i in range(len(sign) - 1):
        if sign[i] != sign[i + 1]:
            k = i + 1  # grid point shared by the two slopes
            x = taus[k - 1 : k + 2]
            y = gammas[k - 1 : k + 2]
            c2, c1, _ = np.polyfit(x - x[1], y, 2)
            t_star = float(x[1] - c1 / (2 * c2)) if c2 != 0 else float(x[1])
            t_star = min(max(t_star, float(x[0])), float(x[2]))
            extrema.append((t_star, "max" if sign[i] > 0 else "min"))

    segments = []
    start = lo
    label = "Zeno" if sign[0] > 0 else "AntiZeno"
    for t_star, _ in extrema:
        segments.append((start, t_star, label))
        start = t_star
        label = "AntiZeno" if label == "Zeno" else "Zeno"
    segments.append((start, hi, label))
    return extrema, segments, "ok"


class CurveError(RuntimeError):
    """A grid point of a Gamma curve failed to evaluate."""


def _rate_point(args):
    tau, model, cfg = args
    return effective_decay_rate(tau, model, cfg)


def default_workers():
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def gamma_curve(tau_grid, model: ModelSpec, cfg: QuadConfig = QuadConfig(), rate=None, workers=None):
    """Evaluate Gamma on ``tau_grid`` and classify the regimes.

    ``rate`` replaces the model's Gamma(tau) (used to inject synthetic
    curves). ``workers`` defaults to the QZENO_WORKERS environment variable.
    """
    taus = np.asarray(tau_grid, dtype=float)
    if taus.ndim != 1 or np.any(taus <= 0) or np.any(np.diff(taus) <= 0):
        raise DomainError("tau grid must be positive and strictly increasing")
    workers = default_workers() if workers is None else workers
    if rate is not None:
        fn, jobs = rate, list(taus)
    else:
        fn, jobs = _rate_point, [(float(t), model, cfg) for t in taus]
    try:
        if workers > 1 and rate is None:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                gammas = list(pool.map(fn, jobs))
        else:
            gammas = [fn(j) for j in jobs]
    except Exception as exc:
        raise CurveError(f"Gamma curve evaluation failed: {exc}") from exc
    gammas = np.asarray(gammas, dtype=float)
    if np.max(np.abs(gammas)) < NO_DECAY_THRESHOLD:
        return DecayCurve(taus, gammas, [], [], "no-decay")
    extrema, segments, status = classify_regimes(taus, gammas)
    return DecayCurve(taus, gammas, extrema, segments, status)


def default_tau_grid(tau_min=0.02, tau_max=3.0, points=150):
    return np.geomspace(tau_min, tau_max, points)
