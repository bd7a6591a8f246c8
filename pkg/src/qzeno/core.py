"""Domain types and elementary scalar functions.

Units are dimensionless with hbar = 1 throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

COTH_SERIES_THRESHOLD = 1e-4


class DomainError(ValueError):
    """An argument lies outside the domain of a function."""


class SingularBandError(ArithmeticError):
    """A closed-form expression was requested inside its removable-singularity band."""


class AccuracyError(ArithmeticError):
    """A numerical routine could not reach its requested tolerance.

    ``estimate`` and ``error`` carry the best value and error bound reached.
    """

    def __init__(self, message, estimate=float("nan"), error=float("inf")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class EvaluationError(ArithmeticError):
    """An integrand produced a non-finite value."""


class CapacityError(MemoryError):
    """A simulation would exceed its configured memory budget."""


@dataclass(frozen=True)
class SystemParams:
    """Two-level (or collective spin) parameters: bias ``epsilon`` and tunneling ``delta``."""

    epsilon: float
    delta: float
    omega_big: float = field(init=False)

    def __post_init__(self):
        for name in ("epsilon", "delta"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        object.__setattr__(self, "omega_big", math.hypot(self.epsilon, self.delta))


@dataclass(frozen=True)
class StatePrep:
    """The state that is repeatedly prepared and measured.

    ``kind`` is ``"qubit"`` (Bloch angles ``theta``, ``phi``), ``"jz"`` (the
    maximal-``J_z`` state of ``n_spins`` spins) or ``"jx"`` (the
    maximal-``J_x`` state).
    """

    kind: str = "qubit"
    theta: float = math.pi / 2
    phi: float = 0.0
    n_spins: int = 1

    def __post_init__(self):
        if self.kind == "qubit":
            if not 0.0 <= self.theta <= math.pi:
                raise DomainError(f"theta={self.theta} outside [0, pi]")
            if not 0.0 <= self.phi < 2 * math.pi:
                raise DomainError(f"phi={self.phi} outside [0, 2 pi)")
        elif self.kind in ("jz", "jx"):
            if int(self.n_spins) != self.n_spins or self.n_spins < 1:
                raise DomainError("n_spins must be a positive integer")
        else:
            raise DomainError(f"unknown state kind {self.kind!r}")

    @classmethod
    def qubit(cls, theta=math.pi / 2, phi=0.0):
        return cls("qubit", theta=theta, phi=phi)

    @classmethod
    def large_spin_jz(cls, n_spins):
        return cls("jz", n_spins=n_spins)

    @classmethod
    def large_spin_jx(cls, n_spins):
        return cls("jx", n_spins=n_spins)

    @property
    def is_large_spin(self):
        return self.kind in ("jz", "jx")

    @property
    def j(self):
        return self.n_spins / 2


@dataclass(frozen=True)
class SpectralDensity:
    """J(w) = G w^s wc^(1-s) exp(-w/wc)."""

    coupling_g: float
    ohmicity_s: float
    cutoff_wc: float

    def __post_init__(self):
        if not self.coupling_g >= 0:
            raise DomainError("coupling_g must be non-negative")
        if not self.ohmicity_s > 0:
            raise DomainError("ohmicity_s must be positive")
        if not self.cutoff_wc > 0:
            raise DomainError("cutoff_wc must be positive")

    def total(self):
        """Closed-form integral of J over [0, inf)."""
        return self.coupling_g * self.cutoff_wc**2 * math.gamma(self.ohmicity_s + 1)


@dataclass(frozen=True)
class Temperature:
    """Bath temperature; ``beta=None`` is the zero-temperature bath."""

    beta: float | None = None

    def __post_init__(self):
        if self.beta is not None and not (self.beta > 0 and math.isfinite(self.beta)):
            raise DomainError("beta must be positive and finite")

    @classmethod
    def zero(cls):
        return cls(None)

    @classmethod
    def finite(cls, beta):
        return cls(beta)

    @property
    def is_zero(self):
        return self.beta is None


@dataclass(frozen=True)
class MeasurementProtocol:
    tau: float
    n_measurements: int

    def __post_init__(self):
        if not self.tau > 0:
            raise DomainError("tau must be positive")
        if int(self.n_measurements) != self.n_measurements or self.n_measurements < 1:
            raise DomainError("n_measurements must be a positive integer")


def rabi_frequency(sys: SystemParams) -> float:
    return math.hypot(sys.epsilon, sys.delta)


def thermal_factor(omega, T: Temperature):
    """coth(beta*omega/2), or 1 for the zero-temperature bath.

    Accepts scalars or arrays. Small arguments use the Laurent series
    2/x + x/6 to avoid cancellation.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(~(w > 0)):
        raise DomainError("thermal_factor requires omega > 0")
    if T.is_zero:
        out = np.ones_like(w)
    else:
        half = 0.5 * T.beta * w
        small = half < COTH_SERIES_THRESHOLD
        safe = np.where(small, 1.0, half)
        out = np.where(small, 1.0 / np.where(small, half, 1.0) + half / 3.0, 1.0 / np.tanh(safe))
    return float(out) if out.ndim == 0 else out


def spectral_density(omega, J: SpectralDensity):
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0) or np.any(np.isnan(w)):
        raise DomainError("spectral_density requires omega >= 0")
    s, wc = J.ohmicity_s, J.cutoff_wc
    out = J.coupling_g * w**s * wc ** (1.0 - s) * np.exp(-w / wc)
    return float(out) if out.ndim == 0 else out
