"""Effective decay rates of repeatedly measured quantum states.

The decay rate under measurements spaced by ``tau`` is the overlap of a
bath spectral density with a state- and model-dependent filter function.
"""

from .core import (
    AccuracyError,
    CapacityError,
    DomainError,
    EvaluationError,
    MeasurementProtocol,
    SingularBandError,
    SpectralDensity,
    StatePrep,
    SystemParams,
    Temperature,
    rabi_frequency,
    spectral_density,
    thermal_factor,
)
from .quad import QuadConfig, QuadResult, integrate_interval, integrate_semi_infinite, integrate_triangle
from .filters import (
    DPair,
    OverlapAmplitudes,
    PrecessionCoeffs,
    d_pair_closed,
    d_pair_numeric,
    filter_general,
    filter_large_spin,
    filter_population_decay,
    filter_pure_dephasing,
    overlap_amplitudes,
    precession_coeffs,
    rotated_coeffs,
    zero_temperature_amplitude_form,
)
from .decay import (
    DecayCurve,
    ModelSpec,
    classify_regimes,
    effective_decay_rate,
    gamma_curve,
    pure_dephasing_exact,
    survival_probability,
)

__version__ = "0.1.0"
