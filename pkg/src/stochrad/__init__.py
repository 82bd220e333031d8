"""Photon emission spectra of a charge driven by classical colored noise."""

__version__ = "0.1.0"

from .errors import (InvalidContourError, InvalidParameterError, IntegratorError,
                     NearResonanceWarning, OutOfRangeError, OverflowGuardError,
                     PointwiseEvaluationError, ResonanceError, StatisticalValidityError,
                     ToleranceNotMetError)
from .params import (SI, PhysicalParams, UnitScale, derive_beta, from_scaled,
                     natural_params, natural_scale, to_scaled)
from .noise import (ExponentialOU, GaussianWindow, NoiseCorrelator, TabulatedSpectrum,
                    WhiteNoise, correlator_from_dict)
from .roots import RootSet, approx_roots, decay_rate_analytic, solve_roots
from .kernels import KernelOptions, eval_F, eval_G, eval_Gpm
from .spectra import (RateOptions, RateSeries, finite_time_series, rate_finite_time,
                      rate_free_exact, rate_free_limit_of_harmonic,
                      rate_harmonic_asymptotic, rate_perturbative_free,
                      rate_perturbative_harmonic, rate_white_baseline)
from .oracle import bromwich_numeric, rate_quadrature
from .semiclassical import (EnsembleResult, EnsembleSpec, estimate_rate_mc,
                            ft_acceleration_harmonic, generate_colored_noise,
                            rate_semiclassical_free, rate_semiclassical_harmonic,
                            simulate_trajectory)
from .experiments import (ScenarioConfig, compare_orders, convergence_scan,
                          decay_timescale, run_scenario)
