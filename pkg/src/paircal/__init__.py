"""Absolute detection efficiency from photon-pair singles statistics.

Simulate correlated photon-pair counts, estimate detector efficiencies with
the product, difference and coincidence methods (optionally background
corrected), and compute their statistical errors exactly or from data.
"""
from ._backend import BACKEND
from .detector import CountRecord, Counts, DetectorChannel, simulate_counts, simulate_record, thin
from .error_model import (VarianceReport, analytic_variance_equal_eta, analytic_variance_poisson,
                          empirical_variance, numeric_variance, variance_curve)
from .errors import (BackgroundDominatesError, CalibrationError, DataError, DegenerateMomentsError,
                     InsufficientDataError, MethodUnavailableError, ParameterError, TruncationError)
from .estimators import (EfficiencyEstimate, correct_background, corrected_estimate, eta_coincidence,
                         eta_difference, eta_equal_difference, eta_product,
                         normalized_difference_variance)
from .moments import MomentSet, sample_moments
from .oracle import exact_coincidence_moments, exact_covariances, exact_moments
from .source import PairDistribution, custom, poisson, thermal

__version__ = "0.1.0"
