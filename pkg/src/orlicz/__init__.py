"""Orlicz premia, their consistent scoring functions, Murphy diagrams and
optimized-return risk measures."""

from .dist import DiscreteDistribution, make_distribution, point_mass, uniform
from .orliczfn import CATALOG, OrliczFunctionSpec, catalog_lookup, check_shape, lambert_w
from .premium import PremiumResult, expected_phi, identification_residual, orlicz_premium
from .scoring import ScoringFamily, family, mean_score, score, verify_consistency
from .murphy import elementary_score, mixture_reconstruction, murphy_curve
from .orrisk import or_risk

__version__ = "0.1.0"
