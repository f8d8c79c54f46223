"""Example spaces: rational pre-Hilbert spaces, contractions, the dyadic measure algebra, the odometer."""

from .banach import ContractionViolated, FixedPoint, fixed_point, iteration_bound
from .hilbert import (
    GramSchmidtResult,
    IntervalVector,
    LinearDependence,
    RationalVector,
    gram_schmidt,
    inverse_norm_interval,
    parse_vector,
)
from .measure import (
    IDENTITY,
    DyadicSet,
    PartialIsomorphism,
    Presentation,
    PresentationNotAtomless,
    back_and_forth,
    bit_reversal,
    finite_level,
    parse_set,
)
from .odometer import Odometer, orbit_membership, orbit_trace

__all__ = [
    "ContractionViolated", "FixedPoint", "fixed_point", "iteration_bound",
    "GramSchmidtResult", "IntervalVector", "LinearDependence", "RationalVector",
    "gram_schmidt", "inverse_norm_interval", "parse_vector",
    "IDENTITY", "DyadicSet", "PartialIsomorphism", "Presentation", "PresentationNotAtomless",
    "back_and_forth", "bit_reversal", "finite_level", "parse_set",
    "Odometer", "orbit_membership", "orbit_trace",
]
