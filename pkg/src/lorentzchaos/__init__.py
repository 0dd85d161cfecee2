"""Finite-horizon Li-Yorke chaos and expansivity checks for composition operators on Lorentz spaces."""

__version__ = "0.1.0"

from .measure import (  # noqa: E402
    BILATERAL_SHIFT,
    BILATERAL_VALLEY,
    PAPER_EXAMPLE_24,
    UNILATERAL_SHIFT,
    check_injective,
    forward_image_n,
    identity_map,
    make_builtin_space,
    make_finite_map,
    make_finite_space,
    measure_of,
    preimage_n,
)
from .rearrangement import (  # noqa: E402
    CertifiedReal,
    LorentzIndex,
    SimpleFunction,
    StepFunction,
    decreasing_rearrangement,
    distribution_function,
    indicator_norm,
    lorentz_norm,
    maximal_average,
)
from .verdict import CONFIRMED, INCONCLUSIVE, REFUTED, Verdict  # noqa: E402

__all__ = [
    "BILATERAL_SHIFT", "BILATERAL_VALLEY", "PAPER_EXAMPLE_24", "UNILATERAL_SHIFT",
    "check_injective", "forward_image_n", "identity_map", "make_builtin_space", "make_finite_map",
    "make_finite_space", "measure_of", "preimage_n",
    "CertifiedReal", "LorentzIndex", "SimpleFunction", "StepFunction", "decreasing_rearrangement",
    "distribution_function", "indicator_norm", "lorentz_norm", "maximal_average",
    "CONFIRMED", "INCONCLUSIVE", "REFUTED", "Verdict",
]
