"""SDP certification of entropy bounds for the instrumental scenario."""

from .sdp import (
    LOWERED_FITS,
    UNLOWERED_FITS,
    CurvePoint,
    FitParams,
    MomentProblem,
    SDPInstance,
    ValidationReport,
    guessing_probability_sdp,
    scan_and_validate,
    write_curve,
)
from .words import basis_words, moment_key, reduce_word

__version__ = "0.1.0"
