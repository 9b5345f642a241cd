"""Two-slit interference with an imperfect which-way detector.

The package decomposes the detector into unambiguous path flags plus a
discrimination-failure state, and shows how the resulting branches carry
the loss of fringe visibility as random half-fringe momentum kicks.
"""

from .errors import ConfigurationError, DomainError, EmptyBranchError, KickscopeError
from .hilbert import (
    COMPUTATIONAL,
    SYMMETRIC,
    Basis,
    DetectorConfig,
    DetectorVector,
    Outcome,
    UqsdCoefficients,
    basis_matrix,
    build_uqsd,
    detector_states,
    tilted,
)
from .wavepacket import (
    GridSpec,
    MomentumSpectrum,
    PhysicalUnits,
    SlitGeometry,
    Wavefunction,
    apply_kick,
    gaussian_state,
    propagate_analytic,
    propagate_fft,
    slit_state,
    to_momentum,
    to_position,
)
from .experiment import (
    BranchState,
    EventSample,
    FringeAnalysis,
    KickReport,
    ScreenPattern,
    StoreyBound,
    assemble,
    change_basis,
    conditional_density,
    fringe_analysis,
    fringe_window,
    kick_identity_residual,
    kick_report,
    momentum_shift,
    phase_kick_shift,
    propagate_all,
    reference_state,
    sample_events,
    screen_density,
    screen_goodness_of_fit,
    storey_bound_report,
    tilted_relative_kick,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "DomainError",
    "EmptyBranchError",
    "KickscopeError",
    "COMPUTATIONAL",
    "SYMMETRIC",
    "Basis",
    "DetectorConfig",
    "DetectorVector",
    "Outcome",
    "UqsdCoefficients",
    "basis_matrix",
    "build_uqsd",
    "detector_states",
    "tilted",
    "GridSpec",
    "MomentumSpectrum",
    "PhysicalUnits",
    "SlitGeometry",
    "Wavefunction",
    "apply_kick",
    "gaussian_state",
    "propagate_analytic",
    "propagate_fft",
    "slit_state",
    "to_momentum",
    "to_position",
    "BranchState",
    "EventSample",
    "FringeAnalysis",
    "KickReport",
    "ScreenPattern",
    "StoreyBound",
    "assemble",
    "change_basis",
    "conditional_density",
    "fringe_analysis",
    "fringe_window",
    "kick_identity_residual",
    "kick_report",
    "momentum_shift",
    "phase_kick_shift",
    "propagate_all",
    "reference_state",
    "sample_events",
    "screen_density",
    "screen_goodness_of_fit",
    "storey_bound_report",
    "tilted_relative_kick",
]
