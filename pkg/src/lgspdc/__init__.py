"""Exact Laguerre-Gauss decomposition of SPDC biphoton states for arbitrary
pump beams."""

__version__ = "0.1.0"

from .amplitudes import (
    CoincidenceAmplitude,
    coincidence_closed,
    coincidence_gaussian_pump,
    coincidence_p_zero,
    coincidence_superposition,
    sigma_ell,
)
from .errors import (
    ContractViolation,
    DegeneratePumpError,
    DomainError,
    LgSpdcError,
    NonConvergentSpectrumError,
    NumericalError,
    ScanPointError,
)
from .modes import BeamWidths, ModeIndex, lg_amplitude, lg_radial, mode_norm, mode_overlap
from .oracle import coincidence_quadrature_2d, coincidence_quadrature_radial
from .pumps import (
    SIX_VORTEX_POSITIONS,
    PumpSpec,
    load_pump,
    normalize_pump,
    parse_pump_text,
    format_pump_text,
    pump_field_value,
    singularities_to_lg,
)
from .specfun import SignedLogValue, assoc_laguerre, log_factorial, signed_log_sum
from .spectra import (
    EqualizationResult,
    GammaScan,
    SpiralSpectrum,
    coefficient_of_variation,
    effective_dimension,
    find_equal_probability_gammas,
    gamma_scan,
    local_maxima,
    spiral_spectrum,
    subspace_probabilities,
    wing_masses,
)
