"""Four-photon entanglement from double-pair emission in type-II down conversion."""

from .fock import (
    CreationPolynomial,
    Mode,
    Monomial,
    PostselectedState,
    beam_split,
    four_photon_state,
    pdc_term,
    postselect_coincidence,
    rotate_polarization,
    to_state,
)
from .measurement import NoiseMixture, PhaseSettings, amplitude, correlation, probability
from .lhv import (
    PAPER_SETTINGS,
    SettingChoices,
    critical_visibility,
    expand_in_basis,
    lhv_l1,
    quantum_tensor,
    reconstruct_lhv,
)
from .bell import BellExpression, OptimizerConfig, lhv_bound, optimize_settings, quantum_value

__version__ = "0.1.0"
