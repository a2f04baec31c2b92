"""Time-delayed coherent feedback on the single-excitation Jaynes-Cummings model.

Simulators for the continuous-mode (single-delay) and discrete-mode
(multi-delay) feedback dynamics, a truncated mode-expansion oracle, and the
matching steady-state, pole, and emission-spectrum analysis.
"""

from .core import (
    FeedbackParams,
    ModeRegister,
    NormalModeSet,
    ParameterError,
    RegimeLabel,
    Spectrum,
    Trajectory,
    is_odd_pi_phase,
    make_params,
    regime_label,
)
from .engine import (
    GridSolution,
    HistoryBuffer,
    NonFiniteStateError,
    delayed_value,
    integrate,
    rk4_fixed,
)
from .models import (
    ModelKind,
    damped_rabi_amplitudes,
    minimum_mode_count,
    simulate,
    simulate_cm,
    simulate_dm_delay,
    simulate_dm_modesum,
    simulate_no_feedback,
)
from .analysis import (
    CharacteristicFunction,
    KernelDomainError,
    PoleResult,
    SeriesPrecisionError,
    SeriesSolution,
    char_eval,
    characteristic_function,
    dm_rabi_diagnostic,
    find_poles,
    normal_modes,
    series_cm,
    series_dm,
    spectrum,
    steady_state_dm,
)

__version__ = "0.1.0"

__all__ = [
    "CharacteristicFunction",
    "FeedbackParams",
    "GridSolution",
    "HistoryBuffer",
    "KernelDomainError",
    "ModeRegister",
    "ModelKind",
    "NonFiniteStateError",
    "NormalModeSet",
    "ParameterError",
    "PoleResult",
    "RegimeLabel",
    "SeriesPrecisionError",
    "SeriesSolution",
    "Spectrum",
    "Trajectory",
    "char_eval",
    "characteristic_function",
    "damped_rabi_amplitudes",
    "delayed_value",
    "dm_rabi_diagnostic",
    "find_poles",
    "integrate",
    "is_odd_pi_phase",
    "make_params",
    "minimum_mode_count",
    "normal_modes",
    "regime_label",
    "rk4_fixed",
    "series_cm",
    "series_dm",
    "simulate",
    "simulate_cm",
    "simulate_dm_delay",
    "simulate_dm_modesum",
    "simulate_no_feedback",
    "spectrum",
    "steady_state_dm",
]
