"""Time integration of the mild form and the checks built around it."""

from .admissibility import AdmissibilityParams, AdmissibilityResult, check_admissibility
from .config import ConfigError, SolverConfig
from .initial import make_initial_data, taylor_green_exact
from .integrate import PicardResult, Trajectory, integrate, picard_iterate
from .monitors import global_criterion_monitor, monitor_X_norm, smoothing_diagnostic

__all__ = [
    "AdmissibilityParams",
    "AdmissibilityResult",
    "ConfigError",
    "PicardResult",
    "SolverConfig",
    "Trajectory",
    "check_admissibility",
    "global_criterion_monitor",
    "integrate",
    "make_initial_data",
    "monitor_X_norm",
    "picard_iterate",
    "smoothing_diagnostic",
    "taylor_green_exact",
]
