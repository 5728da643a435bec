"""Independent checks of the exact pipeline: Monte Carlo, Volterra stepping, Talbot inversion."""

from .monte_carlo import McConfig, McResult, MomentCheck, MomentReport, mc_dephasing_memoryless, mc_moment_checks
from .talbot import numeric_inverse_laplace
from .volterra import VolterraConfig, VolterraResult, convergence_ratio, volterra_solve

__all__ = [
    "McConfig",
    "McResult",
    "MomentCheck",
    "MomentReport",
    "mc_dephasing_memoryless",
    "mc_moment_checks",
    "VolterraConfig",
    "VolterraResult",
    "volterra_solve",
    "convergence_ratio",
    "numeric_inverse_laplace",
]
