"""Euclidean fields driven by Levy white noise: lattice sampling, moment
formulas, momentum-space Wightman densities and their consistency checks."""

__version__ = "0.1.0"

from .lattice import LatticeSpec, FieldSample, MomentumGrid, dft_forward, dft_backward
from .noise import LevyLaw, cumulant, cumulants
from .fracop import OperatorSpec, GreenKernel, green_lattice, green_continuum
from .partitions import set_partitions, bell_number
from .schwinger import schwinger, truncated_schwinger
from .montecarlo import Ensemble, simulate, compare
from .wightman import (mu_plus, mu_minus, mu_zero, wightman_truncated_density,
                       two_point_shell_density, continuation_check_n2)
from .testfunctions import TestFunction
from .hsc import (SchwartzNormSpec, schwartz_norm, pairing, bound_ratio_study,
                  m_measure_density, local_integrability_study, hsc_split_check)
from .config import load_config, ConfigError

__all__ = [
    "LatticeSpec", "FieldSample", "MomentumGrid", "dft_forward", "dft_backward",
    "LevyLaw", "cumulant", "cumulants",
    "OperatorSpec", "GreenKernel", "green_lattice", "green_continuum",
    "set_partitions", "bell_number", "schwinger", "truncated_schwinger",
    "Ensemble", "simulate", "compare",
    "mu_plus", "mu_minus", "mu_zero", "wightman_truncated_density",
    "two_point_shell_density", "continuation_check_n2",
    "TestFunction", "SchwartzNormSpec", "schwartz_norm", "pairing", "bound_ratio_study",
    "m_measure_density", "local_integrability_study", "hsc_split_check",
    "load_config", "ConfigError",
]
