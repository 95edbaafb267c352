"""Quantum and classical Fisher information for thermal LMG spin systems."""

from .errors import (ConsistencyError, DerivativeError, DomainError, LMGError,
                     NoMaximumError, NumericalDegeneracyError, SingularPointError,
                     TruncationError)
from .spin_model import ModelParams, Parameter, Symmetry, build_hamiltonian
from .estimation import (QfiBreakdown, fidelity_qfi, fisher_information,
                         magnetization_fisher, qfi_temperature, qfi_thermal, sld)
from .metrology import optimal_field, robustness_ratio, scan
from .thermodynamic import thermo_qfi

__version__ = "0.1.0"
