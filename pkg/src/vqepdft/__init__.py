"""Desk-scale simulator of a hybrid variational eigensolver with a
classical on-top pair-density functional correction and self-consistent
orbital optimization, plus readout/gate error-mitigation protocols."""

__version__ = "0.1.0"

from .fermion import ActiveSpaceSpec
from .integrals import MolecularIntegrals, parse_fcidump
from .pauli import PauliString, PauliSum

__all__ = [
    "ActiveSpaceSpec",
    "MolecularIntegrals",
    "PauliString",
    "PauliSum",
    "parse_fcidump",
    "__version__",
]
