"""Periodic and cylindric Schur processes: exact kernels, oracles, Fredholm
determinants and samplers for the finite-temperature edge."""

__version__ = "0.1.0"

from .errors import (BoundaryViolation, CylSchurError, DomainError, LimitExceeded, NonConvergent,
                     PoleProximity, ShapeError, SpectrumError, WindowTooNarrow)
from .measures import CylindricPlancherelParams, PeriodicSchurParams, StrictPeriodicParams
from .partitions import MayaDiagram, Partition, Specialization, StrictPartition, StrictSpecialization

__all__ = [
    "__version__",
    "BoundaryViolation", "CylSchurError", "DomainError", "LimitExceeded", "NonConvergent",
    "PoleProximity", "ShapeError", "SpectrumError", "WindowTooNarrow",
    "CylindricPlancherelParams", "PeriodicSchurParams", "StrictPeriodicParams",
    "MayaDiagram", "Partition", "Specialization", "StrictPartition", "StrictSpecialization",
]
