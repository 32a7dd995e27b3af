"""Exact small-scale simulation of used-bits BB84 and the bounds behind its security."""
from . import bounds, evesim, gf2codes, protocol, qstate  # noqa: F401
from .errors import CapacityError, InputError, ZeroProbabilityBranchError  # noqa: F401

__version__ = "0.1.0"
