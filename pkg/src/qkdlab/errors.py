"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or inconsistent arguments (dimension mismatch, bad ranges...)."""


class CapacityError(RuntimeError):
    """Request exceeds a hard desk-scale cap (qubits, enumeration size)."""


class ZeroProbabilityBranchError(ArithmeticError):
    """Conditioning on an outcome that has probability zero."""
