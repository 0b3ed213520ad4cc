class LabError(Exception):
    """Base class for monogamy_lab failures."""


class CapacityError(LabError, ValueError):
    """Register or matrix larger than the supported 8 qubits."""


class LabelError(LabError, KeyError):
    """Unknown or duplicated qubit label."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class NumericError(LabError, ArithmeticError):
    """Iteration failed to converge or produced non-finite values."""


class DegenerateInputError(LabError, ValueError):
    """Input carries no entanglement for the requested analysis."""
