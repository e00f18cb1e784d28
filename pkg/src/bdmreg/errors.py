"""Exception types shared across the package."""


class BdmRegError(Exception):
    """Base class for all package-specific errors."""


class ZeroHaltingMachines(BdmRegError):
    """No machine in the enumerated class halted within the step limit."""


class ParseError(BdmRegError):
    """A text input (table file, edge list) is malformed.

    Carries the 1-based line number of the offending line when known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DimensionMismatch(BdmRegError):
    """Declared block size and actual key widths disagree."""


class MissingBlock(BdmRegError):
    """A block has no table entry and the table's policy is 'fail'."""


class EmptyTable(BdmRegError):
    """Operation requires a non-empty complexity table."""


class TooLarge(BdmRegError):
    """Exact enumeration was requested beyond the feasible size bound."""


class DegenerateLabels(BdmRegError):
    """Labels are all-positive or all-negative where both classes are required."""


class TrainingDiverged(BdmRegError):
    """Training produced a non-finite loss."""


class EmptyGraph(BdmRegError):
    """Edge-list input contains no usable edges."""


class NotEnoughNonEdges(BdmRegError):
    """The graph is too dense to supply the requested number of negative edges."""
