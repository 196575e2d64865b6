"""Exception taxonomy shared across the package.

Everything raised on purpose derives from :class:`FemVqeError` so callers can
catch one base type at CLI boundaries.
"""


class FemVqeError(Exception):
    """Base class for all package-specific errors."""


# --- matrix I/O ---------------------------------------------------------


class MalformedRecord(FemVqeError):
    """A data line could not be parsed in the expected format."""

    def __init__(self, line_no: int, line: str, reason: str):
        self.line_no = line_no
        self.line = line
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}: {line!r}")


class DuplicateEntry(FemVqeError):
    """The same (row, col) slot was given twice with conflicting values."""


class UnsupportedHeader(FemVqeError):
    """Matrix Market header requests a mode this reader does not handle."""


class UnknownDof(FemVqeError):
    """A DOF label refers to nothing in the matrix at hand."""


# --- FEM ----------------------------------------------------------------


class ZeroLengthElement(FemVqeError):
    """Element endpoints coincide."""


class InvalidSection(FemVqeError):
    """Nonpositive section property (area, radius, length)."""


class DegenerateElement(FemVqeError):
    """Element geometry has nonpositive Jacobian or zero area."""


class TargetUnreachable(FemVqeError):
    """No discretization of this case hits the requested free-DOF count.

    Carries the nearest achievable counts so callers can suggest them.
    """

    def __init__(self, case: str, requested: int, nearest: list[int]):
        self.case = case
        self.requested = requested
        self.nearest = sorted(nearest)
        near = ", ".join(str(n) for n in self.nearest)
        super().__init__(
            f"case {case!r} cannot reach exactly {requested} free DOFs; "
            f"nearest achievable counts: {near}"
        )


# --- Hamiltonian construction -------------------------------------------


class MassNotPD(FemVqeError):
    """Mass matrix is not symmetric positive definite."""


class DimensionMismatch(FemVqeError):
    """Operands have incompatible shapes."""


class NotPowerOfTwo(FemVqeError):
    """Matrix dimension is not a power of two."""


class ShiftTooSmall(FemVqeError):
    """Padding shift does not dominate the existing spectrum."""


# --- simulator / ansatz ---------------------------------------------------


class QubitCountOutOfRange(FemVqeError):
    """Requested register size is outside the supported range."""


class InvalidQubit(FemVqeError):
    """Qubit index out of range, or duplicate indices in a two-qubit gate."""


class MissingAngle(FemVqeError):
    """Parameterized gate applied without an angle (or vice versa)."""


class DepthOutOfRange(FemVqeError):
    """Ansatz depth outside the supported range."""


class ParameterLengthMismatch(FemVqeError):
    """Parameter vector length does not match the ansatz parameter count."""


# --- optimization / reporting ---------------------------------------------


class ConvergenceFailure(FemVqeError):
    """Classical eigensolver failed to produce a usable answer."""


class DegenerateSimplex(FemVqeError):
    """COBYLA's linear model collapsed and re-spanning did not recover it.

    Carries `partial` (best parameters, outcome record) when any progress
    was made before the failure.
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class LineSearchFailure(FemVqeError):
    """L-BFGS-B line search failed before any iterate was accepted."""


class NonpositiveReference(FemVqeError):
    """Reference eigenvalue is zero or negative; relative error undefined."""


class StaleJournal(FemVqeError):
    """Sweep journal on disk was written under a different configuration."""


class EmptyList(FemVqeError):
    """Aggregate statistics requested over an empty collection."""
