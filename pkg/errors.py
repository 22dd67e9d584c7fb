"""
Exception hierarchy for the lattice toolkit.

Every error raised on purpose by the library derives from NciError so the
CLI can map the whole family to one exit code and print the class name.
"""


class NciError(Exception):
    """Base class for all domain errors."""

    @property
    def name(self):
        return type(self).__name__


# =============================================================================
# SET ARITHMETIC
# =============================================================================

class UniverseError(NciError):
    """Bad universe: duplicate labels, too many elements, unknown label."""


class UniverseMismatchError(UniverseError):
    """Operands live over different universes."""


class OverlapError(NciError):
    """Disjoint union of overlapping operands."""

    def __init__(self, witness, message=None):
        self.witness = witness
        super().__init__(message or f"operands overlap at {witness}")


class NotSubsetError(NciError):
    """Subset complement whose right operand is not contained in the left."""

    def __init__(self, witness, message=None):
        self.witness = witness
        super().__init__(message or f"{witness} is in the right operand but not the left")


class IntFuncOverflowError(NciError):
    """Value does not fit the 32-bit storage of an IntFunc."""


# =============================================================================
# LATTICES
# =============================================================================

class TrivialFamilyError(NciError):
    pass


class CoTrivialFamilyError(NciError):
    pass


class DegenerateLatticeError(NciError):
    pass


class NotALatticeError(NciError):
    pass


class NotADownsetError(NciError):
    pass


class NotTightError(NciError):
    pass


class NotFullError(NciError):
    pass


# =============================================================================
# WITNESS TREES
# =============================================================================

class CatalogError(NciError):
    """Duplicate or malformed base catalog entries."""


class InvalidNodeError(NciError):
    """A tree node whose operation is undefined on its children's values."""

    def __init__(self, path, cause):
        self.path = tuple(path)
        self.cause = cause
        where = "/".join(str(p) for p in self.path) or "root"
        super().__init__(f"invalid node at {where}: {type(cause).__name__}: {cause}")


class ContextMismatchError(NciError):
    pass


class ParseError(NciError):

    def __init__(self, position, message):
        self.position = position
        super().__init__(f"{message} at position {position}")


class NotTopError(NciError):
    pass


class MismatchError(NciError):
    pass


# =============================================================================
# REWRITING
# =============================================================================

class BadPathError(NciError):
    pass


class AllSameParityError(NciError):
    pass


class DisconnectedError(NciError):
    pass


class EulerMismatchError(NciError):
    pass


class TraceError(NciError):
    """A rewrite step that is not valid on the current configuration."""


class LeafFormError(NciError):
    pass


class NotAZeroError(NciError):
    pass


# =============================================================================
# SEARCH AND FILES
# =============================================================================

class SolverUnavailableError(NciError):
    pass


class SchemaVersionError(NciError):
    pass


class FormatError(NciError):
    pass
