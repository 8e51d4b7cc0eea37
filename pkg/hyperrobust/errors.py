"""Exception hierarchy shared by every hyperrobust module.

Each error also derives from the closest builtin so callers that only know
about ``ValueError`` or ``IndexError`` keep working.
"""


class HyperRobustError(Exception):
    """Base class for all hyperrobust errors."""


class OutOfRangeId(HyperRobustError, ValueError):
    """A node id is negative or not below ``num_nodes``."""


class EdgeTooSmall(HyperRobustError, ValueError):
    """A hyperedge has fewer than two distinct members."""


class OutOfRangeIndex(HyperRobustError, IndexError):
    """An edge index does not address an edge of the hypergraph."""


class NotABijection(HyperRobustError, ValueError):
    """A relabelling is not a permutation of ``0..num_nodes-1``."""


class InvalidConfig(HyperRobustError, ValueError):
    """Configuration values are out of range or inconsistent."""


class DisconnectedRetryExceeded(HyperRobustError, RuntimeError):
    """A generator could not produce a connected hypergraph."""


class InvalidOrder(HyperRobustError, ValueError):
    """An attack order is not a permutation of the node ids."""


class OutOfRangeIteration(HyperRobustError, IndexError):
    """A refinement iteration that was never computed was requested."""


class ShapeMismatch(HyperRobustError, ValueError):
    """Array shapes disagree with the model architecture."""


class EmptyDataset(HyperRobustError, ValueError):
    """Training or evaluation was given no samples."""


class ParseError(HyperRobustError, ValueError):
    """A persisted record or model document could not be parsed."""


class DataIoError(HyperRobustError, OSError):
    """Reading or writing a dataset or model file failed."""
