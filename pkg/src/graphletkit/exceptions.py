"""Exception hierarchy.

Everything raised on purpose derives from :class:`GraphletKitError` so callers
can catch one base class. The CLI maps these to exit code 2 (data error),
except the training-runtime failures listed in :data:`RUNTIME_ERRORS` which
map to exit code 3.
"""


class GraphletKitError(Exception):
    """Base class for all errors raised by graphletkit."""


class ParseError(GraphletKitError):
    """A file could not be parsed (malformed line, bad JSON, non-integer)."""


class VersionMismatchError(GraphletKitError):
    """A serialized artifact declares an unsupported format version."""


class CorruptPayloadError(GraphletKitError):
    """A serialized weight payload fails its length or decoding check."""


class InconsistentIndicatorError(GraphletKitError):
    """A TU edge joins nodes assigned to different graphs."""


class DimensionTooSmallError(GraphletKitError):
    """Requested pad dimension is smaller than the graph's node count."""


class ShapeMismatchError(GraphletKitError):
    """Array shapes do not chain (layer input/weights, batch lengths)."""


class NonFiniteTensorError(GraphletKitError):
    """NaN or Inf encountered at a layer boundary."""


class NotAnEdgeError(GraphletKitError):
    """The given node pair is not an edge of the graph."""


class DisconnectedSubgraphError(GraphletKitError):
    """A subgraph handed to the classifier is not connected."""


class UnknownPatternError(GraphletKitError):
    """A canonical code has no entry in the pattern catalog."""


class NoEdgesError(GraphletKitError):
    """Edge sampling requires at least one edge."""


class NoSeedGraphletError(GraphletKitError):
    """The walk needs at least one connected 3-node subgraph to start."""


class ZeroAnchorFrequencyError(GraphletKitError):
    """Frequency-to-count conversion needs a nonzero anchor frequency."""


class ZeroMeanTruthError(GraphletKitError):
    """Relative error is undefined when the mean ground truth is not positive."""


class LengthMismatchError(GraphletKitError):
    """Paired sequences have different lengths."""


class EmptyBatchError(GraphletKitError):
    """An operation received an empty batch."""


class EmptySplitError(GraphletKitError):
    """A dataset split required to be nonempty is empty."""


class NonFiniteGradientError(GraphletKitError):
    """A gradient became NaN or Inf."""


class DivergedLossError(GraphletKitError):
    """The training loss became non-finite."""


#: Errors that indicate a runtime/numeric failure rather than bad input data.
RUNTIME_ERRORS = (NonFiniteGradientError, DivergedLossError, NonFiniteTensorError)
