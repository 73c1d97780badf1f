"""Exception hierarchy for pitchnet.

Every library error derives from PitchnetError so callers (and the CLI)
can distinguish domain failures from programming errors.
"""


class PitchnetError(Exception):
    """Base class for all pitchnet domain errors."""


# -- graph construction ------------------------------------------------------

class EmptyGraph(PitchnetError):
    """Fewer than two nodes."""


class SelfLoop(PitchnetError):
    """An edge connects a node to itself."""


class DuplicateEdge(PitchnetError):
    """The same undirected edge appears twice."""


class DisconnectedGraph(PitchnetError):
    """The graph is not connected."""


class SameNode(PitchnetError):
    """Two distinct nodes were required."""


class NumericalRankDeficiency(PitchnetError):
    """More than one near-zero Laplacian eigenvalue."""


# -- dynamics ----------------------------------------------------------------

class DimensionMismatch(PitchnetError):
    """State length does not match the graph."""


class NonFiniteState(PitchnetError):
    """Integration diverged (non-finite values or norm bound exceeded)."""


class DegenerateCubic(PitchnetError):
    """Third derivative of the coupling vanishes; reduction undefined."""


# -- stationary states -------------------------------------------------------

class CycleInconsistent(PitchnetError):
    """A link assignment has a nonzero signed sum around some cycle."""


class NegativeR(PitchnetError):
    """Operation requires a positive system parameter r."""


class TooLarge(PitchnetError):
    """Enumeration refused: the graph exceeds the configured link cap."""


# -- stability ---------------------------------------------------------------

class NoSuchState(PitchnetError):
    """No cycle-consistent assignment with the requested consensus set."""


class EigensolverFailure(PitchnetError):
    """The symmetric eigensolver did not converge."""


# -- exact solutions / partitions --------------------------------------------

class NotEquitable(PitchnetError):
    """Partition is not an external equitable partition."""


class PartitionMismatch(PitchnetError):
    """Partition, quotient and state dimensions disagree."""


class OutOfDomain(PitchnetError):
    """Closed-form solution evaluated past its blow-up time."""


# -- basins ------------------------------------------------------------------

class NotATree(PitchnetError):
    """Operation is only defined on tree graphs."""


# -- cli ---------------------------------------------------------------------

class UnknownFamily(PitchnetError):
    """Unrecognized named graph family."""
