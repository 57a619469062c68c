"""Exception hierarchy shared by every module."""


class IntermixError(Exception):
    """Base class for all library errors."""


class CycleDetected(IntermixError):
    pass


class UnnormalizedCpt(IntermixError):
    def __init__(self, node, parent_code, total):
        super().__init__(f"CPT of node {node} row {parent_code} sums to {total}")
        self.node = node
        self.parent_code = parent_code
        self.total = total


class PositivityViolated(IntermixError):
    def __init__(self, node, parent_code, value):
        super().__init__(
            f"CPT of node {node} has a non-positive entry at row {parent_code}, value {value}")
        self.node = node
        self.parent_code = parent_code
        self.value = value


class InvalidNetwork(IntermixError):
    """Structural problems other than cycles (bad shapes, unknown parents)."""


class IncompleteAssignment(IntermixError):
    pass


class NotASink(IntermixError):
    pass


class ExclusionViolated(IntermixError):
    def __init__(self, node):
        super().__init__(f"every value of node {node} appears in some target")
        self.node = node


class ExclusionUnsatisfiable(IntermixError):
    """No excluded value exists for a node while lifting (preconditions broken)."""

    def __init__(self, node, level=None):
        msg = f"no excluded value for node {node}"
        if level is not None:
            msg += f" at level {level}"
        super().__init__(msg)
        self.node = node
        self.level = level


class Inconsistent(IntermixError):
    """The structured system admits no valid constrained solution."""


class Degenerate(IntermixError):
    """Structured system with non-positive coefficients or c != sum(a)."""


class InvalidTupleSet(IntermixError):
    pass


class EmptySampleSet(IntermixError):
    pass


class DegenerateEstimate(IntermixError):
    pass
