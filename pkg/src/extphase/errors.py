"""Exception hierarchy shared by every module."""


class ExtPhaseError(Exception):
    pass


class ValidationError(ExtPhaseError, ValueError):
    """Malformed input: non-unit direction, family mismatch, bad schema."""


class ResourceError(ExtPhaseError):
    """A configuration space exceeds the enumeration budget."""

    def __init__(self, cardinality: int, budget: int):
        self.cardinality = cardinality
        self.budget = budget
        super().__init__(
            f"configuration space of cardinality {cardinality} exceeds "
            f"enumeration budget {budget}"
        )


class DegenerateStateError(ExtPhaseError):
    """An amplitude distribution (or its marginal) is identically zero."""


class ModelInconsistencyError(ExtPhaseError):
    """A correlation constraint is not realised by destructive interference."""
