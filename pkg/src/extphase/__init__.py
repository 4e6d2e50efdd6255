"""Quaternion amplitude distributions over extended configuration spaces.

Marginal amplitudes plus the two-step Born rule, checked against an
independent complex-spinor reference.
"""
from .amplitude import (
    AmplitudeDistribution,
    ProbabilityTable,
    born_probabilities,
    formal_probabilities,
    marginal_probability,
    marginalize,
    product,
)
from .config_space import (
    Configuration,
    Magnitude,
    MagnitudeFamily,
    Subfamily,
    enumerate_configs,
    fiber,
    project,
)
from .errors import (
    DegenerateStateError,
    ModelInconsistencyError,
    ResourceError,
    ValidationError,
)
from .qalg import Direction, Quaternion

__version__ = "0.1.0"
