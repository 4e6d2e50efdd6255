import json

import numpy as np
import pytest

from extphase import spin_model
from extphase.amplitude import AmplitudeDistribution
from extphase.config_space import MagnitudeFamily
from extphase.errors import ModelInconsistencyError, ValidationError
from extphase.sampler import (
    Constraint,
    EnsembleSpec,
    binomial_bound,
    forbidden_outcomes,
    sample,
    singlet_constraints,
)


def singlet_spec(angles, **kw):
    dirs = spin_model.DirectionSet.planar(angles)
    Z = spin_model.singlet_state(dirs)
    return EnsembleSpec(Z, singlet_constraints(len(dirs)), **kw)


def test_reproducible():
    spec = singlet_spec([0.0, 60.0], seed=7, n=5000, workers=3)
    sub = spec.distribution.family.sub("a1", "b2")
    a = json.dumps(sample(spec, sub).to_json(), sort_keys=True)
    b = json.dumps(sample(spec, sub, threads=3).to_json(), sort_keys=True)
    assert a == b
    spec.seed = 8
    assert json.dumps(sample(spec, sub).to_json(), sort_keys=True) != a


def test_counts_sum_to_n():
    spec = singlet_spec([0.0, 60.0], seed=1, n=1234, workers=5)
    rep = sample(spec, spec.distribution.family.sub("a2", "b1"))
    assert rep.counts.sum() == 1234
    assert rep.workers == 5


def test_point_mass():
    f = MagnitudeFamily.spins(["A", "B"])
    Z = AmplitudeDistribution.from_complex(f, [0.0, 0.0, 2.0j, 0.0])
    rep = sample(EnsembleSpec(Z, n=300, seed=3), f.full())
    assert rep.counts.tolist() == [0, 0, 300, 0]
    assert rep.outcomes[2] == "+,-"


def test_same_direction_never_equal():
    spec = singlet_spec([0.0, 60.0], seed=11, n=100_000)
    rep = sample(spec, spec.distribution.family.sub("a1", "b1"))
    assert rep.forbidden == ["+,+", "-,-"]
    assert rep.counts[0] == 0 and rep.counts[3] == 0
    assert rep.within_bounds


def test_sixty_degrees_within_bound():
    spec = singlet_spec([0.0, 60.0], seed=2024, n=200_000, workers=4)
    rep = sample(spec, spec.distribution.family.sub("a1", "b2"))
    assert rep.born[0] == pytest.approx(0.125, abs=1e-12)
    assert rep.within_bounds
    assert rep.bounds[0] == pytest.approx(4 * np.sqrt(0.125 * 0.875 / 200_000))


def test_inconsistent_constraint():
    dirs = spin_model.DirectionSet.planar([0.0, 60.0])
    Z = spin_model.singlet_state(dirs)
    # claims the a-spins always cancel each other, which the state does not enforce
    spec = EnsembleSpec(Z, [Constraint(("a1", "a2"), 0.0)], n=10)
    with pytest.raises(ModelInconsistencyError):
        sample(spec, Z.family.sub("a1", "a2"))
    # constraints outside the context are not checked
    sample(spec, Z.family.sub("a1", "b2"))


def test_forbidden_mask():
    spec = singlet_spec([0.0, 45.0])
    sub = spec.distribution.family.sub("b1", "a1", "a2")
    mask = forbidden_outcomes(spec, sub)
    s = sub.family.numeric_values(np.arange(8))
    np.testing.assert_array_equal(mask, s[:, 0] + s[:, 1] != 0)


def test_spec_validation():
    f = MagnitudeFamily.spins(["A"])
    Z = AmplitudeDistribution.from_complex(f, [1.0, 1.0])
    with pytest.raises(ValidationError):
        EnsembleSpec(Z, n=0)
    with pytest.raises(ValidationError):
        EnsembleSpec(Z, workers=0)
    with pytest.raises(ValidationError):
        EnsembleSpec(Z, [Constraint(("Q",))])


def test_binomial_bound_edges():
    np.testing.assert_array_equal(binomial_bound(np.array([0.0, 1.0]), 100), [0.0, 0.0])
    assert binomial_bound(np.array([0.5]), 100)[0] == pytest.approx(0.2)
