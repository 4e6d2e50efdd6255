"""Per-context outcome sampling from Born tables.

The hidden configuration carried by each ensemble member is never sampled
from a joint distribution over the full family; each measurement context is
sampled on its own from the Born table of that context.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .amplitude import AmplitudeDistribution, born_probabilities
from .config_space import Configuration, Subfamily, index_ranges
from .errors import ModelInconsistencyError, ValidationError

GENERATOR = "numpy Philox4x64-10; worker stream SeedSequence(seed, spawn_key=(worker,))"
FORBIDDEN_TOL = 1e-12
SIGMAS = 4.0


@dataclass(frozen=True)
class Constraint:
    """``sum of numeric values of magnitudes == total`` on the correlation set."""

    magnitudes: tuple[str, ...]
    total: float = 0.0


@dataclass
class EnsembleSpec:
    distribution: AmplitudeDistribution
    constraints: list[Constraint] = field(default_factory=list)
    seed: int = 0
    n: int = 1000
    workers: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("sample count must be >= 1")
        if self.workers < 1:
            raise ValidationError("worker count must be >= 1")
        names = set(self.distribution.family.names)
        for c in self.constraints:
            missing = set(c.magnitudes) - names
            if missing:
                raise ValidationError(f"constraint references unknown magnitudes {sorted(missing)}")


@dataclass
class FrequencyReport:
    context: tuple[str, ...]
    outcomes: list[str]
    counts: np.ndarray
    frequencies: np.ndarray
    born: np.ndarray
    bounds: np.ndarray
    seed: int
    n: int
    workers: int
    forbidden: list[str] = field(default_factory=list)

    @property
    def deviations(self) -> np.ndarray:
        return np.abs(self.frequencies - self.born)

    @property
    def max_abs_deviation(self) -> float:
        return float(self.deviations.max())

    @property
    def within_bounds(self) -> bool:
        return bool(np.all(self.deviations <= self.bounds))

    def to_json(self) -> dict:
        return {
            "context": list(self.context),
            "outcomes": self.outcomes,
            "counts": [int(c) for c in self.counts],
            "frequencies": [float(f) for f in self.frequencies],
            "born": [float(p) for p in self.born],
            "deviation_bounds": [float(b) for b in self.bounds],
            "max_abs_deviation": self.max_abs_deviation,
            "within_bounds": self.within_bounds,
            "forbidden_outcomes": self.forbidden,
            "seed": self.seed,
            "n": self.n,
            "workers": self.workers,
            "generator": GENERATOR,
        }


def _worker_rng(seed: int, worker: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(worker,))
    return np.random.Generator(np.random.Philox(ss))


def binomial_bound(p: np.ndarray, n: int, sigmas: float = SIGMAS) -> np.ndarray:
    return sigmas * np.sqrt(p * (1.0 - p) / n)


def forbidden_outcomes(spec: EnsembleSpec, sub: Subfamily) -> np.ndarray:
    """Mask of context outcomes violating a constraint fully inside ``sub``."""
    fam = sub.family
    mask = np.zeros(fam.cardinality, dtype=bool)
    idx = np.arange(fam.cardinality)
    for c in spec.constraints:
        if not set(c.magnitudes) <= set(fam.names):
            continue
        vals = fam.numeric_values(idx)[:, [fam.position(m) for m in c.magnitudes]]
        mask |= ~np.isclose(vals.sum(axis=1), c.total, rtol=0.0, atol=1e-12)
    return mask


def sample(spec: EnsembleSpec, sub: Subfamily, *, threads: int = 1,
           sigmas: float = SIGMAS) -> FrequencyReport:
    """Draw ``spec.n`` outcomes of the measurement context ``sub``."""
    sub = sub.within(spec.distribution.family)
    table = born_probabilities(spec.distribution, sub)
    p = table.probabilities.copy()
    forbidden = forbidden_outcomes(spec, sub)
    bad = forbidden & (p > FORBIDDEN_TOL)
    if np.any(bad):
        labels = [",".join(Configuration(sub.family, int(i)).labels) for i in np.flatnonzero(bad)]
        raise ModelInconsistencyError(
            f"constrained outcomes {labels} of context {sub.names} have nonzero Born probability"
        )
    p[forbidden] = 0.0
    p /= p.sum()
    cdf = np.cumsum(p)
    cdf /= cdf[-1]

    chunks = index_ranges(spec.n, spec.workers)

    def draw(w: int) -> np.ndarray:
        u = _worker_rng(spec.seed, w).random(len(chunks[w]))
        return np.bincount(np.searchsorted(cdf, u, side="right"), minlength=len(p))

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(draw, range(len(chunks))))
    else:
        parts = [draw(w) for w in range(len(chunks))]
    counts = np.sum(parts, axis=0)
    if np.any(counts[forbidden]):
        raise ModelInconsistencyError("a forbidden outcome was drawn")

    outcomes = [",".join(Configuration(sub.family, i).labels) for i in range(len(p))]
    return FrequencyReport(
        context=sub.names,
        outcomes=outcomes,
        counts=counts,
        frequencies=counts / spec.n,
        born=p,
        bounds=binomial_bound(p, spec.n, sigmas),
        seed=spec.seed,
        n=spec.n,
        workers=len(chunks),
        forbidden=[o for o, f in zip(outcomes, forbidden) if f],
    )


def singlet_constraints(K: int) -> list[Constraint]:
    """``s_j^a + s_j^b = 0`` for every direction."""
    return [Constraint((f"a{j + 1}", f"b{j + 1}"), 0.0) for j in range(K)]

