"""Amplitude distributions over a configuration space and the two-step Born rule.

An :class:`AmplitudeDistribution` assigns a quaternion to every configuration
of a family.  It is stored either densely, as a ``(cardinality, 4)`` table in
canonical packing order, or lazily, as a vectorised rule mapping an array of
packed indices to a ``(n, 4)`` array of amplitudes.

Fiber reductions walk the parent space in fixed blocks.  A block fixes the
high-order magnitudes and spans all values of the low-order ones, so inside a
block the fiber sum is a plain axis reduction (pairwise summation) and each
block contributes to distinct output cells.  Block partials are folded into the
output with Neumaier compensated summation in canonical block order, so results
do not depend on the number of worker threads.
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import qalg
from .config_space import Configuration, MagnitudeFamily, Subfamily
from .errors import DegenerateStateError, ValidationError

Rule = Callable[[np.ndarray], np.ndarray]

BLOCK_SIZE = 2**16
PROB_TOL = 1e-12
# marginal mass below this fraction of the summed |Z| counts as total cancellation
DEGENERATE_RTOL = 1e-13


class AmplitudeDistribution:
    """The map ``lambda -> Z(lambda)``; immutable after construction."""

    def __init__(self, family: MagnitudeFamily, table=None, rule: Rule | None = None):
        if (table is None) == (rule is None):
            raise ValidationError("give exactly one of a dense table or an evaluation rule")
        self.family = family
        self._rule = rule
        self._table = None
        if table is not None:
            t = np.array(table, dtype=float)
            if t.shape != (family.cardinality, 4):
                raise ValidationError(
                    f"dense table has shape {t.shape}, expected ({family.cardinality}, 4)"
                )
            t.setflags(write=False)
            self._table = t

    @classmethod
    def dense(cls, family: MagnitudeFamily, table) -> AmplitudeDistribution:
        return cls(family, table=table)

    @classmethod
    def lazy(cls, family: MagnitudeFamily, rule: Rule) -> AmplitudeDistribution:
        return cls(family, rule=rule)

    @classmethod
    def from_complex(cls, family: MagnitudeFamily, values) -> AmplitudeDistribution:
        return cls(family, table=qalg.complex_to_arr(values))

    @property
    def is_lazy(self) -> bool:
        return self._table is None

    def values_at(self, indices) -> np.ndarray:
        indices = np.asarray(indices, dtype=np.int64)
        if self._table is not None:
            return self._table[indices]
        return np.asarray(self._rule(indices), dtype=float).reshape(indices.shape + (4,))

    def values(self, start: int, stop: int) -> np.ndarray:
        if self._table is not None:
            return self._table[start:stop]
        return self.values_at(np.arange(start, stop, dtype=np.int64))

    def __getitem__(self, lam) -> qalg.Quaternion:
        if isinstance(lam, Configuration):
            if lam.family != self.family:
                raise ValidationError("configuration belongs to a different family")
            lam = lam.index
        return qalg.Quaternion.from_array(self.values_at(np.array([lam]))[0])

    def table(self, budget: int | None = None) -> np.ndarray:
        """Dense ``(cardinality, 4)`` table, materialising a lazy rule if needed."""
        if self._table is not None:
            return self._table
        self.family.check_budget(budget)
        return self.values(0, self.family.cardinality)

    def materialize(self, budget: int | None = None) -> AmplitudeDistribution:
        return self if self._table is not None else AmplitudeDistribution.dense(
            self.family, self.table(budget)
        )

    def scaled(self, c: float) -> AmplitudeDistribution:
        c = float(c)
        if self._table is not None:
            return AmplitudeDistribution.dense(self.family, self._table * c)
        rule = self._rule
        return AmplitudeDistribution.lazy(self.family, lambda idx: rule(idx) * c)

    def left_multiplied(self, q: qalg.Quaternion) -> AmplitudeDistribution:
        qa = q.as_array()
        if self._table is not None:
            return AmplitudeDistribution.dense(self.family, qalg.mul_arr(qa, self._table))
        rule = self._rule
        return AmplitudeDistribution.lazy(self.family, lambda idx: qalg.mul_arr(qa, rule(idx)))

    def __add__(self, other: AmplitudeDistribution) -> AmplitudeDistribution:
        if other.family != self.family:
            raise ValidationError("cannot add distributions over different families")
        if self._table is not None and other._table is not None:
            return AmplitudeDistribution.dense(self.family, self._table + other._table)
        return AmplitudeDistribution.lazy(
            self.family, lambda idx: self.values_at(idx) + other.values_at(idx)
        )

    def to_json(self, budget: int | None = None) -> dict:
        return {
            "family": self.family.to_json(),
            "amplitudes": self.table(budget).tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> AmplitudeDistribution:
        if "family" not in data or "amplitudes" not in data:
            raise ValidationError("distribution JSON needs 'family' and 'amplitudes'")
        family = MagnitudeFamily.from_json(data["family"])
        amps = data["amplitudes"]
        try:
            rows = [list(map(float, a)) for a in amps]
        except (TypeError, ValueError):
            raise ValidationError("amplitudes must be numeric tuples") from None
        if any(len(r) not in (2, 4) for r in rows):
            raise ValidationError("each amplitude must be a complex pair or quaternion 4-tuple")
        table = np.array([r if len(r) == 4 else r + [0.0, 0.0] for r in rows]).reshape(-1, 4)
        return cls.dense(family, table)

    def dumps(self) -> str:
        return json.dumps(self.to_json())


@dataclass(frozen=True)
class ProbabilityTable:
    family: MagnitudeFamily
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.array(self.probabilities, dtype=float)
        if p.shape != (self.family.cardinality,):
            raise ValidationError(
                f"probability table of length {p.shape} for family of size "
                f"{self.family.cardinality}"
            )
        if np.any(p < 0.0):
            raise ValidationError("negative probability")
        if abs(p.sum() - 1.0) > PROB_TOL:
            raise ValidationError(f"probabilities sum to {p.sum()!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    @classmethod
    def from_weights(cls, family: MagnitudeFamily, weights) -> ProbabilityTable:
        w = np.asarray(weights, dtype=float)
        total = w.sum()
        if not total > 0.0:
            raise DegenerateStateError("all weights vanish; no ray to normalise")
        return cls(family, w / total)

    def __len__(self) -> int:
        return len(self.probabilities)

    def p(self, *labels) -> float:
        """Probability of the configuration with the given value labels."""
        return float(self.probabilities[self.family.configuration(*labels).index])

    def as_dict(self) -> dict[str, float]:
        out = {}
        for i, p in enumerate(self.probabilities):
            labels = Configuration(self.family, i).labels
            out[",".join(labels)] = float(p)
        return out


# -- reductions --------------------------------------------------------------


def _plan(parent: MagnitudeFamily, sub: Subfamily, block_size: int):
    radices = parent.radices
    m, size = 0, 1
    while m < len(radices) and size * radices[m] <= block_size:
        size *= radices[m]
        m += 1
    if m == 0 and radices:
        m, size = 1, radices[0]
    selected = set(sub.indices)
    # block reshaped to (r_{m-1}, ..., r_0); magnitude k sits on axis m-1-k
    shape = tuple(reversed(radices[:m]))
    kept = [m - 1 - k for k in reversed(range(m)) if k in selected]
    summed = [m - 1 - k for k in reversed(range(m)) if k not in selected]
    kept_shape = tuple(shape[a] for a in kept)
    grid = np.indices(kept_shape).reshape(len(kept_shape), -1) if kept_shape else np.zeros((0, 1), int)
    offsets = np.zeros(grid.shape[1], dtype=np.int64)
    for row, axis in zip(grid, kept):
        offsets += row * parent.strides[m - 1 - axis]
    return size, shape, kept, summed, offsets


def _neumaier_add(s: np.ndarray, c: np.ndarray, idx: np.ndarray, v: np.ndarray) -> None:
    a = s[idx]
    t = a + v
    c[idx] += np.where(np.abs(a) >= np.abs(v), (a - t) + v, (v - t) + a)
    s[idx] = t


def _reduce(Z: AmplitudeDistribution, sub: Subfamily, *, budget=None, threads: int = 1,
            block_size: int = BLOCK_SIZE):
    """Fiber sums of ``Z`` over ``sub`` plus the total ``sum |Z|`` mass."""
    if sub.parent != Z.family:
        raise ValidationError("subfamily does not belong to the distribution's family")
    parent = Z.family
    parent.check_budget(budget)
    size, shape, kept, summed, offsets = _plan(parent, sub, block_size)
    n_blocks = parent.cardinality // size
    order = [len(shape)] + kept + summed
    n_cells = len(offsets)

    def block(b: int):
        start = b * size
        v = Z.values(start, start + size).reshape(shape + (4,))
        v = np.ascontiguousarray(np.transpose(v, order)).reshape(4, n_cells, -1)
        partial = v.sum(axis=2).T
        mass = float(np.sqrt(np.einsum("ijk,ijk->jk", v, v)).sum())
        return sub.project_indices(start + offsets), partial, mass

    s = np.zeros((sub.family.cardinality, 4))
    c = np.zeros_like(s)
    masses = []
    if threads > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = pool.map(block, range(n_blocks))
            for idx, partial, mass in results:
                _neumaier_add(s, c, idx, partial)
                masses.append(mass)
    else:
        for b in range(n_blocks):
            idx, partial, mass = block(b)
            _neumaier_add(s, c, idx, partial)
            masses.append(mass)
    return s + c, float(np.sum(masses))


def marginalize(Z: AmplitudeDistribution, sub: Subfamily, *, budget: int | None = None,
                threads: int = 1, block_size: int = BLOCK_SIZE) -> AmplitudeDistribution:
    """Marginal amplitude: quaternion sum of ``Z`` over each fiber of ``sub``."""
    sums, _ = _reduce(Z, sub, budget=budget, threads=threads, block_size=block_size)
    return AmplitudeDistribution.dense(sub.family, sums)


def _normalised_moduli(sums: np.ndarray, mass: float, family: MagnitudeFamily) -> ProbabilityTable:
    weights = qalg.norm_sq_arr(sums)
    if not mass > 0.0 or np.sqrt(weights).sum() <= DEGENERATE_RTOL * mass:
        raise DegenerateStateError("marginal amplitude vanishes identically")
    return ProbabilityTable.from_weights(family, weights)


def born_probabilities(Z: AmplitudeDistribution, sub: Subfamily, *, budget: int | None = None,
                       threads: int = 1) -> ProbabilityTable:
    """Two-step Born rule: marginalise onto ``sub``, then normalised ``|Z|^2``."""
    sums, mass = _reduce(Z, sub, budget=budget, threads=threads)
    return _normalised_moduli(sums, mass, sub.family)


def formal_probabilities(Z: AmplitudeDistribution, *, budget: int | None = None) -> ProbabilityTable:
    """Normalised ``|Z(lambda)|^2`` over the whole family (not observable)."""
    t = Z.table(budget)
    weights = qalg.norm_sq_arr(t)
    if not weights.sum() > 0.0:
        raise DegenerateStateError("zero amplitude distribution")
    return ProbabilityTable.from_weights(Z.family, weights)


def marginal_probability(P: ProbabilityTable, sub: Subfamily) -> ProbabilityTable:
    """``P'(lambda_1) = sum of P over the fiber``."""
    sub = sub.within(P.family)
    fam = P.family
    arr = P.probabilities.reshape(tuple(reversed(fam.radices)) or (1,))
    n = len(fam)
    summed = tuple(n - 1 - k for k in range(n) if k not in set(sub.indices))
    reduced = arr.sum(axis=summed) if summed else arr
    # remaining axes are selected magnitudes in decreasing position order
    remaining = sorted(sub.indices, reverse=True)
    if not remaining:
        return ProbabilityTable(sub.family, np.atleast_1d(reduced).astype(float))
    # target layout: axes in reversed subfamily order (last selected = slowest)
    perm = [remaining.index(k) for k in reversed(sub.indices)]
    out = np.transpose(reduced, perm).ravel()
    return ProbabilityTable(sub.family, out / out.sum())


def product(Z_I: AmplitudeDistribution, Z_II: AmplitudeDistribution) -> AmplitudeDistribution:
    """Composite ``Z(l_I, l_II) = Z_I(l_I) * Z_II(l_II)``, left factor first."""
    family = Z_I.family.concat(Z_II.family)
    n_I = Z_I.family.cardinality
    if not Z_I.is_lazy and not Z_II.is_lazy:
        t = qalg.mul_arr(Z_I.table()[None, :, :], Z_II.table()[:, None, :])
        return AmplitudeDistribution.dense(family, t.reshape(-1, 4))

    def rule(idx):
        return qalg.mul_arr(Z_I.values_at(idx % n_I), Z_II.values_at(idx // n_I))

    return AmplitudeDistribution.lazy(family, rule)
