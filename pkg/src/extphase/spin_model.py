"""Quaternion spin amplitudes over ``K`` directions.

Each direction ``n_j`` contributes a binary magnitude ``S_j`` valued ``+1``/``-1``
and the pure quaternion ``N_j``.  An elementary configuration carries the
amplitude ``sum_j s_j N_j``.  The two-particle singlet lives on ``2K`` binary
magnitudes, particle ``a`` first, with ``Z_T(la, lb) = Z(la) - Z(lb)``; it is
always evaluated lazily.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import qalg
from .amplitude import (
    AmplitudeDistribution,
    ProbabilityTable,
    born_probabilities,
    formal_probabilities,
    marginal_probability,
    marginalize,
)
from .config_space import Configuration, MagnitudeFamily
from .errors import ValidationError

DUPLICATE_TOL = 1e-9


@dataclass(frozen=True)
class DirectionSet:
    directions: tuple[qalg.Direction, ...]
    quaternions: np.ndarray = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        dirs = tuple(d if isinstance(d, qalg.Direction) else qalg.Direction(*d)
                     for d in self.directions)
        object.__setattr__(self, "directions", dirs)
        if not dirs:
            raise ValidationError("a direction set needs at least one direction")
        vecs = np.array([d.as_array() for d in dirs])
        for i in range(len(vecs)):
            for j in range(i):
                gap = min(np.linalg.norm(vecs[i] - vecs[j]), np.linalg.norm(vecs[i] + vecs[j]))
                if gap < DUPLICATE_TOL:
                    raise ValidationError(
                        f"directions {j} and {i} coincide up to sign (gap {gap:.3g})"
                    )
        quats = np.zeros((len(dirs), 4))
        quats[:, 1:] = vecs
        quats.setflags(write=False)
        object.__setattr__(self, "quaternions", quats)

    @classmethod
    def from_vectors(cls, vectors, normalize: bool = False) -> DirectionSet:
        if normalize:
            return cls(tuple(qalg.Direction.normalized(v) for v in vectors))
        return cls(tuple(qalg.Direction(*map(float, v)) for v in vectors))

    @classmethod
    def planar(cls, degrees: Sequence[float]) -> DirectionSet:
        return cls(tuple(qalg.Direction.planar(a) for a in degrees))

    def __len__(self) -> int:
        return len(self.directions)

    @property
    def vectors(self) -> np.ndarray:
        return self.quaternions[:, 1:]

    def N(self, j: int) -> qalg.Quaternion:
        return qalg.from_direction(self.directions[j])

    def dot(self, i: int, j: int) -> float:
        return float(self.vectors[i] @ self.vectors[j])

    def extended(self, more) -> DirectionSet:
        return DirectionSet(self.directions + tuple(
            d if isinstance(d, qalg.Direction) else qalg.Direction(*d) for d in more))


def spin_names(K: int, prefix: str = "S") -> list[str]:
    return [f"{prefix}{j + 1}" for j in range(K)]


def spin_family(K: int, prefix: str = "S") -> MagnitudeFamily:
    return MagnitudeFamily.spins(spin_names(K, prefix))


def singlet_family(K: int) -> MagnitudeFamily:
    return MagnitudeFamily.spins(spin_names(K, "a") + spin_names(K, "b"))


def _signs(indices: np.ndarray, n_bits: int, offset: int = 0) -> np.ndarray:
    bits = (indices[..., None] >> (np.arange(n_bits) + offset)) & 1
    return 1.0 - 2.0 * bits


def _spin_rule(dirs: DirectionSet):
    quats = dirs.quaternions
    K = len(dirs)

    def rule(idx):
        return _signs(idx, K) @ quats

    return rule


def spin_amplitude(lam: Configuration, dirs: DirectionSet) -> qalg.Quaternion:
    """``sum_j s_j N_j`` for a configuration over the ``K`` spin magnitudes."""
    fam = lam.family
    if len(fam) != len(dirs) or not fam.is_binary:
        raise ValidationError(
            f"spin configuration has {len(fam)} magnitudes, direction set has {len(dirs)}"
        )
    s = fam.numeric_values(lam.index)
    return qalg.Quaternion.from_array(s @ dirs.quaternions)


def spin_distribution(dirs: DirectionSet) -> AmplitudeDistribution:
    return AmplitudeDistribution.lazy(spin_family(len(dirs)), _spin_rule(dirs))


def known_spin_state(dirs: DirectionSet, j: int, s: int) -> AmplitudeDistribution:
    """Spin amplitudes restricted to the fiber ``s_j = s``; zero elsewhere."""
    K = len(dirs)
    if not 0 <= j < K:
        raise ValidationError(f"direction index {j} out of range for K={K}")
    if s not in (1, -1):
        raise ValidationError("spin value must be +1 or -1")
    base = _spin_rule(dirs)
    bit = 0 if s == 1 else 1

    def rule(idx):
        vals = base(idx)
        vals[((idx >> j) & 1) != bit] = 0.0
        return vals

    return AmplitudeDistribution.lazy(spin_family(K), rule)


def singlet_state(dirs: DirectionSet) -> AmplitudeDistribution:
    """Lazy ``Z_T(la, lb) = Z(la) - Z(lb)`` over ``2K`` binary magnitudes."""
    K = len(dirs)
    quats = dirs.quaternions

    def rule(idx):
        return (_signs(idx, K) - _signs(idx, K, K)) @ quats

    return AmplitudeDistribution.lazy(singlet_family(K), rule)


def _context(dirs: DirectionSet, a_dirs, b_dirs):
    K = len(dirs)
    for i in list(a_dirs) + list(b_dirs):
        if not 0 <= i < K:
            raise ValidationError(f"direction index {i} out of range for K={K}")
    Z = singlet_state(dirs)
    names = [f"a{i + 1}" for i in a_dirs] + [f"b{j + 1}" for j in b_dirs]
    return Z, Z.family.sub(*names)


def joint_spin_probability(dirs: DirectionSet, i: int, j: int, *, threads: int = 1) -> ProbabilityTable:
    """Born table of the singlet over ``(s_i^a, s_j^b)``."""
    Z, sub = _context(dirs, [i], [j])
    return born_probabilities(Z, sub, threads=threads)


def joint_matrix(table: ProbabilityTable) -> np.ndarray:
    """2x2 view of a two-binary-magnitude table: rows first magnitude ``+,-``."""
    return table.probabilities.reshape(2, 2).T


def _expectation(table: ProbabilityTable) -> float:
    p = joint_matrix(table)
    return float(p[0, 0] - p[0, 1] - p[1, 0] + p[1, 1])


def correlation(dirs: DirectionSet, i: int, j: int, *, threads: int = 1) -> float:
    """``E(i, j) = sum s s' P(s, s')``."""
    return _expectation(joint_spin_probability(dirs, i, j, threads=threads))


_CHSH_PAIRS = [(0, 2), (0, 3), (1, 2), (1, 3)]


def _chsh(E) -> float:
    return E[0] - E[1] + E[2] + E[3]


def chsh(dirs: DirectionSet, a: int, a2: int, b: int, b2: int, *, threads: int = 1) -> float:
    """``E(a,b) - E(a,b') + E(a',b) + E(a',b')`` from Born tables."""
    idx = [a, a2, b, b2]
    return _chsh([correlation(dirs, idx[x], idx[y], threads=threads) for x, y in _CHSH_PAIRS])


def _formal_chsh(dirs: DirectionSet, idx, signs) -> float:
    a_dirs = list(dict.fromkeys(idx[:2]))
    b_dirs = list(dict.fromkeys(idx[2:]))
    Z, sub = _context(dirs, a_dirs, b_dirs)
    formal = formal_probabilities(marginalize(Z, sub))
    E = []
    for x, y in _CHSH_PAIRS:
        pair = formal.family.sub(f"a{idx[x] + 1}", f"b{idx[y] + 1}")
        E.append(signs[x] * signs[y] * _expectation(marginal_probability(formal, pair)))
    return _chsh(E)


def formal_chsh(dirs: DirectionSet, a: int, a2: int, b: int, b2: int) -> float:
    """CHSH from marginals of the formal ``|Z|^2`` table on ``(a, a', b, b')``.

    These pairwise tables are marginals of one joint distribution, so the
    value is bounded by 2 in absolute value.
    """
    return _formal_chsh(dirs, [a, a2, b, b2], [1, 1, 1, 1])


def index_directions(vectors) -> tuple[DirectionSet, list[int], list[int]]:
    """Collapse directions equal up to sign into one set.

    Returns the set, each input's index in it and the sign relating them;
    spin along ``-n`` is minus spin along ``n``.
    """
    kept: list[np.ndarray] = []
    idx, signs = [], []
    for v in vectors:
        v = qalg.Direction(*map(float, v)).as_array()
        for k, u in enumerate(kept):
            if np.linalg.norm(v - u) < DUPLICATE_TOL:
                idx.append(k), signs.append(1)
                break
            if np.linalg.norm(v + u) < DUPLICATE_TOL:
                idx.append(k), signs.append(-1)
                break
        else:
            idx.append(len(kept)), signs.append(1)
            kept.append(v)
    return DirectionSet.from_vectors(kept), idx, signs


def chsh_for_directions(a, a2, b, b2) -> tuple[float, float]:
    """``(chsh, formal_chsh)`` for four arbitrary unit vectors."""
    dirs, idx, sg = index_directions([a, a2, b, b2])
    E = [sg[x] * sg[y] * correlation(dirs, idx[x], idx[y]) for x, y in _CHSH_PAIRS]
    return _chsh(E), _formal_chsh(dirs, idx, sg)


def in_correlation_set(lam: Configuration, K: int) -> bool:
    """Singlet correlation ``s_j^a + s_j^b = 0`` for every direction."""
    s = lam.family.numeric_values(lam.index)
    return bool(np.all(s[:K] + s[K:2 * K] == 0.0))


def canonical_chsh_angles() -> tuple[float, float, float, float]:
    return (0.0, 90.0, 45.0, 135.0)


TSIRELSON = 2.0 * math.sqrt(2.0)
