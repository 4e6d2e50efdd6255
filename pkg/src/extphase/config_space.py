"""Finite magnitude families and their joint configuration spaces.

A configuration is packed as a mixed-radix integer with the *first* magnitude
as the least-significant digit.  For an all-binary family this is a bitmask
where bit ``k`` holds the value index of magnitude ``k``.  Every module uses
this single convention, so amplitude and probability tables are flat arrays
indexed by the packed integer.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .errors import ResourceError, ValidationError

DEFAULT_BUDGET = 2**24


@dataclass(frozen=True)
class Magnitude:
    name: str
    values: tuple[str, ...]
    numeric: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(str(v) for v in self.values))
        if len(self.values) < 2:
            raise ValidationError(f"magnitude {self.name!r} needs at least 2 values")
        if len(set(self.values)) != len(self.values):
            raise ValidationError(f"magnitude {self.name!r} has duplicate value labels")
        if self.numeric is not None:
            numeric = tuple(float(v) for v in self.numeric)
            if len(numeric) != len(self.values):
                raise ValidationError(
                    f"magnitude {self.name!r}: {len(numeric)} numeric values for "
                    f"{len(self.values)} labels"
                )
            object.__setattr__(self, "numeric", numeric)

    @classmethod
    def spin(cls, name: str) -> Magnitude:
        return cls(name, ("+", "-"), (1.0, -1.0))

    @property
    def size(self) -> int:
        return len(self.values)

    def index_of(self, label) -> int:
        try:
            return self.values.index(str(label))
        except ValueError:
            raise ValidationError(f"{label!r} is not a value of {self.name!r}") from None

    def to_json(self) -> dict:
        d = {"name": self.name, "values": list(self.values)}
        if self.numeric is not None:
            d["numeric"] = list(self.numeric)
        return d


@dataclass(frozen=True)
class MagnitudeFamily:
    magnitudes: tuple[Magnitude, ...]

    def __post_init__(self):
        object.__setattr__(self, "magnitudes", tuple(self.magnitudes))
        names = [m.name for m in self.magnitudes]
        if len(set(names)) != len(names):
            raise ValidationError(f"duplicate magnitude names in {names}")

    @classmethod
    def spins(cls, names: Sequence[str]) -> MagnitudeFamily:
        return cls(tuple(Magnitude.spin(n) for n in names))

    @classmethod
    def from_json(cls, data: dict) -> MagnitudeFamily:
        try:
            mags = data["magnitudes"]
            return cls(
                tuple(
                    Magnitude(m["name"], tuple(m["values"]), m.get("numeric"))
                    for m in mags
                )
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed family definition: {exc}") from None

    def to_json(self) -> dict:
        return {"magnitudes": [m.to_json() for m in self.magnitudes]}

    def __len__(self) -> int:
        return len(self.magnitudes)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(m.name for m in self.magnitudes)

    @property
    def radices(self) -> tuple[int, ...]:
        return tuple(m.size for m in self.magnitudes)

    @cached_property
    def strides(self) -> tuple[int, ...]:
        out, s = [], 1
        for r in self.radices:
            out.append(s)
            s *= r
        return tuple(out)

    @property
    def cardinality(self) -> int:
        c = 1
        for r in self.radices:
            c *= r
        return c

    @property
    def is_binary(self) -> bool:
        return all(r == 2 for r in self.radices)

    def position(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ValidationError(f"no magnitude named {name!r}") from None

    def sub(self, *selection) -> Subfamily:
        """Subfamily from magnitude names or positions, in the given order."""
        if len(selection) == 1 and not isinstance(selection[0], (str, int, np.integer)):
            selection = tuple(selection[0])
        idx = tuple(s if isinstance(s, (int, np.integer)) else self.position(s) for s in selection)
        return Subfamily(self, tuple(int(i) for i in idx))

    def full(self) -> Subfamily:
        return Subfamily(self, tuple(range(len(self))))

    def concat(self, other: MagnitudeFamily) -> MagnitudeFamily:
        overlap = set(self.names) & set(other.names)
        if overlap:
            raise ValidationError(f"families share magnitudes {sorted(overlap)}")
        return MagnitudeFamily(self.magnitudes + other.magnitudes)

    def configuration(self, *digits) -> Configuration:
        """Configuration from per-magnitude value indices or labels."""
        if len(digits) == 1 and isinstance(digits[0], (list, tuple)):
            digits = tuple(digits[0])
        if len(digits) != len(self):
            raise ValidationError(f"expected {len(self)} values, got {len(digits)}")
        idx = 0
        for m, stride, d in zip(self.magnitudes, self.strides, digits):
            if not isinstance(d, (int, np.integer)):
                d = m.index_of(d)
            if not 0 <= d < m.size:
                raise ValidationError(f"value index {d} out of range for {m.name!r}")
            idx += int(d) * stride
        return Configuration(self, idx)

    def digits(self, indices) -> np.ndarray:
        """Per-magnitude value indices, shape ``(n, len(family))``."""
        indices = np.asarray(indices, dtype=np.int64)
        strides = np.asarray(self.strides, dtype=np.int64)
        radices = np.asarray(self.radices, dtype=np.int64)
        return (indices[..., None] // strides) % radices

    def numeric_values(self, indices) -> np.ndarray:
        """Numeric value of each magnitude for each packed index."""
        d = self.digits(indices)
        out = np.empty(d.shape, dtype=float)
        for k, m in enumerate(self.magnitudes):
            if m.numeric is None:
                raise ValidationError(f"magnitude {m.name!r} has no numeric values")
            out[..., k] = np.asarray(m.numeric)[d[..., k]]
        return out

    def check_budget(self, budget: int | None = None) -> None:
        budget = DEFAULT_BUDGET if budget is None else budget
        if self.cardinality > budget:
            raise ResourceError(self.cardinality, budget)


@dataclass(frozen=True)
class Configuration:
    family: MagnitudeFamily
    index: int

    def __post_init__(self):
        if not 0 <= self.index < self.family.cardinality:
            raise ValidationError(
                f"index {self.index} outside configuration space of size "
                f"{self.family.cardinality}"
            )

    @property
    def digits(self) -> tuple[int, ...]:
        return tuple(int(d) for d in self.family.digits(self.index))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(m.values[d] for m, d in zip(self.family.magnitudes, self.digits))

    def __int__(self) -> int:
        return self.index


@dataclass(frozen=True)
class Subfamily:
    parent: MagnitudeFamily
    indices: tuple[int, ...]
    family: MagnitudeFamily = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        object.__setattr__(self, "indices", idx)
        if len(set(idx)) != len(idx):
            raise ValidationError(f"repeated magnitude positions {idx}")
        for i in idx:
            if not 0 <= i < len(self.parent):
                raise ValidationError(f"magnitude position {i} out of range")
        object.__setattr__(
            self, "family", MagnitudeFamily(tuple(self.parent.magnitudes[i] for i in idx))
        )

    @property
    def names(self) -> tuple[str, ...]:
        return self.family.names

    @property
    def fiber_size(self) -> int:
        return self.parent.cardinality // self.family.cardinality

    def within(self, family: MagnitudeFamily) -> Subfamily:
        """The same magnitudes, addressed by name inside ``family``."""
        if family == self.parent:
            return self
        return family.sub(*self.names)

    def issubset(self, other: Subfamily) -> bool:
        return set(self.names) <= set(other.names)

    def project_indices(self, indices) -> np.ndarray:
        """Vectorised projection of packed parent indices."""
        d = self.parent.digits(indices)
        if not self.indices:
            return np.zeros(d.shape[:-1], dtype=np.int64)
        sel = d[..., list(self.indices)]
        return sel @ np.asarray(self.family.strides, dtype=np.int64)


def _check_parent(lam: Configuration, sub: Subfamily) -> None:
    if lam.family != sub.parent:
        raise ValidationError("configuration does not belong to the subfamily's parent family")


def project(lam: Configuration, sub: Subfamily) -> Configuration:
    """Restriction of ``lam`` to the magnitudes selected by ``sub``."""
    _check_parent(lam, sub)
    return Configuration(sub.family, int(sub.project_indices(lam.index)))


def enumerate_configs(f: MagnitudeFamily, budget: int | None = None) -> Iterator[Configuration]:
    """Every configuration of ``f`` once, in canonical mixed-radix order."""
    f.check_budget(budget)
    for i in range(f.cardinality):
        yield Configuration(f, i)


def index_ranges(cardinality: int, parts: int) -> list[range]:
    """Split ``range(cardinality)`` into ``parts`` contiguous disjoint ranges."""
    parts = max(1, min(parts, cardinality))
    bounds = np.linspace(0, cardinality, parts + 1).astype(np.int64)
    return [range(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]


def fiber_indices(sub: Subfamily, lam1: Configuration, budget: int | None = None) -> np.ndarray:
    """Packed parent indices of ``{lam : project(lam, sub) == lam1}``, sorted."""
    if lam1.family != sub.family:
        raise ValidationError("configuration does not live in the subfamily's space")
    parent = sub.parent
    parent.check_budget(budget)
    base = 0
    for k, d in zip(sub.indices, lam1.digits):
        base += d * parent.strides[k]
    free = [k for k in range(len(parent)) if k not in set(sub.indices)]
    out = np.array([base], dtype=np.int64)
    for k in free:
        steps = np.arange(parent.radices[k], dtype=np.int64) * parent.strides[k]
        out = (out[None, :] + steps[:, None]).ravel()
    return np.sort(out)


def fiber(sub: Subfamily, lam1: Configuration, budget: int | None = None) -> Iterator[Configuration]:
    for i in fiber_indices(sub, lam1, budget):
        yield Configuration(sub.parent, int(i))
