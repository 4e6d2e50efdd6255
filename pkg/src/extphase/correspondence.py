"""Correspondence between extended distributions and orthodox amplitudes.

``check_projective`` tests the modulus form: marginal moduli must match target
moduli up to one real scale per target.  ``solve_strong`` solves the linear
system ``sum_fiber Z(lambda) = e^{i theta} z(lambda_1)`` for the ``Z`` values in
the least-squares sense.  Neither asserts that an exact solution exists.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import qalg
from .amplitude import (
    AmplitudeDistribution,
    born_probabilities,
    marginal_probability,
    marginalize,
)
from .config_space import MagnitudeFamily, Subfamily
from .errors import ResourceError, ValidationError

RIDGE = 1e-12
SOLVER_LIMIT = 4096


@dataclass(frozen=True)
class CorrespondenceTarget:
    subfamily: Subfamily
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes)
        if np.iscomplexobj(a) or a.ndim == 1:
            a = qalg.complex_to_arr(a)
        elif a.ndim == 2 and a.shape[1] == 2:
            a = qalg.complex_to_arr(a[:, 0] + 1j * a[:, 1])
        a = np.array(a, dtype=float)
        n = self.subfamily.family.cardinality
        if a.shape != (n, 4):
            raise ValidationError(f"target over {self.subfamily.names} needs {n} amplitudes, got {a.shape[0]}")
        if not np.any(a):
            raise ValidationError(f"target over {self.subfamily.names} is identically zero")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def from_complex(cls, subfamily: Subfamily, values) -> CorrespondenceTarget:
        return cls(subfamily, qalg.complex_to_arr(values))

    @property
    def is_complex(self) -> bool:
        return not np.any(self.amplitudes[:, 2:])


@dataclass
class PhaseAssignment:
    """Per-target phase angles ``theta(lambda_1)`` in radians."""

    angles: list[np.ndarray]

    def __post_init__(self):
        self.angles = [np.asarray(a, dtype=float) for a in self.angles]
        for a in self.angles:
            if not np.all(np.isfinite(a)):
                raise ValidationError("phase angles must be finite")

    @classmethod
    def zeros(cls, targets) -> PhaseAssignment:
        return cls([np.zeros(t.subfamily.family.cardinality) for t in targets])


@dataclass
class ResidualReport:
    names: list[tuple[str, ...]]
    scales: list[float]
    residuals: list[np.ndarray]
    underdetermined: bool | None = None
    rank: int | None = None
    unknowns: int | None = None
    kind: str = "projective"
    max_residual: float = field(init=False)

    def __post_init__(self):
        self.max_residual = max((float(np.max(r)) for r in self.residuals), default=0.0)

    def to_json(self) -> dict:
        def num(x):
            return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")

        out = {
            "kind": self.kind,
            "max_residual": num(self.max_residual),
            "targets": [
                {"magnitudes": list(n), "scale": num(s), "residuals": [num(float(v)) for v in r]}
                for n, s, r in zip(self.names, self.scales, self.residuals)
            ],
        }
        if self.underdetermined is not None:
            out.update(underdetermined=self.underdetermined, rank=self.rank, unknowns=self.unknowns)
        return out


def _unit(v: np.ndarray) -> np.ndarray | None:
    n = float(np.linalg.norm(v))
    return None if n == 0.0 else v / n


def check_projective(Z: AmplitudeDistribution, targets, *, threads: int = 1) -> ResidualReport:
    """Compare ``|marginal of Z|`` with ``|z|`` up to a real scale, per target.

    Both modulus vectors are normalised to unit length first, so the report is
    invariant under rescaling either side; the scale is the least-squares
    ``c`` minimising ``sum (m - c |z|)^2`` between the unit vectors.
    """
    targets = list(targets)
    if not targets:
        raise ValidationError("no correspondence targets given")
    names, scales, residuals = [], [], []
    for t in targets:
        sub = t.subfamily.within(Z.family)
        m = np.sqrt(qalg.norm_sq_arr(marginalize(Z, sub, threads=threads).table()))
        z = np.sqrt(qalg.norm_sq_arr(t.amplitudes))
        mu, zu = _unit(m), _unit(z)
        names.append(sub.names)
        if mu is None:
            scales.append(0.0)
            residuals.append(np.where(z > 0.0, math.inf, 0.0))
            continue
        c = float(mu @ zu)
        scales.append(c)
        residuals.append(np.abs(mu - c * zu))
    return ResidualReport(names, scales, residuals)


def incidence_matrix(family: MagnitudeFamily, targets) -> np.ndarray:
    """Rows: target configurations; columns: parent configurations."""
    idx = np.arange(family.cardinality)
    blocks = []
    for t in targets:
        sub = t.subfamily.within(family)
        proj = sub.project_indices(idx)
        block = np.zeros((sub.family.cardinality, family.cardinality))
        block[proj, idx] = 1.0
        blocks.append(block)
    return np.vstack(blocks)


def solve_strong(family: MagnitudeFamily, targets, phases: PhaseAssignment | None = None):
    """Least-squares ``Z`` with ``sum_fiber Z = e^{i theta} z`` for every target.

    Returns ``(Z, report)``; the report holds the strong-form residuals
    ``|sum_fiber Z - e^{i theta} z|`` and whether the system was rank deficient,
    in which case a ridge-regularised (near minimum-norm) solution is returned.
    """
    targets = list(targets)
    if not targets:
        raise ValidationError("no correspondence targets given")
    n = family.cardinality
    if n > SOLVER_LIMIT:
        raise ResourceError(n, SOLVER_LIMIT)
    phases = phases or PhaseAssignment.zeros(targets)
    if len(phases.angles) != len(targets):
        raise ValidationError("one phase array per target required")
    rhs = []
    for t, theta in zip(targets, phases.angles):
        if theta.shape != (t.subfamily.family.cardinality,):
            raise ValidationError("phase array length must match the target's configuration count")
        rhs.append(qalg.mul_arr(qalg.phase_arr(theta), t.amplitudes))
    b = np.vstack(rhs)
    complex_only = all(t.is_complex for t in targets)
    comps = 2 if complex_only else 4

    A = incidence_matrix(family, targets)
    rank = int(np.linalg.matrix_rank(A))
    G = A.T @ A
    if rank < n:
        G = G + RIDGE * np.eye(n)
    x = np.zeros((n, 4))
    x[:, :comps] = np.linalg.solve(G, A.T @ b[:, :comps])
    Z = AmplitudeDistribution.dense(family, x)

    names, residuals = [], []
    for t, r in zip(targets, rhs):
        sub = t.subfamily.within(family)
        diff = marginalize(Z, sub).table() - r
        names.append(sub.names)
        residuals.append(np.sqrt(qalg.norm_sq_arr(diff)))
    report = ResidualReport(names, [1.0] * len(targets), residuals,
                            underdetermined=rank < n, rank=rank, unknowns=n * comps,
                            kind="strong")
    return Z, report


def mismatch_report(Z: AmplitudeDistribution, sub_fine: Subfamily, sub_coarse: Subfamily,
                    *, threads: int = 1) -> float:
    """Max gap between the Born table on ``sub_coarse`` and the marginal of the
    Born table on ``sub_fine``."""
    if not sub_coarse.issubset(sub_fine):
        raise ValidationError(f"{sub_coarse.names} is not contained in {sub_fine.names}")
    fine = born_probabilities(Z, sub_fine.within(Z.family), threads=threads)
    coarse = born_probabilities(Z, sub_coarse.within(Z.family), threads=threads)
    marg = marginal_probability(fine, sub_coarse.within(fine.family))
    return float(np.max(np.abs(coarse.probabilities - marg.probabilities)))


def targets_from_json(family: MagnitudeFamily, data) -> tuple[list[CorrespondenceTarget], PhaseAssignment]:
    """Parse ``{"targets": [{"magnitudes": [...], "amplitudes": [[re, im], ...],
    "phases": [...]}, ...]}``."""
    items = data.get("targets") if isinstance(data, dict) else data
    if not isinstance(items, list) or not items:
        raise ValidationError("targets file must hold a non-empty 'targets' list")
    targets, angles = [], []
    for item in items:
        try:
            sub = family.sub(*item["magnitudes"])
            amps = np.asarray(item["amplitudes"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed target: {exc}") from None
        if amps.ndim != 2 or amps.shape[1] not in (2, 4):
            raise ValidationError("target amplitudes must be complex pairs or quaternion 4-tuples")
        targets.append(CorrespondenceTarget(sub, amps))
        angles.append(item.get("phases", np.zeros(sub.family.cardinality)))
    return targets, PhaseAssignment(angles)
