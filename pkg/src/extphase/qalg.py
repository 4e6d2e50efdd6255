"""Quaternion algebra.

Every amplitude in the package is a quaternion ``w + xI + yJ + zK``.  Complex
numbers ``a + ib`` embed as ``(a, b, 0, 0)``; left multiplication by such an
element acts as complex multiplication on the ``(w, x)`` plane.

Scalar work uses :class:`Quaternion`; bulk work uses ``(..., 4)`` float arrays
with the ``*_arr`` helpers, which follow identical conventions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

UNIT_TOL = 1e-12


@dataclass(frozen=True)
class Quaternion:
    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @classmethod
    def from_complex(cls, value: complex) -> Quaternion:
        return cls(float(value.real), float(value.imag), 0.0, 0.0)

    @classmethod
    def phase(cls, angle: float) -> Quaternion:
        """``e^{i angle}`` in the complex embedding."""
        return cls(math.cos(angle), math.sin(angle), 0.0, 0.0)

    @classmethod
    def from_array(cls, a) -> Quaternion:
        w, x, y, z = (float(v) for v in a)
        return cls(w, x, y, z)

    def as_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.w, self.x, self.y, self.z)

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def is_pure(self) -> bool:
        return self.w == 0.0

    def is_complex(self) -> bool:
        return self.y == 0.0 and self.z == 0.0

    def __add__(self, other: Quaternion) -> Quaternion:
        return add(self, other)

    def __sub__(self, other: Quaternion) -> Quaternion:
        return add(self, -other)

    def __neg__(self) -> Quaternion:
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return mul(self, other)
        return scale(self, other)

    def __rmul__(self, other):
        return scale(self, other)

    def __abs__(self) -> float:
        return math.sqrt(norm_sq(self))


I = Quaternion(0.0, 1.0, 0.0, 0.0)
J = Quaternion(0.0, 0.0, 1.0, 0.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)
ONE = Quaternion(1.0, 0.0, 0.0, 0.0)
ZERO = Quaternion()


@dataclass(frozen=True)
class Direction:
    """Unit 3-vector."""

    nx: float
    ny: float
    nz: float

    def __post_init__(self):
        n2 = self.nx * self.nx + self.ny * self.ny + self.nz * self.nz
        if not math.isfinite(n2) or abs(n2 - 1.0) > UNIT_TOL:
            raise ValidationError(
                f"direction ({self.nx}, {self.ny}, {self.nz}) is not unit "
                f"(|n|^2 = {n2!r})"
            )

    @classmethod
    def normalized(cls, v) -> Direction:
        v = np.asarray(v, dtype=float)
        norm = float(np.linalg.norm(v))
        if norm == 0.0 or not math.isfinite(norm):
            raise ValidationError(f"cannot normalise vector {v.tolist()}")
        v = v / norm
        return cls(float(v[0]), float(v[1]), float(v[2]))

    @classmethod
    def planar(cls, degrees: float) -> Direction:
        """Coplanar direction in the xz-plane, angle measured from +z."""
        t = math.radians(degrees)
        return cls(math.sin(t), 0.0, math.cos(t))

    def as_array(self) -> np.ndarray:
        return np.array([self.nx, self.ny, self.nz])

    def __neg__(self) -> Direction:
        return Direction(-self.nx, -self.ny, -self.nz)


def from_direction(n: Direction) -> Quaternion:
    """Pure quaternion ``nx I + ny J + nz K``."""
    if not isinstance(n, Direction):
        n = Direction(*(float(c) for c in n))
    return Quaternion(0.0, n.nx, n.ny, n.nz)


def add(a: Quaternion, b: Quaternion) -> Quaternion:
    return Quaternion(a.w + b.w, a.x + b.x, a.y + b.y, a.z + b.z)


def mul(a: Quaternion, b: Quaternion) -> Quaternion:
    """Hamilton product, ``I^2 = J^2 = K^2 = IJK = -1``."""
    return Quaternion(
        a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    )


def conj(a: Quaternion) -> Quaternion:
    return Quaternion(a.w, -a.x, -a.y, -a.z)


def scale(a: Quaternion, c: float) -> Quaternion:
    c = float(c)
    return Quaternion(a.w * c, a.x * c, a.y * c, a.z * c)


def norm_sq(a: Quaternion) -> float:
    return a.w * a.w + a.x * a.x + a.y * a.y + a.z * a.z


# -- array forms -------------------------------------------------------------


def mul_arr(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product of broadcastable ``(..., 4)`` arrays."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aw, ax, ay, az = np.moveaxis(a, -1, 0)
    bw, bx, by, bz = np.moveaxis(b, -1, 0)
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def conj_arr(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    out[..., 1:] *= -1.0
    return out


def norm_sq_arr(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return np.einsum("...i,...i->...", a, a)


def phase_arr(angles) -> np.ndarray:
    angles = np.asarray(angles, dtype=float)
    out = np.zeros(angles.shape + (4,))
    out[..., 0] = np.cos(angles)
    out[..., 1] = np.sin(angles)
    return out


def complex_to_arr(values) -> np.ndarray:
    values = np.asarray(values, dtype=complex)
    out = np.zeros(values.shape + (4,))
    out[..., 0] = values.real
    out[..., 1] = values.imag
    return out
