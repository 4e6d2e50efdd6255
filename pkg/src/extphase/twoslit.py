"""Two-slit model over the family ``{S} x {R}``.

``S`` is the slit (``L`` or ``R``) and ``R`` the screen position.  Each slit is
a monochromatic point source with kernel ``e^{ik rho} / rho``.  Amplitudes are
complex-embedded quaternions, so phase plates act by left multiplication.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import qalg
from .amplitude import (
    AmplitudeDistribution,
    ProbabilityTable,
    born_probabilities,
    formal_probabilities,
)
from .config_space import Magnitude, MagnitudeFamily
from .errors import ValidationError

SLITS = ("L", "R")


@dataclass(frozen=True)
class SlitGeometry:
    separation: float = 5.0
    wavelength: float = 1.0
    screen_distance: float = 1000.0

    def __post_init__(self):
        for name in ("separation", "wavelength", "screen_distance"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ValidationError(f"{name} must be positive, got {v!r}")

    @property
    def k(self) -> float:
        return 2.0 * math.pi / self.wavelength

    def slit_position(self, slit: str) -> float:
        if slit == "L":
            return -self.separation / 2.0
        if slit == "R":
            return self.separation / 2.0
        raise ValidationError(f"unknown slit {slit!r}")

    def distance(self, slit: str, r):
        dr = np.asarray(r, dtype=float) - self.slit_position(slit)
        return np.hypot(self.screen_distance, dr)

    @property
    def fringe_period(self) -> float:
        """Far-field fringe spacing on the screen."""
        return self.wavelength * self.screen_distance / self.separation


@dataclass(frozen=True)
class Screen:
    positions: tuple[float, ...]

    def __post_init__(self):
        pos = tuple(float(p) for p in self.positions)
        object.__setattr__(self, "positions", pos)
        if len(pos) < 2:
            raise ValidationError("a screen needs at least two positions")
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise ValidationError("screen positions must be strictly increasing")

    @classmethod
    def uniform(cls, half_width: float, points: int) -> Screen:
        if points < 2 or not half_width > 0.0:
            raise ValidationError("screen needs >= 2 points and a positive half-width")
        return cls(tuple(np.linspace(-half_width, half_width, points)))

    @classmethod
    def default(cls, geom: SlitGeometry, points: int = 501) -> Screen:
        return cls.uniform(0.25 * geom.screen_distance, points)

    def __len__(self) -> int:
        return len(self.positions)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.positions)


def slit_amplitude(slit: str, r: float, geom: SlitGeometry) -> qalg.Quaternion:
    rho = float(geom.distance(slit, r))
    return qalg.Quaternion.from_complex(np.exp(1j * geom.k * rho) / rho)


def _slit_amplitudes(slit: str, r: np.ndarray, geom: SlitGeometry) -> np.ndarray:
    rho = geom.distance(slit, r)
    return qalg.complex_to_arr(np.exp(1j * geom.k * rho) / rho)


def family(screen: Screen) -> MagnitudeFamily:
    positions = Magnitude("R", tuple(f"r{i}" for i in range(len(screen))), screen.positions)
    return MagnitudeFamily((Magnitude("S", SLITS, (-1.0, 1.0)), positions))


def build_state(geom: SlitGeometry, screen: Screen) -> AmplitudeDistribution:
    """Dense state; packed index ``slit + 2 * position``."""
    r = screen.array
    table = np.empty((len(r), 2, 4))
    table[:, 0] = _slit_amplitudes("L", r, geom)
    table[:, 1] = _slit_amplitudes("R", r, geom)
    return AmplitudeDistribution.dense(family(screen), table.reshape(-1, 4))


def branches(Z: AmplitudeDistribution) -> tuple[np.ndarray, np.ndarray]:
    """``(Z(L, r_i), Z(R, r_i))`` as ``(M, 4)`` arrays."""
    t = Z.table().reshape(-1, 2, 4)
    return t[:, 0], t[:, 1]


def _from_branches(fam: MagnitudeFamily, left: np.ndarray, right: np.ndarray) -> AmplitudeDistribution:
    return AmplitudeDistribution.dense(fam, np.stack([left, right], axis=1).reshape(-1, 4))


def diffraction_pattern(Z: AmplitudeDistribution) -> ProbabilityTable:
    return born_probabilities(Z, Z.family.sub("R"))


def phase_plate(Z: AmplitudeDistribution, phi: float) -> AmplitudeDistribution:
    """Left-multiply every ``R``-slit amplitude by ``e^{i phi}``."""
    left, right = branches(Z)
    return _from_branches(Z.family, left, qalg.mul_arr(qalg.Quaternion.phase(phi).as_array(), right))


def phase_grid(m_phases: int) -> np.ndarray:
    if m_phases < 2:
        raise ValidationError("phase averaging needs at least 2 grid points")
    return -math.pi + 2.0 * math.pi * np.arange(m_phases) / m_phases


def decohered_pattern(Z: AmplitudeDistribution, m_phases: int = 8) -> ProbabilityTable:
    """Screen pattern averaged over a uniform grid of phase-plate shifts.

    The unnormalised ``|Z(L) + e^{i phi} Z(R)|^2`` is averaged and the result
    normalised once.  The cross term is a single first harmonic in ``phi``, so
    any full-period uniform grid with two or more points cancels it exactly.
    """
    left, right = branches(Z)
    acc = np.zeros(len(left))
    for phi in phase_grid(m_phases):
        shifted = qalg.mul_arr(qalg.Quaternion.phase(phi).as_array(), right)
        acc += qalg.norm_sq_arr(left + shifted)
    return ProbabilityTable.from_weights(Z.family.sub("R").family, acc / m_phases)


def single_slit_patterns(Z: AmplitudeDistribution) -> tuple[np.ndarray, np.ndarray]:
    """Formal ``P(L, r_i)`` and ``P(R, r_i)``, jointly normalised."""
    p = formal_probabilities(Z).probabilities.reshape(-1, 2)
    return p[:, 0].copy(), p[:, 1].copy()


def fringe_visibility(pattern, envelope=None, mask=None) -> float:
    """``(max - min) / (max + min)``, optionally of ``pattern / envelope``.

    Dividing by the incoherent envelope removes the slow ``1/rho^2`` fall-off
    so only interference contrast remains.
    """
    p = np.asarray(pattern, dtype=float)
    if envelope is not None:
        p = p / np.asarray(envelope, dtype=float)
    if mask is not None:
        p = p[mask]
    hi, lo = p.max(), p.min()
    return float((hi - lo) / (hi + lo))


def central_mask(screen: Screen, geom: SlitGeometry, fringes: float = 2.0) -> np.ndarray:
    """Screen points within ``fringes`` fringe periods of the axis."""
    return np.abs(screen.array) <= fringes * geom.fringe_period


def first_null(geom: SlitGeometry) -> float:
    """Screen position ``r > 0`` where the path difference is half a wavelength."""
    def f(r):
        return float(geom.distance("L", r) - geom.distance("R", r)) - geom.wavelength / 2.0

    hi = geom.screen_distance
    while f(hi) < 0.0:
        hi *= 2.0
    return brentq(f, 0.0, hi, xtol=1e-14 * geom.screen_distance, rtol=1e-15)


def pattern_table(geom: SlitGeometry, screen: Screen, m_phases: int = 8,
                  plate: float | None = None) -> dict[str, np.ndarray]:
    """All screen columns emitted by the command line."""
    Z = build_state(geom, screen)
    left, right = single_slit_patterns(Z)
    cols = {
        "r": screen.array,
        "P_interference": diffraction_pattern(Z).probabilities,
        "P_decohered": decohered_pattern(Z, m_phases).probabilities,
        "P_left_only": left,
        "P_right_only": right,
    }
    if plate is not None:
        cols["P_plate"] = diffraction_pattern(phase_plate(Z, plate)).probabilities
    return cols
