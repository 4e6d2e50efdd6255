"""Orthodox two-level reference built from explicit complex spinors.

Nothing here touches the quaternion amplitude pipeline; directions are plain
3-sequences.  The closed forms (``*_closed``) exist only so the spinor path can
be checked against them.
"""
from __future__ import annotations

import math

import numpy as np

_SINGLET = np.array([0.0, 1.0, -1.0, 0.0], dtype=complex) / math.sqrt(2.0)


def _unit(n) -> np.ndarray:
    n = np.asarray(n, dtype=float).reshape(3)
    norm = np.linalg.norm(n)
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"direction {n.tolist()} is not unit")
    return n


def spinor(n, s: int = 1) -> np.ndarray:
    """Eigenvector of ``sigma . n`` with eigenvalue ``s`` (global phase arbitrary).

    Spin down along ``n`` is spin up along ``-n``.  The half-angle form
    ``(cos t/2, e^{i phi} sin t/2)`` is singular at ``n = -z``; for ``nz < 0``
    the equivalent gauge ``(e^{-i phi} cos t/2, sin t/2)`` is used instead.
    """
    nx, ny, nz = s * _unit(n)
    if nz >= 0.0:
        c = math.sqrt((1.0 + nz) / 2.0)
        return np.array([c, complex(nx, ny) / (2.0 * c)])
    sn = math.sqrt((1.0 - nz) / 2.0)
    return np.array([complex(nx, -ny) / (2.0 * sn), sn])


def projector(n, s: int) -> np.ndarray:
    v = spinor(n, s)
    return np.outer(v, v.conj())


def oracle_singlet_joint(n1, n2, s1: int, s2: int) -> float:
    """``<psi| P(n1,s1) (x) P(n2,s2) |psi>`` for the two-spin singlet."""
    op = np.kron(projector(n1, s1), projector(n2, s2))
    return float(np.real(_SINGLET.conj() @ op @ _SINGLET))


def oracle_singlet_table(n1, n2) -> np.ndarray:
    """2x2 joint table, rows ``s1 = +, -``, columns ``s2 = +, -``."""
    return np.array([[oracle_singlet_joint(n1, n2, s1, s2) for s2 in (1, -1)] for s1 in (1, -1)])


def oracle_conditional(n1, s1: int, n2, s2: int) -> float:
    """``|<s2(n2)|s1(n1)>|^2``."""
    amp = np.vdot(spinor(n2, s2), spinor(n1, s1))
    return float(abs(amp) ** 2)


def oracle_conditional_amplitude(n1, s1: int, n2, s2: int) -> complex:
    return complex(np.vdot(spinor(n2, s2), spinor(n1, s1)))


def oracle_correlation(n1, n2) -> float:
    t = oracle_singlet_table(n1, n2)
    return float(t[0, 0] - t[0, 1] - t[1, 0] + t[1, 1])


def oracle_chsh(a, a2, b, b2) -> float:
    return (oracle_correlation(a, b) - oracle_correlation(a, b2)
            + oracle_correlation(a2, b) + oracle_correlation(a2, b2))


def oracle_singlet_joint_closed(n1, n2, s1: int, s2: int) -> float:
    return (1.0 - s1 * s2 * float(np.dot(n1, n2))) / 4.0


def oracle_conditional_closed(n1, s1: int, n2, s2: int) -> float:
    return (1.0 + s1 * s2 * float(np.dot(n1, n2))) / 2.0
