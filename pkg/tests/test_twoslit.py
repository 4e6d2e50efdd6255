import math

import numpy as np
import pytest

from extphase import qalg, twoslit
from extphase.amplitude import born_probabilities, marginalize
from extphase.errors import ValidationError

GEOM = twoslit.SlitGeometry()
SCREEN = twoslit.Screen.default(GEOM)


@pytest.fixture(scope="module")
def state():
    return twoslit.build_state(GEOM, SCREEN)


def test_geometry_validation():
    with pytest.raises(ValidationError):
        twoslit.SlitGeometry(separation=0.0)
    with pytest.raises(ValidationError):
        twoslit.SlitGeometry(wavelength=-1.0)
    with pytest.raises(ValidationError):
        twoslit.Screen((0.0, 0.0, 1.0))


def test_symmetric_centre():
    assert twoslit.slit_amplitude("L", 0.0, GEOM) == twoslit.slit_amplitude("R", 0.0, GEOM)


@pytest.mark.parametrize("r", [-200.0, 0.0, 3.7, 250.0])
def test_kernel_modulus(r):
    for slit in twoslit.SLITS:
        rho = math.hypot(GEOM.screen_distance, r - GEOM.slit_position(slit))
        assert qalg.norm_sq(twoslit.slit_amplitude(slit, r, GEOM)) == pytest.approx(rho ** -2, rel=1e-14)


def test_first_null():
    r0 = twoslit.first_null(GEOM)
    assert GEOM.distance("L", r0) - GEOM.distance("R", r0) == pytest.approx(0.5, abs=1e-12)
    total = twoslit.slit_amplitude("L", r0, GEOM) + twoslit.slit_amplitude("R", r0, GEOM)
    envelope = abs(twoslit.slit_amplitude("L", r0, GEOM))
    rel = abs(total) / envelope
    # residual from the 1/rho mismatch between the two paths only
    rho_l, rho_r = GEOM.distance("L", r0), GEOM.distance("R", r0)
    assert rel == pytest.approx(abs(1 - rho_l / rho_r), rel=1e-6)
    assert rel < 1e-3


def test_family_and_state(state):
    assert state.family.cardinality == 2 * len(SCREEN)
    assert state.family.names == ("S", "R")
    left, right = twoslit.branches(state)
    np.testing.assert_array_equal(left[7], twoslit.slit_amplitude("L", SCREEN.positions[7], GEOM).as_array())
    np.testing.assert_array_equal(right[7], twoslit.slit_amplitude("R", SCREEN.positions[7], GEOM).as_array())


def test_slit_marginal_balanced(state):
    # mirror-symmetric screen: both slit marginals have equal modulus
    p = born_probabilities(state, state.family.sub("S")).probabilities
    np.testing.assert_allclose(p, [0.5, 0.5], atol=1e-12)


def test_position_marginal_is_branch_sum(state):
    left, right = twoslit.branches(state)
    np.testing.assert_allclose(marginalize(state, state.family.sub("R")).table(), left + right, atol=1e-18)


def test_pattern_shape(state):
    p = twoslit.diffraction_pattern(state).probabilities
    assert p.sum() == pytest.approx(1.0, abs=1e-12)
    centre = len(p) // 2
    assert SCREEN.positions[centre] == 0.0
    assert p[centre] == p.max()
    # fine screen so the sampled minimum sits on the null
    r0 = twoslit.first_null(GEOM)
    fine = twoslit.Screen(tuple(sorted(set(np.linspace(-1.5 * r0, 1.5 * r0, 2000).tolist()) | {r0})))
    pf = twoslit.diffraction_pattern(twoslit.build_state(GEOM, fine)).probabilities
    at_null = pf[fine.positions.index(r0)]
    assert at_null <= 1e-3 * pf.max()


def test_single_slit_no_fringes(state):
    left, right = twoslit.branches(state)
    Z = twoslit._from_branches(state.family, left, np.zeros_like(right))
    p = twoslit.diffraction_pattern(Z).probabilities
    rho = GEOM.distance("L", SCREEN.array)
    np.testing.assert_allclose(p, rho ** -2 / np.sum(rho ** -2), rtol=1e-12)
    # unimodal around the slit axis (screen points straddle it symmetrically)
    k = int(np.argmax(p))
    assert np.all(np.diff(p[:k + 1]) > 0) and np.all(np.diff(p[k + 1:]) < 0)


def test_plate_identity_and_null(state):
    np.testing.assert_array_equal(twoslit.phase_plate(state, 0.0).table(), state.table())
    p = twoslit.diffraction_pattern(twoslit.phase_plate(state, math.pi)).probabilities
    assert p[len(p) // 2] <= 1e-12


def test_plate_keeps_moduli(state):
    _, right = twoslit.branches(state)
    _, shifted = twoslit.branches(twoslit.phase_plate(state, 1.234))
    np.testing.assert_allclose(qalg.norm_sq_arr(shifted), qalg.norm_sq_arr(right), rtol=1e-14)


@pytest.mark.parametrize("phi1, phi2", [(0.3, 0.9), (-2.0, 2.5), (math.pi, math.pi)])
def test_plate_composition(state, phi1, phi2):
    twice = twoslit.phase_plate(twoslit.phase_plate(state, phi1), phi2).table()
    once = twoslit.phase_plate(state, phi1 + phi2).table()
    scale = np.max(np.abs(once))
    assert np.max(np.abs(twice - once)) <= 1e-12 * scale


def test_phase_grid():
    np.testing.assert_allclose(twoslit.phase_grid(4), [-math.pi, -math.pi / 2, 0.0, math.pi / 2])
    with pytest.raises(ValidationError):
        twoslit.phase_grid(1)


def test_decohered_is_sum_of_single_slits(state):
    left, right = twoslit.single_slit_patterns(state)
    dec = twoslit.decohered_pattern(state, 8).probabilities
    assert np.max(np.abs(dec - (left + right))) <= 1e-12


def test_decohered_brute_average(state):
    # independent path: average normalised-then-reweighted patterns via complex arithmetic
    left, right = twoslit.branches(state)
    zl = left[:, 0] + 1j * left[:, 1]
    zr = right[:, 0] + 1j * right[:, 1]
    M = 16
    acc = sum(np.abs(zl + np.exp(1j * phi) * zr) ** 2 for phi in -np.pi + 2 * np.pi * np.arange(M) / M) / M
    ref = acc / acc.sum()
    np.testing.assert_allclose(twoslit.decohered_pattern(state, M).probabilities, ref, atol=1e-14)


def test_decoherence_grid_independent(state):
    ref = twoslit.decohered_pattern(state, 2).probabilities
    for M in (4, 8, 64):
        assert np.max(np.abs(twoslit.decohered_pattern(state, M).probabilities - ref)) <= 1e-12


def test_left_branch_conditional(state):
    left, _ = twoslit.single_slit_patterns(state)
    rho = GEOM.distance("L", SCREEN.array)
    np.testing.assert_allclose(left / left.sum(), rho ** -2 / np.sum(rho ** -2), rtol=1e-12)


def test_visibility(state):
    left, right = twoslit.single_slit_patterns(state)
    env = left + right
    mask = twoslit.central_mask(SCREEN, GEOM)
    assert twoslit.fringe_visibility(twoslit.diffraction_pattern(state).probabilities, env, mask) > 0.5
    assert twoslit.fringe_visibility(twoslit.decohered_pattern(state).probabilities, env, mask) < 1e-9


def test_visibility_definition():
    assert twoslit.fringe_visibility([1.0, 3.0, 1.0]) == pytest.approx(0.5)
    assert twoslit.fringe_visibility([2.0, 6.0], envelope=[2.0, 2.0]) == pytest.approx(0.5)


def test_pattern_table_normalised():
    cols = twoslit.pattern_table(GEOM, SCREEN, 8, plate=0.7)
    for name in ("P_interference", "P_decohered", "P_plate"):
        assert cols[name].sum() == pytest.approx(1.0, abs=1e-12)
    assert (cols["P_left_only"] + cols["P_right_only"]).sum() == pytest.approx(1.0, abs=1e-12)
