import numpy as np
import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from infpush.prox import (GroupLayout, l1_linf_norm, linf_l1_norm, project_l1_linf_ball,
                          project_nonneg, prox_f2, prox_linf_l1, soft_threshold)

import oracles
from strategies import grouped_vectors, radii

PROPS = settings(max_examples=200, deadline=None)


@pytest.mark.parametrize("v,tau,out", [
    ([1.2], 0.5, [0.7]),
    ([-0.3, 0.3], 0.5, [0.0, 0.0]),
    ([2, -2], 0.0, [2, -2]),
])
def test_soft_threshold(v, tau, out):
    np.testing.assert_allclose(soft_threshold(v, tau), out, atol=1e-15)


def test_soft_threshold_negative_tau():
    with pytest.raises(ValueError):
        soft_threshold([1.0], -0.1)


@pytest.mark.parametrize("v,out", [([1, -2, 0], [1, 0, 0]), ([0, 3.5], [0, 3.5]), ([-5], [0])])
def test_project_nonneg(v, out):
    np.testing.assert_array_equal(project_nonneg(v), out)


def test_layout_validation():
    with pytest.raises(ValueError):
        GroupLayout(0, 2)
    with pytest.raises(ValueError):
        GroupLayout(2, 2).blocks(np.zeros(3))


def test_mixed_norms():
    lay = GroupLayout(2, 2)
    v = [1, -3, 2, 0.5]
    assert l1_linf_norm(v, lay) == 5
    assert linf_l1_norm(v, lay) == 4


def test_projection_feasible_unchanged():
    lay = GroupLayout(2, 2)
    v = np.array([0.5, -0.2, 0.1, 0.3])
    np.testing.assert_array_equal(project_l1_linf_ball(v, lay, 1.0), v)


def test_projection_single_group_is_clip():
    np.testing.assert_allclose(project_l1_linf_ball([3, -1], GroupLayout(2, 1), 2), [2, -1])


def test_projection_hand_case():
    # groups [3, 1] and [2]; the second is padded with a zero to equal size
    out = project_l1_linf_ball([3, 1, 2, 0], GroupLayout(2, 2), 4)
    np.testing.assert_allclose(out, [2.5, 1, 1.5, 0], atol=1e-14)
    # KKT: levels 2.5 and 1.5 sum to tau and cut equal mass 0.5 from each group
    assert 3 - 2.5 == pytest.approx(2 - 1.5)
    np.testing.assert_allclose(out, oracles.project_l1_linf([3, 1, 2, 0], 2, 2, 4), atol=1e-12)


def test_projection_zero_radius_and_errors():
    lay = GroupLayout(2, 1)
    np.testing.assert_array_equal(project_l1_linf_ball([1, -2], lay, 0), [0, 0])
    with pytest.raises(ValueError):
        project_l1_linf_ball([1, 2, 3], lay, 1)
    with pytest.raises(ValueError):
        project_l1_linf_ball([1, 2], lay, -1)


def test_prox_mixed_norm_examples():
    np.testing.assert_allclose(prox_linf_l1([2, -0.5], GroupLayout(2, 1), 1), [1, 0], atol=1e-15)
    v = np.array([2.0, 1.0])
    z = prox_linf_l1(v, GroupLayout(1, 2), 1)
    np.testing.assert_allclose(z, [1, 1], atol=1e-15)
    _assert_prox_optimal(v, z, GroupLayout(1, 2), 1.0)
    np.testing.assert_array_equal(prox_linf_l1([3, -1], GroupLayout(1, 2), 0), [3, -1])


def test_prox_f2_examples():
    np.testing.assert_allclose(prox_f2([1, -3], [0, 0], 1), [0.5, 0])
    v = np.array([1.5, -2.0, 0.0])
    for rho in (0.1, 1, 7):
        np.testing.assert_allclose(prox_f2(v, v, rho), project_nonneg(v), atol=1e-15)
    np.testing.assert_allclose(prox_f2([4], [2], 3), [2.5])
    res = minimize_scalar(lambda z: 0.5 * (z - 4) ** 2 + 3 * 0.5 * (z - 2) ** 2,
                          bounds=(0, 10), method="bounded", options={"xatol": 1e-12})
    assert res.x == pytest.approx(2.5, abs=1e-8)


def test_prox_f2_errors():
    with pytest.raises(ValueError):
        prox_f2([1, 2], [1], 1)
    with pytest.raises(ValueError):
        prox_f2([1], [1], 0)


def _assert_prox_optimal(v, z, lay, tau, tol=1e-8):
    # r = v - z lies in tau * subdifferential of the max-of-group-l1 norm at z:
    # its dual norm is at most tau and <r, z> attains tau * norm(z)
    r = np.asarray(v) - z
    assert l1_linf_norm(r, lay) <= tau + tol
    assert abs(r @ z - tau * linf_l1_norm(z, lay)) <= tol * max(1.0, np.abs(z).sum())


@PROPS
@given(grouped_vectors(), radii)
def test_moreau_identity_and_optimality(lv, tau):
    lay, v = lv
    p = project_l1_linf_ball(v, lay, tau)
    z = prox_linf_l1(v, lay, tau)
    np.testing.assert_allclose(z + p, v, rtol=0, atol=1e-12)
    _assert_prox_optimal(v, z, lay, tau)


@PROPS
@given(grouped_vectors(), radii)
@example((GroupLayout(1, 1), np.array([1.0])), 1e-10)  # tau far below |v|
def test_projection_feasible_and_idempotent(lv, tau):
    lay, v = lv
    p = project_l1_linf_ball(v, lay, tau)
    assert l1_linf_norm(p, lay) <= tau * (1 + 1e-12) + 1e-300
    np.testing.assert_allclose(project_l1_linf_ball(p, lay, tau), p, rtol=0, atol=1e-12)


@PROPS
@given(grouped_vectors(), radii, st.integers(0, 2**32 - 1))
def test_projection_nonexpansive(lv, tau, seed):
    lay, v = lv
    u = v + np.random.default_rng(seed).normal(size=v.size) * 3
    pu, pv = project_l1_linf_ball(u, lay, tau), project_l1_linf_ball(v, lay, tau)
    assert np.linalg.norm(pu - pv) <= np.linalg.norm(u - v) * (1 + 1e-12) + 1e-12


@PROPS
@given(grouped_vectors(), radii, st.integers(0, 2**32 - 1))
def test_projection_beats_feasible_points(lv, tau, seed):
    lay, v = lv
    p = project_l1_linf_ball(v, lay, tau)
    best = np.linalg.norm(p - v)
    rng = np.random.default_rng(seed)
    for _ in range(100):
        u = rng.normal(size=v.size) * 5
        norm = l1_linf_norm(u, lay)
        if norm > tau:
            u *= tau / norm * rng.uniform()
        assert best <= np.linalg.norm(u - v) + 1e-12


@PROPS
@given(grouped_vectors(max_size=4, max_len=12), radii)
def test_projection_matches_oracle(lv, tau):
    lay, v = lv
    p = project_l1_linf_ball(v, lay, tau)
    q = oracles.project_l1_linf(v, lay.group_size, lay.group_count, tau)
    np.testing.assert_allclose(p, q, rtol=0, atol=1e-6)


@PROPS
@given(grouped_vectors(), st.floats(0.0, 10.0), st.floats(0.01, 10.0))
def test_prox_f2_is_minimizer(lv, scale, rho):
    lay, v = lv
    b = np.roll(v, 1) * scale
    z = prox_f2(v, b, rho)
    # stationarity of 0.5||z - v||^2 + rho * 0.5||z - b||^2 over z >= 0
    grad = (z - v) + rho * (z - b)
    assert (z >= 0).all()
    np.testing.assert_allclose(grad[z > 0], 0, atol=1e-9)
    assert (grad[z == 0] >= -1e-9).all()
