"""Pointwise jet calculus: degenerate Laplacians, anisotropy, flux fields."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emdenlab import jets as J
from emdenlab.errors import PreconditionError, SingularJetError

RNG = lambda seed: np.random.default_rng(np.random.Philox(seed))


def _random_jet(rng, n, count=1):
    u = rng.uniform(0.5, 3.0, size=count)
    g = rng.normal(size=(count, n))
    h = rng.normal(size=(count, n, n))
    h = 0.5 * (h + np.swapaxes(h, 1, 2))
    return u, g, h


class TestJet2:
    def test_rejects_nonpositive_value(self):
        with pytest.raises(PreconditionError):
            J.Jet2(np.array([-1.0]), np.zeros((1, 2)), np.zeros((1, 2, 2)))

    def test_rejects_asymmetric_hessian(self):
        h = np.array([[[0.0, 1.0], [0.0, 0.0]]])
        with pytest.raises(PreconditionError):
            J.Jet2(np.array([1.0]), np.zeros((1, 2)), h)


class TestPLaplacian:
    def test_p2_is_trace_exactly(self):
        u, g, h = _random_jet(RNG(0), 4, 50)
        np.testing.assert_array_equal(
            J.p_laplacian(g, h, 2.0), np.einsum("nii->n", h)
        )

    def test_hand_evaluated_decomposition(self):
        # u = |x|^2/2 at (1,0,0): grad e1, hess identity, p=3:
        # |grad|(lap) + |grad|^{-1} lap_inf = 3 + 1
        g = np.array([[1.0, 0.0, 0.0]])
        h = np.eye(3)[None]
        assert J.p_laplacian(g, h, 3.0)[0] == pytest.approx(4.0, rel=1e-14)

    def test_radial_exponential_oracle(self):
        # u = e^{-r} on R^3 at r=1, p=2: u'' + (2/r) u' = e^{-1}(1 - 2)
        r = 1.0
        u1, u2 = -np.exp(-r), np.exp(-r)
        g = np.array([[u1, 0.0, 0.0]])
        h = np.diag([u2, u1 / r, u1 / r])[None]
        assert J.p_laplacian(g, h, 2.0)[0] == pytest.approx(-np.exp(-1.0), rel=1e-14)

    def test_critical_point_conventions(self):
        g = np.zeros((1, 3))
        h = np.eye(3)[None]
        assert J.p_laplacian(g, h, 3.0)[0] == 0.0  # continuous extension
        with pytest.raises(SingularJetError):
            J.p_laplacian(g, h, 1.5)


class TestInfLaplacian:
    def test_axis_examples(self):
        g = np.array([[1.0, 0.0]])
        assert J.inf_laplacian(g, np.eye(2)[None])[0] == 1.0
        g2 = np.array([[2.0, 2.0]]) / np.sqrt(2)
        h2 = np.diag([1.0, -1.0])[None]
        assert J.inf_laplacian(g2, h2)[0] == pytest.approx(0.0, abs=1e-15)

    def test_quadratic_form_oracle(self):
        u, g, h = _random_jet(RNG(1), 3, 20)
        expected = np.array([gi @ hi @ gi for gi, hi in zip(g, h)])
        np.testing.assert_allclose(J.inf_laplacian(g, h), expected, rtol=1e-14)


class TestAnisotropy:
    def test_orthogonal_vector_unchanged(self):
        g = np.array([[2.0, 0.0, 0.0]])
        v = np.array([[0.0, 3.0, -1.0]])
        np.testing.assert_allclose(J.anisotropy_apply(g, 3.0, v), v, rtol=1e-15)

    def test_gradient_direction_scales(self):
        # A(grad) = (p-1) grad
        g = np.array([[0.3, -1.2, 0.5]])
        out = J.anisotropy_apply(g, 2.7, g)
        np.testing.assert_allclose(out, (2.7 - 1.0) * g, rtol=1e-14)

    def test_p2_identity_exact(self):
        rng = RNG(2)
        g = rng.normal(size=(10, 3))
        v = rng.normal(size=(10, 3))
        np.testing.assert_array_equal(J.anisotropy_apply(g, 2.0, v), v)

    @settings(max_examples=120, deadline=None)
    @given(
        p=st.sampled_from([1.5, 2.0, 3.0]),
        seed=st.integers(min_value=0, max_value=10_000),
    )
    def test_quadratic_form_eigenvalue_bounds(self, p, seed):
        rng = RNG(seed)
        g = rng.normal(size=(8, 3))
        g /= np.maximum(np.linalg.norm(g, axis=1, keepdims=True), 1e-3)
        g *= rng.uniform(0.1, 2.0, size=(8, 1))
        v = rng.normal(size=(8, 3))
        quad = np.einsum("ni,ni->n", J.anisotropy_apply(g, p, v), v)
        vv = np.einsum("ni,ni->n", v, v)
        lo, hi = min(1.0, p - 1.0), max(1.0, p - 1.0)
        assert np.all(quad >= lo * vv - 1e-10 * vv)
        assert np.all(quad <= hi * vv + 1e-10 * vv)

    def test_near_critical_rejected(self):
        g = np.array([[1e-9, 0.0]])
        with pytest.raises(SingularJetError):
            J.anisotropy_apply(g, 1.5, g, eps_grad=1e-3)


class TestFluxFields:
    def test_b0_p2_jacobian_is_hessian(self):
        u, g, h = _random_jet(RNG(3), 3, 5)
        np.testing.assert_allclose(
            J.weighted_flux_jacobian(u, g, h, 2.0, 0.0), h, rtol=1e-13
        )

    def test_trace_matches_closed_divergence(self):
        u, g, h = _random_jet(RNG(4), 4, 200)
        for p, b in [(1.5, -2.0), (2.0, 1.0), (3.0, 0.5)]:
            jac = J.weighted_flux_jacobian(u, g, h, p, b)  # asserts internally
            tr = np.einsum("nii->n", jac)
            closed = J.weighted_flux_divergence(u, g, h, p, b)
            np.testing.assert_allclose(tr, closed, rtol=1e-11, atol=1e-13)

    def test_radial_hand_oracle(self):
        # u = 2 + r^2 on R^2 at r=1, p=2, b=1: X = u grad u, |X| = 6,
        # div X = |grad u|^2 + u lap u = 4 + 3*4 = 16
        u = np.array([3.0])
        g = np.array([[2.0, 0.0]])
        h = 2.0 * np.eye(2)[None]
        X = J.weighted_flux(u, g, 2.0, 1.0)
        assert np.linalg.norm(X[0]) == pytest.approx(6.0, rel=1e-14)
        assert J.weighted_flux_divergence(u, g, h, 2.0, 1.0)[0] == pytest.approx(
            16.0, rel=1e-14
        )


class TestTraceless:
    def test_identity_killed(self):
        out = J.traceless(np.eye(3)[None], 3)
        np.testing.assert_array_equal(out, np.zeros((1, 3, 3)))

    def test_rank_one_diagonal(self):
        out = J.traceless(np.diag([1.0, 0.0, 0.0])[None], 3)
        np.testing.assert_allclose(
            out[0], np.diag([2 / 3, -1 / 3, -1 / 3]), rtol=1e-15
        )

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=10_000))
    def test_trace_vanishes_and_complement(self, seed):
        rng = RNG(seed)
        mat = rng.normal(size=(4, 4))[None]
        out = J.traceless(mat, 4)
        norm = np.abs(mat).max()
        assert abs(np.einsum("nii->n", out)[0]) <= 1e-13 * max(norm, 1.0)
        np.testing.assert_allclose(
            mat - out, (np.einsum("nii->n", mat) / 4.0)[:, None, None] * np.eye(4),
            rtol=1e-13, atol=1e-14,
        )
