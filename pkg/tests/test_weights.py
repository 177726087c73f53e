"""Quadrature weights and classical CQ weights."""

from __future__ import annotations

import numpy as np
import pytest

from convspline.errors import TransformUnavailableError
from convspline.kernels import BesselJ0, Constant, Cosine, Custom, Step
from convspline.timebasis import BSplineIso, CQBasis, ModifiedCubic, TimeGrid
from convspline.weights import (
    cq_symbol,
    weights_cq,
    weights_constant_closed_form,
    weights_quadrature,
)

ALL_SPLINE_BASES = [BSplineIso(m) for m in range(4)] + [ModifiedCubic()]


class TestConstantKernel:
    @pytest.mark.parametrize("basis", ALL_SPLINE_BASES, ids=lambda b: b.label())
    def test_quadrature_matches_closed_form(self, basis):
        grid = TimeGrid(0.3, 60)
        q = weights_quadrature(Constant(), basis, grid).q
        ref = weights_constant_closed_form(basis, grid).q
        assert np.max(np.abs(q - ref) / np.abs(ref)) <= 1e-13

    def test_paper_values(self):
        grid = TimeGrid(1.0, 8)
        assert weights_quadrature(Constant(), BSplineIso(2), grid).q[0] == pytest.approx(1 / 3)
        assert weights_quadrature(Constant(), ModifiedCubic(), grid).q[2] == pytest.approx(25 / 24)
        ref = weights_constant_closed_form(BSplineIso(3), grid).q
        assert ref[1] == pytest.approx(0.5)  # (j+1)/(m+1) = 2/4
        ref0 = weights_constant_closed_form(BSplineIso(0), grid).q
        assert np.all(ref0 == 1.0)
        refm = weights_constant_closed_form(ModifiedCubic(), grid).q
        assert refm[0] == pytest.approx(5 / 8)

    @pytest.mark.parametrize("basis", ALL_SPLINE_BASES, ids=lambda b: b.label())
    def test_tail_stationarity(self, basis):
        grid = TimeGrid(0.5, 30)
        q = weights_quadrature(Constant(), basis, grid).q
        tail = q[basis.translate :]
        assert np.allclose(tail, grid.dt, rtol=1e-14, atol=0)

    def test_closed_form_rejects_cq(self):
        with pytest.raises(ValueError):
            weights_constant_closed_form(CQBasis("bdf2"), TimeGrid(0.1, 4))


class TestStepKernel:
    def test_indicator_overlap(self):
        M, r, h = 3, 0.5, 1.0
        w = weights_quadrature(Step(L=(M + r) * h), BSplineIso(0), TimeGrid(h, 8))
        assert np.allclose(w.q[:3], h)
        assert w.q[3] == pytest.approx(r * h, abs=1e-15)
        assert np.all(w.q[4:] == 0.0)
        assert w.support_len == 4

    def test_degree_one_jump_weights(self):
        M, r, h = 5, 0.3, 0.25
        w = weights_quadrature(Step(L=(M + r) * h), BSplineIso(1), TimeGrid(h, 12))
        assert w.q[M] == pytest.approx(h * (0.5 + r - r * r / 2.0), abs=1e-15)
        assert w.q[M + 1] == pytest.approx(h * r * r / 2.0, abs=1e-15)
        assert np.all(w.q[M + 2 :] == 0.0)

    def test_modified_cubic_support_and_tail(self):
        M, r, h = 6, 0.3, 0.5
        w = weights_quadrature(Step(L=(M + r) * h), ModifiedCubic(), TimeGrid(h, 20))
        # head equals the constant-kernel weights up to j = M-2
        head = weights_constant_closed_form(ModifiedCubic(), TimeGrid(h, 20)).q
        assert np.allclose(w.q[: M - 1], head[: M - 1], rtol=1e-14)
        tail = w.q[M - 2 : M + 3]
        assert np.all(np.diff(tail) <= 1e-15)
        assert np.all(tail >= -1e-16)
        assert np.all(w.q[M + 3 :] == 0.0)

    @pytest.mark.parametrize("basis", ALL_SPLINE_BASES, ids=lambda b: b.label())
    def test_support_window_bound(self, basis):
        M, r, h = 7, 0.6, 0.2
        grid = TimeGrid(h, 26)
        w = weights_quadrature(Step(L=(M + r) * h), basis, grid)
        assert np.all(w.q[M + basis.translate + 3 :] == 0.0)


class TestOscillatoryQuadrature:
    def test_adaptive_doubling_converges(self):
        grid = TimeGrid(1.0, 40)
        w = weights_quadrature(BesselJ0(20 * np.pi), ModifiedCubic(), grid)
        assert np.all(np.isfinite(w.q))
        # independent check of one weight with a dense Gauss rule
        from convspline.kernels import bessel_j0
        from convspline.timebasis import modified_cubic_eval

        nodes, wts = np.polynomial.legendre.leggauss(160)
        j = 11
        total = 0.0
        for k in range(j - 2, j + 2):
            t = 0.5 * (nodes + 1.0) + k
            total += 0.5 * np.dot(wts, bessel_j0(20 * np.pi * t) * modified_cubic_eval(j, t))
        assert w.q[j] == pytest.approx(total, abs=1e-12)

    def test_cosine_weights_match_analytic(self):
        om = 3.0
        grid = TimeGrid(1.0, 30)
        w = weights_quadrature(Cosine(om), BSplineIso(0), grid)
        j = np.arange(31)
        exact = (np.sin(om * (j + 1)) - np.sin(om * j)) / om
        assert np.allclose(w.q, exact, atol=1e-14)


class TestCQWeights:
    def test_bdf2_constant_leading_weight(self):
        grid = TimeGrid(0.5, 40)
        w = weights_cq("bdf2", Constant(), grid)
        # series oracle: 2h/((3 - xi)(1 - xi)) has constant term 2h/3
        assert w.q[0] == pytest.approx(2 * 0.5 / 3.0, rel=1e-6)

    def test_bdf1_constant_all_equal(self):
        grid = TimeGrid(0.5, 40)
        w = weights_cq("bdf1", Constant(), grid)
        assert np.allclose(w.q, 0.5, rtol=1e-6)

    def test_identity_transform(self):
        grid = TimeGrid(0.5, 40)
        flat = Custom(evaluator=lambda t: 0 * t, laplace=lambda s: np.ones_like(s))
        w = weights_cq("bdf3", flat, grid)
        assert w.q[0] == pytest.approx(1.0, rel=1e-10)
        assert np.max(np.abs(w.q[1:])) <= 1e-6

    def test_radius_robustness(self):
        eps = np.finfo(float).eps
        for kern in (Constant(), BesselJ0(2.0), Step(L=3.0)):
            grid = TimeGrid(0.5, 80)
            lam1 = float(eps ** (0.55 / 81))
            lam2 = float(eps ** (0.65 / 81))
            q1 = weights_cq("bdf2", kern, grid, radius_policy=lam1).q
            q2 = weights_cq("bdf2", kern, grid, radius_policy=lam2).q
            half = 40
            # relative to the sequence scale: step-kernel tails are ~0 and
            # entrywise relative error is ill-posed there
            scale = np.maximum(np.abs(q2[:half]), np.max(np.abs(q2)))
            assert np.max(np.abs(q1[:half] - q2[:half]) / scale) <= 1e-8

    def test_transform_required(self):
        with pytest.raises(TransformUnavailableError):
            weights_cq("bdf2", Custom(evaluator=lambda t: t), TimeGrid(0.5, 10))

    def test_symbols_at_one_vanish(self):
        for method in ("bdf1", "bdf2", "bdf3", "bdf4", "trapezoidal"):
            assert abs(cq_symbol(method, 1.0)) <= 1e-15

    def test_bad_radius_rejected(self):
        with pytest.raises(ValueError):
            weights_cq("bdf1", Constant(), TimeGrid(0.5, 10), radius_policy=1.5)


class TestPlumbing:
    def test_quadrature_rejects_cq_basis(self):
        with pytest.raises(ValueError):
            weights_quadrature(Constant(), CQBasis("bdf1"), TimeGrid(0.1, 4))

    def test_cache_consistency(self):
        grid_long = TimeGrid(0.25, 50)
        grid_short = TimeGrid(0.25, 20)
        q_long = weights_quadrature(Cosine(1.0), BSplineIso(2), grid_long).q
        q_short = weights_quadrature(Cosine(1.0), BSplineIso(2), grid_short).q
        assert np.array_equal(q_short, q_long[:21])
