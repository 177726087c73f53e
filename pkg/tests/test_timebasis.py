"""Temporal basis functions: values, identities, and the CQ recurrences."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from convspline.errors import EnvelopeError
from convspline.timebasis import (
    BSplineIso,
    CQBasis,
    CoefficientSequence,
    ModifiedCubic,
    TimeGrid,
    bspline_eval,
    bspline_eval_cox_de_boor,
    bspline_quasi_nodes,
    cq_basis_closed_form,
    cq_basis_eval,
    cq_basis_profile,
    modified_cubic_eval,
    phi_eval,
    phi_support,
    reconstruct,
    reconstruction_matrix,
    _modified_cubic_pieces_exact,
)


class TestBsplineEval:
    def test_degree_zero_indicator(self):
        assert bspline_eval(0, 0, 0.5, 1.0) == 1.0
        assert bspline_eval(0, 0, 1.0, 1.0) == 0.0

    def test_cardinal_cubic_midpoint(self):
        assert bspline_eval(3, 0, 2.0, 1.0) == pytest.approx(2.0 / 3.0, abs=1e-15)

    def test_triple_knot_origin_value(self):
        # only b^3_{-3} is nonzero at t = 0; sum to unity forces the value 1
        assert bspline_eval(3, -3, 0.0, 1.0) == 1.0

    def test_rejects_bad_degree(self):
        with pytest.raises(ValueError):
            bspline_eval(4, 0, 0.5)
        with pytest.raises(ValueError):
            bspline_eval(-1, 0, 0.5)

    @settings(max_examples=150, deadline=None)
    @given(
        m=st.integers(0, 3),
        j=st.integers(-3, 9),
        t=st.floats(0.0, 12.0),
        dt=st.sampled_from([0.25, 1.0, 1.7]),
    )
    def test_matches_cox_de_boor_oracle(self, m, j, t, dt):
        if j < -m:
            return
        fast = bspline_eval(m, j, t, dt)
        oracle = bspline_eval_cox_de_boor(m, j, t, dt)
        assert fast == pytest.approx(oracle, abs=2e-14)

    def test_compact_support_exact_zero(self):
        for m in range(4):
            for j in range(-m, 6):
                lo = max(j, 0)
                for t in (lo - 0.3, j + m + 1.0, j + m + 4.2):
                    if t >= 0:
                        assert bspline_eval(m, j, t, 1.0) == 0.0


class TestPhiEval:
    def test_double_knot_hat_left_end(self):
        assert phi_eval(BSplineIso(1), 0, 0.0) == 1.0

    def test_translate_value(self):
        assert phi_eval(BSplineIso(3), 5, 3.0) == pytest.approx(1.0 / 6.0, abs=1e-15)

    @settings(max_examples=80, deadline=None)
    @given(m=st.integers(0, 3), tau=st.floats(0.0, 30.0))
    def test_sum_to_unity(self, m, tau):
        total = sum(phi_eval(BSplineIso(m), j, tau) for j in range(int(tau) + m + 3))
        assert abs(total - 1.0) <= 1e-12

    @settings(max_examples=80, deadline=None)
    @given(m=st.integers(1, 3), j=st.integers(3, 14), tau=st.floats(0.0, 16.0))
    def test_translate_identity(self, m, j, tau):
        if j < m:
            return
        a = phi_eval(BSplineIso(m), j, tau)
        b = phi_eval(BSplineIso(m), m, tau + m - j)
        assert a == pytest.approx(b, abs=1e-14)

    def test_support_declaration_is_sharp(self):
        for m in range(4):
            basis = BSplineIso(m)
            for j in range(0, 8):
                lo, hi = phi_support(basis, j)
                assert phi_eval(basis, j, hi + 1e-9) == 0.0
                if lo > 0:
                    assert phi_eval(basis, j, lo - 1e-9) == 0.0
                mid = 0.5 * (lo + hi)
                assert phi_eval(basis, j, mid) != 0.0

    def test_negative_index_rejected(self):
        with pytest.raises(ValueError):
            phi_eval(BSplineIso(2), -1, 0.5)


class TestModifiedCubic:
    def test_origin_values(self):
        assert modified_cubic_eval(0, 0.0) == pytest.approx(7.0 / 6.0, abs=1e-15)
        assert modified_cubic_eval(1, 0.0) == pytest.approx(-1.0 / 3.0, abs=1e-15)
        assert modified_cubic_eval(2, 0.0) == pytest.approx(1.0 / 6.0, abs=1e-15)

    def test_partition_at_origin_exact_rational(self):
        total = Fraction(0)
        for j in range(4):
            for k, poly in _modified_cubic_pieces_exact(j):
                if k == 0:
                    total += poly[0]
        assert total == 1

    @settings(max_examples=80, deadline=None)
    @given(tau=st.floats(0.0, 30.0))
    def test_sum_to_unity(self, tau):
        total = sum(modified_cubic_eval(j, tau) for j in range(int(tau) + 6))
        assert abs(total - 1.0) <= 1e-12

    @settings(max_examples=80, deadline=None)
    @given(tau=st.floats(0.0, 25.0))
    def test_linear_reproduction(self, tau):
        # sum j * phi_j(tau) = tau on [0, inf) by the runout construction
        total = sum(j * modified_cubic_eval(j, tau) for j in range(int(tau) + 6))
        assert total == pytest.approx(tau, abs=3e-12)

    def test_translates_beyond_two(self):
        for tau in (0.3, 1.9, 4.4, 9.7):
            assert modified_cubic_eval(7, tau) == pytest.approx(
                modified_cubic_eval(8, tau + 1.0), abs=1e-15
            )


class TestQuasiNodes:
    def test_paper_node_values(self):
        assert bspline_quasi_nodes(3, 0, 1.0) == 2.0
        assert bspline_quasi_nodes(3, -3, 1.0) == 0.0
        assert bspline_quasi_nodes(1, -1, 1.0) == 0.0

    def test_degree_zero_rejected(self):
        with pytest.raises(ValueError):
            bspline_quasi_nodes(0, 0, 1.0)

    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_linear_quasi_interpolation(self, m):
        dt = 0.7
        rng = np.random.default_rng(5)
        for t in rng.uniform(0.0, 15.0, 40):
            total = sum(
                bspline_quasi_nodes(m, j, dt) * bspline_eval(m, j, t, dt)
                for j in range(-m, int(t / dt) + 2)
            )
            assert total == pytest.approx(t, abs=1e-12 * max(1.0, t))


class TestCQBasis:
    def test_table_seed_values(self):
        assert cq_basis_eval("bdf1", 1, 1.0) == pytest.approx(np.exp(-1.0), rel=1e-14)
        assert cq_basis_eval("bdf2", 0, 1.0) == pytest.approx(np.exp(-1.5), rel=1e-14)
        assert cq_basis_eval("trapezoidal", 0, 0.5) == pytest.approx(np.exp(-1.0), rel=1e-14)
        assert cq_basis_eval("bdf3", 0, 1.0) == pytest.approx(np.exp(-11.0 / 6.0), rel=1e-14)
        assert cq_basis_eval("bdf4", 0, 1.0) == pytest.approx(np.exp(-25.0 / 12.0), rel=1e-14)

    @pytest.mark.parametrize("method", ["bdf1", "bdf2", "trapezoidal"])
    def test_recurrence_matches_closed_form(self, method):
        for j in range(0, 41, 4):
            for t in (0.05, 0.7, 3.0, 9.5, 20.0):
                rec = cq_basis_eval(method, j, t)
                ref = cq_basis_closed_form(method, j, t)
                assert rec == pytest.approx(ref, rel=1e-10, abs=1e-280)

    def test_envelope_errors(self):
        with pytest.raises(EnvelopeError):
            cq_basis_eval("bdf1", 10_001, 1.0)
        with pytest.raises(EnvelopeError):
            cq_basis_eval("bdf2", 3, 1001.0)

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            cq_basis_eval("bdf5", 0, 1.0)

    @pytest.mark.parametrize("method", ["bdf1", "bdf2", "bdf3"])
    def test_sum_to_unity_truncated(self, method):
        rng = np.random.default_rng(11)
        for t in rng.uniform(0.0, 30.0, 12):
            phi = cq_basis_profile(method, 200, t)
            assert abs(phi.sum() - 1.0) <= 1e-8

    @pytest.mark.parametrize("method", ["bdf4", "trapezoidal"])
    def test_sum_to_unity_with_tail_bound(self, method):
        # bdf4 members reach ~1e7 before decaying (round-off floor ~eps*max),
        # and the trapezoidal symbol has a unit-radius pole so its tail decays
        # only algebraically; the truncation bound uses the recent-term envelope.
        rng = np.random.default_rng(12)
        for t in rng.uniform(0.0, 30.0, 8):
            phi = cq_basis_profile(method, 400, t)
            tail_env = np.abs(phi[-12:]).max()
            budget = 1e-8 + 6.0 * tail_env + 50 * np.finfo(float).eps * np.abs(phi).max()
            assert abs(phi.sum() - 1.0) <= budget


class TestReconstruct:
    def _grid(self):
        return TimeGrid(0.25, 40)

    def test_constant_coefficients_reproduce_constant(self):
        grid = self._grid()
        for basis in (BSplineIso(0), BSplineIso(2), ModifiedCubic()):
            coeffs = CoefficientSequence(np.full(41, 3.25), basis, grid)
            w = basis.translate
            for t in np.linspace(w * grid.dt, grid.T, 23):
                assert reconstruct(coeffs, t) == pytest.approx(3.25, abs=1e-12)

    def test_linear_coefficients_modified_cubic(self):
        grid = self._grid()
        coeffs = CoefficientSequence(grid.times(), ModifiedCubic(), grid)
        for t in np.linspace(grid.dt, grid.T, 37):
            assert reconstruct(coeffs, t) == pytest.approx(t, abs=1e-12)

    def test_single_final_coefficient(self):
        grid = self._grid()
        for basis in (BSplineIso(1), BSplineIso(3), ModifiedCubic()):
            v = np.zeros(41)
            v[-1] = 1.0
            coeffs = CoefficientSequence(v, basis, grid)
            assert reconstruct(coeffs, grid.T) == pytest.approx(
                phi_eval(basis, 0, 0.0), abs=1e-14
            )

    def test_out_of_range_rejected(self):
        grid = self._grid()
        coeffs = CoefficientSequence(np.ones(41), BSplineIso(1), grid)
        with pytest.raises(ValueError):
            reconstruct(coeffs, -0.5)
        with pytest.raises(ValueError):
            reconstruct(coeffs, grid.T + 0.5)

    def test_cq_reconstruction_constant(self):
        grid = TimeGrid(0.2, 30)
        coeffs = CoefficientSequence(np.full(31, 1.5), CQBasis("bdf2"), grid)
        # truncated CQ partition: 31 terms cover small tau to round-off and
        # tau = 5 only to the tail size of the basis profile there
        assert reconstruct(coeffs, grid.T) == pytest.approx(1.5, rel=1e-10)
        assert reconstruct(coeffs, grid.T - 1.0) == pytest.approx(1.5, rel=1e-6)

    def test_reconstruction_matrix_agrees(self):
        grid = self._grid()
        rng = np.random.default_rng(7)
        v = rng.standard_normal(41)
        for basis in (BSplineIso(2), ModifiedCubic()):
            coeffs = CoefficientSequence(v, basis, grid)
            times = np.linspace(0.0, grid.T, 17)
            B = reconstruction_matrix(basis, grid, times)
            direct = reconstruct(coeffs, times)
            assert np.allclose(B @ v, direct, atol=1e-13)


class TestTimeGrid:
    def test_validation(self):
        with pytest.raises(ValueError):
            TimeGrid(0.0, 4)
        with pytest.raises(ValueError):
            TimeGrid(0.1, 0)

    def test_horizon(self):
        grid = TimeGrid.from_horizon(10.0, 40)
        assert grid.dt == 0.25
        assert grid.T == 10.0
        assert grid.times().shape == (41,)

    def test_coefficient_length_checked(self):
        with pytest.raises(ValueError):
            CoefficientSequence(np.zeros(5), BSplineIso(1), TimeGrid(0.1, 10))
