"""Kernels, Laplace transforms, and the self-contained J0."""

from __future__ import annotations

import mpmath
import numpy as np
import pytest

from convspline.errors import TransformUnavailableError
from convspline.kernels import (
    BesselJ0,
    Constant,
    Cosine,
    Custom,
    Step,
    bessel_j0,
    kernel_eval,
    kernel_from_spec,
    kernel_label,
    kernel_laplace,
)


def j0_series_oracle(x: float) -> float:
    """Alternating power series in extended precision."""
    x = abs(float(x))
    with mpmath.workdps(60 + int(x)):
        xm = mpmath.mpf(x)
        q = xm * xm / 4
        term = mpmath.mpf(1)
        acc = mpmath.mpf(1)
        k = 1
        while True:
            term *= -q / (k * k)
            acc += term
            if abs(term) < mpmath.mpf(10) ** (-50) and k > x:
                break
            k += 1
        return float(acc)


class TestKernelEval:
    def test_pointwise_examples(self):
        assert kernel_eval(Constant(), 3.7) == 1.0
        assert kernel_eval(Step(L=2.0), 2.5) == 0.0
        assert kernel_eval(Step(L=2.0), 2.0) == 1.0  # closed on the left of the jump
        assert kernel_eval(BesselJ0(1.0), 0.0) == 1.0

    def test_negative_time_rejected(self):
        with pytest.raises(ValueError):
            kernel_eval(Constant(), -0.1)

    def test_all_builtins_are_one_at_zero(self):
        for k in (Constant(), Step(L=1.0), Cosine(2.0), BesselJ0(3.0)):
            assert kernel_eval(k, 0.0) == 1.0

    def test_custom_kernel(self):
        k = Custom(evaluator=lambda t: np.exp(-t))
        assert kernel_eval(k, 1.0) == pytest.approx(np.exp(-1.0))

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            Step(L=0.0)
        with pytest.raises(ValueError):
            Cosine(-1.0)


class TestBesselJ0:
    def test_value_at_zero(self):
        assert bessel_j0(0.0) == 1.0

    def test_first_zero(self):
        # first zero located by bisection on the extended-precision oracle
        lo, hi = 2.0, 3.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if j0_series_oracle(mid) > 0:
                lo = mid
            else:
                hi = mid
        zero = 0.5 * (lo + hi)
        assert zero == pytest.approx(2.4048255576957728, abs=1e-12)
        assert abs(bessel_j0(zero)) <= 1e-12

    def test_against_series_oracle_to_30(self):
        rng = np.random.default_rng(3)
        xs = np.concatenate([rng.uniform(0, 30, 120), [5.0, 8.0, 10.0, 17.999, 18.001, 30.0]])
        for x in xs:
            ref = j0_series_oracle(x)
            assert bessel_j0(float(x)) == pytest.approx(ref, abs=1e-12)

    def test_large_arguments(self):
        for x in (50.0, 314.0, 2718.0, 9999.5):
            ref = float(mpmath.besselj(0, mpmath.mpf(x)))
            envelope = np.sqrt(2.0 / (np.pi * x))
            assert abs(bessel_j0(x) - ref) <= 1e-13 * max(envelope, abs(ref))

    def test_bounded_by_one_and_even(self):
        rng = np.random.default_rng(4)
        xs = rng.uniform(-200, 200, 500)
        vals = bessel_j0(xs)
        assert np.all(np.abs(vals) <= 1.0 + 1e-15)
        assert np.allclose(vals, bessel_j0(-xs), rtol=0, atol=0)


class TestLaplace:
    def test_closed_forms(self):
        assert kernel_laplace(Constant(), 2.0) == pytest.approx(0.5)
        assert kernel_laplace(BesselJ0(0.0), 2.0) == pytest.approx(0.5)
        # step transform limit (1 - e^{-s})/s -> 1 as s -> 0+
        assert kernel_laplace(Step(L=1.0), 1e-6).real == pytest.approx(1.0, abs=1e-6)
        s = 1.5 + 0.5j
        assert kernel_laplace(Cosine(3.0), s) == pytest.approx(s / (s * s + 9.0))

    def test_left_half_plane_rejected(self):
        with pytest.raises(ValueError):
            kernel_laplace(Constant(), -1.0)
        with pytest.raises(ValueError):
            kernel_laplace(Constant(), 1j)

    def test_custom_without_transform(self):
        with pytest.raises(TransformUnavailableError):
            kernel_laplace(Custom(evaluator=lambda t: t), 1.0)

    @pytest.mark.parametrize(
        "kernel", [Constant(), Step(L=1.5), Cosine(2.0), BesselJ0(2.0)]
    )
    @pytest.mark.parametrize("s", [1.0, 2.5, 1.0 + 3.0j])
    def test_numerical_transform_consistency(self, kernel, s):
        # adaptive-composite integral of e^{-st} K(t); X chosen so the tail of
        # |e^{-st}| is below 1e-12 for Re(s) >= 1
        X = 30.0
        nodes, wts = np.polynomial.legendre.leggauss(40)
        total = 0.0 + 0.0j
        panels = np.linspace(0.0, X, 241)
        for a, b in zip(panels[:-1], panels[1:]):
            t = 0.5 * (b - a) * (nodes + 1.0) + a
            w = 0.5 * (b - a) * wts
            total += np.dot(w, np.exp(-s * t) * kernel_eval(kernel, t))
        assert total == pytest.approx(kernel_laplace(kernel, s), abs=1e-9)


class TestSpecParsing:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("constant", Constant()),
            ("step:L=2.5", Step(L=2.5)),
            ("cos:omega=3", Cosine(omega=3.0)),
            ("j0:omega=1.5", BesselJ0(omega=1.5)),
        ],
    )
    def test_round_trip(self, text, expected):
        k = kernel_from_spec(text)
        assert k == expected
        assert kernel_from_spec(kernel_label(k)) == k

    def test_rejects_malformed(self):
        for bad in ("gauss", "step", "step:L", "constant:x=1"):
            with pytest.raises((ValueError, KeyError)):
                kernel_from_spec(bad)
