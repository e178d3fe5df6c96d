"""Tests for Dirac-operator kinds and the disk solution basis."""

import math

import numpy as np
import pytest

from epsreg.bessel import RadialFactor, bessel_i, bessel_i_prime
from epsreg.diskbasis import (
    BasisFunction,
    DiracOperatorKind,
    apply_operator,
    check_helmholtz,
    enumerate_modes,
    evaluate,
    nonvanishing_check,
    normal_trace,
    symbol_defect,
)
from epsreg.errors import InputError

GRAD = DiracOperatorKind.GRADIENT
CR = DiracOperatorKind.CAUCHY_RIEMANN
SQRT_PI = math.sqrt(math.pi)
SQRT_2PI = math.sqrt(2.0 * math.pi)


def ring(radius, count, start=0.05):
    angles = start + 2.0 * math.pi * np.arange(count) / count
    return np.column_stack([radius * np.cos(angles), radius * np.sin(angles)])


class TestSymbol:
    def test_identity_both_kinds(self):
        rng = np.random.default_rng(0)
        xis = rng.standard_normal((100, 2))
        assert symbol_defect(GRAD, xis) <= 1e-14
        assert symbol_defect(CR, xis) <= 1e-14

    def test_shapes(self):
        assert GRAD.symbol([1.0, 2.0]).shape == (2, 1)
        assert CR.symbol([1.0, 2.0]).shape == (1, 1)


class TestEvaluate:
    def test_mode_zero_center(self):
        b = BasisFunction(RadialFactor(0, 2.5), 1, GRAD)
        assert evaluate(b, 0.0, 1.234) == pytest.approx(1.0 / SQRT_2PI, rel=1e-14)

    def test_gradient_cos_mode(self):
        b = BasisFunction(RadialFactor(1, 1.0), 1, GRAD)
        assert evaluate(b, 1.0, 0.0) == pytest.approx(bessel_i(1, 1.0) / SQRT_PI, rel=1e-13)

    def test_cauchy_riemann_phase(self):
        b = BasisFunction(RadialFactor(1, 4.0), 1, CR)
        value = evaluate(b, 0.5, math.pi / 2.0)
        assert value == pytest.approx(1j * bessel_i(1, 1.0) / SQRT_PI, rel=1e-13)

    def test_domain_error(self):
        b = BasisFunction(RadialFactor(0, 1.0), 1, GRAD)
        with pytest.raises(InputError):
            evaluate(b, 1.5, 0.0)

    def test_mode_validation(self):
        with pytest.raises(InputError):
            BasisFunction(RadialFactor(0, 1.0), 2, GRAD)
        with pytest.raises(InputError):
            BasisFunction(RadialFactor(1, 1.0), 3, GRAD)

    def test_gradient_continuous_at_origin(self):
        b = BasisFunction(RadialFactor(1, 1.0), 1, GRAD)
        gx0, gy0 = b.gradient_xy(0.0, 0.0)
        gx1, gy1 = b.gradient_xy(1e-9, 1e-9)
        assert gx0 == pytest.approx(0.5 / SQRT_PI, rel=1e-12)
        assert abs(gy0) <= 1e-14
        assert gx1 == pytest.approx(gx0, rel=1e-8)
        assert abs(gy1 - gy0) <= 1e-8


class TestApplyOperator:
    def test_gradient_of_coordinate(self):
        field = apply_operator(GRAD, lambda x, y: x)
        out = field(np.array([0.2, -0.1]), np.array([0.3, 0.4]))
        np.testing.assert_allclose(out[0], 1.0, atol=1e-9)
        np.testing.assert_allclose(out[1], 0.0, atol=1e-9)

    def test_cr_of_conjugate(self):
        field = apply_operator(CR, lambda x, y: x - 1j * y)
        out = field(np.array([0.1]), np.array([0.2]))
        np.testing.assert_allclose(out, 2.0, atol=1e-9)

    def test_cr_annihilates_holomorphic(self):
        for m in range(1, 5):
            field = apply_operator(CR, lambda x, y, m=m: (x + 1j * y) ** m)
            out = field(np.array([0.3, -0.2]), np.array([0.1, 0.25]))
            np.testing.assert_allclose(out, 0.0, atol=1e-7)

    def test_exact_gradient_used_for_basis(self):
        b = BasisFunction(RadialFactor(2, 1.0), 1, GRAD)
        field = apply_operator(GRAD, b)
        x, y = np.array([0.4]), np.array([0.3])
        out = field(x, y)
        h = 1e-6
        fd_x = (b.value_xy(x + h, y) - b.value_xy(x - h, y)) / (2 * h)
        fd_y = (b.value_xy(x, y + h) - b.value_xy(x, y - h)) / (2 * h)
        np.testing.assert_allclose(out[0], fd_x, rtol=1e-8)
        np.testing.assert_allclose(out[1], fd_y, rtol=1e-8)

    def test_outside_disk_rejected(self):
        field = apply_operator(GRAD, lambda x, y: x)
        with pytest.raises(InputError):
            field(np.array([1.2]), np.array([0.0]))


class TestNormalTrace:
    def test_gradient_closed_form(self):
        # lambda = i kills the (lambda - i) term: n(A b) = sqrt(eps) I_i'(sqrt(eps)) H.
        eps = 1.0
        phis = np.linspace(0.0, 2.0 * math.pi, 7, endpoint=False)
        for i, branch in [(0, 1), (1, 1), (2, 2)]:
            b = BasisFunction(RadialFactor(i, eps), branch, GRAD)
            expected = math.sqrt(eps) * bessel_i_prime(i, math.sqrt(eps)) * GRAD.angular(
                i, branch, phis
            )
            np.testing.assert_allclose(normal_trace(GRAD, b, phis), expected, rtol=1e-12)

    def test_mode_zero_constant(self):
        b = BasisFunction(RadialFactor(0, 1.0), 1, GRAD)
        vals = normal_trace(GRAD, b, np.linspace(0, 6, 9))
        expected = bessel_i(1, 1.0) / SQRT_2PI
        np.testing.assert_allclose(vals, expected, rtol=1e-12)

    def test_cr_branch_two_closed_form(self):
        eps = 1.0
        root = math.sqrt(eps)
        b = BasisFunction(RadialFactor(1, eps), 2, CR)
        phis = np.linspace(0.0, 2.0 * math.pi, 5, endpoint=False)
        expected = (
            (root * bessel_i_prime(1, root) + bessel_i(1, root))
            * np.exp(-1j * phis)
            / SQRT_PI
        )
        np.testing.assert_allclose(normal_trace(CR, b, phis), expected, rtol=1e-12)

    def test_cr_against_finite_difference_oracle(self):
        # n o A = r d/dr + i d/dphi, realized by centered differences of the
        # analytic basis formula at r = 1.
        eps = 0.7
        b = BasisFunction(RadialFactor(1, eps), 2, CR)
        h = 1e-6
        phis = np.array([0.3, 1.1, 4.0])
        dr = (b.value_polar(1.0 + h, phis) - b.value_polar(1.0 - h, phis)) / (2 * h)
        dphi = (b.value_polar(1.0, phis + h) - b.value_polar(1.0, phis - h)) / (2 * h)
        oracle = 1.0 * dr + 1j * dphi
        np.testing.assert_allclose(normal_trace(CR, b, phis), oracle, rtol=1e-7)

    def test_kind_mismatch(self):
        b = BasisFunction(RadialFactor(1, 1.0), 1, GRAD)
        with pytest.raises(InputError):
            normal_trace(CR, b, 0.0)


class TestHelmholtz:
    def test_mode_zero(self):
        rng = np.random.default_rng(1)
        radii = rng.uniform(0.01, 0.95, 20)
        angles = rng.uniform(0.0, 2.0 * math.pi, 20)
        pts = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
        b = BasisFunction(RadialFactor(0, 1.0), 1, GRAD)
        assert check_helmholtz(b, 1.0, pts) <= 1e-5

    def test_higher_mode(self):
        b = BasisFunction(RadialFactor(3, 0.25), 1, GRAD)
        assert check_helmholtz(b, 0.25, ring(0.6, 20)) <= 1e-5

    def test_harmonic_polynomial_limit(self):
        # eps = 0 with g = r^i: exact harmonic polynomial Re z^i.
        for i in (2, 3):
            u = lambda x, y, i=i: np.real((x + 1j * y) ** i)
            assert check_helmholtz(u, 0.0, ring(0.5, 16)) <= 1e-7

    def test_point_validation(self):
        b = BasisFunction(RadialFactor(0, 1.0), 1, GRAD)
        with pytest.raises(InputError):
            check_helmholtz(b, 1.0, np.array([[0.0, 0.0]]))
        with pytest.raises(InputError):
            check_helmholtz(b, 1.0, np.array([[1.0, 0.0]]))


class TestNonvanishing:
    def test_gradient_mode_zero(self):
        assert nonvanishing_check(GRAD, 0, 1, 1.0) == pytest.approx(
            bessel_i(1, 1.0), rel=1e-13
        )

    def test_sample_positive(self):
        assert nonvanishing_check(GRAD, 5, 1, 0.01) > 0.0
        assert nonvanishing_check(CR, 2, 2, 1.0) > 0.0

    def test_positive_across_modes_and_eps(self):
        for op in (GRAD, CR):
            for eps in (0.01, 0.25, 1.0, 4.0, 100.0):
                for i, branch in enumerate_modes(8):
                    assert nonvanishing_check(op, i, branch, eps) > 0.0

    def test_epsilon_validation(self):
        with pytest.raises(InputError):
            nonvanishing_check(GRAD, 0, 1, 0.0)


class TestEigenvalueRelation:
    def test_harmonic_polynomials(self):
        # n(A (r^i cos i phi)) = i r^i cos i phi for the gradient operator,
        # checked on the boundary with exact differentiation.
        phis = np.linspace(0.0, 2.0 * math.pi, 50, endpoint=False)
        x, y = np.cos(phis), np.sin(phis)
        for i in range(1, 9):
            z = (x + 1j * y) ** (i - 1)
            ux = np.real(i * z)
            uy = -np.imag(i * z)
            n_of_au = x * ux + y * uy
            expected = i * np.cos(i * phis)
            np.testing.assert_allclose(n_of_au, expected, atol=1e-9)

    def test_cr_eigenvalues(self):
        assert CR.eigenvalue(0, 1) == 0.0
        assert CR.eigenvalue(3, 1) == 0.0
        assert CR.eigenvalue(3, 2) == 6.0
        assert GRAD.eigenvalue(4, 1) == 4.0
        assert GRAD.eigenvalue(4, 2) == 4.0


class TestModeEnumeration:
    def test_planar_counts(self):
        modes = enumerate_modes(3)
        assert modes == [(0, 1), (1, 1), (1, 2), (2, 1), (2, 2), (3, 1), (3, 2)]
