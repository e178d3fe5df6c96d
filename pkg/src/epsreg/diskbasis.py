"""Explicit solution basis on the unit disk for first-order Dirac operators.

For the two planar operators implemented here (the gradient and the
Cauchy-Riemann operator, both with ``A*A = -Laplace``), the functions

    b_i^(j)(r, phi) = I_i(sqrt(eps) r) * H_i^(j)(phi)

solve ``(-Laplace + eps) b = 0`` on the whole disk.  The angular factors
``H_i^(j)`` are orthonormal on the circle and are eigenfunctions of the
boundary operator ``n o A`` with eigenvalue ``lambda_i^(j)``; the normal
trace of ``A b`` therefore has the closed form

    n(A b_i^(j)) = (r g_i' + (lambda_i^(j) - i) g_i) * H_i^(j)

which at ``r = 1`` reads ``sqrt(eps) I_i'(sqrt(eps)) + (lambda - i)
I_i(sqrt(eps))`` times the angular factor.  That combination is strictly
positive for every ``eps > 0`` (otherwise b would vanish identically).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .bessel import RadialFactor, bessel_i, bessel_i_prime
from .errors import InputError

__all__ = [
    "DiracOperatorKind",
    "BasisFunction",
    "enumerate_modes",
    "evaluate",
    "apply_operator",
    "normal_trace",
    "check_helmholtz",
    "nonvanishing_check",
    "symbol_defect",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_SQRT_PI = math.sqrt(math.pi)
_FD_STEP = 1e-5
_LAPLACE_STEP = 1e-4


class DiracOperatorKind(enum.Enum):
    """First-order constant-coefficient operator with sigma* sigma = |xi|^2 Id.

    GRADIENT maps real scalars to 2-component real fields (adjoint -div);
    CAUCHY_RIEMANN is d1 + i d2 on complex scalars (adjoint -d1 + i d2).
    """

    GRADIENT = "gradient"
    CAUCHY_RIEMANN = "cauchy_riemann"

    @property
    def is_complex(self) -> bool:
        return self is DiracOperatorKind.CAUCHY_RIEMANN

    @property
    def dtype(self):
        return complex if self.is_complex else float

    def symbol(self, xi) -> np.ndarray:
        """Principal symbol sigma(A)(xi) as an (l x k) matrix."""
        x1, x2 = float(xi[0]), float(xi[1])
        if self is DiracOperatorKind.GRADIENT:
            return np.array([[x1], [x2]])
        return np.array([[complex(x1, x2)]])

    def apply_gradient(self, ux, uy):
        """A u from the Cartesian gradient components of u."""
        if self is DiracOperatorKind.GRADIENT:
            return np.stack([ux, uy])
        return ux + 1j * uy

    def pair_outputs(self, g1, g2):
        """Pointwise fiber inner product (g1, g2)_F, conjugating g2."""
        if self is DiracOperatorKind.GRADIENT:
            return np.sum(g1 * np.conj(g2), axis=0)
        return g1 * np.conj(g2)

    def eigenvalue(self, i: int, branch: int) -> float:
        """Eigenvalue lambda_i^(j) of n o A on r^i H_i^(j)."""
        _validate_mode(i, branch)
        if self is DiracOperatorKind.GRADIENT:
            return float(i)
        return 0.0 if branch == 1 else 2.0 * i

    def angular(self, i: int, branch: int, phi):
        """Orthonormal angular factor H_i^(j)(phi)."""
        _validate_mode(i, branch)
        phi = np.asarray(phi, dtype=float)
        if i == 0:
            return np.full(phi.shape, 1.0 / _SQRT_2PI, dtype=self.dtype)
        if self is DiracOperatorKind.GRADIENT:
            trig = np.cos(i * phi) if branch == 1 else np.sin(i * phi)
            return trig / _SQRT_PI
        sign = 1.0 if branch == 1 else -1.0
        return np.exp(1j * sign * i * phi) / _SQRT_PI

    def angular_derivative(self, i: int, branch: int, phi):
        """d/dphi of the angular factor."""
        _validate_mode(i, branch)
        phi = np.asarray(phi, dtype=float)
        if i == 0:
            return np.zeros(phi.shape, dtype=self.dtype)
        if self is DiracOperatorKind.GRADIENT:
            trig = -i * np.sin(i * phi) if branch == 1 else i * np.cos(i * phi)
            return trig / _SQRT_PI
        sign = 1.0 if branch == 1 else -1.0
        return 1j * sign * i * np.exp(1j * sign * i * phi) / _SQRT_PI


def _validate_mode(i: int, branch: int) -> None:
    if i < 0:
        raise InputError(f"mode index must be nonnegative, got {i}")
    if i == 0 and branch != 1:
        raise InputError("mode 0 carries a single angular branch")
    if branch not in (1, 2):
        raise InputError(f"angular branch must be 1 or 2, got {branch}")


def enumerate_modes(i_max: int):
    """Mode list [(0,1), (1,1), (1,2), ...] up to index i_max.

    The counts per index are the planar ones: one function for i = 0 and
    two for every i >= 1.
    """
    modes = [(0, 1)]
    for i in range(1, i_max + 1):
        modes.extend([(i, 1), (i, 2)])
    return modes


@dataclass(frozen=True)
class BasisFunction:
    """b_i^(j)(r, phi, eps) = I_i(sqrt(eps) r) * H_i^(j)(phi)."""

    radial: RadialFactor
    branch: int
    operator: DiracOperatorKind

    def __post_init__(self):
        _validate_mode(self.radial.order, self.branch)

    @property
    def index(self) -> int:
        return self.radial.order

    @property
    def epsilon(self) -> float:
        return self.radial.epsilon

    @property
    def lam(self) -> float:
        return self.operator.eigenvalue(self.index, self.branch)

    def value_polar(self, r, phi):
        return self.radial.value(r) * self.operator.angular(self.index, self.branch, phi)

    def value_xy(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return self.value_polar(np.hypot(x, y), np.arctan2(y, x))

    def gradient_xy(self, x, y):
        """Cartesian gradient from the exact radial/angular derivatives."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r = np.hypot(x, y)
        phi = np.arctan2(y, x)
        i = self.index
        scale = self.radial.scale
        g_prime = self.radial.derivative(r)
        h = self.operator.angular(i, self.branch, phi)
        h_prime = self.operator.angular_derivative(i, self.branch, phi)

        # g(r)/r with its limit at the origin: only i = 1 contributes there.
        safe_r = np.where(r > 1e-12, r, 1.0)
        ratio = np.where(r > 1e-12, self.radial.value(r) / safe_r, 0.5 * scale if i == 1 else 0.0)

        cos_p, sin_p = np.cos(phi), np.sin(phi)
        ux = cos_p * g_prime * h - sin_p * ratio * h_prime
        uy = sin_p * g_prime * h + cos_p * ratio * h_prime
        return ux, uy

    def normal_trace_values(self, phi):
        """n(A b) on the unit circle: closed form, no differentiation."""
        return nonvanishing_check(
            self.operator, self.index, self.branch, self.epsilon
        ) * self.operator.angular(self.index, self.branch, phi)


def evaluate(b: BasisFunction, r, phi):
    """Value of a basis function at polar points with 0 <= r <= 1."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0.0) or np.any(r > 1.0 + 1e-12):
        raise InputError("radius outside [0, 1]")
    return b.value_polar(np.minimum(r, 1.0), phi)


def _gradient_of(u):
    """Cartesian gradient closure: exact when available, else centered FD."""
    grad = getattr(u, "gradient_xy", None)
    if grad is not None:
        return grad
    value = getattr(u, "value_xy", u)

    def fd_grad(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        h = _FD_STEP
        ux = (value(x + h, y) - value(x - h, y)) / (2.0 * h)
        uy = (value(x, y + h) - value(x, y - h)) / (2.0 * h)
        return ux, uy

    return fd_grad


def apply_operator(op: DiracOperatorKind, u):
    """A u as an evaluable field of Cartesian coordinates.

    ``u`` may be a BasisFunction, any object exposing ``value_xy`` (and
    optionally ``gradient_xy``), or a plain vectorized callable of (x, y);
    closures without an exact gradient are differentiated by centered
    differences with step 1e-5.
    """
    grad = _gradient_of(u)

    def field(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if np.any(np.hypot(x, y) > 1.0 + 1e-9):
            raise InputError("operator field queried outside the closed unit disk")
        return op.apply_gradient(*grad(x, y))

    return field


def normal_trace(op: DiracOperatorKind, b: BasisFunction, phi):
    """n(A b) on the boundary circle via the closed form."""
    if b.operator is not op:
        raise InputError("basis function belongs to a different operator kind")
    return b.normal_trace_values(phi)


def nonvanishing_check(op: DiracOperatorKind, i: int, branch: int, epsilon: float) -> float:
    """Radial part of n(A b) at r = 1: sqrt(eps) I_i'(sqrt(eps)) + (lambda - i) I_i(sqrt(eps)).

    Strictly positive for every eps > 0.
    """
    if not epsilon > 0.0:
        raise InputError(f"epsilon must be positive, got {epsilon}")
    lam = op.eigenvalue(i, branch)
    root = math.sqrt(epsilon)
    return float(root * bessel_i_prime(i, root) + (lam - i) * bessel_i(i, root))


def check_helmholtz(u, epsilon: float, sample_points) -> float:
    """Max |(-Laplace + eps) u| over sample points by 5-point differences.

    Points must lie in the annulus 1e-3 <= r < 1.  ``u`` is a
    BasisFunction or a vectorized callable of Cartesian coordinates; the
    finite-difference stencil uses step 1e-4 and evaluates the analytic
    formula directly, so stencil arms may cross r = 1.
    """
    if epsilon < 0.0:
        raise InputError(f"epsilon must be nonnegative, got {epsilon}")
    pts = np.asarray(sample_points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise InputError("sample_points must have shape (n, 2)")
    x, y = pts[:, 0], pts[:, 1]
    r = np.hypot(x, y)
    if np.any(r < 1e-3) or np.any(r >= 1.0):
        raise InputError("sample points must satisfy 1e-3 <= r < 1")
    value = getattr(u, "value_xy", u)
    h = _LAPLACE_STEP
    lap = (
        value(x + h, y) + value(x - h, y) + value(x, y + h) + value(x, y - h)
        - 4.0 * value(x, y)
    ) / (h * h)
    return float(np.max(np.abs(-lap + epsilon * value(x, y))))


def symbol_defect(op: DiracOperatorKind, xis) -> float:
    """Max entrywise defect of sigma(A)(xi)* sigma(A)(xi) - |xi|^2 Id."""
    worst = 0.0
    for xi in np.asarray(xis, dtype=float):
        sym = op.symbol(xi)
        defect = sym.conj().T @ sym - (xi[0] ** 2 + xi[1] ** 2) * np.eye(sym.shape[1])
        worst = max(worst, float(np.max(np.abs(defect))))
    return worst
