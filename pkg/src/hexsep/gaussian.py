"""
Gaussian Q-function and the pairwise-overlap correction C.

C is the probability that a symbol's noise crosses *both* bisectors of a pair
of adjacent nearest neighbors.  It is evaluated either numerically, as a
Gauss-Hermite expectation over the Gaussian-weighted integrand, or by the
closed product-of-Q-functions form.

Written out, the integrand is ``2 Q(sqrt(x)) - [1 - (1 - Q(z))**2]`` weighted
by ``exp(-(z - sqrt(2 x))**2 / 2) / sqrt(2 pi)`` where ``x = alpha * gamma_s``.
Splitting it term by term gives three integrals J1 - J2 + J3; the first two
both equal ``2 Q(sqrt(x))`` and cancel, so C is exactly J3.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.special import erfc

from .errors import DomainError, QuadratureNotConverged, ValidationError

__all__ = [
    "Q3_COEFF",
    "QuadratureSpec",
    "CorrectionMethod",
    "CorrectionValue",
    "q_func",
    "gauss_hermite_expectation",
    "correction_C_numeric",
    "correction_C_closed",
    "j1_closed",
    "j2_closed",
    "j3_closed",
    "j1_numeric",
    "j2_numeric",
    "j3_numeric",
]

# coefficient of the product-of-Q approximation to E[Q(Z)^2]
Q3_COEFF = 1.3318
MAX_NODES = 1024


def q_func(z):
    """Gaussian tail probability, ``Q(z) = erfc(z / sqrt(2)) / 2``."""
    return 0.5 * erfc(np.asarray(z, dtype=float) / math.sqrt(2.0))


@dataclass(frozen=True)
class QuadratureSpec:
    """Gauss-Hermite order and the tolerance of the node-doubling check."""

    node_count: int = 64
    abs_tol: float = 1e-10

    def __post_init__(self):
        if int(self.node_count) != self.node_count or self.node_count < 32:
            raise ValidationError(f"node_count must be an integer >= 32, got {self.node_count}")
        if self.node_count > MAX_NODES:
            raise ValidationError(f"node_count must not exceed {MAX_NODES}")
        if not (0.0 < self.abs_tol <= 1e-6):
            raise ValidationError(f"abs_tol must lie in (0, 1e-6], got {self.abs_tol}")


DEFAULT_QUADRATURE = QuadratureSpec()


class CorrectionMethod(str, Enum):
    NUMERIC = "numeric"
    CLOSED = "closed"


@dataclass(frozen=True)
class CorrectionValue:
    value: float
    method: CorrectionMethod
    node_count: int = 0

    def __float__(self) -> float:
        return float(self.value)


@lru_cache(maxsize=None)
def _normal_nodes(n: int):
    """Nodes and weights for E[f(Z)], Z ~ N(0, 1)."""
    x, w = hermgauss(n)
    z, p = math.sqrt(2.0) * x, w / math.sqrt(math.pi)
    z.setflags(write=False)
    p.setflags(write=False)
    return z, p


def gauss_hermite_expectation(f, mean, n: int) -> np.ndarray:
    """``E[f(mean + Z)]`` for standard normal Z, broadcasting over ``mean``."""
    z, p = _normal_nodes(n)
    mean = np.asarray(mean, dtype=float)
    values = f(mean[..., None] + z)
    return values @ p


def _check_nonneg(alpha_gamma) -> np.ndarray:
    x = np.asarray(alpha_gamma, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x < 0):
        raise DomainError("alpha*gamma_s must be finite and non-negative")
    return x


def _adaptive(f, mean, spec: QuadratureSpec):
    n = spec.node_count
    coarse = gauss_hermite_expectation(f, mean, n)
    while True:
        fine = gauss_hermite_expectation(f, mean, 2 * n)
        if np.all(np.abs(fine - coarse) <= spec.abs_tol):
            return fine, 2 * n
        if 2 * n >= MAX_NODES:
            worst = float(np.max(np.abs(fine - coarse)))
            raise QuadratureNotConverged(
                f"Gauss-Hermite change {worst:.3e} exceeds {spec.abs_tol:.1e} at {MAX_NODES} nodes")
        n, coarse = 2 * n, fine


def _overlap_integrand(x):
    nn_term = 2.0 * q_func(np.sqrt(x))

    def f(z):
        q = q_func(z)
        # 1 - (1 - q)^2 written to keep precision when q is tiny
        return nn_term[..., None] - q * (2.0 - q)

    return f


def correction_C_numeric(alpha_gamma, spec: QuadratureSpec = DEFAULT_QUADRATURE):
    """Correction factor C by Gauss-Hermite quadrature.

    The node count is doubled from ``spec.node_count`` until two successive
    estimates differ by at most ``spec.abs_tol``.  The result is clamped to
    [0, 1].  Returns a :class:`CorrectionValue` for scalar input and an array
    for array input.

    Raises
    ------
    QuadratureNotConverged
        If the estimates still disagree at 1024 nodes.
    """
    x = _check_nonneg(alpha_gamma)
    value, nodes = _adaptive(_overlap_integrand(x), np.sqrt(2.0 * x), spec)
    value = np.clip(value, 0.0, 1.0)
    if value.ndim == 0:
        return CorrectionValue(float(value), CorrectionMethod.NUMERIC, nodes)
    return value


def j1_closed(alpha_gamma):
    return 2.0 * q_func(np.sqrt(_check_nonneg(alpha_gamma)))


def j2_closed(alpha_gamma):
    return 2.0 * q_func(np.sqrt(_check_nonneg(alpha_gamma)))


def j3_closed(alpha_gamma):
    x = _check_nonneg(alpha_gamma)
    return Q3_COEFF * q_func(np.sqrt(10.0 / 11.0 * x)) * q_func(np.sqrt(x / 3.0))


def j1_numeric(alpha_gamma, n: int = 64):
    x = _check_nonneg(alpha_gamma)
    const = 2.0 * q_func(np.sqrt(x))
    return gauss_hermite_expectation(lambda z: np.broadcast_to(const[..., None], z.shape),
                                     np.sqrt(2.0 * x), n)


def j2_numeric(alpha_gamma, n: int = 64):
    x = _check_nonneg(alpha_gamma)
    return gauss_hermite_expectation(lambda z: 2.0 * q_func(z), np.sqrt(2.0 * x), n)


def j3_numeric(alpha_gamma, n: int = 64):
    x = _check_nonneg(alpha_gamma)
    return gauss_hermite_expectation(lambda z: q_func(z) ** 2, np.sqrt(2.0 * x), n)


def correction_C_closed(alpha_gamma):
    """Closed-form C.

    J1 and J2 are identical, so ``C = J1 - J2 + J3`` reduces to J3 and that
    is what is returned (no floating-point round trip through J1 - J2).
    """
    value = j3_closed(alpha_gamma)
    if np.ndim(value) == 0:
        return CorrectionValue(float(value), CorrectionMethod.CLOSED)
    return value
