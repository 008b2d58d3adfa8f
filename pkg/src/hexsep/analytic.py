"""
Closed-form symbol error probability of hexagonal constellations.

All functions broadcast over the SNR argument, which is the linear average
symbol SNR ``gamma_s = E_s / N0`` (see :func:`db_to_linear`).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Union

import numpy as np

from .errors import DomainError, UnsupportedOrder, ValidationError
from .gaussian import (DEFAULT_QUADRATURE, Q3_COEFF, CorrectionMethod, QuadratureSpec,
                       correction_C_closed, correction_C_numeric, q_func)
from .lattice import (SUPPORTED_ORDERS, ConstellationKind, build_constellation,
                      neighbor_stats)

log = logging.getLogger(__name__)

__all__ = [
    "BSource",
    "SepParams",
    "SnrPoint",
    "B_TABLE",
    "db_to_linear",
    "linear_to_db",
    "resolve_params",
    "params_from_constellation",
    "sep_nn_awgn",
    "sep_3psk_exact",
    "sep_hqam_closed",
    "sep_hqam_corrected",
    "sep_hqam_rayleigh",
    "rayleigh_zero_snr_limit",
    "sep_nn_rayleigh",
    "sep_hqam_corrected_rayleigh",
]


class BSource(str, Enum):
    TABLE1 = "table1"
    GEOMETRIC = "geometric"


# Published correction coefficients B, keyed by (M, kind).
B_TABLE = {
    (4, ConstellationKind.REGULAR): 1.9977, (4, ConstellationKind.IRREGULAR): 1.9977,
    (8, ConstellationKind.REGULAR): 3.4960, (8, ConstellationKind.IRREGULAR): 3.4960,
    (16, ConstellationKind.REGULAR): 4.4948, (16, ConstellationKind.IRREGULAR): 4.4948,
    (32, ConstellationKind.REGULAR): 5.4937, (32, ConstellationKind.IRREGULAR): 5.4937,
    (64, ConstellationKind.REGULAR): 6.1180, (64, ConstellationKind.IRREGULAR): 6.2428,
    (128, ConstellationKind.REGULAR): 6.6174, (128, ConstellationKind.IRREGULAR): 6.7422,
    (256, ConstellationKind.REGULAR): 7.0232, (256, ConstellationKind.IRREGULAR): 7.1168,
    (512, ConstellationKind.REGULAR): 7.3080, (512, ConstellationKind.IRREGULAR): 7.3704,
    (1024, ConstellationKind.REGULAR): 7.4992, (1024, ConstellationKind.IRREGULAR): 7.5382,
    (2048, ConstellationKind.REGULAR): 7.6416, (2048, ConstellationKind.IRREGULAR): 7.7168,
}


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(gamma):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(gamma, dtype=float))


@dataclass(frozen=True)
class SnrPoint:
    """Average symbol SNR, stored linear."""

    gamma_s: float

    def __post_init__(self):
        if not (self.gamma_s >= 0.0) or math.isinf(self.gamma_s):
            raise DomainError(f"gamma_s must be finite and >= 0, got {self.gamma_s}")

    @classmethod
    def from_db(cls, db: float) -> "SnrPoint":
        return cls(float(db_to_linear(db)))

    @property
    def db(self) -> float:
        return float(linear_to_db(self.gamma_s))

    def __float__(self) -> float:
        return self.gamma_s


SnrLike = Union[SnrPoint, float, np.ndarray]


def _gamma(snr: SnrLike) -> np.ndarray:
    if isinstance(snr, SnrPoint):
        return np.asarray(snr.gamma_s)
    gamma = np.asarray(snr, dtype=float)
    if np.any(np.isnan(gamma)) or np.any(gamma < 0):
        raise DomainError("SNR must be non-negative")
    return gamma


@dataclass(frozen=True)
class SepParams:
    """Constellation constants consumed by the closed forms.

    alpha scales the SNR into the nearest-neighbor Q-function argument,
    ``A`` is the average nearest-neighbor count, ``A_c`` the average count of
    adjacent nearest-neighbor pairs and ``B`` the coefficient of the
    pair-overlap correction term.
    """

    alpha: float
    A: float
    B: float
    A_c: float = math.nan
    source: BSource = BSource.GEOMETRIC

    def __post_init__(self):
        if not self.alpha > 0 or not self.A > 0 or not self.B >= 0:
            raise ValidationError(f"invalid parameters {self!r}")
        if self.source is BSource.GEOMETRIC and abs(self.B - Q3_COEFF * self.A_c) > 1e-4:
            raise ValidationError("geometric B must equal 1.3318 * A_c")


def params_from_constellation(c, b_source: Union[str, BSource] = BSource.GEOMETRIC) -> SepParams:
    """SepParams from constellation geometry; B from the table when asked and
    available for this (M, kind)."""
    b_source = BSource(b_source)
    stats = neighbor_stats(c)
    A_c = float(stats.A_c)
    key = (c.M, c.kind)
    if b_source is BSource.TABLE1 and key in B_TABLE:
        return SepParams(stats.alpha, float(stats.A), B_TABLE[key], A_c, BSource.TABLE1)
    return SepParams(stats.alpha, float(stats.A), Q3_COEFF * A_c, A_c, BSource.GEOMETRIC)


@lru_cache(maxsize=None)
def _resolve(M: int, kind: ConstellationKind, b_source: BSource) -> SepParams:
    return params_from_constellation(build_constellation(M, kind), b_source)


def resolve_params(M: int, kind="regular", b_source="table1") -> SepParams:
    """alpha, A and A_c from the constellation built by
    :func:`~hexsep.lattice.build_constellation`; B from the published table
    (``b_source='table1'``, falling back to geometry where the table has no
    entry) or as ``1.3318 * A_c`` (``'geometric'``)."""
    if M not in SUPPORTED_ORDERS:
        raise UnsupportedOrder(f"M={M} is not supported; choose from {SUPPORTED_ORDERS}")
    return _resolve(M, ConstellationKind.parse(kind), BSource(b_source))


def _finish(value, clamp: bool):
    if clamp:
        if np.any(value > 1.0):
            log.debug("closed form exceeds 1 at %d SNR point(s); clamped", int(np.sum(value > 1.0)))
        value = np.clip(value, 0.0, 1.0)
    return value if np.ndim(value) else float(value)


def sep_nn_awgn(p: SepParams, snr: SnrLike, clamp: bool = True):
    """Nearest-neighbor (union-bound style) estimate ``A Q(sqrt(alpha gamma))``."""
    gamma = _gamma(snr)
    return _finish(p.A * q_func(np.sqrt(p.alpha * gamma)), clamp)


@lru_cache(maxsize=None)
def _simplex_alpha() -> float:
    return neighbor_stats(build_constellation(3, ConstellationKind.THREE_PSK)).alpha


def sep_3psk_exact(snr: SnrLike, c_method: Union[str, CorrectionMethod] = "numeric",
                   spec: QuadratureSpec = DEFAULT_QUADRATURE, clamp: bool = True):
    """3-PSK SEP as ``2 Q(sqrt(alpha gamma)) - C``.

    With the numeric C this is exact: C is the probability of landing in the
    wedge where both bisectors are crossed.
    """
    gamma = _gamma(snr)
    x = _simplex_alpha() * gamma
    c = _correction(x, CorrectionMethod(c_method), spec)
    return _finish(2.0 * q_func(np.sqrt(x)) - c, clamp)


def _correction(x, method: CorrectionMethod, spec: QuadratureSpec):
    if method is CorrectionMethod.NUMERIC:
        c = correction_C_numeric(x, spec)
    else:
        c = correction_C_closed(x)
    return np.asarray(float(c) if np.ndim(x) == 0 else c)


def sep_hqam_closed(p: SepParams, snr: SnrLike, clamp: bool = True):
    """``A Q(sqrt(a g)) - B Q(sqrt(10/11 a g)) Q(sqrt(a g / 3))``: five
    multiplications and two Q evaluations per SNR point."""
    x = p.alpha * _gamma(snr)
    value = p.A * q_func(np.sqrt(x)) - p.B * q_func(np.sqrt(10.0 / 11.0 * x)) * q_func(np.sqrt(x / 3.0))
    return _finish(value, clamp)


def sep_hqam_corrected(p: SepParams, snr: SnrLike, spec: QuadratureSpec = DEFAULT_QUADRATURE,
                       c_method: Union[str, CorrectionMethod] = "numeric", clamp: bool = True):
    """``A Q(sqrt(alpha gamma)) - A_c C`` with C from quadrature by default."""
    if math.isnan(p.A_c):
        raise ValidationError("A_c is required for the corrected expression")
    x = p.alpha * _gamma(snr)
    c = _correction(x, CorrectionMethod(c_method), spec)
    return _finish(p.A * q_func(np.sqrt(x)) - p.A_c * c, clamp)


def sep_hqam_rayleigh(p: SepParams, mean_snr: SnrLike, clamp: bool = True):
    """Average of :func:`sep_hqam_closed` over Rayleigh amplitude fading.

    ``mean_snr`` must be strictly positive; the value at zero is the limit
    returned by :func:`rayleigh_zero_snr_limit`.
    """
    gbar = _gamma(mean_snr)
    if np.any(gbar <= 0):
        raise DomainError("mean SNR must be > 0; use rayleigh_zero_snr_limit() for the limit")
    x = gbar * p.alpha
    nn = 0.5 * p.A * (1.0 - np.sqrt(0.5 * x / (1.0 + 0.5 * x)))
    bracket = 0.25 - (1.0 / (2.0 * math.pi)) * (
        np.sqrt(5.0 * x / (11.0 + 5.0 * x)) * np.arctan(np.sqrt((330.0 + 150.0 * x) / (55.0 * x)))
        + np.sqrt(x / (6.0 + x)) * np.arctan(np.sqrt((66.0 + 11.0 * x) / (30.0 * x))))
    return _finish(nn - p.B * bracket, clamp)


def rayleigh_zero_snr_limit(p: SepParams, clamp: bool = True) -> float:
    return _finish(np.asarray(0.5 * p.A - 0.25 * p.B), clamp)


def sep_nn_rayleigh(p: SepParams, mean_snr: SnrLike, clamp: bool = True):
    """Rayleigh average of :func:`sep_nn_awgn`."""
    gbar = _gamma(mean_snr)
    x = 0.5 * gbar * p.alpha
    return _finish(0.5 * p.A * (1.0 - np.sqrt(x / (1.0 + x))), clamp)


def sep_hqam_corrected_rayleigh(p: SepParams, mean_snr: float,
                                spec: QuadratureSpec = DEFAULT_QUADRATURE, clamp: bool = True) -> float:
    """Rayleigh average of the unclamped :func:`sep_hqam_corrected`, by
    adaptive quadrature over the exponentially distributed SNR."""
    from scipy import integrate

    gbar = float(_gamma(mean_snr))
    if gbar <= 0:
        raise DomainError("mean SNR must be > 0")

    def f(t):
        # t = gamma / gbar is Exp(1) distributed
        return sep_hqam_corrected(p, t * gbar, spec, clamp=False) * math.exp(-t)

    value = integrate.quad(f, 0.0, 60.0, epsabs=1e-12, epsrel=1e-10, limit=200)[0]
    return _finish(np.asarray(value), clamp)
