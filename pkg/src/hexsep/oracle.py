"""
Exact symbol error probability by integrating the noise density over the
ML decision cells.

Each cell boundary is split into straight pieces (finite edges and the two
rays of an open cell).  Seen from the transmitted symbol, a piece at
perpendicular distance h spanning polar angles [u_a, u_b] around its foot
point contributes

    P_err = (1 / 2 pi) * integral over [u_a, u_b] of exp(-h^2 / (2 sigma^2 cos^2 u)) du
          = F(u_b) - F(u_a),        F(u) = sign(u) * T(h / sigma, tan|u|)

to the error probability, where T is Owen's T function.  Averaging the
exponential over Rayleigh amplitude fading instead gives an arctan
antiderivative, so both channels are closed-form per piece.  The same
angular integrals can also be done by adaptive quadrature, which is kept as
an independent check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy import integrate
from scipy.special import owens_t

from .errors import DomainError, IntegrationBudgetExceeded
from .gaussian import q_func
from .lattice import Constellation, DecisionRegion, decision_regions

__all__ = [
    "ExactMethod",
    "ExactSep",
    "CellGeometry",
    "cell_geometry",
    "exact_sep_awgn",
    "exact_sep_rayleigh",
    "correct_probabilities",
    "region_probability",
    "transition_matrix",
    "rayleigh_pdf",
]

TWO_PI = 2.0 * math.pi
ERR_TARGET = 1e-6


class ExactMethod(str, Enum):
    OWENS_T = "owens-t"
    QUADRATURE = "quadrature"
    ARCTAN = "arctan"
    AMPLITUDE_QUADRATURE = "amplitude-quadrature"


@dataclass(frozen=True)
class ExactSep:
    value: float
    abs_err_bound: float
    method: ExactMethod

    def __float__(self) -> float:
        return self.value


def rayleigh_pdf(theta):
    """Unit mean-square Rayleigh amplitude density ``2 t exp(-t^2)``."""
    theta = np.asarray(theta, dtype=float)
    return np.where(theta >= 0, 2.0 * theta * np.exp(-theta * theta), 0.0)


def _boundary_pieces(region: DecisionRegion):
    """Yield (start, start_is_direction, end, end_is_direction) in CCW order."""
    v = region.vertices
    if region.bounded:
        for k in range(len(v)):
            yield v[k], False, v[(k + 1) % len(v)], False
        return
    out_dir, in_dir = region.unbounded_directions
    yield in_dir, True, v[0], False
    for k in range(len(v) - 1):
        yield v[k], False, v[k + 1], False
    yield v[-1], False, out_dir, True


def _piece_geometry(region: DecisionRegion, center: np.ndarray):
    """Signed distance and signed tangential offsets of each piece from ``center``.

    Returns arrays (h, s_a, s_b): h > 0 when ``center`` is on the inner side
    of the piece's line; s is the offset of an endpoint along the line from
    the foot of the perpendicular, measured so that CCW motion is positive
    when h > 0 (``inf`` for endpoints at infinity).
    """
    hs, sa, sb = [], [], []
    for start, start_dir, end, end_dir in _boundary_pieces(region):
        if start_dir:
            # the incoming ray is traversed against its outward direction
            tangent, anchor = -start, end
        elif end_dir:
            tangent, anchor = end, start
        else:
            tangent, anchor = end - start, start
        tangent = tangent / np.hypot(*tangent)
        inward = np.array([-tangent[1], tangent[0]])  # left of a CCW edge
        h = float(np.dot(anchor - center, -inward))
        offset = lambda p: float(np.dot(p - center, tangent))
        hs.append(h)
        sa.append(-math.inf if start_dir else offset(start))
        sb.append(math.inf if end_dir else offset(end))
    return np.array(hs), np.array(sa), np.array(sb)


def _arc_angle(region: DecisionRegion) -> float:
    if region.bounded:
        return 0.0
    out_dir, in_dir = region.unbounded_directions
    cross = out_dir[0] * in_dir[1] - out_dir[1] * in_dir[0]
    return math.atan2(cross, float(np.dot(out_dir, in_dir))) % TWO_PI


@dataclass(frozen=True, eq=False)
class CellGeometry:
    """Per-piece geometry of every cell relative to its own symbol."""

    owner: np.ndarray  # symbol index of each piece
    h: np.ndarray
    s_a: np.ndarray
    s_b: np.ndarray
    arc: np.ndarray  # per symbol, angle of the cone at infinity
    avg_energy: float
    M: int


@lru_cache(maxsize=32)
def _cell_geometry_cached(key) -> CellGeometry:
    c = _CACHE_OBJECTS[key]
    regions = decision_regions(c)
    owner, hs, sas, sbs = [], [], [], []
    for region in regions:
        h, sa, sb = _piece_geometry(region, c.points[region.symbol_index])
        owner.append(np.full(len(h), region.symbol_index))
        hs.append(h)
        sas.append(sa)
        sbs.append(sb)
    geom = CellGeometry(np.concatenate(owner), np.concatenate(hs), np.concatenate(sas),
                        np.concatenate(sbs), np.array([_arc_angle(r) for r in regions]),
                        c.avg_energy, c.M)
    return geom


_CACHE_OBJECTS: dict = {}


def cell_geometry(c: Constellation) -> CellGeometry:
    """Cell geometry for ``c`` (memoized on the point coordinates)."""
    key = (c.points.tobytes(), c.points.shape)
    _CACHE_OBJECTS.setdefault(key, c)
    try:
        return _cell_geometry_cached(key)
    finally:
        if len(_CACHE_OBJECTS) > 64:
            _CACHE_OBJECTS.clear()
            _CACHE_OBJECTS[key] = c


def _owen_primitive(k, s, h):
    """F at the endpoint with tangential offset s, for scaled distance k = |h|/sigma."""
    t = np.abs(s) / np.abs(h)
    finite = np.isfinite(t)
    value = np.where(finite, owens_t(k, np.where(finite, t, 0.0)), 0.5 * q_func(k))
    return np.sign(s) * value


def _fading_primitive(kappa, s, h):
    """Antiderivative of (1/2pi) cos^2 u / (cos^2 u + kappa), i.e. the
    Rayleigh-averaged error integrand, at tangential offset s."""
    t = np.abs(s) / np.abs(h)
    r = np.sqrt(kappa / (kappa + 1.0))
    one_minus_r = 1.0 / ((kappa + 1.0) * (1.0 + r))
    finite = np.isfinite(t)
    tf = np.where(finite, t, 0.0)
    # u - r*arctan(r tan u), rearranged to avoid cancellation as r -> 1
    value = np.where(finite,
                     np.arctan(one_minus_r * tf / (1.0 + r * tf * tf)) + one_minus_r * np.arctan(r * tf),
                     one_minus_r * 0.5 * math.pi)
    return np.sign(s) * value / TWO_PI


def _sigma(avg_energy: float, gamma: float) -> float:
    return math.sqrt(avg_energy / (2.0 * gamma))


def _check_gamma(gamma) -> float:
    gamma = float(gamma)
    if not gamma > 0 or math.isinf(gamma):
        raise DomainError(f"SNR must be finite and > 0, got {gamma}")
    return gamma


def correct_probabilities(c: Constellation, gamma_s: float) -> np.ndarray:
    """P(correct decision | symbol i sent) for every symbol, AWGN."""
    return 1.0 - _error_probabilities(cell_geometry(c), _check_gamma(gamma_s))


def _error_probabilities(geom: CellGeometry, gamma: float) -> np.ndarray:
    k = geom.h / _sigma(geom.avg_energy, gamma)
    pieces = _owen_primitive(k, geom.s_b, geom.h) - _owen_primitive(k, geom.s_a, geom.h)
    return np.bincount(geom.owner, weights=pieces, minlength=geom.M)


def _error_probabilities_quad(geom: CellGeometry, gamma: float):
    sigma = _sigma(geom.avg_energy, gamma)
    err = np.zeros(geom.M)
    bound = 0.0
    for owner, h, sa, sb in zip(geom.owner, geom.h, geom.s_a, geom.s_b):
        ua, ub = math.atan2(sa, h), math.atan2(sb, h)
        k2 = (h / sigma) ** 2

        def f(u):
            c = math.cos(u)
            return math.exp(-0.5 * k2 / (c * c)) / TWO_PI if c > 0 else 0.0

        value, est, info = integrate.quad(f, ua, ub, epsabs=1e-13, epsrel=1e-11,
                                          limit=200, full_output=True)[:3]
        err[owner] += value
        bound += est
    return err, bound


def exact_sep_awgn(c: Constellation, snr, method="owens-t") -> ExactSep:
    """Exact SEP over AWGN with noise variance ``avg_energy / (2 gamma_s)`` per
    dimension and nearest-point detection.

    ``method='owens-t'`` evaluates each boundary piece in closed form;
    ``'quadrature'`` integrates the same angular integrands adaptively and
    reports the summed quadrature error estimate.

    Raises
    ------
    IntegrationBudgetExceeded
        If the quadrature error estimate exceeds 1e-6.
    """
    gamma = _check_gamma(getattr(snr, "gamma_s", snr))
    geom = cell_geometry(c)
    method = ExactMethod(method)
    if method is ExactMethod.OWENS_T:
        err = _error_probabilities(geom, gamma)
        bound = 1e-15 * len(geom.h) / geom.M + 1e-16
    elif method is ExactMethod.QUADRATURE:
        err, bound = _error_probabilities_quad(geom, gamma)
        bound /= geom.M
        if bound > ERR_TARGET:
            raise IntegrationBudgetExceeded(f"error bound {bound:.2e} exceeds {ERR_TARGET:.0e}")
    else:
        raise ValueError(f"method {method.value!r} does not apply to AWGN")
    value = float(np.clip(np.mean(err), 0.0, 1.0))
    return ExactSep(value, bound, method)


def _fading_error_probabilities(geom: CellGeometry, mean_gamma: float) -> np.ndarray:
    kappa = geom.h**2 * mean_gamma / geom.avg_energy
    pieces = _fading_primitive(kappa, geom.s_b, geom.h) - _fading_primitive(kappa, geom.s_a, geom.h)
    return np.bincount(geom.owner, weights=pieces, minlength=geom.M)


# Rayleigh amplitude beyond which the density's tail mass exp(-t^2) < 1e-10
THETA_MAX = math.sqrt(math.log(1e10))


def exact_sep_rayleigh(c: Constellation, mean_snr, method="arctan") -> ExactSep:
    """Exact SEP under flat Rayleigh fading with coherent detection.

    ``method='arctan'`` averages each boundary piece over the fading
    analytically.  ``'amplitude-quadrature'`` integrates
    :func:`exact_sep_awgn` at SNR ``theta^2 * mean_snr`` against the
    Rayleigh density over ``[0, THETA_MAX]``.
    """
    gbar = _check_gamma(getattr(mean_snr, "gamma_s", mean_snr))
    geom = cell_geometry(c)
    method = ExactMethod(method)
    if method is ExactMethod.ARCTAN:
        err = _fading_error_probabilities(geom, gbar)
        return ExactSep(float(np.clip(np.mean(err), 0.0, 1.0)),
                        1e-15 * len(geom.h) / geom.M + 1e-16, method)
    if method is not ExactMethod.AMPLITUDE_QUADRATURE:
        raise ValueError(f"method {method.value!r} does not apply to Rayleigh fading")
    guess = (geom.M - 1) / geom.M

    def integrand(theta):
        if theta <= 0.0:
            return 0.0
        sep = float(np.mean(_error_probabilities(geom, theta * theta * gbar)))
        return sep * 2.0 * theta * math.exp(-theta * theta)

    # the transition from (M-1)/M to 0 happens near theta ~ 1/sqrt(alpha * gbar)
    breaks = sorted({min(THETA_MAX * 0.999, b) for b in
                     (0.1, 0.5, 1.0, 2.0) + tuple(x / math.sqrt(gbar) for x in (0.3, 1.0, 3.0, 10.0))
                     if 0 < b < THETA_MAX})
    value, est = integrate.quad(integrand, 0.0, THETA_MAX, epsabs=1e-12, epsrel=1e-10,
                                limit=400, points=breaks)
    bound = est + math.exp(-THETA_MAX**2) * guess
    if bound > ERR_TARGET:
        raise IntegrationBudgetExceeded(f"error bound {bound:.2e} exceeds {ERR_TARGET:.0e}")
    return ExactSep(float(np.clip(value, 0.0, 1.0)), bound, method)


def region_probability(region: DecisionRegion, center, sigma: float) -> float:
    """Mass of ``N(center, sigma^2 I)`` inside ``region``; ``center`` may lie
    anywhere (pieces seen from the outside enter with negative sign)."""
    center = np.asarray(center, dtype=float)
    h, sa, sb = _piece_geometry(region, center)
    total = _arc_angle(region) / TWO_PI
    keep = np.abs(h) > 0
    h, sa, sb = h[keep], sa[keep], sb[keep]
    k = np.abs(h) / sigma
    # angles are measured from the foot of the perpendicular; pieces seen from
    # the outside sweep clockwise and so enter negatively
    sign = np.sign(h)
    ua = np.arctan2(sign * sa, np.abs(h))
    ub = np.arctan2(sign * sb, np.abs(h))
    fa = _owen_primitive(k, sign * sa, h)
    fb = _owen_primitive(k, sign * sb, h)
    total += float(np.sum((ub - ua) / TWO_PI - (fb - fa)))
    return total


def transition_matrix(c: Constellation, gamma_s: float,
                      regions: Optional[Sequence[DecisionRegion]] = None) -> np.ndarray:
    """``P[i, j]`` = probability of deciding j when i was sent, AWGN."""
    gamma = _check_gamma(gamma_s)
    sigma = _sigma(c.avg_energy, gamma)
    regions = decision_regions(c) if regions is None else regions
    return np.array([[region_probability(r, s, sigma) for r in regions] for s in c.points])
