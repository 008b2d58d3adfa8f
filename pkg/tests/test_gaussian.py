import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from hexsep.errors import DomainError, QuadratureNotConverged, ValidationError
from hexsep.gaussian import (CorrectionMethod, _overlap_integrand, QuadratureSpec, correction_C_closed,
                             correction_C_numeric, gauss_hermite_expectation, j1_closed, j1_numeric,
                             j2_closed, j2_numeric, j3_closed, j3_numeric, q_func)


def exact_C(x):
    """Bivariate normal orthant with correlation 1/2, via Owen's T."""
    h = math.sqrt(x)
    return float(q_func(h) - 2.0 * special.owens_t(h, 1.0 / math.sqrt(3.0)))


def test_q_values():
    assert q_func(0.0) == 0.5
    assert q_func(1.0) == pytest.approx(0.158655253931, abs=1e-12)
    for z in (0.3, 1.7, 4.0):
        assert q_func(z) + q_func(-z) == pytest.approx(1.0, abs=1e-15)


def test_q_matches_defining_integral():
    tail = integrate.quad(lambda t: math.exp(-t * t / 2) / math.sqrt(2 * math.pi), 1.0, np.inf,
                          epsabs=1e-14)[0]
    assert q_func(1.0) == pytest.approx(tail, abs=1e-13)


def test_quadrature_spec_validation():
    with pytest.raises(ValidationError):
        QuadratureSpec(node_count=16)
    with pytest.raises(ValidationError):
        QuadratureSpec(abs_tol=1e-5)
    with pytest.raises(ValidationError):
        QuadratureSpec(abs_tol=0.0)


def test_gauss_hermite_moments():
    assert gauss_hermite_expectation(lambda z: z**2, 1.5, 32) == pytest.approx(1.0 + 2.25)


def test_C_at_zero_is_one_third():
    value = correction_C_numeric(0.0)
    assert value.value == pytest.approx(1.0 / 3.0, abs=1e-9)
    assert value.method is CorrectionMethod.NUMERIC and value.node_count >= 64


def test_C_matches_independent_quadrature():
    x = 1.0
    mu = math.sqrt(2 * x)

    def f(z):
        q = q_func(z)
        return (2 * q_func(math.sqrt(x)) - q * (2 - q)) * math.exp(-(z - mu) ** 2 / 2) / math.sqrt(2 * math.pi)

    ref = integrate.quad(f, -np.inf, np.inf, epsabs=1e-14, epsrel=1e-13)[0]
    assert correction_C_numeric(x).value == pytest.approx(ref, abs=1e-9)


@given(st.floats(0.0, 60.0))
@settings(max_examples=60, deadline=None)
def test_C_matches_orthant_probability(x):
    assert correction_C_numeric(x).value == pytest.approx(exact_C(x), abs=1e-10)


def test_C_decreasing_and_bounded():
    x = np.linspace(0.0, 100.0, 100)
    c = correction_C_numeric(x)
    assert np.all(np.diff(c) <= 1e-15)
    assert np.all(c >= 0.0)
    assert np.all(c <= j1_closed(x) + 1e-15)
    assert c[-1] < 1e-20


def test_node_doubling_self_consistent():
    x = np.linspace(0.0, 30.0, 31)
    spec = QuadratureSpec(64, 1e-10)
    a = gauss_hermite_expectation(_overlap_integrand(x), np.sqrt(2 * x), 64)
    b = gauss_hermite_expectation(_overlap_integrand(x), np.sqrt(2 * x), 128)
    assert np.max(np.abs(a - b)) <= spec.abs_tol


def test_non_convergence_is_reported(monkeypatch):
    import hexsep.gaussian as g
    monkeypatch.setattr(g, "MAX_NODES", 128)
    # a step is not polynomial-like, so doubling never settles
    with pytest.raises(QuadratureNotConverged):
        g._adaptive(lambda z: (z > 0.7).astype(float), np.asarray(0.0), QuadratureSpec(64, 1e-10))


def test_domain():
    with pytest.raises(DomainError):
        correction_C_numeric(-1.0)
    with pytest.raises(DomainError):
        j3_closed(float("nan"))


def test_j_values_at_zero_and_two():
    assert j1_closed(0.0) == 1.0 and j2_closed(0.0) == 1.0
    assert j3_closed(0.0) == pytest.approx(0.33295, abs=1e-12)
    assert j1_closed(2.0) == 2 * q_func(math.sqrt(2.0))
    assert j1_numeric(1.0) == pytest.approx(j1_closed(1.0), abs=1e-10)


def test_j1_equals_j2_random():
    rng = np.random.default_rng(7)
    x = rng.uniform(0.0, 30.0, 50)
    np.testing.assert_array_equal(j1_closed(x), j2_closed(x))
    np.testing.assert_allclose(j1_numeric(x), j1_closed(x), atol=1e-10, rtol=0)
    np.testing.assert_allclose(j2_numeric(x), j2_closed(x), atol=1e-10, rtol=0)


def test_j3_numeric_is_C():
    x = np.array([0.0, 0.5, 2.0, 9.0])
    np.testing.assert_allclose(j3_numeric(x), correction_C_numeric(x), atol=1e-10)


def test_closed_C_values():
    assert correction_C_closed(0.0).value == pytest.approx(0.33295, abs=1e-12)
    expected = 1.3318 * q_func(math.sqrt(10 / 11)) * q_func(math.sqrt(1 / 3))
    assert correction_C_closed(1.0).value == pytest.approx(expected, rel=1e-15)
    x = np.linspace(0, 20, 41)
    np.testing.assert_array_equal(correction_C_closed(x), j3_closed(x))


def _closed_vs_numeric():
    x = np.linspace(0.0, 20.0, 201)
    num = correction_C_numeric(x)
    return float(np.max(np.abs(correction_C_closed(x) - num) / num))


def test_closed_C_deviation_recorded():
    worst = _closed_vs_numeric()
    print(f"max |C_closed - C_numeric| / C_numeric over alpha*gamma in [0, 20]: {worst:.4f}")
    assert worst < 2.0


@pytest.mark.xfail(strict=True, reason="product-of-Q form drifts from the quadrature value as "
                                       "alpha*gamma grows; measured deviation exceeds 5%")
def test_closed_C_within_five_percent():
    assert _closed_vs_numeric() <= 0.05
