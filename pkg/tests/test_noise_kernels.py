import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rtn_dephasing.errors import PreconditionError, UnsupportedOperationError
from rtn_dephasing.noise_kernels import (
    DampedCosine,
    Delta,
    Exponential,
    NoiseParams,
    RationalKernel,
    conditional_probability,
    conditional_probability_laplace,
    correlation_function,
    kernel_laplace,
    kernel_time,
    make_kernel,
    memoryless_conditional_probability,
    stationary_probability,
)
from rtn_dephasing.oracles import numeric_inverse_laplace
from rtn_dephasing.polynomial_lab import RationalFunction, RealPolynomial

kernels = st.one_of(
    st.just(Delta()),
    st.builds(Exponential, st.floats(0.05, 20)),
    st.builds(DampedCosine, st.floats(0.05, 10), st.floats(0, 6)),
)
params = st.builds(NoiseParams, st.floats(0.1, 5), st.floats(0, 5))


def test_params_validation():
    with pytest.raises(PreconditionError):
        NoiseParams(0.0, 1.0)
    with pytest.raises(PreconditionError):
        NoiseParams(1.0, -0.1)
    with pytest.raises(PreconditionError):
        Exponential(0.0)
    with pytest.raises(PreconditionError):
        DampedCosine(1.0, -1.0)


def test_kernel_laplace_forms():
    assert kernel_laplace(Delta())(3.7) == 1.0
    assert kernel_laplace(Exponential(2.0))(1.0) == pytest.approx(2 / 3)
    k = kernel_laplace(DampedCosine(2.0, 1.5))
    p = 0.4 + 0.3j
    assert k(p) == pytest.approx(2 * (p + 2) / ((p + 2) ** 2 + 2.25))


def test_omega_zero_reduction_is_bitwise():
    for kappa in (0.05, 1.0, 2.0, 3.0, 1e4):
        a, b = DampedCosine(kappa, 0.0).laplace(), Exponential(kappa).laplace()
        assert a.num.coeffs == b.num.coeffs and a.den.coeffs == b.den.coeffs


def test_kernel_time_values():
    assert kernel_time(Exponential(1.0), 0.0) == 1.0
    assert kernel_time(Exponential(2.0), 1.0) == pytest.approx(2 * math.exp(-2), abs=1e-15)
    assert kernel_time(DampedCosine(1.0, math.pi), 1.0) == pytest.approx(-math.exp(-1), abs=1e-15)
    with pytest.raises(UnsupportedOperationError):
        kernel_time(Delta(), 0.5)
    with pytest.raises(PreconditionError):
        kernel_time(Exponential(1.0), -1.0)


def test_make_kernel():
    assert make_kernel("delta") == Delta()
    assert make_kernel("exp", 2.0) == Exponential(2.0)
    assert make_kernel("cos", 2.0, 1.0) == DampedCosine(2.0, 1.0)
    with pytest.raises(PreconditionError):
        make_kernel("gauss", 1.0)


def test_conditional_probability_laplace_delta():
    cp = conditional_probability_laplace(Delta(), NoiseParams(1.0, 0.0))
    for p in (0.5, 2.0 + 1j):
        assert cp.same_state(p) == pytest.approx(0.5 * (1 / p + 1 / (p + 2)))


def test_conditional_probability_laplace_exponential():
    kappa, lam = 1.7, 0.9
    cp = conditional_probability_laplace(Exponential(kappa), NoiseParams(lam, 0.3))
    for p in (0.5, 2.0 + 1j):
        expected = 0.5 * (1 / p + (p + kappa) / (p * p + kappa * p + 2 * lam * kappa))
        assert cp.same_state(p) == pytest.approx(expected, rel=1e-12)


@given(kernels, params)
def test_total_probability_in_laplace_domain(k, prm):
    cp = conditional_probability_laplace(k, prm)
    for p in (0.3, 1.0 + 2j, 7.0):
        assert cp.same_state(p) + cp.flipped_state(p) == pytest.approx(1 / p, rel=1e-10)


def test_conditional_probability_memoryless_values():
    same, flip = conditional_probability(Delta(), NoiseParams(1.0, 0.0), 0.5)
    assert same == pytest.approx((1 + math.exp(-1)) / 2, abs=1e-12)
    assert same == pytest.approx(0.68394, abs=1e-5)
    t = np.linspace(0, 20, 101)
    prm = NoiseParams(0.7, 0.0)
    s, f = conditional_probability(Delta(), prm, t)
    es, ef = memoryless_conditional_probability(prm, t)
    assert np.max(np.abs(s - es)) < 1e-12 and np.max(np.abs(f - ef)) < 1e-12


@given(kernels, params)
def test_probabilities_normalize(k, prm):
    t = np.linspace(0, 20 / prm.lam, 41)
    s, f = conditional_probability(k, prm, t)
    assert np.max(np.abs(s + f - 1)) < 1e-10
    assert s[0] == pytest.approx(1.0, abs=1e-12) and f[0] == pytest.approx(0.0, abs=1e-12)


def test_conditional_probability_matches_talbot():
    k, prm = Exponential(1.0), NoiseParams(1.0, 1.0)
    same, _ = conditional_probability(k, prm, 1.0)
    assert same == pytest.approx(0.68553678, abs=1e-8)
    # the 1/(2p) part is exact; invert the relaxation part independently
    cp = conditional_probability_laplace(k, prm)
    relax = cp.same_state - RationalFunction(RealPolynomial((0.5,)), RealPolynomial((0.0, 1.0)))
    assert 0.5 + numeric_inverse_laplace(relax.reduced(), [1.0])[0] == pytest.approx(same, abs=1e-8)


def test_correlation_function():
    prm = NoiseParams(1.3, 0.8)
    t = np.linspace(0, 5, 11)
    C = correlation_function(Delta(), prm)
    assert np.allclose(C(t), 0.64 * np.exp(-2.6 * t), atol=1e-14)
    C1 = correlation_function(Exponential(1.0), NoiseParams(1.0, 1.0))
    roots = sorted(np.roots([1, 1, 2]), key=lambda z: z.imag)
    assert sorted((r for r, _ in C1.terms), key=lambda z: z.imag) == pytest.approx(roots)


@given(kernels, params)
def test_correlation_initial_value(k, prm):
    C = correlation_function(k, prm)
    assert C(0.0) == pytest.approx(prm.nu**2, abs=1e-10)


def test_stationary_probability():
    assert stationary_probability() == (0.5, 0.5)


def test_user_rational_kernel():
    # K~ = (p + 0.3) / ((p + 2)(p^2 + 2p + 2)) written with a removable factor
    num = RealPolynomial((0.1, 1.0)) * RealPolynomial((0.3, 1.0))
    den = RealPolynomial((0.1, 1.0)) * RealPolynomial((2.0, 1.0)) * RealPolynomial((2.0, 2.0, 1.0))
    k = RationalKernel(RationalFunction(num, den))
    s, f = conditional_probability(k, NoiseParams(1.0, 1.0), np.linspace(0, 10, 21))
    assert np.max(np.abs(s + f - 1)) < 1e-10
    with pytest.raises(UnsupportedOperationError):
        k.time(1.0)
