import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import PANEL_KERNELS, PANEL_NUS
from rtn_dephasing.dephasing_core import (
    DephasingModel,
    assemble_laplace,
    closed_form_memoryless,
    coherence_element,
    dephasing_rate,
    solve,
)
from rtn_dephasing.errors import NonDecayingError, ZeroCrossingError
from rtn_dephasing.noise_kernels import DampedCosine, Delta, Exponential, NoiseParams, RationalKernel
from rtn_dephasing.polynomial_lab import RationalFunction, RealPolynomial


def model(k, nu, lam=1.0, omega0=0.0):
    return DephasingModel(k, NoiseParams(lam, nu), omega0)


def test_assemble_delta():
    F, Fd = assemble_laplace(model(Delta(), 0.6, lam=1.5))
    assert F.num.coeffs == pytest.approx((3.0, 1.0))
    assert F.den.coeffs == pytest.approx((0.36, 3.0, 1.0))
    assert Fd.num.coeffs == pytest.approx((-0.36,))


def test_assemble_exponential_cubic():
    kappa, lam, nu = 2.5, 0.8, 1.3
    F, _ = assemble_laplace(model(Exponential(kappa), nu, lam))
    assert F.den.coeffs == pytest.approx((nu * nu * kappa, 2 * lam * kappa + nu * nu, kappa, 1.0))


def test_assemble_damped_cosine_quartic():
    kappa, om, lam, nu = 3.0, 2.0, 1.0, 0.8
    F, _ = assemble_laplace(model(DampedCosine(kappa, om), nu, lam))
    q = np.poly1d([1, 2 * kappa, kappa**2 + om**2])
    p = np.poly1d([1, 0])
    den = p * (p * q + 2 * lam * kappa * np.poly1d([1, kappa])) + nu * nu * q
    assert F.den.coeffs == pytest.approx(tuple(den.coeffs[::-1]))


def test_solve_examples():
    sol = solve(model(Delta(), 0.6))
    assert sol.F(1.0) == pytest.approx(1.125 * math.exp(-0.2) - 0.125 * math.exp(-1.8), abs=1e-13)
    assert sol.F(1.0) == pytest.approx(0.9005, abs=1e-4)
    t = np.linspace(0, 20, 201)
    assert np.max(np.abs(solve(model(Delta(), 1.0)).F(t) - (1 + t) * np.exp(-t))) < 1e-12
    for k in (Delta(), Exponential(1.0), DampedCosine(2.0, 1.0)):
        free = solve(model(k, 0.0))
        assert not free.decaying
        assert np.allclose(free.F(t), 1.0, atol=0, rtol=0)


@pytest.mark.parametrize("kernel", PANEL_KERNELS, ids=repr)
@pytest.mark.parametrize("nu", PANEL_NUS)
def test_initial_conditions_and_bound(kernel, nu):
    sol = solve(model(kernel, nu))
    assert abs(sol.F(0.0) - 1) <= 1e-12
    assert abs(sol.F_dot(0.0)) <= 1e-12
    t = np.linspace(0, 40, 801)
    assert np.max(np.abs(sol.F(t))) <= 1 + 1e-10


@pytest.mark.parametrize("nu", [0.3, 0.6, 1.0, 1.0 - 1e-12, 1.0 + 1e-12, 1.5, 3.0])
def test_closed_form_equivalence(nu):
    prm = NoiseParams(1.0, nu)
    t = np.linspace(0, 20, 2001)
    F, _ = closed_form_memoryless(prm, t)
    assert np.max(np.abs(solve(DephasingModel(Delta(), prm)).F(t) - F)) < 1e-10


def test_closed_form_values():
    F, g = closed_form_memoryless(NoiseParams(1.0, 3.0), 1.0)
    assert F == pytest.approx(-0.3099, abs=1e-4)
    F, g = closed_form_memoryless(NoiseParams(1.0, 1.0), 1.0)
    assert F == pytest.approx(2 * math.exp(-1)) and g == pytest.approx(0.5)
    assert closed_form_memoryless(NoiseParams(2.0, 0.7), 0.0) == (1.0, 0.0)


@given(st.floats(0.1, 3), st.floats(0.01, 0.999), st.floats(0, 30))
def test_memoryless_weak_coupling_rate_nonnegative(lam, ratio, t):
    _, g = closed_form_memoryless(NoiseParams(lam, ratio * lam), t)
    assert g >= 0


def test_kernel_limit():
    t = np.linspace(0, 10, 1001)
    a = solve(model(Exponential(1e4), 0.6)).F(t)
    b = solve(model(Delta(), 0.6)).F(t)
    assert np.max(np.abs(a - b)) < 2e-3


@pytest.mark.parametrize("kappa", [0.05, 1.0, 3.0])
def test_omega_zero_solution_matches_exponential(kappa):
    t = np.linspace(0, 30, 301)
    a = solve(model(DampedCosine(kappa, 0.0), 1.7)).F(t)
    b = solve(model(Exponential(kappa), 1.7)).F(t)
    assert np.max(np.abs(a - b)) <= 1e-12


def test_dephasing_rate():
    sol = solve(model(Delta(), 1.0))
    assert dephasing_rate(sol, 0.0) == 0.0
    assert dephasing_rate(sol, 1.0) == pytest.approx(0.5, abs=1e-12)
    strong = solve(model(Delta(), 3.0))
    w = 2 * math.sqrt(2)
    t0 = (math.pi - math.atan(w)) / w  # first zero of cos(wt) + sin(wt)/w
    assert dephasing_rate(strong, t0 + 1e-3) < 0
    with pytest.raises(ZeroCrossingError):
        dephasing_rate(strong, t0)


def test_coherence_element():
    m = model(Exponential(2.0), 1.5, omega0=4.0)
    sol = solve(m)
    assert coherence_element(m, sol, 0.0, 0.3 + 0.4j) == pytest.approx(0.3 + 0.4j, abs=1e-12)
    for t in (0.5, 2.0):
        c = coherence_element(m, sol, t, 0.3 + 0.4j)
        assert abs(c) == pytest.approx(abs(sol.F(t)) * 0.5, rel=1e-12)
    m0 = model(Exponential(2.0), 1.5)
    assert coherence_element(m0, sol, 1.0, 2.0) == pytest.approx(2.0 * sol.F(1.0))


def test_non_decaying_pole_is_reported():
    # K~ = -1/(p + 1) puts a pole of F~ in the right half-plane
    k = RationalKernel(RationalFunction(RealPolynomial((-1.0,)), RealPolynomial((1.0, 1.0))))
    with pytest.raises(NonDecayingError) as exc:
        solve(model(k, 0.5))
    assert exc.value.pole is not None
