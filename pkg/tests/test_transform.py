from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hybridbounds.transform import (
    TEMPERED_ALPHA,
    ZERO_ALPHA,
    BumpSpec,
    LanglandsParams,
    SingularityError,
    TailNotCertifiedError,
    fourier_hat,
    fourier_hat_error,
    gamma_quotient,
    langlands_params,
    mellin,
    omega_combined,
    omega_kernel,
    omega_transform,
    stirling_slope,
)

mpmath.mp.dps = 30
_MASS = mpmath.quad(lambda u: mpmath.exp(-1 / (1 - u * u)), [-1, 0, 1])


def bump_mp(y, a=0.5, b=2.5):
    c, h = (a + b) / 2, (b - a) / 2
    u = (y - c) / h
    if abs(u) >= 1:
        return mpmath.mpf(0)
    return mpmath.exp(-1 / (1 - u * u)) / (_MASS * h)


def test_bump_is_normalised():
    U = BumpSpec()
    y, h = U.grid(8192)
    assert float(np.sum(U(y)) * h) == pytest.approx(1.0, abs=1e-13)
    assert U(np.array([0.5, 2.5, 0.1, 3.0])).tolist() == [0.0, 0.0, 0.0, 0.0]


@pytest.mark.parametrize("xi", [0.0, 0.7, 3.1, 9.5])
def test_fourier_hat_against_quadrature(xi):
    U = BumpSpec()
    ref = mpmath.quad(lambda y: bump_mp(y) * mpmath.expj(2 * mpmath.pi * xi * y), [0.5, 1.5, 2.5])
    got = fourier_hat(U, xi)
    assert abs(got - complex(ref)) < 1e-12
    assert fourier_hat_error(U, xi) < 1e-12


@pytest.mark.parametrize("s", [0.5 + 3j, -0.5 + 10j, 1.0 + 0j])
def test_mellin_against_quadrature(s):
    U = BumpSpec()
    ref = mpmath.quad(lambda y: bump_mp(y) * y ** (s - 1), [0.5, 1.5, 2.5])
    assert abs(mellin(U, s) - complex(ref)) < 1e-12


@given(c=st.floats(-3, 3), xi=st.floats(-20, 20))
def test_fourier_hat_linear(c, xi):
    base = fourier_hat(BumpSpec(), xi)
    assert fourier_hat(BumpSpec(scale=c), xi) == pytest.approx(c * base, abs=1e-12)


@given(c=st.floats(-3, 3), t=st.floats(-30, 30))
def test_mellin_linear(c, t):
    s = -0.5 + 1j * t
    assert mellin(BumpSpec(scale=c), s) == pytest.approx(c * mellin(BumpSpec(), s), abs=1e-12)


def test_langlands_validation():
    with pytest.raises(ValueError):
        LanglandsParams((1j, 1j, 0j, 0j))


@given(v=st.tuples(*[st.floats(-3, 3)] * 3))
def test_langlands_builder_sums_to_zero(v):
    p = langlands_params(*(1j * x for x in v))
    assert abs(sum(p.alpha)) < 1e-12


@given(t=st.floats(-200, 200))
def test_unitary_on_critical_line(t):
    # tempered parameters: |G_+(1/2 + it)| = 1
    assert abs(gamma_quotient(0.5 + 1j * t, TEMPERED_ALPHA)) == pytest.approx(1.0, rel=1e-10)


def test_pole_is_refused():
    with pytest.raises(SingularityError):
        gamma_quotient(1.0 + 0j, ZERO_ALPHA)


def test_stirling_growth():
    # log|G_+(s)| grows like (2 - 4 Re s) log|t|
    assert stirling_slope(TEMPERED_ALPHA, -0.5, 100, 1000) == pytest.approx(4.0, abs=1e-3)
    assert stirling_slope(TEMPERED_ALPHA, 0.0, 100, 1000) == pytest.approx(2.0, abs=1e-3)


def test_uncertified_tail_raises():
    with pytest.raises(TailNotCertifiedError):
        omega_kernel(BumpSpec(), TEMPERED_ALPHA, 1, 0.5, t_max=64.0)


def test_transform_contour_shift_small_x():
    a = omega_transform([1.0, 10.0], sigma=0.4)
    b = omega_transform([1.0, 10.0], sigma=0.8)
    for u, v in zip(a, b):
        assert abs(u.value - v.value) <= 1e-6 * abs(u.value)
        assert u.certified_error < 1e-6 * abs(u.value)


def test_combination():
    both, diff, plus, minus = omega_combined(10.0, sigma=0.4)
    assert both == plus + minus and diff == plus - minus
    assert (both + diff) / 2 == pytest.approx(plus, abs=1e-15 * abs(plus))


def test_bad_x():
    with pytest.raises(ValueError):
        omega_transform([0.0])
