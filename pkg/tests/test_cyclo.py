from __future__ import annotations

import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hybridbounds.cyclo import L_MAX, CapacityError, CycNumber, SumValue, cyclotomic_poly, degree

levels = st.sampled_from([1, 2, 3, 4, 5, 6, 7, 8, 9, 12, 15, 20, 24, 30])


def hist_strategy(level):
    return st.lists(st.integers(-5, 5), min_size=level, max_size=level)


def brute(level, hist):
    return sum(c * cmath.exp(2j * math.pi * k / level) for k, c in enumerate(hist))


def test_cyclotomic_polys_small():
    assert cyclotomic_poly(1) == (-1, 1)
    assert cyclotomic_poly(4) == (1, 0, 1)
    assert cyclotomic_poly(6) == (1, -1, 1)
    assert cyclotomic_poly(12) == (1, 0, -1, 0, 1)


def test_zeta_relations():
    for L in (2, 3, 5, 8, 12):
        z = CycNumber.zeta(L)
        assert z**L == CycNumber.one(L)
        total = CycNumber.zero(L)
        for k in range(L):
            total = total + CycNumber.zeta(L, k)
        assert total.is_zero()


def test_rational_string_and_value():
    x = CycNumber.rational(Fraction(-3, 4), 5)
    assert x.to_string() == "-3/4"
    assert complex(x) == pytest.approx(-0.75)


def test_capacity_error():
    with pytest.raises(CapacityError):
        CycNumber.zeta(L_MAX + 1)


def test_sumvalue_json_shape():
    v = SumValue.from_hist(3, np.array([0, 1, 1]))
    j = v.to_json()
    assert j["exact"] == "-1" and j["approx"] == [-1.0, 0.0] and j["backend"] == "exact"


@given(data=st.data(), level=levels)
def test_hist_reduction_matches_brute(data, level):
    h = data.draw(hist_strategy(level))
    x = CycNumber.from_hist(level, np.array(h))
    assert complex(x) == pytest.approx(brute(level, h), abs=1e-9)
    assert len(x.num) == degree(level)


@given(data=st.data(), level=levels)
def test_ring_homomorphism(data, level):
    a = data.draw(hist_strategy(level))
    b = data.draw(hist_strategy(level))
    x, y = CycNumber.from_hist(level, np.array(a)), CycNumber.from_hist(level, np.array(b))
    assert complex(x + y) == pytest.approx(brute(level, a) + brute(level, b), abs=1e-8)
    assert complex(x * y) == pytest.approx(brute(level, a) * brute(level, b), abs=1e-7)
    assert complex(x.conj()) == pytest.approx(brute(level, a).conjugate(), abs=1e-9)


@given(data=st.data(), level=levels)
def test_canonical_form_is_unique(data, level):
    # adding a multiple of 1 + z^(L/p) + ... (a vanishing sum) must not change the element
    h = np.array(data.draw(hist_strategy(level)))
    if level == 1:
        return
    p = data.draw(st.sampled_from([p for p in (2, 3, 5) if level % p == 0] or [level]))
    step = level // p
    g = h.copy()
    g[::step] += 1
    assert CycNumber.from_hist(level, h) == CycNumber.from_hist(level, g)
