from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hybridbounds._arith import euler_phi
from hybridbounds.modcore import (
    NotAUnitError,
    character,
    characters,
    crt,
    factorize,
    gauss_sum,
    induce,
    inverse,
    primitive_characters,
    primitive_part,
    tau_star,
    unit_group,
)
from oracles import e, gauss, prime_character

moduli = st.integers(1, 120)

# number of primitive characters mod q (Jordan-type count), by hand
PRIMITIVE_COUNTS = {1: 1, 2: 0, 3: 1, 4: 1, 5: 3, 8: 2, 9: 4, 12: 1, 15: 3, 16: 4, 25: 16, 30: 0}


def test_factorize_examples():
    assert factorize(360).factors == ((2, 3), (3, 2), (5, 1))
    assert factorize(1).factors == ()


@given(q=st.integers(2, 500), a=st.integers(-1000, 1000))
def test_inverse(q, a):
    if math.gcd(a, q) != 1:
        with pytest.raises(NotAUnitError):
            inverse(a, q)
    else:
        assert a * inverse(a, q) % q == 1


@given(r1=st.integers(0, 6), r2=st.integers(0, 10))
def test_crt(r1, r2):
    x = crt([r1, r2], [7, 11])
    assert x % 7 == r1 and x % 11 == r2


@given(q=moduli)
def test_unit_group_order_and_generators(q):
    grp = unit_group(q)
    assert grp.order == euler_phi(q)
    for g, o in grp.generators:
        assert pow(g, o, q) == 1 % q


@given(q=st.integers(1, 60))
def test_orthogonality(q):
    chars = characters(q)
    assert len(chars) == euler_phi(q)
    E = unit_group(q).exponent
    a = 1 + (q > 2)
    while math.gcd(a, q) != 1:
        a += 1
    tot = sum(np.exp(2j * np.pi * c.value_exponents()[a % q] / E) for c in chars)
    expected = euler_phi(q) if a % q == 1 % q else 0
    assert abs(tot - expected) < 1e-9


@pytest.mark.parametrize("q,count", sorted(PRIMITIVE_COUNTS.items()))
def test_primitive_counts(q, count):
    assert len(primitive_characters(q)) == count


@given(q=st.integers(3, 60))
def test_gauss_modulus_for_primitive(q):
    for chi in primitive_characters(q):
        assert abs(gauss_sum(chi).value) ** 2 == pytest.approx(q)


def test_gauss_against_brute_force():
    # primitive root 3 mod 7, chi(3) = e(1/6)
    chi = character(7, (1,))
    assert gauss_sum(chi).value == pytest.approx(gauss(prime_character(7, 3, 1), 7))
    assert gauss_sum(chi).value == pytest.approx(-2.440133358345537 + 1.0226187918717948j)
    # real quadratic character mod 5: tau = sqrt 5
    quad = character(5, (2,))
    assert quad.order() == 2
    assert gauss_sum(quad).value == pytest.approx(5**0.5)


def test_tau_star_unit_twist():
    # for a unit n0: tau*(chi, n0) = chi(n0) * tau(chi) after substituting a -> a/n0 ... brute force
    chi = character(11, (3,))
    for n0 in (1, 2, 5, 11, 22):
        E = chi.level
        v = chi.value_exponents()
        brute = sum(e(n0 * a / 11) * (0 if v[(n0 * a) % 11] < 0 else e(v[(n0 * a) % 11] / E)) for a in range(11))
        assert tau_star(chi, n0).value == pytest.approx(brute, abs=1e-9)


def test_induce_and_primitive_part_roundtrip():
    chi = character(5, (1,))
    big = induce(chi, 15)
    assert big.conductor == 5 and not big.is_primitive
    assert primitive_part(big) == chi


def test_conj_is_inverse():
    for chi in characters(16):
        prod = (chi.value_exponents() + chi.conj().value_exponents())
        u = chi.value_exponents() >= 0
        assert np.all(prod[u] % chi.level == 0)
