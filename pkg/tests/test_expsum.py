from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hybridbounds.expsum import (
    PreconditionError,
    complete_sum_vanishing,
    correlation_sum,
    crt_equivalence,
    csum,
    galois_orbit_reps,
    hyper_kl2,
    kl3,
    kl3_crt,
    kloosterman,
    kloosterman_twisted,
    weil_audit,
)
from hybridbounds.modcore import character
import oracles

# brute-force values from oracles.py, frozen
KL2 = {
    (1, 1, 3): -1.0,
    (1, 1, 7): 2.0489173395223053,
    (2, 3, 11): -4.457414830239131,
    (0, 0, 12): 4.0,
    (0, 1, 12): 0.0,
    (3, 5, 15): 1.0,
    (1, 1, 16): 5.65685424949238,
}
KL3 = {
    (1, 1, 5): 2.545084971874737 + 0.5020285397155674j,
    (1, 2, 7): 4.499999999999999 - 3.968626966596883j,
    (0, 1, 9): 0j,
    (2, 3, 8): 0j,
    (1, 1, 12): 10.392304845413264 - 2.0j,
}


@pytest.mark.parametrize("args,value", sorted(KL2.items()))
def test_kloosterman_frozen(args, value):
    assert kloosterman(*args).value == pytest.approx(value, abs=1e-12)


def test_kloosterman_exact_small():
    assert kloosterman(1, 1, 3).exact.to_string() == "-1"
    assert kloosterman(0, 0, 12).exact.to_string() == "4"


@pytest.mark.parametrize("args,value", sorted(KL3.items(), key=lambda t: t[0]))
def test_kl3_frozen(args, value):
    m, n, c = args
    assert kl3(m, n, 1, 1, c).value == pytest.approx(value, abs=1e-12)


def test_kl3_with_divisors_frozen():
    assert kl3(1, 2, 2, 3, 12).value == pytest.approx(-8.0, abs=1e-12)


def test_kl3_divisor_precondition():
    with pytest.raises(PreconditionError):
        kl3(1, 1, 5, 1, 12)


@given(m=st.integers(-30, 30), n=st.integers(-30, 30), q=st.integers(1, 40))
def test_kloosterman_brute_and_symmetry(m, n, q):
    v = kloosterman(m, n, q).value
    assert v == pytest.approx(oracles.kl2(m, n, q), abs=1e-9)
    assert abs(v.imag) < 1e-9
    assert kloosterman(n, m, q).exact == kloosterman(m, n, q).exact


@given(m=st.integers(0, 20), n=st.integers(0, 20), c=st.integers(1, 18))
def test_kl3_brute(m, n, c):
    assert kl3(m, n, 1, 1, c).value == pytest.approx(oracles.kl3(m, n, c), abs=1e-8)


@given(n=st.integers(0, 30), m=st.integers(0, 30), c=st.integers(2, 60))
def test_crt_path_matches(n, m, c):
    assert kl3_crt(n, m, c).exact == kl3(n, m, 1, 1, c).exact


def test_hyper_double_sum_frozen():
    assert hyper_kl2(1, 2, 7).value == pytest.approx(4.499999999999999 - 3.968626966596883j, abs=1e-12)
    assert hyper_kl2(3, 4, 10).value == pytest.approx(oracles.hyper_double(3, 4, 10), abs=1e-9)


def test_csum_frozen():
    assert csum(1, 1, 1, 2, 7).value == pytest.approx(-7.449886207424727 - 3.415804118965844j, abs=1e-9)
    assert csum(2, 3, 1, 4, 11).value == pytest.approx(-14.628392394083527 + 1.7408936258473298j, abs=1e-9)
    with pytest.raises(PreconditionError):
        csum(1, 7, 1, 1, 7)


def test_correlation_values():
    assert correlation_sum(1, 1, 0, 3).exact.to_string() == "6"
    assert correlation_sum(1, 2, 1, 7).value == pytest.approx(7.864428613011131 + 7.158331543102525j, abs=1e-9)
    assert correlation_sum(1, 2, 1, 7, True).value == pytest.approx(oracles.correlation(1, 2, 1, 7, True), abs=1e-9)


def test_twisted_kloosterman():
    chi = character(7, (1,))
    assert kloosterman_twisted(chi, 2, 3).value == pytest.approx(-1.6886246776159692 - 2.92478373654547j, abs=1e-12)


@pytest.mark.parametrize("c", [1, 6, 9, 10, 12])
def test_orbit_reps_cover(c):
    reps = galois_orbit_reps(c)
    u = [a for a in range(c) if math.gcd(a, c) == 1] or [0]
    covered = {((a * a * n) % c, (a * m) % c) for n, m in reps.tolist() for a in u}
    assert len(covered) == c * c


def test_small_audits():
    w = weil_audit(200, 20, 1)
    assert w.passed and 0.5 < w.max_ratio <= 1
    assert complete_sum_vanishing(40).passed
    assert crt_equivalence(80, 1).passed
