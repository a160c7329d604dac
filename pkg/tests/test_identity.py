from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hybridbounds.expsum import PreconditionError
from hybridbounds.identity import (
    EXACT_PASS,
    FAIL,
    GaussianWeight,
    hyperkl_sweep,
    kl3_expansion_sweep,
    kl3_variant_survey,
    kloosterman_correlation_sequence,
    poisson_oracle,
    reciprocity_sweep,
    tau_kl2_sweep,
    twisted_kloosterman_sequence,
    verify_decomposition,
    verify_hyperkl_rewrite,
    verify_kl3_char_expansion,
    verify_reciprocity,
    verify_tau_kl2,
)
from hybridbounds.modcore import character, primitive_characters
from hybridbounds.transform import BumpSpec
import oracles


@pytest.mark.parametrize("u,q", [(1, 7), (3, 10), (5, 12), (2, 25), (7, 36)])
def test_tau_kl2_units(u, q):
    assert verify_tau_kl2(u, 1, q).status == EXACT_PASS


@pytest.mark.parametrize("n0,q", [(2, 12), (3, 9), (5, 25)])
def test_tau_kl2_nonunit_n0_gives_zero(n0, q):
    rep = verify_tau_kl2(1, n0, q)
    assert rep.passed and rep.details["rhs"] == "0"


def test_tau_kl2_small_sweep():
    assert tau_kl2_sweep(20).passed


def test_kl3_expansion_cases():
    for q in (5, 8, 9):
        for u in (1, 2):
            if math.gcd(u, q) == 1:
                assert verify_kl3_char_expansion(u, 1, q).passed
    assert kl3_expansion_sweep([3, 4, 7]).passed


def test_variant_survey_shape():
    out = kl3_variant_survey([9], u_limit=2)
    assert out["9"]["matches"]["psi_n"] == out["9"]["cases"]


@given(n=st.integers(-200, 200), a=st.integers(1, 60), b=st.integers(1, 60))
def test_reciprocity_property(n, a, b):
    if math.gcd(a, b) != 1:
        with pytest.raises(PreconditionError):
            verify_reciprocity(n, a, b)
    else:
        assert verify_reciprocity(n, a, b).status == EXACT_PASS


def test_reciprocity_small_sweep():
    assert reciprocity_sweep(20, 10).passed


def test_hyperkl_rewrite():
    assert verify_hyperkl_rewrite(1, 2, 9).status == EXACT_PASS
    assert hyperkl_sweep(30).passed
    rec = verify_hyperkl_rewrite(2, 1, 4, (2, 1))
    assert rec.status == "recorded"
    assert rec.details["ratio"] == pytest.approx([1.0, 0.0])


def test_decomposition_single_case():
    chi = primitive_characters(7)[0]
    rep = verify_decomposition(chi, 2, 3)
    assert rep.passed
    assert rep.details["convention"] == "r!=0;U^(-rR/M)"
    assert rep.truncation["tail_bound"] < 1e-10


def test_decomposition_rejects_imprimitive():
    with pytest.raises(PreconditionError):
        verify_decomposition(character(7, (0,)), 1, 1)


def test_sequences_match_brute_force():
    chi = character(7, (1,))
    seq = twisted_kloosterman_sequence(chi, 2, 3)
    ch = oracles.prime_character(7, 3, 1)
    t_inv = pow(3, -1, 7)
    for n in range(7):
        assert seq[n] == pytest.approx(oracles.twisted_kl2(ch, 2, t_inv * n, 7), abs=1e-9)
    c = kloosterman_correlation_sequence(chi, 1, 1, 2, 1)
    assert np.all(np.isfinite(c))


def test_poisson_gaussian_self_dual():
    rep = poisson_oracle(np.ones(1), GaussianWeight(), 1.0)
    assert rep.passed and rep.residual < 1e-12


@given(shift=st.integers(0, 6), X=st.floats(0.5, 4.0))
def test_poisson_frequency_shift(shift, X):
    a = np.exp(2j * np.pi * shift * np.arange(7) / 7)
    rep = poisson_oracle(a, GaussianWeight(), X)
    assert rep.residual < 1e-10


def test_poisson_bump_weight():
    chi = primitive_characters(5)[0]
    rep = poisson_oracle(twisted_kloosterman_sequence(chi, 1, 1), BumpSpec(), 5 ** 1.2, tol=1e-9)
    assert rep.residual < 1e-9
