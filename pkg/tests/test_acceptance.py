"""The twelve acceptance gates.  Each test prints one PASS/FAIL line."""

from __future__ import annotations

import subprocess
import sys
import time
from fractions import Fraction as F

import numpy as np
import pytest

from hybridbounds import exponent as ex
from hybridbounds._arith import primes_upto
from hybridbounds.expsum import complete_sum_vanishing, correlation_audit, correlation_sum, weil_audit
from hybridbounds.identity import (
    GaussianWeight,
    decomposition_sweep,
    hyperkl_sweep,
    kl3_expansion_sweep,
    kl3_variant_survey,
    kloosterman_correlation_sequence,
    poisson_oracle,
    reciprocity_sweep,
    tau_kl2_sweep,
)
from hybridbounds.modcore import primitive_characters
from hybridbounds.transform import TEMPERED_ALPHA, lemma22_audit, omega_combined, omega_transform, oscillation_exponent

PRIME_POWERS = (4, 8, 9, 25, 27, 49)


@pytest.fixture
def report(capsys):
    def emit(n, ok: bool, msg: str):
        with capsys.disabled():
            print(f"\nCRITERION {n}: {'PASS' if ok else 'FAIL'} {msg}")
        assert ok, msg

    return emit


def test_c01_tau_kl2(report):
    t0 = time.perf_counter()
    rep = tau_kl2_sweep(60, 1)
    dt = time.perf_counter() - t0
    report(1, rep.passed and dt < 60, f"tau*/Kl2 exact for q <= 60: {rep.checked} checks, {len(rep.failures)} failures, {dt:.1f}s")


def test_c02_kl3_expansion(report):
    t0 = time.perf_counter()
    moduli = list(primes_upto(60)) + list(PRIME_POWERS)
    rep = kl3_expansion_sweep(moduli)
    survey = kl3_variant_survey([3, 5, 7, 9, 25, 27], u_limit=4)
    dt = time.perf_counter() - t0
    recorded = all(set(v["matches"]) == {"psi_n", "psi_n1"} for v in survey.values())
    summary = ", ".join(f"q={q}: {v['matches']}/{v['cases']}" for q, v in survey.items())
    report(2, rep.passed and recorded and dt < 300, f"Kl3 expansion {rep.checked} checks, {len(rep.failures)} failures, {dt:.1f}s; n0>1 variants {summary}")


def test_c03_decomposition(report):
    rep = decomposition_sweep((5, 7, 11, 13), (1, 2, 4), 1e-8)
    d = rep.details
    ok = rep.passed and len(d["winning_convention"]) == 1 and d["max_residual"] < 1e-8
    report(3, ok, f"{rep.checked} cases, convention {d['winning_convention']}, max residual {d['max_residual']:.2e}")


def test_c04_weil(report):
    rep = weil_audit(2000, 100, 0)
    report(4, rep.passed and rep.max_ratio <= 1, f"max ratio {rep.max_ratio:.6f} at {rep.argmax}")


def test_c05_correlation(report):
    plain = correlation_audit(300, conjugate_second=False)
    conj = correlation_audit(300, conjugate_second=True)
    six = correlation_sum(1, 1, 0, 3).exact.to_string()
    ok = max(plain.max_ratio, conj.max_ratio) < 10 and six == "6"
    report(5, ok, f"sup {plain.max_ratio:.4f} (plain), {conj.max_ratio:.4f} (conjugated); q=3 value {six}")


def test_c06_complete_sum(report):
    rep = complete_sum_vanishing(200)
    report(6, rep.passed, f"{rep.checked} (q, l) pairs vanish exactly")


def test_c07_hyperkl(report):
    t0 = time.perf_counter()
    rep = hyperkl_sweep(300)
    dt = time.perf_counter() - t0
    report(7, rep.passed and dt < 600, f"{rep.checked} (n, m, c) exact, {len(rep.failures)} failures, {dt:.1f}s")


def test_c08_reciprocity(report):
    rep = reciprocity_sweep(100, 100)
    report(8, rep.passed, f"{rep.checked} exact checks")


def test_c09_transform(report):
    xs = [1.0, 10.0, 100.0, 1000.0]
    a = omega_transform(xs, alpha=TEMPERED_ALPHA, sigma=0.4)
    b = omega_transform(xs, alpha=TEMPERED_ALPHA, sigma=0.8)
    rel = max(abs(u.value - v.value) / abs(u.value) for u, v in zip(a, b))
    both, diff, plus, minus = omega_combined(10.0, alpha=TEMPERED_ALPHA, sigma=0.4)
    combo = both == plus + minus and diff == plus - minus
    lem = lemma22_audit(np.geomspace(100, 1e4, 41))
    r = lem.residual[1]
    osc = oscillation_exponent()
    ok = rel < 1e-6 and combo and r[-1] < r[0] and abs(osc["exponent"] - 0.25) <= 0.02
    report(9, ok, f"contour rel diff {rel:.2e}; combination {combo}; residual(1e4)={r[-1]:.3e} < residual(1e2)={r[0]:.3e}; exponent {osc['exponent']:.5f}")


def test_c10_exponents(report):
    intervals = {mu: ex.feasible_interval(mu) for mu in (F(1, 8), F(1, 4), F(3, 8))}
    ok_iv = all(iv == (1 / (4 + 2 * mu), F(2, 5)) for mu, iv in intervals.items())
    s25 = ex.optimize_saving(F(2, 5)).saving
    t2 = -ex.THM11[1].q_exp(F(2, 7))
    cor = ex.corollary_check()
    flagged = cor["agrees"] or (cor["flag"] is not None and cor["discrepancy"] is not None)
    ok = ok_iv and s25 == 0 and t2 == F(1, 60) and flagged
    report(
        10,
        ok,
        f"intervals {[(ex.fmt(a), ex.fmt(b)) for a, b in intervals.values()]}; saving(2/5)={ex.fmt(s25)}; "
        f"term2(2/7)={ex.fmt(t2)}; term1(2/7)={cor['term1_saving']} vs claimed {cor['claimed']} flagged: {cor['flag']}",
    )


def test_c11a_gaussian_self_duality(report):
    worst = 0.0
    for X in (0.5, 1.0, 2.0, 5 ** 1.2):
        worst = max(worst, poisson_oracle(np.ones(1), GaussianWeight(), X).residual)
    report("11a", worst < 1e-12, f"Gaussian self-duality max residual {worst:.1e}")


@pytest.mark.xfail(strict=True, reason="h = 0 alone leaves a relative residual of order 1e-3 at X = M^1.2; see ledger")
def test_c11b_zero_frequency(report):
    chi = primitive_characters(5)[0]
    seq = kloosterman_correlation_sequence(chi, 1, 1, 2, 1)
    rep = poisson_oracle(seq, GaussianWeight(), 5 ** 1.2, zero_frequency_only=True)
    rel = rep.details["relative_residual"]
    report("11b", rel < 1e-6, f"zero-frequency relative residual {rel:.2e} at M=5, X=5^1.2")


def test_c12_determinism(report):
    cmds = [
        ["kloosterman", "--m", "1", "--n", "1", "--q", "3"],
        ["exponent", "feasibility", "--theta", "3/10", "--mu", "3/10"],
        ["decomp-verify", "--M", "7", "--R", "2", "--n", "3"],
        ["transform-eval", "--x", "1,10"],
    ]
    same = []
    for c in cmds:
        runs = [subprocess.run([sys.executable, "-m", "hybridbounds", *c], capture_output=True, check=True).stdout for _ in range(2)]
        same.append(runs[0] == runs[1] and len(runs[0]) > 0)
    report(12, all(same), f"byte-identical JSON across two runs for {sum(same)}/{len(cmds)} commands")
