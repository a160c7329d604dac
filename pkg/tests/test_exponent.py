from __future__ import annotations

from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hybridbounds import exponent as ex
from hybridbounds.exponent import Affine, ExponentForm, ParamChoice, RatFun

rats = st.fractions(min_value=-5, max_value=5, max_denominator=50)
affines = st.builds(lambda a, b, c, d: Affine((a, b, c, d)), rats, rats, rats, rats)
forms = st.builds(ExponentForm, affines, affines)
thetas = st.fractions(min_value=F(1, 100), max_value=F(1), max_denominator=200)
mus = st.fractions(min_value=F(1, 200), max_value=F(99, 200), max_denominator=200)


def test_conductor_collapse():
    assert ex.Q.collapse(F(1, 3)) == Affine.const(F(13, 3))
    assert ex.Q.q_exponent().equals(RatFun((Affine.const(1),)))


def test_rt_equals_x_over_m():
    p = ParamChoice(F(1, 3), F(3, 10))
    diff = p.R + p.T - (p.X - ex.M)
    assert diff.e_M.is_zero and diff.e_P.is_zero
    assert (p.R + p.T).collapse(F(1, 3)) == Affine.const((F(1, 3) + 2) / 2)


@given(a=forms, b=forms, theta=rats, c=rats)
def test_collapse_is_additive(a, b, theta, c):
    assert (a + b).collapse(theta) == a.collapse(theta) + b.collapse(theta)
    assert a.scale(c).collapse(theta) == a.collapse(theta).scale(c)


@given(a=forms, b=forms)
def test_ratfun_addition_matches_evaluation(a, b):
    ra, rb = a.q_exponent(), b.q_exponent()
    for th in (F(0), F(1, 3), F(7, 5)):
        assert (ra + rb)(th, F(1, 5), F(1, 7), F(1, 11)) == ra(th, F(1, 5), F(1, 7), F(1, 11)) + rb(th, F(1, 5), F(1, 7), F(1, 11))


def test_floats_refused():
    with pytest.raises(TypeError):
        Affine.const(0.5)


def test_second_term_at_two_sevenths():
    assert -ex.THM11[1].q_exp(F(2, 7)) == F(1, 60)


def test_first_term_at_two_sevenths():
    assert -ex.THM11[0].q_exp(F(2, 7)) == F(1, 180)


def test_trivial_unless_signs():
    b = ex.THM12_FORMS["P^(5/8)M^(-1/4)"]
    c = ex.THM12_FORMS["M^(1/4)P^(-1-mu/2)"]
    mu = F(1, 4)
    assert b.at(F(2, 5)) == 0 and b.at(F(39, 100)) < 0 < b.at(F(41, 100))
    edge = 1 / (4 + 2 * mu)
    assert c.at(edge, mu) == 0 and c.at(edge + F(1, 1000), mu) < 0 < c.at(edge - F(1, 1000), mu)


def test_derivation():
    rep = ex.derive_thm11_from_thm12()
    match = {r["term"]: r["match"] for r in rep.rows}
    assert match == {"t1": True, "t2": True, "t3": True, "t4": False}
    t4 = rep.rows[3]
    assert t4["matches_reading"]
    assert rep.evaluations["values"]["t4"] == {"derived": "-1/104", "printed": "-7/312"}
    assert rep.limits["t2"]["derived"] == "0" and rep.limits["t1"]["derived"] == "-1/48"


@given(mu=mus)
def test_feasible_interval(mu):
    assert ex.feasible_interval(mu) == (1 / (4 + 2 * mu), F(2, 5))


def test_rt_margin_and_tension():
    for mu, sign in ((F(1, 5), -1), (F(1, 4), 0), (F(3, 10), 1)):
        p = ParamChoice(F(1, 3), mu)
        rows = {r["label"]: r for r in ex.feasibility(p)["margins"]}
        m = F(rows["R < T"]["margin"])
        assert m == F(1, 3) * (2 * mu - F(1, 2))
        assert (m > 0) - (m < 0) == sign


def test_margin_zero_at_boundary():
    rep = ex.feasibility(ParamChoice(F(2, 5), F(3, 10)))
    assert "P^(5/8)M^(-1/4) < 1" in rep["zero_bare_margins"]


def test_full_margin_vector_example():
    rep = ex.feasibility(ParamChoice(F(3, 10), F(3, 10)))
    assert rep["all_satisfied"] and len(rep["margins"]) == 18
    assert rep["theta_window"] == [["254/1149", "123/313"]]


def test_endgame_substitution():
    assert all(r["match_up_to_eps"] for r in ex.endgame_check(ParamChoice(F(1, 3), F(3, 10))))


def test_saving_values():
    assert ex.optimize_saving(F(2, 5)).saving == 0
    r = ex.optimize_saving(F(2, 7))
    assert (r.saving, r.best_mu, r.argmax) == (F(1, 180), F(1, 4), (F(1, 4), F(5, 12)))
    assert r.grid["consistent"]


def test_corollary_flagged():
    c = ex.corollary_check()
    assert not c["agrees"] and c["claimed"] == "1/60" and c["optimal_saving"] == "1/180"
    assert c["discrepancy"] == "1/90" and c["flag"]


@given(theta=st.fractions(min_value=F(1, 5), max_value=F(2, 5), max_denominator=300))
def test_saving_positive_inside(theta):
    if F(1, 5) < theta < F(2, 5):
        assert ex.optimize_saving(theta).saving > 0


@given(theta=thetas, drop=st.integers(0, 3))
def test_removing_a_term_never_hurts(theta, drop):
    full = ex.optimize_saving(theta).saving
    fewer = ex.optimize_saving(theta, terms=[t for i, t in enumerate(ex.THM11_READ) if i != drop]).saving
    assert fewer >= full


@given(theta=thetas)
def test_grid_agrees_with_exact(theta):
    r = ex.optimize_saving(theta)
    assert r.grid["consistent"]
    assert F(r.grid["saving"]) <= r.saving


def test_csv():
    text = ex.saving_csv(ex.saving_table([F(2, 7), F(1, 3)]))
    assert text.splitlines()[0] == "theta,best_mu,saving"
    assert text.splitlines()[1] == "2/7,1/4,1/180"
