"""Exact exponent bookkeeping for the hybrid bound.

Every quantity is a monomial M^a P^b whose exponents a, b are affine forms
over Q in the symbols (1, mu, delta, eps).  Writing P = M^theta, a monomial
collapses to M^{a + theta*b}; dividing by 4 + theta turns that into an
exponent of the conductor Q = P M^4.  Nothing here touches floating point.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass, field
from fractions import Fraction

SYMBOLS = ("1", "mu", "delta", "eps")

Rat = Fraction


def _q(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        raise TypeError("floats are not accepted; pass a Fraction, int or 'a/b' string")
    return Fraction(x)


def fmt(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------- affine forms


@dataclass(frozen=True)
class Affine:
    """c0 + c_mu*mu + c_delta*delta + c_eps*eps."""

    coeffs: tuple[Fraction, Fraction, Fraction, Fraction] = (Rat(0), Rat(0), Rat(0), Rat(0))

    def __post_init__(self):
        if len(self.coeffs) != 4:
            raise ValueError("an affine form has four coefficients")
        object.__setattr__(self, "coeffs", tuple(_q(c) for c in self.coeffs))

    @classmethod
    def const(cls, c) -> "Affine":
        return cls((_q(c), 0, 0, 0))

    @classmethod
    def of(cls, c=0, mu=0, delta=0, eps=0) -> "Affine":
        return cls((c, mu, delta, eps))

    def __add__(self, other: "Affine") -> "Affine":
        return Affine(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "Affine") -> "Affine":
        return Affine(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "Affine":
        return Affine(tuple(-a for a in self.coeffs))

    def scale(self, c) -> "Affine":
        c = _q(c)
        return Affine(tuple(c * a for a in self.coeffs))

    def __call__(self, mu=0, delta=0, eps=0) -> Fraction:
        c = self.coeffs
        return c[0] + c[1] * _q(mu) + c[2] * _q(delta) + c[3] * _q(eps)

    def coefficient(self, symbol: str) -> Fraction:
        return self.coeffs[SYMBOLS.index(symbol)]

    def drop(self, *symbols: str) -> "Affine":
        return Affine(tuple(Rat(0) if s in symbols else c for s, c in zip(SYMBOLS, self.coeffs)))

    @property
    def is_zero(self) -> bool:
        return not any(self.coeffs)

    @property
    def is_constant(self) -> bool:
        return not any(self.coeffs[1:])

    def __str__(self) -> str:
        parts = []
        for s, c in zip(SYMBOLS, self.coeffs):
            if not c:
                continue
            if s == "1":
                body = fmt(abs(c))
            else:
                body = s if abs(c) == 1 else f"{fmt(abs(c))}*{s}"
            parts.append(("- " if c < 0 else "+ ") + body)
        if not parts:
            return "0"
        out = " ".join(parts)
        return out[2:] if out.startswith("+ ") else "-" + out[2:]


ZERO = Affine()


@dataclass(frozen=True)
class ExponentForm:
    """M^{e_M} P^{e_P}; the group law is addition of exponents."""

    e_M: Affine = ZERO
    e_P: Affine = ZERO

    @classmethod
    def of(cls, m=0, p=0) -> "ExponentForm":
        wrap = lambda v: v if isinstance(v, Affine) else Affine.const(v)  # noqa: E731
        return cls(wrap(m), wrap(p))

    def __add__(self, other: "ExponentForm") -> "ExponentForm":
        return ExponentForm(self.e_M + other.e_M, self.e_P + other.e_P)

    def __sub__(self, other: "ExponentForm") -> "ExponentForm":
        return ExponentForm(self.e_M - other.e_M, self.e_P - other.e_P)

    def __neg__(self) -> "ExponentForm":
        return ExponentForm(-self.e_M, -self.e_P)

    def scale(self, c) -> "ExponentForm":
        return ExponentForm(self.e_M.scale(c), self.e_P.scale(c))

    def collapse(self, theta) -> Affine:
        """Exponent of M after P = M^theta."""
        return self.e_M + self.e_P.scale(theta)

    def at(self, theta, mu=0, delta=0, eps=0) -> Fraction:
        return self.collapse(theta)(mu, delta, eps)

    def q_exponent(self) -> "RatFun":
        """Exponent of Q = P M^4 as a rational function of theta."""
        return RatFun((self.e_M, self.e_P), (Rat(4), Rat(1)))

    def drop(self, *symbols: str) -> "ExponentForm":
        return ExponentForm(self.e_M.drop(*symbols), self.e_P.drop(*symbols))

    def __str__(self) -> str:
        return f"M^({self.e_M}) P^({self.e_P})"

    def to_json(self) -> dict:
        return {"e_M": str(self.e_M), "e_P": str(self.e_P)}


M = ExponentForm.of(1, 0)
P = ExponentForm.of(0, 1)
ONE = ExponentForm()
Q = P + M.scale(4)


def q_power(a: Affine) -> ExponentForm:
    """Q^a for an affine exponent a."""
    return ExponentForm(a.scale(4), a)


# ---------------------------------------------------- rational functions in theta


def _trim(p: tuple) -> tuple:
    p = list(p)
    while len(p) > 1 and (p[-1].is_zero if isinstance(p[-1], Affine) else p[-1] == 0):
        p.pop()
    return tuple(p)


def _pmul(a: tuple[Fraction, ...], b: tuple[Fraction, ...]) -> tuple[Fraction, ...]:
    out = [Rat(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return _trim(tuple(out))


def _amul(a: tuple[Affine, ...], b: tuple[Fraction, ...]) -> tuple[Affine, ...]:
    out = [ZERO] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x.scale(y)
    return _trim(tuple(out))


def _aadd(a: tuple[Affine, ...], b: tuple[Affine, ...]) -> tuple[Affine, ...]:
    n = max(len(a), len(b))
    a = a + (ZERO,) * (n - len(a))
    b = b + (ZERO,) * (n - len(b))
    return _trim(tuple(x + y for x, y in zip(a, b)))


def _pdivmod(a: tuple[Fraction, ...], b: tuple[Fraction, ...]):
    a = list(_trim(a))
    b = _trim(b)
    if len(b) == 1 and b[0] == 0:
        raise ZeroDivisionError("polynomial division by zero")
    if len(a) < len(b):
        return (Rat(0),), _trim(tuple(a))
    quo = [Rat(0)] * (len(a) - len(b) + 1)
    for k in range(len(a) - len(b), -1, -1):
        c = a[k + len(b) - 1] / b[-1]
        quo[k] = c
        for j, y in enumerate(b):
            a[k + j] -= c * y
    return _trim(tuple(quo)), _trim(tuple(a[: len(b) - 1] or [Rat(0)]))


def _pgcd(a: tuple[Fraction, ...], b: tuple[Fraction, ...]) -> tuple[Fraction, ...]:
    a, b = _trim(a), _trim(b)
    while not (len(b) == 1 and b[0] == 0):
        a, b = b, _pdivmod(a, b)[1]
    return tuple(c / a[-1] for c in a)


def _peval(p, x):
    out = Rat(0) if not p or not isinstance(p[0], Affine) else ZERO
    for c in reversed(p):
        out = out.scale(x) + c if isinstance(c, Affine) else out * x + c
    return out


def _pstr(p: tuple, var: str = "theta") -> str:
    terms = []
    for k, c in enumerate(p):
        if isinstance(c, Affine):
            if c.is_zero:
                continue
            s = str(c)
            if k and (sum(1 for x in c.coeffs if x) > 1):
                s = f"({s})"
        else:
            if c == 0:
                continue
            s = fmt(c)
        if k == 0:
            terms.append(s)
        else:
            mon = var if k == 1 else f"{var}^{k}"
            terms.append(mon if s == "1" else (f"-{mon}" if s == "-1" else f"{s}*{mon}"))
    if not terms:
        return "0"
    return " + ".join(terms).replace("+ -", "- ")


@dataclass(frozen=True)
class RatFun:
    """num(theta)/den(theta); num has affine coefficients, den rational ones."""

    num: tuple[Affine, ...]
    den: tuple[Fraction, ...] = (Rat(1),)

    def __post_init__(self):
        num = tuple(c if isinstance(c, Affine) else Affine.const(c) for c in self.num) or (ZERO,)
        den = tuple(_q(c) for c in self.den)
        num, den = _normalize(_trim(num), _trim(den))
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __add__(self, other: "RatFun") -> "RatFun":
        if self.den == other.den:
            return RatFun(_aadd(self.num, other.num), self.den)
        return RatFun(_aadd(_amul(self.num, other.den), _amul(other.num, self.den)), _pmul(self.den, other.den))

    def __neg__(self) -> "RatFun":
        return RatFun(tuple(-c for c in self.num), self.den)

    def __sub__(self, other: "RatFun") -> "RatFun":
        return self + (-other)

    def scale(self, c) -> "RatFun":
        return RatFun(tuple(x.scale(c) for x in self.num), self.den)

    def coefficient(self, symbol: str) -> "RatFun":
        """The rational function multiplying one symbol."""
        return RatFun(tuple(Affine.const(c.coefficient(symbol)) for c in self.num), self.den)

    def drop(self, *symbols: str) -> "RatFun":
        return RatFun(tuple(c.drop(*symbols) for c in self.num), self.den)

    @property
    def is_numeric(self) -> bool:
        """True when no symbol other than theta occurs."""
        return all(c.is_constant for c in self.num)

    def __mul__(self, other: "RatFun") -> "RatFun":
        if other.is_numeric:
            a, b = self, other
        elif self.is_numeric:
            a, b = other, self
        else:
            raise ValueError("product would leave the affine class")
        bn = tuple(c.coeffs[0] for c in b.num)
        return RatFun(_amul(a.num, bn), _pmul(a.den, b.den))

    def inverse(self) -> "RatFun":
        if not self.is_numeric:
            raise ValueError("only symbol-free functions can be inverted")
        n = tuple(c.coeffs[0] for c in self.num)
        if n == (Rat(0),):
            raise ZeroDivisionError("inverse of the zero function")
        return RatFun(tuple(Affine.const(c) for c in self.den), n)

    def substitute(self, symbol: str, value: "RatFun") -> "RatFun":
        return self.drop(symbol) + self.coefficient(symbol) * value

    def __call__(self, theta, mu=0, delta=0, eps=0) -> Fraction:
        theta = _q(theta)
        d = _peval(self.den, theta)
        if d == 0:
            raise ZeroDivisionError(f"pole at theta = {theta}")
        return _peval(self.num, theta)(mu, delta, eps) / d

    def equals(self, other: "RatFun") -> bool:
        return _amul(self.num, other.den) == _amul(other.num, self.den)

    def __str__(self) -> str:
        n = _pstr(self.num)
        if self.den == (Rat(1),):
            return n
        return f"({n})/({_pstr(self.den)})"


def _normalize(num: tuple[Affine, ...], den: tuple[Fraction, ...]):
    if den == (Rat(0),):
        raise ZeroDivisionError("zero denominator")
    if all(c.is_zero for c in num):
        return (ZERO,), (Rat(1),)
    # cancel the common factor of den and every symbol-component of num
    g = den
    for k in range(4):
        comp = _trim(tuple(c.coeffs[k] for c in num))
        if comp != (Rat(0),):
            g = _pgcd(g, comp)
    if len(g) > 1:
        den = _pdivmod(den, g)[0]
        comps = [_pdivmod(_trim(tuple(c.coeffs[k] for c in num)), g)[0] for k in range(4)]
        n = max(len(c) for c in comps)
        comps = [c + (Rat(0),) * (n - len(c)) for c in comps]
        num = _trim(tuple(Affine(tuple(comps[k][i] for k in range(4))) for i in range(n)))
    # make den integral, primitive, with positive leading coefficient
    lcd = 1
    for c in den:
        lcd = lcd * c.denominator // _igcd(lcd, c.denominator)
    ints = [int(c * lcd) for c in den]
    g = 0
    for v in ints:
        g = _igcd(g, abs(v))
    s = Rat(lcd, g) * (1 if ints[-1] > 0 else -1)
    return tuple(c.scale(s) for c in num), tuple(c * s for c in den)


def _igcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a)


# ------------------------------------------------------------ theorem terms


@dataclass(frozen=True)
class Term:
    label: str
    q_exp: RatFun
    form: ExponentForm | None = None
    note: str = ""

    def to_json(self) -> dict:
        out = {"label": self.label, "q_exponent": str(self.q_exp)}
        if self.form is not None:
            out["form"] = self.form.to_json()
        if self.note:
            out["note"] = self.note
        return out


def _rf(num, den) -> RatFun:
    return RatFun(tuple(n if isinstance(n, Affine) else Affine.const(n) for n in num), den)


MU = Affine.of(mu=1)
DELTA = Affine.of(delta=1)
EPS = Affine.of(eps=1)

# Q-exponents of the four terms of the main bound, read off literally
THM11 = (
    Term("t1", _rf([Rat(-2), Rat(5)], [96, 24]), note="-(2-5theta)/(3(32+8theta))"),
    Term("t2", _rf([0, Rat(-1)], [16, 4]), note="-theta/(16+4theta)"),
    Term("t3", _rf([ZERO, Affine.of(-1, 2)], [8, 2]), note="-(1-2mu)theta/(8+2theta)"),
    Term("t4", _rf([ZERO, Affine.of(-3, -2)], [48, 12]), note="(1-(4+2mu))theta/(3(16+4theta)) as printed"),
)

# the same term with the parenthesization (1-(4+2mu)theta)
T4_READ = Term("t4", _rf([Rat(1), Affine.of(-4, -2)], [48, 12]), note="(1-(4+2mu)theta)/(3(16+4theta))")

THM11_READ = THM11[:3] + (T4_READ,)

_QD = q_power(DELTA)

THM12_FORMS = {
    "P^(5/8)M^(-1/4)": _QD + ExponentForm.of(Rat(-1, 4), Rat(5, 8)),
    "P^(-(1/2-mu))": ExponentForm.of(0, Affine.of(Rat(-1, 2), 1)),
    "M^(1/4)P^(-1-mu/2)": _QD + ExponentForm.of(Rat(1, 4), Affine.of(-1, Rat(-1, 2))),
    "P^(-1/4)": ExponentForm.of(0, Rat(-1, 4)),
}

CENTRAL = q_power(DELTA.scale(Rat(-1, 2)))  # Q^{-delta/2} from the short range

FINAL_FORMS = {
    "sqrt(P/M)": _QD + ExponentForm.of(Rat(-1, 2), Rat(1, 2)),
    "P^(5/8)M^(-1/4)": THM12_FORMS["P^(5/8)M^(-1/4)"],
    "P^(-1/4)": THM12_FORMS["P^(-1/4)"],
    "P^(-(1/2-mu))": THM12_FORMS["P^(-(1/2-mu))"],
    "M^(1/4)P^(-1-mu/2)": THM12_FORMS["M^(1/4)P^(-1-mu/2)"],
}


def theorem_terms() -> dict:
    thm12 = tuple(Term(k, f.q_exponent(), f) for k, f in THM12_FORMS.items())
    final = tuple(Term(k, f.q_exponent(), f) for k, f in FINAL_FORMS.items())
    return {
        "thm11": THM11,
        "thm11_read": THM11_READ,
        "thm12": thm12,
        "central": Term("Q^(-delta/2)", CENTRAL.q_exponent(), CENTRAL),
        "final": final,
    }


# ------------------------------------------------------------ derivation


def solve_linear(lhs: RatFun, rhs: RatFun, symbol: str = "delta") -> RatFun:
    """The value of `symbol` making lhs = rhs (both affine in it)."""
    diff = lhs - rhs
    slope = diff.coefficient(symbol)
    if not slope.is_numeric:
        raise ValueError("slope depends on other symbols")
    return -(diff.drop(symbol)) * slope.inverse()


@dataclass
class DerivationReport:
    rows: list[dict]
    evaluations: dict
    limits: dict
    notes: list[str] = field(default_factory=list)

    @property
    def all_match(self) -> bool:
        return all(r["match"] for r in self.rows)

    def to_json(self) -> dict:
        return {"rows": self.rows, "evaluations": self.evaluations, "limits": self.limits, "notes": self.notes}


def derive_thm11_from_thm12(theta=Rat(1, 3), mu=Rat(1, 4)) -> DerivationReport:
    """Balance Q^{-delta/2} against each delta-carrying term and compare."""
    theta, mu = _q(theta), _q(mu)
    central = CENTRAL.q_exponent()
    b = THM12_FORMS["P^(5/8)M^(-1/4)"].q_exponent()
    c = THM12_FORMS["M^(1/4)P^(-1-mu/2)"].q_exponent()
    d = THM12_FORMS["P^(-(1/2-mu))"].q_exponent()
    e = THM12_FORMS["P^(-1/4)"].q_exponent()

    delta_b = solve_linear(central, b)
    delta_c = solve_linear(central, c)
    derived = {
        "t1": (central.substitute("delta", delta_b), "Q^(-delta/2) = Q^delta P^(5/8)M^(-1/4)", delta_b),
        "t2": (e, "P^(-1/4) directly", None),
        "t3": (d, "P^(-(1/2-mu)) directly", None),
        "t4": (central.substitute("delta", delta_c), "Q^(-delta/2) = Q^delta M^(1/4)P^(-1-mu/2)", delta_c),
    }
    rows, evals = [], {}
    for term in THM11:
        rf, source, delta = derived[term.label]
        match = rf.equals(term.q_exp)
        row = {
            "term": term.label,
            "source": source,
            "derived": str(rf),
            "printed": str(term.q_exp),
            "match": match,
        }
        if delta is not None:
            row["delta"] = str(delta)
        if not match:
            row["discrepancy"] = str(rf - term.q_exp)
            row["matches_reading"] = rf.equals(T4_READ.q_exp) if term.label == "t4" else False
        rows.append(row)
        evals[term.label] = {"derived": fmt(rf(theta, mu)), "printed": fmt(term.q_exp(theta, mu))}
    limits = {
        r["term"]: {"derived": fmt(derived[r["term"]][0](0)), "printed": fmt(t.q_exp(0))}
        for r, t in zip(rows, THM11)
    }
    notes = []
    if not rows[3]["match"]:
        notes.append("t4 as printed differs; the balanced exponent equals (1-(4+2mu)theta)/(3(16+4theta))")
    if any(v["derived"] != "0" for v in limits.values()):
        notes.append("at theta = 0 not every exponent vanishes; see limits")
    return DerivationReport(rows, {"theta": fmt(theta), "mu": fmt(mu), "values": evals}, limits, notes)


# ------------------------------------------------------------ parameter choices


@dataclass(frozen=True)
class ParamChoice:
    theta: Fraction
    mu: Fraction
    delta: Fraction = Rat(1, 1000)
    eps: Fraction = Rat(1, 1000)
    x_offset: Affine = ZERO  # X = Q^{1/2 + x_offset}

    def __post_init__(self):
        for name in ("theta", "mu", "delta", "eps"):
            object.__setattr__(self, name, _q(getattr(self, name)))
        if not 0 < self.mu < Rat(1, 2):
            raise ValueError("mu must lie in (0, 1/2)")
        if self.theta <= 0:
            raise ValueError("theta must be positive")

    @property
    def X(self) -> ExponentForm:
        return q_power(Affine.const(Rat(1, 2)) + self.x_offset)

    @property
    def R(self) -> ExponentForm:
        return self.X - M.scale(Rat(3, 2)) - ExponentForm.of(0, MU)

    @property
    def R_star(self) -> ExponentForm:
        return ExponentForm.of(Affine.of(1, eps=-1), Rat(1, 2))

    @property
    def S(self) -> ExponentForm:
        return ExponentForm.of(Affine.of(1, eps=-100), Rat(1, 2))

    @property
    def T(self) -> ExponentForm:
        return ExponentForm.of(Rat(1, 2), MU)

    @property
    def L(self) -> ExponentForm:
        return ExponentForm.of(0, Affine.of(Rat(1, 2), eps=100))

    def forms(self) -> dict[str, ExponentForm]:
        return {"X": self.X, "R": self.R, "R*": self.R_star, "S": self.S, "T": self.T, "L": self.L, "Q": Q}

    def value(self, form: ExponentForm, carriers: bool = True) -> Fraction:
        if carriers:
            return form.at(self.theta, self.mu, self.delta, self.eps)
        return form.at(self.theta, self.mu)


# ------------------------------------------------------------ constraints


@dataclass(frozen=True)
class Constraint:
    """max(lhs) < max(rhs) in collapsed exponents (a sum is its largest term)."""

    label: str
    lhs: tuple[ExponentForm, ...]
    rhs: tuple[ExponentForm, ...]
    source: str = ""


def _top(forms, theta, mu, delta, eps) -> Fraction:
    return max(f.at(theta, mu, delta, eps) for f in forms)


def margin(c: Constraint, theta, mu, delta=0, eps=0) -> Fraction:
    return _top(c.rhs, theta, mu, delta, eps) - _top(c.lhs, theta, mu, delta, eps)


@dataclass
class ConstraintSystem:
    constraints: list[Constraint]

    def margins(self, p: ParamChoice) -> list[dict]:
        rows = []
        for c in self.constraints:
            m = margin(c, p.theta, p.mu, p.delta, p.eps)
            m0 = margin(c, p.theta, p.mu)
            row = {
                "label": c.label,
                "source": c.source,
                "margin": fmt(m),
                "margin_bare": fmt(m0),
                "satisfied": m > 0,
                "satisfied_bare": m0 > 0,
            }
            if len(c.lhs) == 1 and len(c.rhs) == 1:
                row["symbolic"] = str((c.rhs[0] - c.lhs[0]).collapse(p.theta))
                row["form"] = (c.rhs[0] - c.lhs[0]).to_json()
            rows.append(row)
        return rows

    def feasible_theta(self, mu, delta=0, eps=0) -> list[tuple[Fraction | None, Fraction | None]]:
        """Open theta-intervals (within theta > 0) where every margin is positive."""
        region = [(Rat(0), None)]
        for c in self.constraints:
            region = _intersect(region, _constraint_region(c, mu, delta, eps))
        return region


# interval sets: sorted disjoint open intervals (lo, hi), None = infinity


def _halfline(form: ExponentForm, mu, delta, eps):
    """theta with form.collapse(theta) > 0."""
    a = form.e_M(mu, delta, eps)
    b = form.e_P(mu, delta, eps)
    if b == 0:
        return [(None, None)] if a > 0 else []
    root = -a / b
    return [(root, None)] if b > 0 else [(None, root)]


def _lt(a, b) -> bool:
    # lower-end comparison with None meaning -infinity
    if a is None:
        return b is not None
    return b is not None and a < b


def _intersect(xs, ys):
    out = []
    for a in xs:
        for b in ys:
            lo = b[0] if _lt(a[0], b[0]) else a[0]
            if a[1] is None:
                hi = b[1]
            elif b[1] is None:
                hi = a[1]
            else:
                hi = min(a[1], b[1])
            if lo is None or hi is None or lo < hi:
                out.append((lo, hi))
    return _merge(out)


def _union(xs, ys):
    return _merge(list(xs) + list(ys))


def _merge(iv):
    iv = sorted(iv, key=lambda t: (t[0] is not None, t[0] if t[0] is not None else 0))
    out = []
    for lo, hi in iv:
        if out:
            plo, phi = out[-1]
            # open intervals sharing only an endpoint stay separate
            if phi is None or (lo is not None and lo < phi):
                out[-1] = (plo, None if (phi is None or hi is None) else max(phi, hi))
                continue
        out.append((lo, hi))
    return out


def _constraint_region(c: Constraint, mu, delta, eps):
    region = []
    for r in c.rhs:
        part = [(None, None)]
        for left in c.lhs:
            part = _intersect(part, _halfline(r - left, mu, delta, eps))
        region = _union(region, part)
    return region


def thm12_system() -> ConstraintSystem:
    """Each "trivial unless" term must decay for the bound to say anything."""
    return ConstraintSystem(
        [Constraint(f"{k} < 1", (f,), (ONE,), "thm12 term") for k, f in THM12_FORMS.items()]
    )


def choice_system(p: ParamChoice) -> ConstraintSystem:
    R, Rs, S, T, X = p.R, p.R_star, p.S, p.T, p.X
    half = Rat(1, 2)
    sqM = M.scale(half)
    sqP = P.scale(half)
    cs = [
        Constraint("R < T", (R,), (T,), "henceforth assumption"),
        Constraint("T < M", (T,), (M,), "henceforth assumption"),
        Constraint("R < S", (R,), (S,), "continued assumption"),
        Constraint("S + T < R*", (S, T), (Rs,), "continued assumption"),
        Constraint("R* < TR", (Rs,), (T + R,), "continued assumption"),
        Constraint("R + T < M", (R, T), (M,), "endgame proviso"),
        Constraint(
            "MP^2/S + S + T + P^(9/8)M^(3/4) < R*",
            (M + P.scale(2) - S, S, T, P.scale(Rat(9, 8)) + M.scale(Rat(3, 4))),
            (Rs,),
            "widest range",
        ),
        Constraint("R* < M sqrt(P)", (Rs,), (M + sqP,), "widest range"),
        Constraint(
            "sqrt(M)P^(1/4+10eps) + sqrt(P) < T",
            (sqM + ExponentForm.of(0, Affine.of(Rat(1, 4), eps=10)), sqP),
            (T,),
            "widest range",
        ),
        Constraint("T < sqrt(MP)", (T,), (sqM + sqP,), "widest range"),
        Constraint("sqrt(M) < R", (sqM,), (R,), "widest range"),
        Constraint("R < T + P^(5/2)", (R,), (T, P.scale(Rat(5, 2))), "widest range"),
        Constraint("sqrt(M) + P^(3/2) < S", (sqM, P.scale(Rat(3, 2))), (S,), "widest range"),
        Constraint("S < sqrt(P) M", (S,), (sqP + M,), "widest range"),
    ]
    return ConstraintSystem(cs + thm12_system().constraints)


def _interval_json(iv) -> list[list[str | None]]:
    return [[None if lo is None else fmt(lo), None if hi is None else fmt(hi)] for lo, hi in iv]


def feasible_interval(mu, delta=0, eps=0) -> tuple[Fraction, Fraction]:
    """The theta-window where all "trivial unless" terms decay; a single interval."""
    iv = thm12_system().feasible_theta(_q(mu), _q(delta), _q(eps))
    if len(iv) != 1:
        raise ValueError(f"expected one interval, got {iv}")
    return iv[0]


def feasibility(p: ParamChoice) -> dict:
    sysm = choice_system(p)
    rows = sysm.margins(p)
    forms = p.forms()
    r_minus_t = (p.T - p.R).collapse(p.theta)
    survives = p.value(p.R) > p.theta  # P < R turns on the degenerate term
    rt = p.R + p.T - (p.X - M)
    return {
        "params": {"theta": fmt(p.theta), "mu": fmt(p.mu), "delta": fmt(p.delta), "eps": fmt(p.eps)},
        "forms": {k: f.to_json() for k, f in forms.items()},
        "RT_equals_X_over_M": rt.e_M.is_zero and rt.e_P.is_zero,
        "margins": rows,
        "all_satisfied": all(r["satisfied"] for r in rows),
        "violated": [r["label"] for r in rows if not r["satisfied"]],
        "zero_bare_margins": [r["label"] for r in rows if r["margin_bare"] == "0"],
        "degenerate_term_active": survives,
        "tension": {
            "R < T margin": str(r_minus_t),
            "requires": "mu > 1/4",
            "mu_ok": p.mu > Rat(1, 4),
        },
        "theta_window": _interval_json(sysm.feasible_theta(p.mu, p.delta, p.eps)),
        "theta_window_bare": _interval_json(sysm.feasible_theta(p.mu)),
        "thm12_window": _interval_json(thm12_system().feasible_theta(p.mu)),
    }


def endgame_check(p: ParamChoice) -> list[dict]:
    """Substitute the choices into the endgame terms and compare with the final list."""
    R, Rs, S, T = p.R, p.R_star, p.S, p.T
    half = Rat(1, 2)
    chain = {
        "sqrt(P/M)": _QD + P + M.scale(half) - (S + Rs).scale(half),
        "P^(5/8)M^(-1/4)": _QD + P.scale(Rat(9, 8)) + M.scale(Rat(3, 4)) - Rs,
        "P^(-(1/2-mu))": T.scale(1) - (M + P).scale(half),
        "P^(-1/4)": P.scale(Rat(-1, 4)),
        "M^(1/4)P^(-1-mu/2)": _QD + R.scale(half) - P.scale(Rat(5, 4)),
    }
    out = []
    for k, form in chain.items():
        target = FINAL_FORMS[k]
        bare = (form - target).drop("eps")
        out.append(
            {
                "term": k,
                "substituted": form.to_json(),
                "match_up_to_eps": bare.e_M.is_zero and bare.e_P.is_zero,
                "eps_part": (form - target).to_json(),
            }
        )
    return out


# ------------------------------------------------------------ optimization


@dataclass
class SavingResult:
    theta: Fraction
    saving: Fraction
    best_mu: Fraction
    argmax: tuple[Fraction, Fraction]
    attained: bool
    binding: list[str]
    values: dict[str, str]
    grid: dict

    def to_json(self) -> dict:
        return {
            "theta": fmt(self.theta),
            "saving": fmt(self.saving),
            "best_mu": fmt(self.best_mu),
            "argmax": [fmt(self.argmax[0]), fmt(self.argmax[1])],
            "attained": self.attained,
            "binding": self.binding,
            "term_savings": self.values,
            "grid": self.grid,
        }

    def csv_row(self) -> list[str]:
        return [fmt(self.theta), fmt(self.best_mu), fmt(self.saving)]


MU_LO, MU_HI = Rat(0), Rat(1, 2)


def _lines(theta: Fraction, terms) -> list[tuple[str, Fraction, Fraction]]:
    """Each saving -exponent(theta, mu) as a + b*mu."""
    out = []
    for t in terms:
        a = -t.q_exp(theta, 0)
        b = -t.q_exp(theta, 1) - a
        out.append((t.label, a, b))
    return out


def _floor(lines, mu) -> Fraction:
    return min(a + b * mu for _, a, b in lines)


def _grid_search(lines, width: Fraction, points: int = 64):
    lo, hi = MU_LO, MU_HI
    while True:
        step = (hi - lo) / points
        grid = [lo + step * k for k in range(points + 1)]
        vals = [(_floor(lines, m), -m) for m in grid]
        v, neg = max(vals)
        best = -neg
        if step <= width:
            return best, v, step
        lo, hi = max(MU_LO, best - step), min(MU_HI, best + step)


def optimize_saving(theta, terms=None, variant: str = "read", width=Rat(1, 10**6)) -> SavingResult:
    """max over mu of the smallest saving; exact candidates plus a zooming grid."""
    theta = _q(theta)
    if theta <= 0:
        raise ValueError("theta must be positive")
    if terms is None:
        terms = THM11_READ if variant == "read" else THM11
    lines = _lines(theta, terms)
    cands = {MU_LO, MU_HI}
    for (_, a1, b1), (_, a2, b2) in itertools.combinations(lines, 2):
        if b1 != b2:
            m = (a2 - a1) / (b1 - b2)
            if MU_LO <= m <= MU_HI:
                cands.add(m)
    scored = sorted((_floor(lines, m), m) for m in cands)
    best = scored[-1][0]
    arg = sorted(m for v, m in scored if v == best)
    lo, hi = arg[0], arg[-1]
    inside = [m for m in arg if MU_LO < m < MU_HI]
    if inside:
        mu_star, attained = inside[0], True
    elif lo < hi:
        mu_star, attained = (lo + hi) / 2, True
    else:
        mu_star, attained = lo, False
    binding = [lab for lab, a, b in lines if a + b * mu_star == best]
    g_mu, g_val, step = _grid_search(lines, _q(width))
    lip = max(abs(b) for _, _, b in lines)
    grid = {
        "best_mu": fmt(g_mu),
        "saving": fmt(g_val),
        "step": fmt(step),
        "consistent": g_val <= best and best - g_val <= lip * step,
    }
    values = {lab: fmt(a + b * mu_star) for lab, a, b in lines}
    return SavingResult(theta, best, mu_star, (lo, hi), attained, binding, values, grid)


COROLLARY_THETA = Rat(2, 7)
COROLLARY_CLAIM = Rat(1, 60)


def corollary_check() -> dict:
    """Exact savings at theta = 2/7 against the claimed Q^{1/4 - 1/60}."""
    res = optimize_saving(COROLLARY_THETA)
    t1 = -THM11[0].q_exp(COROLLARY_THETA)
    t2 = -THM11[1].q_exp(COROLLARY_THETA)
    return {
        "theta": fmt(COROLLARY_THETA),
        "claimed": fmt(COROLLARY_CLAIM),
        "term1_saving": fmt(t1),
        "term2_saving": fmt(t2),
        "optimal_saving": fmt(res.saving),
        "best_mu": fmt(res.best_mu),
        "argmax": [fmt(res.argmax[0]), fmt(res.argmax[1])],
        "agrees": res.saving == COROLLARY_CLAIM,
        "discrepancy": None if res.saving == COROLLARY_CLAIM else fmt(COROLLARY_CLAIM - res.saving),
        "flag": None if res.saving == COROLLARY_CLAIM else "claimed saving exceeds the exact min-term saving",
    }


def saving_table(thetas, variant: str = "read") -> list[SavingResult]:
    return [optimize_saving(t, variant=variant) for t in thetas]


CSV_HEADER = ("theta", "best_mu", "saving")


def saving_csv(results) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in results:
        w.writerow(r.csv_row())
    return buf.getvalue()
