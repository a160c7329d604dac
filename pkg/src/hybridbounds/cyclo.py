"""Exact arithmetic in Q(zeta_L) and a fixed-point complex evaluator.

Elements are stored in the power basis 1, z, ..., z^(d-1) with d = phi(L),
reduced modulo the cyclotomic polynomial.  Coefficients are kept as an
integer numerator vector over one positive common denominator, so equality
is a plain comparison of canonical vectors.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath
import numpy as np

from ._arith import divisors, euler_phi, lcm

L_MAX = 3600
EXACT_DEGREE_CAP = 2400
DEFAULT_BITS = 96

_INT64_SAFE = 1 << 62


class CapacityError(ValueError):
    """Raised when a level exceeds the configured exact-arithmetic limits."""


_lock = threading.RLock()
_poly_cache: dict[int, tuple[int, ...]] = {}
_reduction_cache: dict[int, np.ndarray] = {}
_table_cache: dict[tuple[int, int], tuple[list[int], list[int]]] = {}
_float_table_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _divide_monic(num: list[int], den: Sequence[int]) -> list[int]:
    """Exact long division num / den for integer polynomials, den monic."""
    num = list(num)
    dn = len(den) - 1
    quot = [0] * (len(num) - dn)
    for i in range(len(num) - 1, dn - 1, -1):
        c = num[i]
        if c:
            quot[i - dn] = c
            for j in range(dn + 1):
                num[i - dn + j] -= c * den[j]
    if any(num[:dn]):
        raise ArithmeticError("division left a remainder")
    return quot


def cyclotomic_poly(L: int, *, l_max: int = L_MAX) -> tuple[int, ...]:
    """Coefficients (constant term first) of the L-th cyclotomic polynomial."""
    if L < 1:
        raise ValueError(f"level must be positive, got {L}")
    if L > l_max:
        raise CapacityError(f"level {L} exceeds L_max={l_max}")
    cached = _poly_cache.get(L)
    if cached is not None:
        return cached
    with _lock:
        if L in _poly_cache:
            return _poly_cache[L]
        poly = [-1] + [0] * (L - 1) + [1]
        for d in divisors(L)[:-1]:
            poly = _divide_monic(poly, cyclotomic_poly(d, l_max=l_max))
        result = tuple(poly)
        _poly_cache[L] = result
        return result


def _reduction_matrix(L: int) -> np.ndarray:
    """Row k holds the coefficients of x^(deg+k) mod Phi_L, for deg+k < L."""
    mat = _reduction_cache.get(L)
    if mat is not None:
        return mat
    with _lock:
        if L in _reduction_cache:
            return _reduction_cache[L]
        phi = cyclotomic_poly(L)
        deg = len(phi) - 1
        low = np.array(phi[:deg], dtype=object)
        rows = []
        row = -low
        for _ in range(L - deg):
            rows.append(row)
            carry = row[-1]
            row = np.concatenate(([0], row[:-1])).astype(object) - carry * low
        if rows:
            mat = np.array(rows, dtype=object).reshape(L - deg, deg)
        else:
            mat = np.zeros((0, deg), dtype=object)
        if mat.size == 0 or max(abs(int(v)) for v in mat.flat) < (1 << 31):
            mat = mat.astype(np.int64)
        _reduction_cache[L] = mat
        return mat


def fold(level: int, exponents_hist: Sequence[int] | np.ndarray) -> np.ndarray:
    """Fold a coefficient vector indexed by exponent into length `level`."""
    h = np.asarray(exponents_hist)
    if h.dtype != object:
        h = h.astype(np.int64)
    n = h.shape[-1]
    if n == level:
        return h
    pad = (-n) % level
    if pad:
        width = [(0, 0)] * (h.ndim - 1) + [(0, pad)]
        h = np.pad(h, width)
    return h.reshape(h.shape[:-1] + (-1, level)).sum(axis=-2)


def reduce_hist(level: int, hist: np.ndarray) -> np.ndarray:
    """Reduce sum_k hist[..., k] z^k (k < level) to the canonical basis.

    Accepts a single vector or a 2-D batch; integer arithmetic throughout.
    """
    mat = _reduction_matrix(level)
    deg = mat.shape[1]
    h = np.asarray(hist)
    head, tail = h[..., :deg], h[..., deg:]
    if tail.shape[-1] == 0:
        return head.copy()
    use_obj = h.dtype == object or mat.dtype == object
    if not use_obj:
        hmax = int(np.abs(tail).max(initial=0))
        mmax = int(np.abs(mat).max(initial=0))
        use_obj = hmax * mmax * tail.shape[-1] + int(np.abs(head).max(initial=0)) >= _INT64_SAFE
    if use_obj:
        return head.astype(object) + tail.astype(object).dot(mat.astype(object))
    return head + tail @ mat


def degree(level: int) -> int:
    return euler_phi(level)


def _zeta_table(level: int, wbits: int) -> tuple[list[int], list[int]]:
    """round(2^w cos(2 pi k/L)), round(2^w sin(2 pi k/L)) as Python ints."""
    key = (level, wbits)
    tab = _table_cache.get(key)
    if tab is not None:
        return tab
    with _lock:
        if key in _table_cache:
            return _table_cache[key]
        cos_t = [0] * level
        sin_t = [0] * level
        scale = 1 << wbits
        with mpmath.workprec(wbits + 40):
            for k in range(level // 2 + 1):
                arg = mpmath.mpf(2 * k) / level
                c = int(mpmath.nint(mpmath.cospi(arg) * scale))
                s = int(mpmath.nint(mpmath.sinpi(arg) * scale))
                cos_t[k], sin_t[k] = c, s
                if k:
                    cos_t[level - k], sin_t[level - k] = c, -s
        _table_cache[key] = (cos_t, sin_t)
        return cos_t, sin_t


def _float_table(level: int) -> tuple[np.ndarray, np.ndarray]:
    tab = _float_table_cache.get(level)
    if tab is None:
        k = np.arange(level)
        ang = 2.0 * np.pi * k / level
        tab = (np.cos(ang), np.sin(ang))
        _float_table_cache[level] = tab
    return tab


def _fixed_to_mpc(re_int: int, im_int: int, wbits: int, extra_den: int = 1) -> mpmath.mpc:
    prec = max(wbits, re_int.bit_length(), im_int.bit_length()) + 64
    with mpmath.workprec(prec):
        re = mpmath.ldexp(mpmath.mpf(re_int), -wbits)
        im = mpmath.ldexp(mpmath.mpf(im_int), -wbits)
        if extra_den != 1:
            re /= extra_den
            im /= extra_den
        return mpmath.mpc(re, im)


def eval_hist(level: int, hist: Sequence[int] | np.ndarray, bits: int = DEFAULT_BITS) -> tuple[mpmath.mpc, float]:
    """Evaluate sum_k hist[k] e(k/level) with a rigorous absolute error bound."""
    if bits < 53:
        raise ValueError("precision_bits must be at least 53")
    wbits = max(bits + 32, 128)
    h = fold(level, hist)
    cos_t, sin_t = _zeta_table(level, wbits)
    nz = np.flatnonzero(h)
    counts = [int(h[k]) for k in nz]
    re = sum(c * cos_t[k] for c, k in zip(counts, nz))
    im = sum(c * sin_t[k] for c, k in zip(counts, nz))
    total = sum(abs(c) for c in counts)
    bound = math.ldexp(float(total) + 1.0, -wbits + 1)
    return _fixed_to_mpc(re, im, wbits), bound


def eval_hist_float(level: int, hist: np.ndarray) -> tuple[complex, float]:
    """Double-precision evaluation, vectorised over a leading batch axis."""
    c, s = _float_table(level)
    h = np.asarray(hist, dtype=np.float64)
    val = h @ c + 1j * (h @ s)
    bound = np.abs(h).sum(axis=-1) * 4 * level * np.finfo(float).eps
    return val, bound


class CycNumber:
    """Element of Q(zeta_level) in canonical power-basis form."""

    __slots__ = ("level", "num", "den")

    def __init__(self, level: int, coeffs: Iterable[int | Fraction] | None = None, *, _raw=None):
        self.level = int(level)
        if _raw is not None:
            num, den = _raw
        else:
            deg = degree(self.level)
            if coeffs is None:
                coeffs = [0] * deg
            fr = [Fraction(c) for c in coeffs]
            if len(fr) != deg:
                raise ValueError(f"level {level} needs {deg} coefficients, got {len(fr)}")
            den = lcm(*(f.denominator for f in fr)) if fr else 1
            num = [int(f * den) for f in fr]
        g = 0
        for v in num:
            g = math.gcd(g, int(v))
        g = math.gcd(g, den)
        if g == 0:
            g = den
        if den < 0:
            g = -g
        self.num = tuple(int(v) // g for v in num)
        self.den = int(den) // g

    # construction -------------------------------------------------------
    @classmethod
    def from_hist(cls, level: int, hist, den: int = 1) -> "CycNumber":
        """sum_k hist[k] z^k / den, exponents taken mod level."""
        _check_exact_level(level)
        h = fold(level, np.asarray(hist))
        red = reduce_hist(level, h)
        return cls(level, _raw=([int(v) for v in red], den))

    @classmethod
    def zeta(cls, level: int, k: int = 1) -> "CycNumber":
        h = np.zeros(level, dtype=np.int64)
        h[k % level] = 1
        return cls.from_hist(level, h)

    @classmethod
    def rational(cls, value, level: int = 1) -> "CycNumber":
        v = Fraction(value)
        deg = degree(level)
        return cls(level, [v] + [0] * (deg - 1))

    @classmethod
    def zero(cls, level: int = 1) -> "CycNumber":
        return cls(level, _raw=([0] * degree(level), 1))

    @classmethod
    def one(cls, level: int = 1) -> "CycNumber":
        return cls.rational(1, level)

    # structure ----------------------------------------------------------
    @property
    def coefficients(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(v, self.den) for v in self.num)

    def hist(self) -> np.ndarray:
        dtype = np.int64 if max((abs(v) for v in self.num), default=0) < _INT64_SAFE else object
        h = np.zeros(self.level, dtype=dtype)
        h[: len(self.num)] = self.num
        return h

    def lift(self, level: int) -> "CycNumber":
        if level == self.level:
            return self
        if level % self.level:
            raise ValueError(f"cannot lift level {self.level} to {level}")
        step = level // self.level
        h = np.zeros(level, dtype=object)
        for k, v in enumerate(self.num):
            if v:
                h[k * step] = v
        return CycNumber.from_hist(level, h, self.den)

    def is_zero(self) -> bool:
        return not any(self.num)

    def is_rational(self) -> bool:
        return not any(self.num[1:])

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("element is not rational")
        return Fraction(self.num[0] if self.num else 0, self.den)

    # arithmetic ---------------------------------------------------------
    @staticmethod
    def _coerce(other) -> "CycNumber | None":
        if isinstance(other, CycNumber):
            return other
        if isinstance(other, (int, Fraction)):
            return CycNumber.rational(other)
        return None

    def _pair(self, other: "CycNumber") -> tuple["CycNumber", "CycNumber"]:
        lv = lcm(self.level, other.level)
        return self.lift(lv), other.lift(lv)

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = self._pair(o)
        den = lcm(a.den, b.den)
        fa, fb = den // a.den, den // b.den
        return CycNumber(a.level, _raw=([x * fa + y * fb for x, y in zip(a.num, b.num)], den))

    __radd__ = __add__

    def __neg__(self):
        return CycNumber(self.level, _raw=([-v for v in self.num], self.den))

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            f = Fraction(other)
            return CycNumber(self.level, _raw=([v * f.numerator for v in self.num], self.den * f.denominator))
        if not isinstance(other, CycNumber):
            return NotImplemented
        a, b = self._pair(other)
        amax = max((abs(v) for v in a.num), default=0)
        bmax = max((abs(v) for v in b.num), default=0)
        if amax * bmax * max(len(a.num), 1) < _INT64_SAFE:
            prod = np.convolve(np.array(a.num, dtype=np.int64), np.array(b.num, dtype=np.int64))
        else:
            prod = np.convolve(np.array(a.num, dtype=object), np.array(b.num, dtype=object))
        return CycNumber.from_hist(a.level, fold(a.level, prod), a.den * b.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            f = Fraction(other)
            if f == 0:
                raise ZeroDivisionError("division by zero")
            return self * (1 / f)
        return NotImplemented

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not supported")
        out = CycNumber.one(self.level)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def galois(self, a: int) -> "CycNumber":
        """Apply z -> z^a (a coprime to the level)."""
        if math.gcd(a, self.level) != 1:
            raise ValueError(f"{a} is not a unit modulo {self.level}")
        h = np.zeros(self.level, dtype=object)
        for k, v in enumerate(self.num):
            if v:
                h[(k * a) % self.level] += v
        return CycNumber.from_hist(self.level, h, self.den)

    def conj(self) -> "CycNumber":
        return self.galois(-1)

    # comparison ---------------------------------------------------------
    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = self._pair(o)
        return a.den == b.den and a.num == b.num

    __hash__ = None  # type: ignore[assignment]

    # evaluation / display -----------------------------------------------
    def evaluate(self, precision_bits: int = DEFAULT_BITS) -> tuple[mpmath.mpc, float]:
        return cyc_eval(self, precision_bits)

    def __complex__(self):
        return complex(self.evaluate(64)[0])

    def to_string(self) -> str:
        if self.is_rational():
            return str(self.rational_value())
        body = ", ".join(str(c) for c in self.coefficients)
        return f"Q(zeta_{self.level})[{body}]"

    def __repr__(self):
        return f"CycNumber({self.to_string()})"


def _check_exact_level(level: int) -> None:
    if level > L_MAX:
        raise CapacityError(f"level {level} exceeds L_max={L_MAX}")
    if degree(level) > EXACT_DEGREE_CAP:
        raise CapacityError(f"degree phi({level})={degree(level)} exceeds exact cap {EXACT_DEGREE_CAP}")


def exact_supported(level: int) -> bool:
    return level <= L_MAX and degree(level) <= EXACT_DEGREE_CAP


def cyc_equal(a: CycNumber, b: CycNumber) -> bool:
    return a == b


def cyc_reduce(level: int, coeffs: Sequence[int | Fraction]) -> CycNumber:
    """Canonical form of sum_k coeffs[k] z^k for an arbitrary-length vector."""
    fr = [Fraction(c) for c in coeffs]
    den = lcm(*(f.denominator for f in fr)) if fr else 1
    return CycNumber.from_hist(level, fold(level, np.array([int(f * den) for f in fr], dtype=object)), den)


def cyc_eval(a: CycNumber, precision_bits: int = DEFAULT_BITS) -> tuple[mpmath.mpc, float]:
    """Complex value of a together with a rigorous absolute error bound."""
    if precision_bits < 53:
        raise ValueError("precision_bits must be at least 53")
    wbits = max(precision_bits + 32, 128)
    cos_t, sin_t = _zeta_table(a.level, wbits)
    re = sum(v * cos_t[k] for k, v in enumerate(a.num) if v)
    im = sum(v * sin_t[k] for k, v in enumerate(a.num) if v)
    total = sum(abs(v) for v in a.num)
    val = _fixed_to_mpc(re, im, wbits, a.den)
    bound = math.ldexp((float(total) / a.den + 1.0), -wbits + 1)
    return val, bound


@dataclass(frozen=True)
class SumValue:
    """An exponential-sum value: optional exact element, approximation, bound."""

    exact: CycNumber | None
    approx: mpmath.mpc
    error_bound: float
    backend: str = "exact"

    @classmethod
    def from_exact(cls, x: CycNumber, bits: int = DEFAULT_BITS) -> "SumValue":
        val, err = cyc_eval(x, bits)
        return cls(x, val, err, "exact")

    @classmethod
    def from_hist(cls, level: int, hist, den: int = 1, bits: int = DEFAULT_BITS) -> "SumValue":
        """Build from a phase histogram; falls back to numeric beyond the cap."""
        if exact_supported(level):
            return cls.from_exact(CycNumber.from_hist(level, hist, den), bits)
        val, err = eval_hist(level, hist, bits)
        if den != 1:
            with mpmath.workprec(bits + 64):
                val = val / den
            err = err / den
        return cls(None, val, err, "numeric")

    @property
    def value(self) -> complex:
        return complex(self.approx)

    def __complex__(self):
        return self.value

    def to_json(self) -> dict:
        return {
            "exact": None if self.exact is None else self.exact.to_string(),
            "approx": [float(self.approx.real), float(self.approx.imag)],
            "error_bound": float(self.error_bound),
            "backend": self.backend,
        }
