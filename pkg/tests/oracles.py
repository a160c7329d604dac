"""Naive reference implementations: plain loops over residues, complex floats."""

from __future__ import annotations

import cmath
import math


def e(x: float) -> complex:
    return cmath.exp(2j * math.pi * x)


def units(q: int) -> list[int]:
    return [a for a in range(q) if math.gcd(a, q) == 1] if q > 1 else [0]


def inv(a: int, q: int) -> int:
    return pow(a, -1, q) if q > 1 else 0


def kl2(m: int, n: int, q: int) -> complex:
    return sum(e((m * x + n * inv(x, q)) / q) for x in units(q))


def kl3(m: int, n: int, c: int, d1: int = 1, d2: int = 1) -> complex:
    tot = 0j
    for x in units(c):
        for y in units(c):
            z = inv(x * y % c, c)
            tot += e((d1 * m * x + d1 * d2 * n * y + d1 * d2 * z) / c)
    return tot


def hyper_double(n: int, m: int, c: int) -> complex:
    """sum_{x1, x2 mod c units} e((n x1 + (x1 x2)^-1 + m x2)/c)."""
    return sum(e((n * a + inv(a * b % c, c) + m * b) / c) for a in units(c) for b in units(c))


def prime_character(q: int, g: int, j: int):
    """chi(g^k) = e(jk/(q-1)) for prime q with primitive root g."""
    log = {pow(g, k, q): k for k in range(q - 1)}

    def chi(a: int) -> complex:
        a %= q
        return 0j if a == 0 else e(j * log[a] / (q - 1))

    return chi


def gauss(chi, q: int) -> complex:
    return sum(chi(x) * e(x / q) for x in range(q))


def csum(u: int, s: int, m: int, n: int, q: int) -> complex:
    return sum(e((m * g + n * inv(s * g % q, q)) / q) * kl2(u * g, 1, q) for g in units(q))


def correlation(m: int, n: int, h: int, q: int, conj: bool = False) -> complex:
    tot = 0j
    for g in range(q):
        b = kl2(n * g, 1, q)
        tot += kl2(m * g, 1, q) * (b.conjugate() if conj else b) * e(h * g / q)
    return tot


def twisted_kl2(chi, m: int, n: int, q: int) -> complex:
    return sum(chi(x) * e((m * x + n * inv(x, q)) / q) for x in units(q))
