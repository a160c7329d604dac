"""Small elementary-number-theory helpers shared by the other modules."""

from __future__ import annotations

import math
from functools import lru_cache


@lru_cache(maxsize=4096)
def prime_factors(n: int) -> tuple[tuple[int, int], ...]:
    """Trial-division factorization of n >= 1 as sorted (p, e) pairs."""
    if n < 1:
        raise ValueError(f"expected a positive integer, got {n}")
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return tuple(out)


@lru_cache(maxsize=4096)
def euler_phi(n: int) -> int:
    result = n
    for p, _ in prime_factors(n):
        result = result // p * (p - 1)
    return result


@lru_cache(maxsize=4096)
def divisors(n: int) -> tuple[int, ...]:
    divs = [1]
    for p, e in prime_factors(n):
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return tuple(sorted(divs))


def is_prime(n: int) -> bool:
    return n >= 2 and prime_factors(n) == ((n, 1),)


def primes_upto(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(sieve[p * p :: p]))
    return [i for i, flag in enumerate(sieve) if flag]


def lcm(*args: int) -> int:
    out = 1
    for a in args:
        out = out * a // math.gcd(out, a)
    return out
