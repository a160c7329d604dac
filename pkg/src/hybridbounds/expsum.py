"""Finite exponential sums: Kloosterman, twisted, hyper-Kloosterman and friends.

Every sum is computed as a phase histogram h with value sum_k h[k] e(k/L),
i.e. an element of the group ring Z[Z/L], and only reduced into Q(zeta_L)
at the end.  Naive enumeration is the reference semantics; the CRT splitting
of Kl3 and the batched histogram kernels are validated against it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._arith import euler_phi, lcm, primes_upto, prime_factors
from .cyclo import SumValue, eval_hist_float, reduce_hist
from .modcore import DirichletCharacter, inverse, inverse_table, units


class PreconditionError(ValueError):
    """Raised when divisibility or coprimality requirements are violated."""


_CHUNK = 1 << 22


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise PreconditionError(msg)


def _unit_pairs(c: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Flattened (x, y, (xy)^-1) over all pairs of units mod c."""
    u = units(c)
    X = np.repeat(u, len(u))
    Y = np.tile(u, len(u))
    Z = inverse_table(c)[(X * Y) % c]
    return X, Y, Z


# -- Kloosterman sums -------------------------------------------------------

def kloosterman_hist(m: int, n: int, q: int) -> np.ndarray:
    x = units(q)
    xi = inverse_table(q)[x]
    return np.bincount((m * x + n * xi) % q, minlength=q)


def kloosterman(m: int, n: int, q: int) -> SumValue:
    """Kl2(m, n; q) = sum_{xy = 1 mod q} e((mx + ny)/q)."""
    _require(q >= 1, "modulus must be positive")
    return SumValue.from_hist(q, kloosterman_hist(m, n, q))


def kloosterman_table(q: int) -> np.ndarray:
    """Complex float values Kl2(a, 1; q) for a = 0..q-1."""
    x = units(q)
    xi = inverse_table(q)[x]
    a = np.arange(q)[:, None]
    ang = 2j * np.pi * ((a * x[None, :] + xi[None, :]) % q) / q
    return np.exp(ang).sum(axis=1)


def kloosterman_twisted(chi: DirichletCharacter, m: int, n: int, q: int | None = None) -> SumValue:
    """sum_{xy = 1 mod q} chi(x) e((mx + ny)/q)."""
    q = chi.modulus if q is None else q
    _require(q == chi.modulus, "character modulus must equal q")
    E = chi.level
    L = lcm(q, E)
    x = units(q)
    xi = inverse_table(q)[x]
    v = chi.value_exponents()[x]
    expo = ((m * x + n * xi) % q) * (L // q) + v * (L // E)
    return SumValue.from_hist(L, np.bincount(expo % L, minlength=L))


def twisted_kloosterman_table(chi: DirichletCharacter) -> np.ndarray:
    """Complex float Kl2,chi(r, n; q) indexed [r, n]."""
    q, E = chi.modulus, chi.level
    x = units(q)
    xi = inverse_table(q)[x]
    v = chi.value_exponents()[x]
    r = np.arange(q)[:, None, None]
    n = np.arange(q)[None, :, None]
    ang = 2 * np.pi * (((r * x + n * xi) % q) / q + v / E)
    return np.exp(1j * ang).sum(axis=2)


# -- hyper-Kloosterman sums -------------------------------------------------

def _check_kl3_divisors(d1: int, d2: int, c: int) -> None:
    _require(c >= 1 and d1 >= 1 and d2 >= 1, "c, d1, d2 must be positive")
    _require(c % d1 == 0, f"d1={d1} must divide c={c}")
    _require((c // d1) % d2 == 0, f"d2={d2} must divide c/d1={c // d1}")


def kl3_hist(m: int, n: int, d1: int, d2: int, c: int) -> np.ndarray:
    _check_kl3_divisors(d1, d2, c)
    X, Y, Z = _unit_pairs(c)
    phase = (d1 * m * X + d1 * d2 * n * Y + d1 * d2 * Z) % c
    return np.bincount(phase, minlength=c)


def kl3(m: int, n: int, d1: int, d2: int, c: int) -> SumValue:
    """sum_{xyz = 1 mod c} e((d1 m x + d1 d2 n y + d1 d2 z)/c)."""
    return SumValue.from_hist(c, kl3_hist(m, n, d1, d2, c))


def kl3_hist_batch(c: int, pairs: np.ndarray) -> np.ndarray:
    """Histograms of Kl3(n, m; 1, 1, c) for rows (n, m) of `pairs`; shape (K, c)."""
    X, Y, Z = _unit_pairs(c)
    return _batch(c, pairs, lambda n, m: n * X + m * Y + Z)


def _batch(c: int, pairs: np.ndarray, phase_of) -> np.ndarray:
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    K = len(pairs)
    out = np.zeros((K, c), dtype=np.int64)
    width = max(1, euler_phi(c) ** 2)
    step = max(1, _CHUNK // width)
    for lo in range(0, K, step):
        blk = pairs[lo : lo + step]
        n = blk[:, 0:1]
        m = blk[:, 1:2]
        ph = phase_of(n, m) % c
        ph += c * np.arange(len(blk), dtype=np.int64)[:, None]
        out[lo : lo + len(blk)] = np.bincount(ph.ravel(), minlength=len(blk) * c).reshape(len(blk), c)
    return out


def _hyper_moduli(c: int, q: tuple[int, int], d: tuple[int, int]) -> tuple[int, int, int, int]:
    q1, q2 = q
    d1, d2 = d
    _require(min(c, q1, q2, d1, d2) >= 1, "all parameters must be positive")
    _require((q1 * c) % d1 == 0, f"d1={d1} must divide q1*c={q1 * c}")
    A = q1 * c // d1
    _require((q1 * q2 * c // d1) % d2 == 0 and (q1 * q2 * c) % d1 == 0, f"d2={d2} must divide q1*q2*c/d1")
    B = q1 * q2 * c // (d1 * d2)
    g = math.gcd(d2, A)
    Ap = A // g
    _require(B % Ap == 0, "inverse of x1*x2 is not well defined for these moduli")
    return A, B, Ap, d2 // g


def hyper_kl2_hist(n: int, m: int, c: int, q=(1, 1), d=(1, 1)) -> tuple[int, np.ndarray]:
    A, B, Ap, d2p = _hyper_moduli(c, tuple(q), tuple(d))
    d1 = d[0]
    L = lcm(c, Ap, B)
    x1 = units(A)[:, None]
    x2 = units(B)[None, :]
    w = inverse_table(Ap)[(x1 * x2) % Ap]
    phase = ((d1 * x1 * n) % c) * (L // c) + ((d2p * w) % Ap) * (L // Ap) + ((x2 * m) % B) * (L // B)
    return L, np.bincount((phase % L).ravel(), minlength=L)


def hyper_kl2(n: int, m: int, c: int, q=(1, 1), d=(1, 1)) -> SumValue:
    """The double sum over x1 mod q1c/d1 and x2 mod q1q2c/(d1d2) with the three phases."""
    L, h = hyper_kl2_hist(n, m, c, q, d)
    return SumValue.from_hist(L, h)


def hyper_kl2_hist_batch(c: int, pairs: np.ndarray) -> np.ndarray:
    """Histograms of the d = q = (1, 1) double sum for rows (n, m); shape (K, c)."""
    u = units(c)
    x1 = np.repeat(u, len(u))
    x2 = np.tile(u, len(u))
    w = inverse_table(c)[(x1 * x2) % c]
    return _batch(c, pairs, lambda n, m: x1 * n + w + x2 * m)


def kl3_crt_hist(n: int, m: int, c: int) -> np.ndarray:
    """Kl3(n, m; 1, 1, c) via the CRT splitting over prime-power factors of c.

    Kl3(n, m; c1 c2) = Kl3(n c2b^2, m c2b; c1) * Kl3(n c1b^2, m c1b; c2), with
    c1b, c2b the inverses of c1 mod c2 and c2 mod c1.  The product of the two
    group-ring elements is taken in Z[Z/c] through exponent k1*c2 + k2*c1.
    """
    pps = [p**e for p, e in prime_factors(c)]
    if len(pps) <= 1:
        return kl3_hist(n, m, 1, 1, c)
    c1 = pps[0]
    c2 = c // c1
    i2 = inverse(c2, c1)
    i1 = inverse(c1, c2)
    h1 = kl3_hist(n * i2 * i2, m * i2, 1, 1, c1)
    h2 = kl3_crt_hist(n * i1 * i1, m * i1, c2)
    k1 = np.arange(c1)[:, None]
    k2 = np.arange(c2)[None, :]
    idx = (k1 * c2 + k2 * c1) % c
    out = np.zeros(c, dtype=np.int64)
    out[idx.ravel()] = (h1[:, None] * h2[None, :]).ravel()  # CRT makes idx a bijection
    return out


def kl3_crt(n: int, m: int, c: int) -> SumValue:
    return SumValue.from_hist(c, kl3_crt_hist(n, m, c))


def complete_t_sum_hist(ell: int, q: int, table: np.ndarray | None = None) -> np.ndarray:
    """sum_{t mod q} Kl3(ell t, 1; 1, 1, q) as a phase histogram."""
    if table is None:
        table = kl3_first_arg_table(q)
    t = np.arange(q)
    return table[(ell * t) % q].sum(axis=0)


def kl3_first_arg_table(q: int) -> np.ndarray:
    """Histograms of Kl3(a, 1; 1, 1, q) for every a mod q; shape (q, q)."""
    u = units(q)
    inv = inverse_table(q)
    a = np.arange(q, dtype=np.int64)[:, None]
    out = np.zeros((q, q), dtype=np.int64)
    offs = q * np.arange(q, dtype=np.int64)[:, None]
    for x in u.tolist():
        base = (u + inv[(x * u) % q])[None, :]
        ph = (a * x + base) % q + offs
        out += np.bincount(ph.ravel(), minlength=q * q).reshape(q, q)
    return out


# -- the c-sum and the correlation sum -------------------------------------

def csum(u: int, s: int, m: int, n: int, q: int) -> SumValue:
    """sum*_{g mod q} e((m g + n (s g)^-1)/q) Kl2(u g, 1; q)."""
    _require(math.gcd(s, q) == 1, f"gcd(s, q) must be 1 (s={s}, q={q})")
    _require(math.gcd(u, q) == 1, f"gcd(u, q) must be 1 (u={u}, q={q})")
    inv = inverse_table(q)
    X, Y, _ = _unit_pairs(q)  # X plays gamma, Y the Kloosterman variable
    phase = m * X + n * inv[(s * X) % q] + u * X * Y + inv[Y]
    return SumValue.from_hist(q, np.bincount(phase % q, minlength=q))


def correlation_hist(m: int, n: int, h: int, q: int, conjugate_second: bool = False) -> np.ndarray:
    _require(q >= 2, "modulus must be at least 2")
    u = units(q)
    inv = inverse_table(q)
    sign = -1 if conjugate_second else 1
    x = u[:, None]
    y = u[None, :]
    out = np.zeros(q, dtype=np.int64)
    for g in range(q):
        ph = (m * g * x + inv[x]) + sign * (n * g * y + inv[y]) + h * g
        out += np.bincount((ph % q).ravel(), minlength=q)
    return out


def correlation_sum(m: int, n: int, h: int, q: int, conjugate_second: bool = False) -> SumValue:
    """sum over ALL g mod q of Kl2(mg,1;q) Kl2(ng,1;q)^(*) e(hg/q)."""
    return SumValue.from_hist(q, correlation_hist(m, n, h, q, conjugate_second))


# -- Galois orbits -----------------------------------------------------------

def galois_orbit_reps(c: int) -> np.ndarray:
    """Representatives of (n, m) mod c under (n, m) -> (a^2 n, a m), a a unit.

    Both Kl3(n, m; c) and its double-sum form satisfy
    sigma_a(S(n, m)) = S(a^2 n, a m), so exact agreement on representatives
    implies agreement on the whole orbit.
    """
    u = units(c)
    seen = np.zeros((c, c), dtype=bool)
    reps = []
    for n in range(c):
        for m in range(c):
            if seen[n, m]:
                continue
            reps.append((n, m))
            seen[(u * u * n) % c, (u * m) % c] = True
    return np.array(reps, dtype=np.int64).reshape(-1, 2)


def galois_hist(hist: np.ndarray, a: int) -> np.ndarray:
    c = hist.shape[-1]
    out = np.zeros_like(hist)
    out[..., (a * np.arange(c)) % c] = hist
    return out


def hist_is_zero(level: int, hist: np.ndarray) -> np.ndarray:
    """Exact test that histogram(s) represent 0 in Q(zeta_level)."""
    red = reduce_hist(level, np.asarray(hist))
    return ~np.any(red != 0, axis=-1)


# -- audits -----------------------------------------------------------------

@dataclass
class AuditResult:
    name: str
    max_ratio: float
    argmax: dict
    checked: int
    passed: bool
    details: dict

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "max_ratio": self.max_ratio,
            "argmax": self.argmax,
            "checked": self.checked,
            "passed": self.passed,
            "details": self.details,
        }


def weil_audit(p_max: int = 2000, samples: int = 100, seed: int = 0) -> AuditResult:
    """|Kl2(m,n;p)| / (2 gcd(m,n,p)^(1/2) p^(1/2)) over primes p <= p_max."""
    rng = np.random.default_rng(seed)
    best, where, count, ok = -1.0, {}, 0, True
    for p in primes_upto(p_max):
        mn = rng.integers(0, p, size=(samples, 2))
        x = units(p)
        xi = inverse_table(p)[x]
        ph = (mn[:, 0:1] * x + mn[:, 1:2] * xi) % p
        ph += p * np.arange(samples)[:, None]
        H = np.bincount(ph.ravel(), minlength=samples * p).reshape(samples, p)
        vals, errs = eval_hist_float(p, H)
        g = np.gcd(np.gcd(mn[:, 0], mn[:, 1]), p)
        bound = 2.0 * np.sqrt(g) * math.sqrt(p)
        ratio = np.abs(vals) / bound
        upper = (np.abs(vals) + errs) / bound
        ok &= bool(np.all(upper <= 1.0))
        i = int(np.argmax(ratio))
        count += samples
        if ratio[i] > best:
            best = float(ratio[i])
            where = {"p": p, "m": int(mn[i, 0]), "n": int(mn[i, 1])}
    return AuditResult("weil", best, where, count, ok and best <= 1.0, {"p_max": p_max, "samples": samples, "seed": seed})


def kl3_prime_audit(p_max: int = 500, samples: int = 12, seed: int = 0) -> AuditResult:
    """|Kl3(m,n;1,1,p)| <= 3p on sampled (m, n) and a few fixed pairs."""
    rng = np.random.default_rng(seed)
    best, where, count = -1.0, {}, 0
    for p in primes_upto(p_max):
        pairs = [(0, 0), (0, 1), (1, 0), (1, 1)] + [tuple(r) for r in rng.integers(0, p, size=(samples, 2))]
        H = kl3_hist_batch(p, np.array(pairs)[:, ::-1])  # batch rows are (n, m) for Kl3(n, m)
        vals, errs = eval_hist_float(p, H)
        ratio = (np.abs(vals) + errs) / (3.0 * p)
        i = int(np.argmax(ratio))
        count += len(pairs)
        if ratio[i] > best:
            best = float(ratio[i])
            where = {"p": p, "m": int(pairs[i][0]), "n": int(pairs[i][1])}
    return AuditResult("kl3_prime", best, where, count, best <= 1.0, {"p_max": p_max, "samples": samples, "seed": seed})


def _scaling_orbit_reps(q: int) -> np.ndarray:
    u = units(q)
    seen = np.zeros((q, q), dtype=bool)
    reps = []
    for m in range(q):
        for n in range(q):
            if not seen[m, n]:
                reps.append((m, n))
                seen[(u * m) % q, (u * n) % q] = True
    return np.array(reps, dtype=np.int64)


def correlation_audit(q_max: int = 300, conjugate_second: bool = False, q_min: int = 2) -> AuditResult:
    """sup of |C(m,n,h;q)| / (gcd(m,n,q)^(1/2) gcd(m-n,h,q)^(1/2) q^(3/2)).

    Scaling (m, n) by a unit a permutes h, and the normaliser is invariant, so
    it is enough to take (m, n) up to unit scaling and all h via one FFT.
    """
    best, where, count = -1.0, {}, 0
    for q in range(q_min, q_max + 1):
        K = kloosterman_table(q)
        if conjugate_second:
            K2 = np.conj(K)
        else:
            K2 = K
        reps = _scaling_orbit_reps(q)
        g = np.arange(q)
        h = np.arange(q)
        step = max(1, (1 << 20) // q)
        for lo in range(0, len(reps), step):
            blk = reps[lo : lo + step]
            f = K[(blk[:, 0:1] * g) % q] * K2[(blk[:, 1:2] * g) % q]
            C = np.fft.ifft(f, axis=1) * q  # C[:, h] = sum_g f(g) e(hg/q)
            g1 = np.gcd(np.gcd(blk[:, 0], blk[:, 1]), q)[:, None]
            g2 = np.gcd(np.gcd((blk[:, 0] - blk[:, 1])[:, None], h[None, :]), q)
            ratio = np.abs(C) / (np.sqrt(g1 * g2) * q**1.5)
            i, j = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
            count += ratio.size
            if ratio[i, j] > best:
                best = float(ratio[i, j])
                where = {"q": q, "m": int(blk[i, 0]), "n": int(blk[i, 1]), "h": int(j)}
    name = "correlation_conjugated" if conjugate_second else "correlation"
    return AuditResult(name, best, where, count, math.isfinite(best), {"q_max": q_max})


def complete_sum_vanishing(q_max: int = 200, q_min: int = 1) -> AuditResult:
    """Exact check that sum_t Kl3(l t, 1; 1, 1, q) = 0 for all units l, q <= q_max."""
    failures, count = [], 0
    for q in range(q_min, q_max + 1):
        if q == 1:
            continue  # the single class t = 0 gives Kl3(0,1;1) = 1; no vanishing claimed
        table = kl3_first_arg_table(q)
        t = np.arange(q)
        sums = np.stack([table[(ell * t) % q].sum(axis=0) for ell in units(q).tolist()])
        zero = hist_is_zero(q, sums)
        count += len(zero)
        if not np.all(zero):
            bad = units(q)[~zero]
            failures.append({"q": q, "l": int(bad[0])})
    return AuditResult("complete_sum", 0.0, failures[0] if failures else {}, count, not failures, {"q_max": q_max, "failures": failures[:10]})


def crt_equivalence(q_max: int = 500, pairs_per_q: int = 3, seed: int = 0) -> AuditResult:
    """Exact agreement of the CRT fast path and naive Kl3 on composite q <= q_max."""
    rng = np.random.default_rng(seed)
    failures, count = [], 0
    for q in range(2, q_max + 1):
        if len(prime_factors(q)) < 2:
            continue
        pairs = [(1, 1), (0, 1)] + [tuple(int(v) for v in r) for r in rng.integers(0, q, size=(pairs_per_q, 2))]
        for n, m in pairs:
            diff = kl3_crt_hist(n, m, q) - kl3_hist(n, m, 1, 1, q)
            count += 1
            if not hist_is_zero(q, diff):
                failures.append({"q": q, "n": n, "m": m})
    return AuditResult("crt_equivalence", 0.0, failures[0] if failures else {}, count, not failures, {"q_max": q_max})
