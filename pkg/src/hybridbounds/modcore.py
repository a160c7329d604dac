"""Residues, unit groups, Dirichlet characters and Gauss sums.

A character mod q is stored as an exponent vector on a fixed generator basis
of (Z/q)^x: chi(g_j) = e(k_j / n_j) where n_j is the order of g_j.  Values are
handled as exponents mod E (E = exponent of the group), so every value of
chi is zeta_E^v and evaluation tables are plain integer arrays.
"""

from __future__ import annotations

import itertools
import math
import threading
from dataclasses import dataclass, field

import numpy as np

from ._arith import divisors, euler_phi, lcm, prime_factors
from .cyclo import CycNumber, SumValue


class NotAUnitError(ValueError):
    """Raised when an inverse is requested for a non-unit."""


@dataclass(frozen=True)
class ModulusFactorization:
    q: int
    factors: tuple[tuple[int, int], ...]

    def prime_powers(self) -> list[int]:
        return [p**e for p, e in self.factors]


def factorize(q: int) -> ModulusFactorization:
    if q < 1:
        raise ValueError(f"modulus must be >= 1, got {q}")
    return ModulusFactorization(q, prime_factors(q))


def inverse(a: int, q: int) -> int:
    """Inverse of a mod q by the extended Euclidean algorithm."""
    if q == 1:
        return 0
    r0, r1 = a % q, q
    s0, s1 = 1, 0
    while r1:
        quo = r0 // r1
        r0, r1 = r1, r0 - quo * r1
        s0, s1 = s1, s0 - quo * s1
    if r0 != 1:
        raise NotAUnitError(f"{a} is not invertible modulo {q}")
    return s0 % q


def crt(residues: list[int], moduli: list[int]) -> int:
    x, m = 0, 1
    for r, n in zip(residues, moduli):
        t = ((r - x) * inverse(m, n)) % n
        x += m * t
        m *= n
    return x % m


def multiplicative_order(a: int, q: int) -> int:
    if math.gcd(a, q) != 1:
        raise NotAUnitError(f"{a} is not a unit modulo {q}")
    phi = euler_phi(q)
    for d in divisors(phi):
        if pow(a, d, q) == 1 % q:
            return d
    return phi


def _primitive_root(pe: int) -> int:
    phi = euler_phi(pe)
    for g in range(2, pe):
        if math.gcd(g, pe) == 1 and multiplicative_order(g, pe) == phi:
            return g
    return 1


@dataclass(frozen=True)
class UnitGroup:
    modulus: int
    generators: tuple[tuple[int, int], ...]  # (residue mod q, order)
    components: tuple[int, ...]  # prime power hosting each generator

    @property
    def structure(self) -> tuple[int, ...]:
        return tuple(o for _, o in self.generators)

    @property
    def order(self) -> int:
        return math.prod(self.structure)

    @property
    def exponent(self) -> int:
        return lcm(*self.structure) if self.generators else 1


_group_cache: dict[int, UnitGroup] = {}
_dlog_cache: dict[int, np.ndarray] = {}
_lock = threading.RLock()


def unit_group(q: int) -> UnitGroup:
    """Generators per prime power: smallest primitive root, or {-1} x <3> on 2^k."""
    hit = _group_cache.get(q)
    if hit is not None:
        return hit
    with _lock:
        if q in _group_cache:
            return _group_cache[q]
        fac = factorize(q)
        pps = fac.prime_powers()
        gens, comps = [], []

        def lift(local: int, pe: int) -> int:
            return crt([local if m == pe else 1 for m in pps], pps)

        for (p, e), pe in zip(fac.factors, pps):
            if p == 2:
                if e == 2:
                    gens.append((lift(3, pe), 2))
                    comps.append(pe)
                elif e >= 3:
                    gens.append((lift(pe - 1, pe), 2))
                    gens.append((lift(3, pe), 2 ** (e - 2)))
                    comps.extend([pe, pe])
            else:
                gens.append((lift(_primitive_root(pe), pe), euler_phi(pe)))
                comps.append(pe)
        grp = UnitGroup(q, tuple(gens), tuple(comps))
        _group_cache[q] = grp
        return grp


def discrete_logs(q: int) -> np.ndarray:
    """Array of shape (q, r): exponent vector of each unit, -1 rows off units."""
    hit = _dlog_cache.get(q)
    if hit is not None:
        return hit
    with _lock:
        if q in _dlog_cache:
            return _dlog_cache[q]
        grp = unit_group(q)
        r = len(grp.generators)
        table = np.full((q, r), -1, dtype=np.int64)
        if r:
            for exps in itertools.product(*(range(o) for _, o in grp.generators)):
                a = 1
                for (g, _), k in zip(grp.generators, exps):
                    a = a * pow(g, k, q) % q
                table[a] = exps
        table.setflags(write=False)
        _dlog_cache[q] = table
        return table


def units(q: int) -> np.ndarray:
    """Units mod q in increasing order (for q = 1 the single class 0)."""
    if q == 1:
        return np.zeros(1, dtype=np.int64)
    a = np.arange(q, dtype=np.int64)
    return a[np.gcd(a, q) == 1]


_inv_cache: dict[int, np.ndarray] = {}


def inverse_table(q: int) -> np.ndarray:
    """inv[a] = a^{-1} mod q for units a, 0 elsewhere."""
    hit = _inv_cache.get(q)
    if hit is not None:
        return hit
    inv = np.zeros(q, dtype=np.int64)
    for a in units(q).tolist():
        inv[a] = inverse(a, q) if q > 1 else 0
    inv.setflags(write=False)
    _inv_cache[q] = inv
    return inv


@dataclass(frozen=True)
class DirichletCharacter:
    modulus: int
    exponent_vector: tuple[int, ...]
    conductor: int = field(compare=False)
    parity: str = field(compare=False)

    @property
    def group(self) -> UnitGroup:
        return unit_group(self.modulus)

    @property
    def level(self) -> int:
        """E such that every value is a power of zeta_E."""
        return self.group.exponent

    @property
    def is_primitive(self) -> bool:
        return self.conductor == self.modulus

    @property
    def is_principal(self) -> bool:
        return not any(self.exponent_vector)

    def value_exponents(self) -> np.ndarray:
        """v[a] with chi(a) = zeta_E^v[a]; -1 where gcd(a, q) > 1."""
        return _value_table(self.modulus, self.exponent_vector)

    def conj(self) -> "DirichletCharacter":
        orders = self.group.structure
        vec = tuple((-k) % o for k, o in zip(self.exponent_vector, orders))
        return character(self.modulus, vec)

    def __call__(self, n: int) -> CycNumber:
        return char_eval(self, n)

    def order(self) -> int:
        orders = self.group.structure
        out = 1
        for k, o in zip(self.exponent_vector, orders):
            out = lcm(out, o // math.gcd(k, o))
        return out


_value_cache: dict[tuple[int, tuple[int, ...]], np.ndarray] = {}


def _value_table(q: int, vec: tuple[int, ...]) -> np.ndarray:
    key = (q, vec)
    hit = _value_cache.get(key)
    if hit is not None:
        return hit
    grp = unit_group(q)
    E = grp.exponent
    dl = discrete_logs(q)
    weights = np.array([k * (E // o) for k, (_, o) in zip(vec, grp.generators)], dtype=np.int64)
    vals = np.full(q, -1, dtype=np.int64)
    u = units(q)
    if len(weights):
        vals[u] = (dl[u] @ weights) % E
    else:
        vals[u] = 0
    vals.setflags(write=False)
    with _lock:
        _value_cache[key] = vals
    return vals


def _conductor(q: int, vals: np.ndarray) -> int:
    u = units(q)
    for f in divisors(q):
        kernel = u[(u % f) == (1 % f)]
        if np.all(vals[kernel] == 0):
            return f
    return q


def character(q: int, exponent_vector) -> DirichletCharacter:
    grp = unit_group(q)
    vec = tuple(int(k) % o for k, (_, o) in zip(exponent_vector, grp.generators))
    if len(vec) != len(grp.generators):
        raise ValueError(f"modulus {q} needs {len(grp.generators)} exponents")
    vals = _value_table(q, vec)
    E = grp.exponent
    minus = vals[(q - 1) % q] if q > 1 else 0
    parity = "even" if (q <= 2 or minus == 0) else "odd"
    return DirichletCharacter(q, vec, _conductor(q, vals), parity)


_chars_cache: dict[int, tuple[DirichletCharacter, ...]] = {}


def characters(q: int) -> list[DirichletCharacter]:
    """All phi(q) characters mod q, ordered lexicographically by exponent vector."""
    hit = _chars_cache.get(q)
    if hit is None:
        grp = unit_group(q)
        hit = tuple(character(q, vec) for vec in itertools.product(*(range(o) for _, o in grp.generators)))
        with _lock:
            _chars_cache[q] = hit
    return list(hit)


def principal_character(q: int) -> DirichletCharacter:
    return character(q, (0,) * len(unit_group(q).generators))


def primitive_characters(q: int) -> list[DirichletCharacter]:
    return [c for c in characters(q) if c.is_primitive]


def char_eval(chi: DirichletCharacter, n: int) -> CycNumber:
    v = int(chi.value_exponents()[n % chi.modulus])
    E = chi.level
    if v < 0:
        return CycNumber.zero(E)
    return CycNumber.zeta(E, v)


def character_from_values(q: int, value_of) -> DirichletCharacter:
    """Recover the character mod q from a callable giving chi(g) as (k, E') with chi(g)=e(k/E')."""
    grp = unit_group(q)
    vec = []
    for g, o in grp.generators:
        k, e = value_of(g)
        if (k * o) % e:
            raise ValueError("values are not consistent with a character")
        vec.append((k * o // e) % o)
    return character(q, vec)


def conductor(chi: DirichletCharacter) -> int:
    return chi.conductor


def primitive_part(chi: DirichletCharacter) -> DirichletCharacter:
    """The character mod conductor(chi) inducing chi."""
    f = chi.conductor
    vals, E = chi.value_exponents(), chi.level

    def value_of(g: int):
        # any lift of g mod f that is a unit mod q carries the same value
        x = g
        while math.gcd(x, chi.modulus) != 1:
            x += f
        return int(vals[x % chi.modulus]), E

    return character_from_values(f, value_of)


def induce(chi: DirichletCharacter, q: int) -> DirichletCharacter:
    """The character mod q (a multiple of chi.modulus) induced by chi."""
    if q % chi.modulus:
        raise ValueError("target modulus must be a multiple of the source modulus")
    vals, E = chi.value_exponents(), chi.level
    return character_from_values(q, lambda g: (int(vals[g % chi.modulus]), E))


def char_sum_hist(chi: DirichletCharacter, n0: int, shift: int) -> tuple[int, np.ndarray]:
    """Phase histogram of sum_{a mod q} chi(shift*a) e(n0*a/q) at level lcm(q, E)."""
    q, E = chi.modulus, chi.level
    L = lcm(q, E)
    a = np.arange(q, dtype=np.int64)
    v = chi.value_exponents()[(shift * a) % q]
    keep = v >= 0
    expo = ((n0 * a[keep]) % q) * (L // q) + v[keep] * (L // E)
    return L, np.bincount(expo % L, minlength=L)


def _char_sum(chi: DirichletCharacter, n0: int, shift: int) -> SumValue:
    L, hist = char_sum_hist(chi, n0, shift)
    return SumValue.from_hist(L, hist)


def gauss_sum(chi: DirichletCharacter) -> SumValue:
    """tau(chi) = sum_x chi(x) e(x/q), exact in Q(zeta_lcm(q, E))."""
    return _char_sum(chi, 1, 1)


def tau_star(chi: DirichletCharacter, n0: int) -> SumValue:
    """sum_{a mod q} e(n0 a/q) chi(n0 a); pass conj(psi) to get the starred sum of psi-bar."""
    return _char_sum(chi, n0, n0)
