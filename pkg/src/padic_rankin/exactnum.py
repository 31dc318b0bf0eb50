"""Exact arithmetic in cyclotomic fields, Dirichlet characters and Gauss sums.

Elements of Q(zeta_m) are stored in the power basis modulo the m-th cyclotomic
polynomial, so equality is a coordinatewise comparison.  The complex embedding
is zeta_m -> exp(2 pi i / m).
"""

from __future__ import annotations

import cmath
import math
import re
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterable

from sympy import factorint, primitive_root as _sympy_primitive_root


# ---------------------------------------------------------------------------
# small integer helpers


def euler_phi(n: int) -> int:
    result = n
    for q in factorint(n):
        result -= result // q
    return result


def divisors(n: int) -> list[int]:
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def lcm(a: int, b: int) -> int:
    return a // math.gcd(a, b) * b


def valuation(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


# ---------------------------------------------------------------------------
# cyclotomic polynomials


@lru_cache(maxsize=None)
def cyclotomic_poly(m: int) -> tuple[int, ...]:
    """Integer coefficients of Phi_m, lowest degree first."""
    # x^m - 1 = prod_{d | m} Phi_d, so divide out the proper divisors
    num = [-1] + [0] * (m - 1) + [1]
    for d in divisors(m)[:-1]:
        num = _exact_divide(num, list(cyclotomic_poly(d)))
    return tuple(num)


def _exact_divide(num: list[int], den: list[int]) -> list[int]:
    num = list(num)
    dn = len(den) - 1
    out = [0] * (len(num) - dn)
    for i in range(len(out) - 1, -1, -1):
        c = num[i + dn] // den[-1]
        out[i] = c
        if c:
            for j, dj in enumerate(den):
                num[i + j] -= c * dj
    if any(num[:dn]):
        raise ArithmeticError("non-exact polynomial division")
    return out


def _reduce_mod_phi(coeffs: list, m: int) -> list:
    phi = cyclotomic_poly(m)
    deg = len(phi) - 1
    coeffs = list(coeffs)
    for i in range(len(coeffs) - 1, deg - 1, -1):
        c = coeffs[i]
        if c:
            coeffs[i] = 0
            # Phi_m is monic: x^deg = -sum_{j<deg} phi_j x^j
            for j in range(deg):
                if phi[j]:
                    coeffs[i - deg + j] -= c * phi[j]
    out = coeffs[:deg]
    out += [0] * (deg - len(out))
    return out


# ---------------------------------------------------------------------------
# Cyclotomic field elements


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


class Cyclotomic:
    """An element of Q(zeta_m) in the power basis modulo Phi_m."""

    __slots__ = ("order", "coeffs")

    def __init__(self, order: int, coeffs: Iterable):
        if order == 2:
            # Q(zeta_2) = Q; keep a single canonical representation
            c = list(coeffs)
            order, coeffs = 1, [c[0] if c else 0]
        coeffs = [_frac(c) for c in coeffs]
        deg = len(cyclotomic_poly(order)) - 1
        if len(coeffs) != deg:
            coeffs = _reduce_mod_phi(coeffs + [Fraction(0)] * max(0, deg - len(coeffs)), order)
        self.order = order
        self.coeffs = tuple(coeffs)

    # constructors -----------------------------------------------------------
    @classmethod
    def rational(cls, x) -> "Cyclotomic":
        return cls(1, [x])

    @classmethod
    def root_of_unity(cls, m: int, e: int = 1) -> "Cyclotomic":
        g = math.gcd(e % m, m) if m > 1 else 1
        m2, e2 = (m // g, (e % m) // g) if m > 1 else (1, 0)
        if m2 <= 2:
            return cls(1, [1 if (m2 == 1 or e2 == 0) else -1])
        vec = [0] * m2
        vec[e2] = 1
        return cls(m2, _reduce_mod_phi(vec, m2))

    @classmethod
    def from_exponent_counts(cls, m: int, counts: dict[int, Fraction]) -> "Cyclotomic":
        vec = [Fraction(0)] * max(m, 1)
        for e, c in counts.items():
            vec[e % m if m > 1 else 0] += c
        if m <= 2:
            return cls(1, [vec[0] - (vec[1] if m == 2 else 0)])
        return cls(m, _reduce_mod_phi(vec, m))

    # structure --------------------------------------------------------------
    def lift(self, m: int) -> "Cyclotomic":
        if m == self.order:
            return self
        if m % self.order:
            raise ValueError(f"cannot lift order {self.order} to {m}")
        step = m // self.order
        vec = [Fraction(0)] * (max(m, 1) if m > 2 else 2)
        for i, c in enumerate(self.coeffs):
            vec[(i * step) % max(m, 1)] += c
        if m <= 2:
            return Cyclotomic(1, [vec[0]])
        return Cyclotomic(m, _reduce_mod_phi(vec, m))

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("element is not rational")
        return self.coeffs[0]

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def galois(self, a: int) -> "Cyclotomic":
        """Apply zeta_m -> zeta_m^a for a coprime to m."""
        m = self.order
        if m == 1:
            return self
        if math.gcd(a, m) != 1:
            raise ValueError("Galois exponent must be a unit")
        vec = [Fraction(0)] * m
        for i, c in enumerate(self.coeffs):
            vec[(i * a) % m] += c
        return Cyclotomic(m, _reduce_mod_phi(vec, m))

    def conjugate(self) -> "Cyclotomic":
        return self.galois(-1)

    def norm(self) -> Fraction:
        m = self.order
        prod_ = Cyclotomic.rational(1)
        for a in range(1, max(m, 2)):
            if math.gcd(a, m) == 1:
                prod_ = prod_ * self.galois(a)
        return prod_.to_fraction()

    def inverse(self) -> "Cyclotomic":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        m = self.order
        if m == 1:
            return Cyclotomic(1, [1 / self.coeffs[0]])
        others = Cyclotomic.rational(1)
        for a in range(2, m):
            if math.gcd(a, m) == 1:
                others = others * self.galois(a)
        n = (others * self).to_fraction()
        return others * Fraction(1, 1) / n

    def minimal_order(self) -> "Cyclotomic":
        """Rewrite the element in the smallest cyclotomic field containing it."""
        if self.order <= 2:
            return self
        for d in divisors(self.order):
            if d == self.order:
                return self
            if d == 2:
                continue
            cand = self._descend(d)
            if cand is not None:
                return cand
        return self

    def _descend(self, d: int) -> "Cyclotomic | None":
        # invariance under the subgroup fixing zeta_d is necessary and sufficient
        m = self.order
        for a in range(1, m):
            if math.gcd(a, m) == 1 and a % d == 1 and a != 1:
                if self.galois(a) != self:
                    return None
        # solve for coordinates in Q(zeta_d) by linear algebra over Q
        basis = [Cyclotomic.root_of_unity(d, j).lift(m) if d > 1 else Cyclotomic.rational(1).lift(m)
                 for j in range(len(cyclotomic_poly(d)) - 1)]
        sol = _solve_rational([list(b.coeffs) for b in basis], list(self.coeffs))
        if sol is None:
            return None
        return Cyclotomic(d if d > 1 else 1, sol)

    def to_complex(self) -> complex:
        m = self.order
        z = cmath.exp(2j * math.pi / m)
        return sum(complex(float(c)) * z ** i for i, c in enumerate(self.coeffs))

    # arithmetic -------------------------------------------------------------
    def _coerce(self, other) -> "Cyclotomic | None":
        if isinstance(other, Cyclotomic):
            return other
        if isinstance(other, (int, Fraction)):
            return Cyclotomic(1, [other])
        return None

    def _common(self, other: "Cyclotomic"):
        if self.order == other.order:
            return self, other
        m = lcm(self.order, other.order)
        return self.lift(m), other.lift(m)

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = self._common(o)
        return Cyclotomic(a.order, [x + y for x, y in zip(a.coeffs, b.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return Cyclotomic(self.order, [-c for c in self.coeffs])

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
            return Cyclotomic(self.order, [c * other for c in self.coeffs])
        if not isinstance(other, Cyclotomic):
            return NotImplemented
        a, b = self._common(other)
        if a.order == 1:
            return Cyclotomic(1, [a.coeffs[0] * b.coeffs[0]])
        n = len(a.coeffs)
        vec = [Fraction(0)] * (2 * n - 1)
        for i, x in enumerate(a.coeffs):
            if x:
                for j, y in enumerate(b.coeffs):
                    if y:
                        vec[i + j] += x * y
        return Cyclotomic(a.order, _reduce_mod_phi(vec, a.order))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return Cyclotomic(self.order, [c / other for c in self.coeffs])
        if isinstance(other, Cyclotomic):
            return self * other.inverse()
        return NotImplemented

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = Cyclotomic.rational(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = self._common(o)
        return a.coeffs == b.coeffs

    def __hash__(self):
        c = self.minimal_order()
        if c.order == 1:
            return hash(c.coeffs[0])
        return hash((c.order, c.coeffs))

    def __repr__(self):
        if self.order == 1:
            return f"Cyclotomic({self.coeffs[0]})"
        terms = [f"{c}*z{self.order}^{i}" for i, c in enumerate(self.coeffs) if c]
        return "Cyclotomic(" + (" + ".join(terms) or "0") + ")"


def _solve_rational(columns: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Solve sum_j x_j columns[j] = rhs exactly; None when inconsistent."""
    nrows, ncols = len(rhs), len(columns)
    rows = [[_frac(columns[j][i]) for j in range(ncols)] + [_frac(rhs[i])] for i in range(nrows)]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(nrows):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    if any(rows[i][-1] != 0 for i in range(r, nrows)):
        return None
    sol = [Fraction(0)] * ncols
    for i, c in enumerate(pivots):
        sol[c] = rows[i][-1]
    return sol


def normalize(x):
    """Collapse rational cyclotomic values to Fraction (or int when integral)."""
    if isinstance(x, Cyclotomic):
        if x.is_rational():
            x = x.coeffs[0]
        else:
            return x
    if isinstance(x, Fraction) and x.denominator == 1:
        return int(x)
    return x


def conj(x):
    return x.conjugate() if isinstance(x, Cyclotomic) else x


# ---------------------------------------------------------------------------
# unit groups (Z/NZ)^x with canonical generators


@lru_cache(maxsize=None)
def unit_group(n: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Canonical generators of (Z/nZ)^x and their orders.

    One generator per odd prime power (its least primitive root), -1 and 5 for
    2^e with e >= 3, -1 for 4; each generator is lifted by CRT to be 1 modulo
    the other prime-power factors.
    """
    if n <= 2:
        return (), ()
    gens, orders = [], []
    fac = factorint(n)
    for q, e in sorted(fac.items()):
        qe = q ** e
        rest = n // qe
        local: list[tuple[int, int]] = []
        if q == 2:
            if e == 2:
                local = [(3, 2)]
            elif e >= 3:
                local = [(qe - 1, 2), (5, 2 ** (e - 2))]
        else:
            local = [(int(_sympy_primitive_root(qe)), qe - qe // q)]
        for g, o in local:
            # CRT: x = g mod qe, x = 1 mod rest
            x = g if rest == 1 else (g * rest * pow(rest, -1, qe) + qe * pow(qe, -1, rest)) % n
            gens.append(x % n)
            orders.append(o)
    return tuple(gens), tuple(orders)


@lru_cache(maxsize=None)
def _dlog_table(n: int) -> dict[int, tuple[int, ...]]:
    """Map each unit mod n to its exponent vector on the canonical generators."""
    gens, orders = unit_group(n)
    table: dict[int, tuple[int, ...]] = {}
    for exps in product(*[range(o) for o in orders]):
        x = 1
        for g, e in zip(gens, exps):
            x = x * pow(g, e, n) % n
        table[x] = exps
    if n <= 2:
        table = {1 % max(n, 1): ()}
        if n == 2:
            table = {1: ()}
    return table


def discrete_log_vector(n: int, x: int) -> tuple[int, ...]:
    if n == 1:
        return ()
    return _dlog_table(n)[x % n]


# ---------------------------------------------------------------------------
# Dirichlet characters


class DirichletCharacter:
    """A character of (Z/NZ)^x stored by its values on the canonical generators.

    ``exponents[i] = e`` means chi(g_i) = zeta_{o_i}^e where o_i is the order of
    the i-th canonical generator.
    """

    __slots__ = ("modulus", "exponents", "_conductor")

    def __init__(self, modulus: int, exponents: Iterable[int] = ()):
        if modulus < 1:
            raise ValueError("modulus must be positive")
        _, orders = unit_group(modulus)
        exps = tuple(exponents)
        if not exps and orders:
            exps = (0,) * len(orders)
        if len(exps) != len(orders):
            raise ValueError("one exponent per canonical generator is required")
        self.modulus = modulus
        self.exponents = tuple(e % o for e, o in zip(exps, orders))
        self._conductor = None

    @classmethod
    def principal(cls, modulus: int = 1) -> "DirichletCharacter":
        return cls(modulus)

    @classmethod
    def from_generator_images(cls, modulus: int, images: list[tuple[int, int]]) -> "DirichletCharacter":
        """Build from (generator, exponent) pairs for arbitrary generators.

        The exponent e of generator g means chi(g) = zeta_{ord(g)}^e.  The
        generators must generate (Z/NZ)^x and the assignment must be consistent.
        """
        gens, orders = unit_group(modulus)
        if not gens:
            return cls(modulus)
        lam = 1
        for o in orders:
            lam = lcm(lam, o)
        # value of each unit as an exponent of zeta_lam, found by closure
        values = {1: 0}
        frontier = [1]
        steps = []
        for g, e in images:
            g %= modulus
            if math.gcd(g, modulus) != 1:
                raise ValueError(f"generator {g} is not a unit mod {modulus}")
            og = multiplicative_order(g, modulus)
            if lam % og:
                raise ValueError("generator order does not divide the group exponent")
            steps.append((g, (e % og) * (lam // og)))
        while frontier:
            nxt = []
            for x in frontier:
                for g, t in steps:
                    y = x * g % modulus
                    val = (values[x] + t) % lam
                    if y in values:
                        if values[y] != val:
                            raise ValueError("inconsistent generator images")
                    else:
                        values[y] = val
                        nxt.append(y)
            frontier = nxt
        if len(values) != euler_phi(modulus):
            raise ValueError("supplied generators do not generate the unit group")
        exps = []
        for g, o in zip(gens, orders):
            t = values[g]
            # zeta_lam^t = zeta_o^(t o / lam)
            if (t * o) % lam:
                raise ValueError("image order incompatible with generator order")
            exps.append(t * o // lam)
        return cls(modulus, exps)

    # basic data -------------------------------------------------------------
    @property
    def generators(self) -> tuple[int, ...]:
        return unit_group(self.modulus)[0]

    @property
    def generator_orders(self) -> tuple[int, ...]:
        return unit_group(self.modulus)[1]

    def generator_images(self) -> dict[int, Cyclotomic]:
        return {g: Cyclotomic.root_of_unity(o, e)
                for g, o, e in zip(self.generators, self.generator_orders, self.exponents)}

    def order(self) -> int:
        out = 1
        for o, e in zip(self.generator_orders, self.exponents):
            out = lcm(out, o // math.gcd(e, o))
        return out

    def is_principal(self) -> bool:
        return all(e == 0 for e in self.exponents)

    def value_exponent(self, n: int) -> tuple[int, int] | None:
        """chi(n) as (t, L) meaning zeta_L^t, or None when gcd(n, N) > 1."""
        if math.gcd(n, self.modulus) != 1:
            return None
        L = self.order()
        if L == 1:
            return (0, 1)
        vec = discrete_log_vector(self.modulus, n)
        t = 0
        for x, o, e in zip(vec, self.generator_orders, self.exponents):
            t += x * e * L // o
        return (t % L, L)

    def __call__(self, n: int):
        return char_eval(self, n)

    def conjugate(self) -> "DirichletCharacter":
        return DirichletCharacter(self.modulus, [-e for e in self.exponents])

    def parity(self) -> int:
        """chi(-1) as +1 or -1."""
        ex = self.value_exponent(-1)
        t, L = ex
        return 1 if t == 0 else -1

    def conductor(self) -> int:
        if self._conductor is None:
            self._conductor = _conductor(self)
        return self._conductor

    def is_primitive(self) -> bool:
        return self.conductor() == self.modulus

    def literal(self) -> str:
        pairs = ", ".join(f"({g},{e})" for g, e in zip(self.generators, self.exponents))
        return f"chi{{modulus={self.modulus}; gen_images=[{pairs}]}}"

    def __eq__(self, other):
        if not isinstance(other, DirichletCharacter):
            return NotImplemented
        return self.modulus == other.modulus and self.exponents == other.exponents

    def __hash__(self):
        return hash((self.modulus, self.exponents))

    def __repr__(self):
        return self.literal()


def multiplicative_order(g: int, n: int) -> int:
    if n == 1:
        return 1
    o, x = 1, g % n
    while x != 1:
        x = x * g % n
        o += 1
    return o


def char_eval(chi: DirichletCharacter, n: int) -> Cyclotomic:
    ex = chi.value_exponent(n)
    if ex is None:
        return Cyclotomic.rational(0)
    t, L = ex
    return Cyclotomic.root_of_unity(L, t)


def _lift_to_modulus(chi: DirichletCharacter, modulus: int) -> DirichletCharacter:
    """chi viewed modulo a multiple of its modulus (values agree on units)."""
    if modulus % chi.modulus:
        raise ValueError("target modulus must be a multiple")
    gens, orders = unit_group(modulus)
    exps = []
    for g, o in zip(gens, orders):
        t, L = chi.value_exponent(g)
        exps.append(t * o // L)
    return DirichletCharacter(modulus, exps)


def char_product(chi1: DirichletCharacter, chi2: DirichletCharacter) -> DirichletCharacter:
    m = lcm(chi1.modulus, chi2.modulus)
    a, b = _lift_to_modulus(chi1, m), _lift_to_modulus(chi2, m)
    return DirichletCharacter(m, [x + y for x, y in zip(a.exponents, b.exponents)])


def _conductor(chi: DirichletCharacter) -> int:
    N = chi.modulus
    cond = 1
    for q, e in factorint(N).items():
        qe = q ** e
        # smallest q^j such that chi is trivial on units = 1 mod q^j that are 1 mod N/q^e
        for j in range(e + 1):
            qj = q ** j
            trivial = True
            for x in range(1, qe, qj):
                if math.gcd(x, q) != 1:
                    continue
                rest = N // qe
                y = x if rest == 1 else (x * rest * pow(rest, -1, qe) + qe * pow(qe, -1, rest)) % N
                t, L = chi.value_exponent(y)
                if t % L:
                    trivial = False
                    break
            if trivial:
                cond *= qj
                break
    return cond


def char_primitivize(chi: DirichletCharacter) -> tuple[DirichletCharacter, int]:
    C = chi.conductor()
    gens, orders = unit_group(C)
    exps = []
    for h, o in zip(gens, orders):
        x = h
        while math.gcd(x, chi.modulus) != 1:
            x += C
        t, L = chi.value_exponent(x)
        exps.append(t * o // L)
    return DirichletCharacter(C, exps), C


def characters_mod(n: int) -> list[DirichletCharacter]:
    _, orders = unit_group(n)
    return [DirichletCharacter(n, exps) for exps in product(*[range(o) for o in orders])]


def gauss_sum(chi: DirichletCharacter) -> Cyclotomic:
    if not chi.is_primitive():
        raise ValueError("Gauss sum requires a primitive character")
    C = chi.modulus
    if C == 1:
        return Cyclotomic.rational(1)
    M = lcm(C, chi.order())
    counts: dict[int, Fraction] = {}
    for u in range(1, C):
        ex = chi.value_exponent(u)
        if ex is None:
            continue
        t, L = ex
        e = (t * (M // L) + u * (M // C)) % M
        counts[e] = counts.get(e, Fraction(0)) + 1
    return Cyclotomic.from_exponent_counts(M, counts)


# ---------------------------------------------------------------------------
# character literal syntax


_LITERAL = re.compile(r"^\s*chi\s*\{\s*modulus\s*=\s*(\d+)\s*;\s*gen_images\s*=\s*\[(.*)\]\s*\}\s*$")
_PAIR = re.compile(r"\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)")


def parse_character(text: str) -> DirichletCharacter:
    m = _LITERAL.match(text)
    if not m:
        raise ValueError(f"malformed character literal: {text!r}")
    modulus = int(m.group(1))
    body = m.group(2).strip()
    pairs = [(int(a), int(b)) for a, b in _PAIR.findall(body)]
    leftover = _PAIR.sub("", body).replace(",", "").strip()
    if leftover:
        raise ValueError(f"malformed generator list: {body!r}")
    return DirichletCharacter.from_generator_images(modulus, pairs)
