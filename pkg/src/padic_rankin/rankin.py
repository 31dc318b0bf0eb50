"""Rankin convolution coefficients, the polynomials P_s and the cusp forms K*, K~.

Two independent routes produce the coefficients of K~_{M'}(s):

* ``k_tilde`` sums the closed-form stratum coefficients ``d_coeff`` over
  C_f n1 + n2 = M' n;
* ``u_op(hol_project(k_star(...)), M')`` multiplies the twisted form by the
  Eisenstein Y-polynomial and projects.

The fast p-adic path (``stratum_pairs`` and ``pair_terms``) uses that the
character enters each divisor term only through chi(u) with u = -d / (C d'),
so one sweep over divisor pairs serves every tame character.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb

import numpy as np
import sympy

from .eisenstein import gstar_expansion
from .exactnum import (
    Cyclotomic,
    DirichletCharacter,
    char_primitivize,
    char_product,
    conj,
    divisors,
    lcm,
    normalize,
    valuation,
)
from .nearlyhol import NearlyHolExpansion, falling_factorial, nh_mul
from .padic import (
    PadicElement,
    UnsupportedExtensionError,
    embed_cyclotomic,
    hensel_unit_root,
    root_of_unity_int,
)
from .qexp import NewformData, QExpansion, TruncationError, twist, v_op


class AdmissibilityError(ValueError):
    """M' violates p^2 C_chi^2 | M' with p the only prime factor."""


# ---------------------------------------------------------------------------
# character values


def char_value(chi: DirichletCharacter, n: int):
    """chi(n) as 0, +-1 or a Cyclotomic (cheap for real characters)."""
    ex = chi.value_exponent(n)
    if ex is None:
        return 0
    t, L = ex
    if L == 1 or t == 0:
        return 1
    if 2 * t == L:
        return -1
    return Cyclotomic.root_of_unity(L, t)


def _is_zero(x) -> bool:
    return x == 0 if not isinstance(x, Cyclotomic) else x.is_zero()


# ---------------------------------------------------------------------------
# run context


@dataclass
class RankinContext:
    """Read-only data shared by every coefficient computation."""

    f: NewformData
    g: NewformData
    p: int
    precision: int = 30
    primitive_root: int | None = None
    alpha: PadicElement = field(init=False)
    alpha_prime: PadicElement = field(init=False)

    def __post_init__(self):
        if self.primitive_root is None:
            self.primitive_root = int(sympy.primitive_root(self.p))
        a_p = self.embed(self.f[self.p])
        c = self.embed(char_value(self.psi, self.p)) * self.p ** (self.k - 1)
        self.alpha, self.alpha_prime = hensel_unit_root(a_p, c, self.k, self.precision)

    @property
    def k(self) -> int:
        return self.f.weight

    @property
    def l(self) -> int:
        return self.g.weight

    @property
    def C_f(self) -> int:
        return self.f.conductor

    @property
    def C_g(self) -> int:
        return self.g.conductor

    @property
    def C(self) -> int:
        return self.C_f * self.C_g

    @property
    def psi(self) -> DirichletCharacter:
        return self.f.character

    @property
    def omega(self) -> DirichletCharacter:
        return self.g.character

    def embed(self, x) -> PadicElement:
        return embed_cyclotomic(x, self.p, self.precision, self.primitive_root)

    def b(self, n: int):
        return self.g.coeffs_upto(n)[n]

    def a(self, n: int):
        return self.f.coeffs_upto(n)[n]

    def theta(self, chi: DirichletCharacter) -> DirichletCharacter:
        """psi * conj(omega) * conj(chi)^2, the Eisenstein character."""
        chib = chi.conjugate()
        return char_product(char_product(self.psi, self.omega.conjugate()), char_product(chib, chib))

    def alpha_of(self, m: int) -> PadicElement:
        """alpha(m) for m a power of p."""
        e = valuation(m, self.p)
        if self.p ** e != m:
            raise AdmissibilityError(f"{m} is not a power of {self.p}")
        return self.alpha ** e


def check_admissible(mprime: int, chi: DirichletCharacter, p: int) -> None:
    """Condition (M'): p^2 C_chi^2 | M' and M' is a power of p."""
    e = valuation(mprime, p)
    if mprime < 1 or p ** e != mprime:
        raise AdmissibilityError(f"M' = {mprime} has a prime factor other than {p}")
    c = chi.conductor()
    if (mprime % (p * p * c * c)) != 0:
        raise AdmissibilityError(f"M' = {mprime} is not divisible by p^2 C_chi^2 = {p * p * c * c}")


# ---------------------------------------------------------------------------
# Dirichlet series


@dataclass
class DirichletSeriesCoeffs:
    """Coefficients c(1..B) of a Dirichlet series; ``s`` is bookkeeping only."""

    coeffs: list
    s: int
    label: str = ""

    @property
    def bound(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, n: int):
        if not 1 <= n <= self.bound:
            raise TruncationError(f"coefficient {n} outside 1..{self.bound}")
        return self.coeffs[n]

    def equals(self, other: "DirichletSeriesCoeffs") -> bool:
        B = min(self.bound, other.bound)
        return all(_is_zero(normalize(self.coeffs[n] - other.coeffs[n])) for n in range(1, B + 1))

    def first_mismatch(self, other: "DirichletSeriesCoeffs") -> int | None:
        for n in range(1, min(self.bound, other.bound) + 1):
            if not _is_zero(normalize(self.coeffs[n] - other.coeffs[n])):
                return n
        return None


def _check_bound(f: NewformData, g: NewformData, B: int) -> None:
    if B > f.n_max or B > g.n_max:
        raise TruncationError(f"bound {B} exceeds the truncations ({f.n_max}, {g.n_max})")


def rankin_coeffs(f: NewformData, g: NewformData, s: int, B: int) -> DirichletSeriesCoeffs:
    """L_N(2s+2-k-l, psi omega) * sum a(n) b(n) n^{-s} as a Dirichlet convolution.

    The first factor contributes psi omega(m) m^{k+l-2} at n = m^2 for (m, N) = 1.
    """
    _check_bound(f, g, B)
    k, l = f.weight, g.weight
    N = lcm(f.expansion.level, g.expansion.level)
    pw = char_product(f.character, g.character)
    out = [0] * (B + 1)
    for n in range(1, B + 1):
        total = 0
        m = 1
        while m * m <= n:
            if n % (m * m) == 0 and math.gcd(m, N) == 1:
                c = char_value(pw, m)
                if not _is_zero(c):
                    q = n // (m * m)
                    total = total + c * m ** (k + l - 2) * f[q] * g[q]
            m += 1
        out[n] = normalize(total)
    return DirichletSeriesCoeffs(out, s, "rankin")


def _local_factor(f: NewformData, g: NewformData, q: int) -> list:
    """Coefficients of prod (1 - alpha_i beta_j X) via symmetric functions.

    With a = alpha + alpha', c_f = alpha alpha', b = beta + beta', c_g = beta beta':
    e1 = ab, e2 = c_f b^2 + c_g a^2 - 2 c_f c_g, e3 = c_f c_g ab, e4 = c_f^2 c_g^2.
    A prime dividing a conductor kills that form's second root.
    """
    k, l = f.weight, g.weight
    a, b = f[q], g[q]
    cf = 0 if f.conductor % q == 0 else char_value(f.character, q) * q ** (k - 1)
    cg = 0 if g.conductor % q == 0 else char_value(g.character, q) * q ** (l - 1)
    e1 = a * b
    e2 = cf * b * b + cg * a * a - 2 * cf * cg
    e3 = cf * cg * a * b
    e4 = cf * cf * cg * cg
    return [1, -e1, e2, -e3, e4]


def euler_product_coeffs(f: NewformData, g: NewformData, s: int, B: int) -> DirichletSeriesCoeffs:
    """Expand the product of the degree-4 local factors up to n <= B.

    Only a(q), b(q) and the character values at primes q are read.
    """
    _check_bound(f, g, B)
    out = [0] * (B + 1)
    out[1] = 1
    for q in sympy.primerange(2, B + 1):
        poly = _local_factor(f, g, int(q))
        # power series of 1 / poly in X = q^{-s}
        e_max = 0
        while q ** (e_max + 1) <= B:
            e_max += 1
        inv = [1] + [0] * e_max
        for e in range(1, e_max + 1):
            acc = 0
            for j in range(1, min(4, e) + 1):
                acc = acc - poly[j] * inv[e - j]
            inv[e] = normalize(acc)
        # multiply into the q-free part (indices coprime to q already filled)
        new = list(out)
        for n in range(1, B + 1):
            if n % q == 0 or _is_zero(out[n]):
                continue
            qe = q
            for e in range(1, e_max + 1):
                if n * qe > B:
                    break
                new[n * qe] = normalize(out[n] * inv[e])
                qe *= q
        out = new
    return DirichletSeriesCoeffs(out, s, "euler")


# ---------------------------------------------------------------------------
# the polynomials P_s


@dataclass(frozen=True)
class PsPolynomial:
    """P_s(x, y) = sum_i coeffs[i] x^{-s-i} y^i, with Q_s kept alongside."""

    s: int
    k: int
    l: int
    coeffs: tuple[Fraction, ...]
    q_coeffs: tuple[int, ...]

    @property
    def degree(self) -> int:
        return -self.s

    def __call__(self, x, y) -> Fraction:
        r = -self.s
        return sum((c * Fraction(x) ** (r - i) * Fraction(y) ** i for i, c in enumerate(self.coeffs)), Fraction(0))

    def scaled(self, x: int, y: int) -> int:
        """Gamma(k-1) * P_s(x, y), an integer for integer arguments."""
        r = -self.s
        g = math.factorial(self.k - 2)
        total = g * x ** r
        for i, q in enumerate(self.q_coeffs, start=1):
            total += q * x ** (r - i) * y ** i
        return total

    def q_value(self, x: int, y: int) -> int:
        r = -self.s
        return sum(q * x ** (r - i) * y ** (i - 1) for i, q in enumerate(self.q_coeffs, start=1))


def _check_s_range(s: int, k: int, l: int) -> None:
    if k <= 2:
        raise ValueError("P_s needs k > 2")
    if not l - k + 1 <= s <= 0:
        raise ValueError(f"s = {s} outside [{l - k + 1}, 0]")


@lru_cache(maxsize=None)
def p_s_poly(s: int, k: int, l: int) -> PsPolynomial:
    """Both forms of P_s, asserted equal.

    The Gamma-sum form is evaluated with sympy's gamma (poles give zero ratios);
    the integer form builds Q_s from falling factorials and factorials.
    """
    _check_s_range(s, k, l)
    r = -s
    gamma_form = []
    for i in range(r + 1):
        val = (sympy.Integer(-1) ** i * sympy.binomial(r, i) * sympy.gamma(s + k - l) * sympy.gamma(k - i - 1)
               / (sympy.gamma(s + k - l - i) * sympy.gamma(k - 1)))
        val = sympy.nsimplify(val)
        gamma_form.append(Fraction(int(val.p), int(val.q)))
    q_coeffs = tuple((-1) ** i * comb(r, i) * falling_factorial(s + k - l - 1, i) * math.factorial(k - 2 - i)
                     for i in range(1, r + 1))
    gk = math.factorial(k - 2)
    integer_form = [Fraction(1)] + [Fraction(q, gk) for q in q_coeffs]
    if gamma_form != integer_form:
        raise ArithmeticError(f"the two forms of P_{s} disagree: {gamma_form} vs {integer_form}")
    return PsPolynomial(s, k, l, tuple(gamma_form), q_coeffs)


# ---------------------------------------------------------------------------
# stratum coefficients and the forms K*, K~


def d_coeff(n1: int, n2: int, s: int, chi: DirichletCharacter, ctx: RankinContext,
            mprime: int, n: int):
    """Exact coefficient of one (n1, n2) stratum of K~_{M'}(s) at e(nz)."""
    if ctx.C_f * n1 + n2 != mprime * n:
        raise ValueError(f"C_f n1 + n2 = {ctx.C_f * n1 + n2} != M' n = {mprime * n}")
    k, l = ctx.k, ctx.l
    _check_s_range(s, k, l)
    cn1 = char_value(chi, n1)
    if _is_zero(cn1):
        return 0
    b1 = ctx.b(n1)
    if b1 == 0:
        return 0
    P = p_s_poly(s, k, l)
    theta = ctx.theta(chi)
    e = 2 * s + k - l - 1
    y = mprime * n
    inner = 0
    for d in divisors(n2):
        t = char_value(theta, n2 // d)
        if _is_zero(t):
            continue
        dpow = d ** e if e >= 0 else Fraction(1, d ** -e)
        inner = inner + t * dpow
    if _is_zero(inner):
        return 0
    scale = Fraction(ctx.C_f * ctx.C_g) ** (-s) * Fraction(P.scaled(n2, y), math.factorial(k - 2))
    return normalize(2 * scale * conj(char_value(chi, ctx.C_g)) * cn1 * b1 * inner)


def k_star(s: int, chi: DirichletCharacter, ctx: RankinContext, n_max: int) -> NearlyHolExpansion:
    """C_f^{-s} C_g^{-s} conj(chi)(C_g) g(chi)|V_{C_f} * G*(z, s), non-constant part."""
    k, l = ctx.k, ctx.l
    m = n_max // ctx.C_f
    g_trunc = QExpansion(ctx.g.coeffs_upto(m), weight=l, level=ctx.C_g, character=ctx.omega)
    gchi = v_op(twist(g_trunc, chi, conductor=ctx.C_g), ctx.C_f).truncate(n_max) if ctx.C_f > 1 else \
        twist(g_trunc, chi, conductor=ctx.C_g)
    theta = ctx.theta(chi)
    G = gstar_expansion(k - l, s, theta, n_max)
    K = nh_mul(NearlyHolExpansion.from_qexp(gchi), G)
    scale = normalize(Fraction(ctx.C_f * ctx.C_g) ** (-s) * conj(char_value(chi, ctx.C_g)))
    K = K.scale(scale)
    return NearlyHolExpansion(K.layers, k, ctx.p * ctx.C * ctx.C_f, K.character)


@dataclass
class KTildeForm:
    expansion: QExpansion
    mprime: int
    s: int
    chi: DirichletCharacter

    def __getitem__(self, n: int):
        return self.expansion[n]

    def denominators_divide(self, m: int) -> bool:
        """Every coefficient times m is integral (cyclotomic coordinates included)."""
        for c in self.expansion.coeffs:
            parts = c.coeffs if isinstance(c, Cyclotomic) else (Fraction(c),)
            if any((Fraction(x) * m).denominator != 1 for x in parts):
                return False
        return True


def k_tilde(mprime: int, s: int, chi: DirichletCharacter, ctx: RankinContext, n_max: int,
            enforce_admissible: bool = True) -> KTildeForm:
    """sum_n sum_{C_f n1 + n2 = M' n} d(n1, n2; s, chi) e(nz) by direct summation."""
    if enforce_admissible:
        check_admissible(mprime, chi, ctx.p)
    need = (mprime * n_max - 1) // ctx.C_f
    ctx.g.coeffs_upto(need)  # fail fast on truncation
    out = [0] * (n_max + 1)
    for n in range(1, n_max + 1):
        total = 0
        y = mprime * n
        for n1 in range(1, (y - 1) // ctx.C_f + 1):
            c = d_coeff(n1, y - ctx.C_f * n1, s, chi, ctx, mprime, n)
            if not _is_zero(c):
                total = total + c
        out[n] = normalize(total)
    level = ctx.p * ctx.C * ctx.C_f
    return KTildeForm(QExpansion(out, weight=ctx.k, level=level, character=ctx.psi), mprime, s, chi)


def character_is_psi(K: NearlyHolExpansion, ctx: RankinContext) -> bool:
    """Metadata check: the product character collapses to psi."""
    return char_primitivize(K.character)[0] == char_primitivize(ctx.psi)[0]


# ---------------------------------------------------------------------------
# gamma(M') without the root number


@dataclass(frozen=True)
class GammaFactor:
    """gamma(M') / Lambda(g)^{-1} = rational * i^{k-l} * alpha(pM')^{-1}."""

    rational: Fraction
    i_power: int
    alpha_inverse: PadicElement

    def padic(self) -> PadicElement:
        ip = self.i_power % 4
        if ip % 2:
            raise UnsupportedExtensionError("i^{k-l} with k - l odd is not rational")
        sign = 1 if ip == 0 else -1
        return self.alpha_inverse * (sign * self.rational)


def gamma_omega_free(mprime: int, ctx: RankinContext) -> GammaFactor:
    k, l, p = ctx.k, ctx.l, ctx.p
    if k % 2:
        raise UnsupportedExtensionError("p^{k/2-1} is irrational for odd k")
    rat = Fraction(2) ** (k - l - 1) * Fraction(p) ** (k // 2 - 1) * Fraction(ctx.C_f) ** (l - 1)
    if (l - k) % 2:
        raise UnsupportedExtensionError("C_g^{(l-k)/2} is irrational for odd k - l")
    rat *= Fraction(ctx.C_g) ** ((l - k) // 2)
    return GammaFactor(rat, k - l, ctx.alpha_of(p * mprime).inverse())


# ---------------------------------------------------------------------------
# fast p-adic route for tame characters


def _modpow_vec(base: np.ndarray, e: int, mod: int) -> np.ndarray:
    out = np.ones_like(base)
    b = base % mod
    while e:
        if e & 1:
            out = out * b % mod
        e >>= 1
        if e:
            b = b * b % mod
    return out


def _inverse_vec(x: np.ndarray, p: int, digits: int) -> np.ndarray:
    """Inverses of units mod p^digits by Newton iteration from the mod-p inverse."""
    mod = p ** digits
    inv = np.array([0] + [pow(v, -1, p) for v in range(1, p)], dtype=np.int64)
    y = inv[x % p]
    m = p
    while m < mod:
        m = min(m * m, mod)
        y = y * ((2 - x * y) % m) % m
    return y % mod


@dataclass
class StratumPairs:
    """Every (n1, d, d') with C_f n1 + d d' = M' n for one output index n.

    Only divisor pairs with nonzero b(n1) psi conj(omega)(d') and p not dividing
    n1 are kept; ``u`` is -d / (C d') modulo p^digits.
    """

    mprime: int
    n: int
    n1: np.ndarray
    d: np.ndarray
    dp: np.ndarray
    weight0: np.ndarray  # 2 b(n1) psi conj(omega)(d') modulo p^digits
    u: np.ndarray
    digits: int


def stratum_pairs(ctx: RankinContext, mprime: int, n: int, digits: int) -> StratumPairs:
    p = ctx.p
    mod = p ** digits
    if mod * mod >= 2 ** 63:
        raise ValueError(f"{digits} digits overflow int64 products for p = {p}")
    y = mprime * n
    if y % p:
        raise AdmissibilityError("M' n must be divisible by p")
    b = np.array(ctx.g.coeffs_upto(y), dtype=object)
    pw = char_product(ctx.psi, ctx.omega.conjugate())
    pw_table = np.zeros(pw.modulus, dtype=np.int64)
    for r in range(pw.modulus):
        v = char_value(pw, r)
        pw_table[r] = 0 if _is_zero(v) else int(ctx.embed(v).residue()) % mod
    n1s, ds, dps = [], [], []
    for dp in range(1, y):
        if pw_table[dp % pw.modulus] == 0 or dp % p == 0:
            continue
        d = np.arange(1, (y - 1) // dp + 1, dtype=np.int64)
        d = d[d % p != 0]
        n2 = d * dp
        rem = y - n2
        keep = rem % ctx.C_f == 0
        d, n2, rem = d[keep], n2[keep], rem[keep]
        n1 = rem // ctx.C_f
        keep = n1 % p != 0
        n1s.append(n1[keep])
        ds.append(d[keep])
        dps.append(np.full(int(keep.sum()), dp, dtype=np.int64))
    n1 = np.concatenate(n1s) if n1s else np.zeros(0, dtype=np.int64)
    d = np.concatenate(ds) if ds else np.zeros(0, dtype=np.int64)
    dp = np.concatenate(dps) if dps else np.zeros(0, dtype=np.int64)
    bv = np.array([int(x) % mod for x in b[n1]], dtype=np.int64) if len(n1) else np.zeros(0, dtype=np.int64)
    keep = bv != 0
    n1, d, dp, bv = n1[keep], d[keep], dp[keep], bv[keep]
    w0 = 2 * bv % mod * pw_table[dp % pw.modulus] % mod
    cinv = pow(ctx.C, -1, mod)
    u = (-d % mod) * _inverse_vec(dp % mod, p, digits) % mod * cinv % mod
    return StratumPairs(mprime, n, n1, d, dp, w0, u, digits)


def pair_terms(ctx: RankinContext, pairs: StratumPairs, r: int) -> np.ndarray:
    """Per-pair factor of d(n1, n2; r-k+l+1, chi) with chi(u) removed, mod p^digits.

    2 b(n1) psi conj(omega)(d') C^{-s} d^{2s+k-l-1} P_s(n2, M' n).
    """
    k, l, p = ctx.k, ctx.l, ctx.p
    s = r - (k - l - 1)
    _check_s_range(s, k, l)
    mod = p ** pairs.digits
    gk = math.factorial(k - 2)
    if gk % p == 0:
        raise NotImplementedError("p divides Gamma(k-1); the fast route assumes unit denominators")
    P = p_s_poly(s, k, l)
    n2 = pairs.d * pairs.dp
    y = pairs.mprime * pairs.n % mod
    x = n2 % mod
    rdeg = -s
    # Gamma(k-1) P_s evaluated coefficientwise modulo p^digits
    val = gk % mod * _modpow_vec(x, rdeg, mod) % mod
    ypow = 1
    for i, q in enumerate(P.q_coeffs, start=1):
        ypow = ypow * y % mod
        val = (val + (q % mod) * ypow % mod * _modpow_vec(x, rdeg - i, mod)) % mod
    val = val * pow(gk, -1, mod) % mod
    e = 2 * s + k - l - 1
    dd = pairs.d % mod
    dpow = _modpow_vec(dd, e, mod) if e >= 0 else _modpow_vec(_inverse_vec(dd, p, pairs.digits), -e, mod)
    cpow = pow(ctx.C, -s, mod)
    return pairs.weight0 * cpow % mod * dpow % mod * val % mod


def tame_exponent(chi: DirichletCharacter, ctx: RankinContext) -> int:
    """j with chi(x) = teichmuller(x)^j, for chi of conductor dividing p."""
    if chi.modulus % ctx.p or chi.conductor() not in (1, ctx.p):
        raise UnsupportedExtensionError("only characters of conductor dividing p are tame")
    g = ctx.primitive_root
    ex = chi.value_exponent(g)
    if ex is None:
        raise ValueError("primitive root is not a unit for the character modulus")
    t, L = ex
    return (t * (ctx.p - 1) // L) % (ctx.p - 1)


def teichmuller_power_table(p: int, digits: int, primitive_root: int) -> np.ndarray:
    """T[j, a] = teichmuller(a)^j modulo p^digits for a in 0..p-1 (zero column at 0)."""
    mod = p ** digits
    T = np.zeros((p - 1, p), dtype=np.int64)
    w = root_of_unity_int(1, p - 1, p, digits, primitive_root)
    for e in range(p - 1):
        a = pow(primitive_root, e, p)
        for j in range(p - 1):
            T[j, a] = pow(w, e * j, mod)
    return T


# ---------------------------------------------------------------------------
# Dirichlet-coefficient identities behind the M'-independence


def stabilized_coeff(ctx: RankinContext, n: int) -> PadicElement:
    """A(n) = a(n) - alpha' a(n/p), read through Hecke multiplicativity when n is large."""
    a = hecke_coeff(ctx.f, n)
    out = ctx.embed(a)
    if n % ctx.p == 0:
        out = out - ctx.alpha_prime * ctx.embed(hecke_coeff(ctx.f, n // ctx.p))
    return out


def hecke_coeff(f: NewformData, n: int):
    """a(n) from prime-power coefficients, so indices past the truncation are reachable."""
    if n <= f.n_max:
        return f[n]
    total = 1
    for q, e in sympy.factorint(n).items():
        total = normalize(total * _prime_power_coeff(f, int(q), int(e)))
    return total


def _prime_power_coeff(f: NewformData, q: int, e: int):
    if q ** e <= f.n_max:
        return f[q ** e]
    aq = f[q]
    c = 0 if f.conductor % q == 0 else char_value(f.character, q) * q ** (f.weight - 1)
    prev, cur = 1, aq
    for _ in range(e - 1):
        prev, cur = cur, normalize(aq * cur - c * prev)
    return cur


@dataclass
class NormalizedSeries:
    """Terms of (p M')^{s-l/2} alpha(pM')^{-1} * L(s, f0|V_{C_f}, g(chi)|w) after rescaling."""

    mprime: int
    s: int
    terms: list  # PadicElement per m = 1..B (index 0 unused)


def prop41_series(ctx: RankinContext, chi: DirichletCharacter, s: int, mprime: int, B: int) -> NormalizedSeries:
    """Normalized Dirichlet coefficients at level M', read off A(M1 m) B(m).

    B(m) is the m-th coefficient of g(chi)|w, which is supported on p^2 | m and
    equals p^l conj(b)(m/p^2) conj(chi)(m/p^2) up to the symbolic root number.
    The Rankin coefficient at index M1 C_f m is (M1 C_f)^{l/2} A(M1 m) B(m).
    """
    check_admissible(mprime, chi, ctx.p)
    p, l = ctx.p, ctx.l
    if l % 2:
        raise UnsupportedExtensionError("odd l needs square roots of the level")
    cchi = chi.conductor()
    M1 = mprime // (p * cchi * cchi)
    half = l // 2
    norm = ctx.alpha_of(p * mprime).inverse() * (Fraction(p * mprime * ctx.C_f) ** (s - half))
    terms = [None]
    for m in range(1, B + 1):
        if m % (p * p):
            terms.append(PadicElement.zero(p))
            continue
        mm = m // (p * p)
        bchi = normalize(conj(ctx.b(mm)) * conj(char_value(chi, mm)))
        if _is_zero(bchi):
            terms.append(PadicElement.zero(p))
            continue
        Bm = ctx.embed(bchi) * p ** l
        A = stabilized_coeff(ctx, M1 * m)
        index = M1 * ctx.C_f * m
        val = A * Bm * Fraction(M1 * ctx.C_f) ** half / Fraction(index) ** s
        terms.append(norm * val)
    return NormalizedSeries(mprime, s, terms)


def stabilized_shift_identity(ctx: RankinContext, M1: int, m: int) -> bool:
    """A(M1 m) = alpha(M1) A(m) for M1 a power of p."""
    lhs = stabilized_coeff(ctx, M1 * m)
    rhs = ctx.alpha_of(M1) * stabilized_coeff(ctx, m)
    return (lhs - rhs).is_zero()


__all__ = [
    "AdmissibilityError",
    "DirichletSeriesCoeffs",
    "GammaFactor",
    "KTildeForm",
    "NormalizedSeries",
    "PsPolynomial",
    "RankinContext",
    "StratumPairs",
    "char_value",
    "character_is_psi",
    "check_admissible",
    "d_coeff",
    "euler_product_coeffs",
    "gamma_omega_free",
    "hecke_coeff",
    "k_star",
    "k_tilde",
    "p_s_poly",
    "pair_terms",
    "prop41_series",
    "rankin_coeffs",
    "stabilized_coeff",
    "stabilized_shift_identity",
    "stratum_pairs",
    "tame_exponent",
    "teichmuller_power_table",
]
