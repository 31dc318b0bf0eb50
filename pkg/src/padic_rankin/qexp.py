"""Truncated q-expansions with weight, level and character metadata.

Coefficients may be ``int``, ``Fraction``, ``Cyclotomic`` or ``PadicElement``.
Indexing past the truncation bound raises ``TruncationError``; nothing is ever
zero-filled silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .exactnum import (
    Cyclotomic,
    DirichletCharacter,
    char_eval,
    char_product,
    conj,
    cyclotomic_poly,
    divisors,
    lcm,
    normalize,
)
from .padic import PadicElement, embed_cyclotomic


class TruncationError(IndexError):
    """Access to a coefficient that was never computed."""


class NewformValidationError(ValueError):
    """An ingested eigenform violates a Hecke identity."""


class QExpansion:
    __slots__ = ("coeffs", "weight", "level", "character")

    def __init__(self, coeffs: Sequence, weight: int = 0, level: int = 1,
                 character: DirichletCharacter | None = None):
        self.coeffs = [normalize(c) for c in coeffs]
        if not self.coeffs:
            raise ValueError("an expansion needs at least the constant coefficient")
        self.weight = weight
        self.level = level
        self.character = character if character is not None else DirichletCharacter(1)

    @classmethod
    def from_function(cls, fn: Callable[[int], object], n_max: int, start: int = 1, **meta) -> "QExpansion":
        return cls([0] * start + [fn(n) for n in range(start, n_max + 1)], **meta)

    @property
    def n_max(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, n: int):
        if n < 0 or n > self.n_max:
            raise TruncationError(f"coefficient {n} requested, expansion known to q^{self.n_max}")
        return self.coeffs[n]

    def __len__(self):
        return len(self.coeffs)

    def meta(self, **changes) -> dict:
        out = {"weight": self.weight, "level": self.level, "character": self.character}
        out.update(changes)
        return out

    def truncate(self, n_max: int) -> "QExpansion":
        if n_max > self.n_max:
            raise TruncationError(f"cannot extend truncation from {self.n_max} to {n_max}")
        return QExpansion(self.coeffs[: n_max + 1], **self.meta())

    def map(self, fn: Callable) -> "QExpansion":
        return QExpansion([fn(c) for c in self.coeffs], **self.meta())

    def scale(self, c) -> "QExpansion":
        return self.map(lambda x: x * c)

    def __add__(self, other: "QExpansion") -> "QExpansion":
        n = min(self.n_max, other.n_max)
        return QExpansion([a + b for a, b in zip(self.coeffs[: n + 1], other.coeffs[: n + 1])], **self.meta())

    def __sub__(self, other: "QExpansion") -> "QExpansion":
        n = min(self.n_max, other.n_max)
        return QExpansion([a - b for a, b in zip(self.coeffs[: n + 1], other.coeffs[: n + 1])], **self.meta())

    def __neg__(self):
        return self.map(lambda x: -x)

    def is_zero(self) -> bool:
        return all(_is_zero(c) for c in self.coeffs)

    def coefficients_equal(self, other: "QExpansion", start: int = 0) -> bool:
        n = min(self.n_max, other.n_max)
        return all(_eq(self.coeffs[i], other.coeffs[i]) for i in range(start, n + 1))

    def __repr__(self):
        shown = ", ".join(str(c) for c in self.coeffs[: min(8, len(self.coeffs))])
        return f"QExpansion([{shown}{', ...' if self.n_max >= 8 else ''}], n_max={self.n_max}, k={self.weight}, N={self.level})"


def _is_zero(c) -> bool:
    if isinstance(c, PadicElement):
        return c.is_zero()
    if isinstance(c, Cyclotomic):
        return c.is_zero()
    return c == 0


def _eq(a, b) -> bool:
    if isinstance(a, PadicElement) or isinstance(b, PadicElement):
        return _is_zero(a - b)
    return a == b


@dataclass
class NewformData:
    """A validated primitive eigenform.

    ``extender`` optionally produces coefficients beyond the stored truncation
    (for example from an eta-product identity); without it, longer ranges raise
    TruncationError.
    """

    expansion: QExpansion
    conductor: int
    is_primitive: bool = True
    root_number_tag: str = "Lambda"
    extender: Callable[[int], list] | None = field(default=None, repr=False)
    _extended: list | None = field(default=None, repr=False)

    @property
    def weight(self) -> int:
        return self.expansion.weight

    @property
    def character(self) -> DirichletCharacter:
        return self.expansion.character

    def __getitem__(self, n: int):
        return self.expansion[n]

    @property
    def n_max(self) -> int:
        return self.expansion.n_max

    def coeffs_upto(self, n: int) -> list:
        """Coefficients a(0..n), extending past the stored truncation if possible."""
        if n <= self.expansion.n_max:
            return self.expansion.coeffs[: n + 1]
        if self._extended is not None and len(self._extended) > n:
            return self._extended[: n + 1]
        if self.extender is None:
            raise TruncationError(f"coefficient {n} requested, form known to q^{self.expansion.n_max}")
        ext = list(self.extender(n))
        if len(ext) <= n:
            raise TruncationError("extender returned too few coefficients")
        overlap = self.expansion.n_max
        if any(not _eq(ext[i], self.expansion.coeffs[i]) for i in range(overlap + 1)):
            raise NewformValidationError("extended coefficients disagree with the stored expansion")
        self._extended = ext
        return ext[: n + 1]


# ---------------------------------------------------------------------------
# operators


def u_op(f: QExpansion, d: int) -> QExpansion:
    """f | U_d: coefficient n becomes a(dn)."""
    if d < 1:
        raise ValueError("d must be positive")
    n_max = f.n_max // d
    if n_max < 1 and f.n_max >= 1:
        raise TruncationError(f"U_{d} needs coefficients up to {d}, have {f.n_max}")
    level = f.level // d if f.level % (d * d) == 0 else f.level
    return QExpansion([f.coeffs[d * n] for n in range(n_max + 1)], **f.meta(level=level))


def v_op(f: QExpansion, d: int) -> QExpansion:
    """f | V_d = f(dz); truncation grows to d * n_max."""
    if d < 1:
        raise ValueError("d must be positive")
    out = [0] * (d * f.n_max + 1)
    for n, c in enumerate(f.coeffs):
        out[d * n] = c
    return QExpansion(out, **f.meta(level=f.level * d))


def twist(g: QExpansion, chi: DirichletCharacter, conductor: int | None = None) -> QExpansion:
    """Coefficient n becomes chi(n) b(n)."""
    out = [0] * (g.n_max + 1)
    for n in range(1, g.n_max + 1):
        b = g.coeffs[n]
        if _is_zero(b):
            continue
        ex = chi.value_exponent(n)
        if ex is None:
            continue
        t, L = ex
        if L == 1 or t == 0:
            out[n] = b
        elif 2 * t == L:
            out[n] = -b
        else:
            out[n] = Cyclotomic.root_of_unity(L, t) * b
    cg = conductor if conductor is not None else g.level
    cchi = chi.conductor()
    if math.gcd(cchi, cg) == 1:
        level = cg * cchi * cchi
    else:
        level = lcm(g.level, chi.modulus ** 2)
    chi2 = char_product(chi, chi)
    return QExpansion(out, **g.meta(level=level, character=char_product(g.character, chi2)))


def rho(f: QExpansion) -> QExpansion:
    """Complex conjugation of coefficients (zeta -> zeta^{-1})."""
    return QExpansion([conj(c) for c in f.coeffs], **f.meta(character=f.character.conjugate()))


def hecke_t(f: QExpansion, n: int) -> QExpansion:
    """T_n via a(m, T_n f) = sum_{d | (m, n)} psi(d) d^{k-1} a(mn / d^2)."""
    k = f.weight
    psi = f.character
    if psi.modulus != f.level and f.level % psi.modulus == 0:
        from .exactnum import _lift_to_modulus
        psi = _lift_to_modulus(psi, f.level)
    m_max = f.n_max // n
    if m_max < 1:
        raise TruncationError(f"T_{n} needs coefficients up to {n}, have {f.n_max}")
    out = [f.coeffs[0] * _sigma_const(psi, k, n)] if not _is_zero(f.coeffs[0]) else [0]
    for m in range(1, m_max + 1):
        total = 0
        for d in divisors(math.gcd(m, n)):
            if math.gcd(d, f.level) != 1:
                continue
            total = total + char_eval(psi, d) * d ** (k - 1) * f.coeffs[m * n // (d * d)]
        out.append(normalize(total))
    return QExpansion(out, **f.meta())


def _sigma_const(psi, k, n):
    # constant term of T_n for Eisenstein-type inputs: sum over d | n of psi(d) d^{k-1}
    return sum(char_eval(psi, d) * d ** (k - 1) for d in divisors(n))


def p_stabilize(f: NewformData, alpha_prime: PadicElement, primitive_root: int | None = None) -> QExpansion:
    """a(n, f_0) = a(n, f) - alpha' a(n/p, f), with coefficients moved into Q_p."""
    p = alpha_prime.p
    if f.conductor % p == 0:
        raise ValueError("p-stabilization requires p not dividing the conductor")
    prec = alpha_prime.prec if not alpha_prime.exact_zero else 40
    g = primitive_root if primitive_root is not None else _least_primitive_root(p)
    emb = [embed_cyclotomic(c if isinstance(c, Cyclotomic) else Cyclotomic.rational(c), p, prec, g)
           if not isinstance(c, PadicElement) else c
           for c in f.expansion.coeffs]
    out = []
    for n, c in enumerate(emb):
        if n % p == 0 and n > 0:
            c = c - alpha_prime * emb[n // p]
        out.append(c)
    out[0] = emb[0] if f.expansion.coeffs[0] != 0 else 0
    return QExpansion(out, **f.expansion.meta(level=f.expansion.level * p))


def _least_primitive_root(p: int) -> int:
    from sympy import primitive_root
    return int(primitive_root(p))


# ---------------------------------------------------------------------------
# products


def qexp_mul(f: QExpansion, h: QExpansion) -> QExpansion:
    """Cauchy product truncated at the smaller bound."""
    n = min(f.n_max, h.n_max)
    a, b = f.coeffs[: n + 1], h.coeffs[: n + 1]
    meta = dict(weight=f.weight + h.weight, level=lcm(f.level, h.level),
                character=char_product(f.character, h.character))
    if any(isinstance(c, PadicElement) for c in a + b):
        out = [0] * (n + 1)
        for i, x in enumerate(a):
            if _is_zero(x):
                continue
            for j in range(n + 1 - i):
                y = b[j]
                if not _is_zero(y):
                    out[i + j] = out[i + j] + x * y
        return QExpansion(out, **meta)
    return QExpansion(convolve_exact(a, b, n), **meta)


def convolve_exact(a: list, b: list, n: int) -> list:
    """Truncated convolution of exact coefficient lists (int/Fraction/Cyclotomic)."""
    order = 1
    for c in a + b:
        if isinstance(c, Cyclotomic):
            order = lcm(order, c.order)
    if order == 1:
        x = np.array([_rat(c) for c in a], dtype=object)
        y = np.array([_rat(c) for c in b], dtype=object)
        return [normalize(c) for c in np.convolve(x, y)[: n + 1]]
    deg = len(cyclotomic_poly(order)) - 1
    ca = _coordinates(a, order, deg)
    cb = _coordinates(b, order, deg)
    prod: dict[int, np.ndarray] = {}
    for i, xa in ca.items():
        for j, yb in cb.items():
            conv = np.convolve(xa, yb)[: n + 1]
            prod[i + j] = prod[i + j] + conv if (i + j) in prod else conv
    out = []
    for idx in range(n + 1):
        vec = [0] * (2 * deg - 1)
        for e, arr in prod.items():
            vec[e] = arr[idx]
        out.append(normalize(Cyclotomic(order, vec)))
    return out


def _rat(c):
    if isinstance(c, Cyclotomic):
        return c.to_fraction()
    return c


def _coordinates(a: list, order: int, deg: int) -> dict[int, np.ndarray]:
    cols: dict[int, np.ndarray] = {}
    for idx, c in enumerate(a):
        if isinstance(c, Cyclotomic):
            co = c.lift(order).coeffs
            for i, v in enumerate(co):
                if v:
                    if i not in cols:
                        cols[i] = np.zeros(len(a), dtype=object)
                    cols[i][idx] = v
        elif c != 0:
            if 0 not in cols:
                cols[0] = np.zeros(len(a), dtype=object)
            cols[0][idx] = c
    return cols


# ---------------------------------------------------------------------------
# eta products and the built-in fixtures


def euler_function_series(n_max: int, step: int = 1) -> np.ndarray:
    """prod_{n>=1} (1 - q^{step n}) to q^{n_max}, via the pentagonal number theorem."""
    out = np.zeros(n_max + 1, dtype=np.int64)
    k = 0
    while True:
        hit = False
        for kk in ((k, -k) if k else (0,)):
            e = step * kk * (3 * kk - 1) // 2
            if e <= n_max:
                out[e] += -1 if kk % 2 else 1
                hit = True
        if not hit and k > 0:
            break
        k += 1
    return out


def eta_product_coeffs(exponents: dict[int, int], n_max: int, q_shift: int | None = None,
                       dtype=object) -> list[int]:
    """Coefficients of prod_d eta(dz)^{e_d} as a q-series, to q^{n_max}.

    The leading power q^{sum d e_d / 24} must be a non-negative integer.  Pass
    ``dtype=np.int64`` only when the partial products are known to stay small
    (weight two products do); it is much faster for long expansions.
    """
    lead = sum(d * e for d, e in exponents.items())
    if lead % 24:
        raise ValueError("eta quotient is not a q-series with integral exponents")
    shift = lead // 24 if q_shift is None else q_shift
    body_len = n_max - shift
    if body_len < 0:
        return [0] * (n_max + 1)
    series = np.zeros(body_len + 1, dtype=dtype)
    series[0] = 1
    for d, e in sorted(exponents.items()):
        if e < 0:
            raise ValueError("only holomorphic eta products are supported")
        base = euler_function_series(body_len, d)
        for _ in range(e):
            series = _sparse_mul(series, base, body_len, dtype)
    return [0] * shift + [int(c) for c in series]


def _sparse_mul(dense: np.ndarray, sparse: np.ndarray, n: int, dtype=object) -> np.ndarray:
    out = np.zeros(n + 1, dtype=dtype)
    for e in np.nonzero(sparse)[0]:
        c = int(sparse[e])
        out[e:] += c * dense[: n + 1 - e]
    return out


def eta_delta(n_max: int) -> NewformData:
    """The weight 12 level 1 form q prod (1 - q^n)^24."""
    coeffs = _delta_coeffs(n_max)
    f = QExpansion(coeffs, weight=12, level=1, character=DirichletCharacter(1))
    return NewformData(f, conductor=1)


def _delta_coeffs(n_max: int) -> list[int]:
    if n_max < 1:
        return [0] * (n_max + 1)
    body = n_max - 1
    e = np.array(euler_function_series(body), dtype=object)
    # (prod)^24 by repeated squaring of truncated series
    result = np.zeros(body + 1, dtype=object)
    result[0] = 1
    base = e
    power = 24
    while power:
        if power & 1:
            result = np.convolve(result, base)[: body + 1]
        power >>= 1
        if power:
            base = np.convolve(base, base)[: body + 1]
    return [0] + [int(c) for c in result]


# ---------------------------------------------------------------------------
# validation


def validate_newform(f: QExpansion, strict_bound: int | None = None) -> None:
    """Check normalization, multiplicativity and the prime-power recurrence.

    Raises NewformValidationError naming the first violated identity.
    """
    a = f.coeffs
    B = f.n_max if strict_bound is None else min(strict_bound, f.n_max)
    if B < 1:
        raise NewformValidationError("no coefficients")
    if not _eq(a[1], 1):
        raise NewformValidationError(f"a(1) = {a[1]}, expected 1")
    for m in range(2, B + 1):
        for n in range(m + 1, B // m + 1):
            if math.gcd(m, n) == 1 and not _eq(a[m * n], a[m] * a[n]):
                raise NewformValidationError(f"a({m * n}) != a({m}) a({n})")
    k = f.weight
    psi = f.character
    from sympy import primerange
    for q in primerange(2, B + 1):
        qr = q
        while qr * q <= B:
            lhs = a[qr * q]
            if f.level % q:
                rhs = a[q] * a[qr] - char_eval(psi, q) * q ** (k - 1) * a[qr // q]
            else:
                rhs = a[q] * a[qr]
            if not _eq(lhs, normalize(rhs)):
                raise NewformValidationError(f"prime-power recurrence fails at a({qr * q}) for q = {q}")
            qr *= q
