"""Fixed-precision p-adic numbers for odd primes.

An element is stored as ``p**val * unit`` where ``unit`` is known modulo
``p**prec``.  ``prec`` is the relative precision.  Exact zero is a separate
state with infinite valuation; an inexact zero (all known digits vanish) keeps
its absolute precision in ``val`` with ``prec == 0``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

from .exactnum import Cyclotomic, valuation


class PrecisionError(ArithmeticError):
    """Raised when the carried precision cannot certify the requested fact."""


class UnsupportedExtensionError(ValueError):
    """A root of unity whose order does not divide p - 1 (needs a ramified or unramified extension)."""


class WildExtensionError(UnsupportedExtensionError):
    """A root of unity of p-power order: the wild (ramified) extension point."""


# used when an exact zero meets a rational and no other precision is known
DEFAULT_PRECISION = 40


def _check_prime(p: int) -> None:
    if p < 3 or p % 2 == 0:
        raise ValueError(f"p must be an odd prime, got {p}")


class PadicElement:
    __slots__ = ("p", "unit", "val", "prec", "exact_zero")

    def __init__(self, p: int, unit: int, val: int, prec: int, exact_zero: bool = False):
        self.p = p
        self.exact_zero = exact_zero
        if exact_zero:
            self.unit, self.val, self.prec = 0, 0, 0
            return
        if prec < 0:
            raise ValueError("negative precision")
        if prec == 0:
            self.unit, self.val, self.prec = 0, val, 0
            return
        mod = p ** prec
        unit %= mod
        if unit == 0:
            # every known digit vanished
            self.unit, self.val, self.prec = 0, val + prec, 0
            return
        k = 0
        while unit % p == 0:
            unit //= p
            k += 1
        self.unit = unit % p ** (prec - k)
        self.val = val + k
        self.prec = prec - k
        if self.prec == 0:
            self.unit = 0

    # constructors -----------------------------------------------------------
    @classmethod
    def zero(cls, p: int) -> "PadicElement":
        return cls(p, 0, 0, 0, exact_zero=True)

    @classmethod
    def from_rational(cls, x, p: int, N: int) -> "PadicElement":
        """Embed a rational with N digits of relative precision."""
        x = Fraction(x)
        if x == 0:
            return cls.zero(p)
        num, den = x.numerator, x.denominator
        v = 0
        while num % p == 0:
            num //= p
            v += 1
        while den % p == 0:
            den //= p
            v -= 1
        mod = p ** N
        return cls(p, num * pow(den, -1, mod), v, N)

    @classmethod
    def with_absolute_precision(cls, x, p: int, absprec: int) -> "PadicElement":
        """Embed a rational known modulo p**absprec."""
        x = Fraction(x)
        if x == 0:
            return cls(p, 0, absprec, 0)
        v = valuation(x.numerator, p) - valuation(x.denominator, p)
        if absprec <= v:
            return cls(p, 0, absprec, 0)
        return cls.from_rational(x, p, absprec - v)

    # data -------------------------------------------------------------------
    @property
    def absprec(self) -> float:
        return math.inf if self.exact_zero else self.val + self.prec

    @property
    def valuation(self) -> float:
        """p-adic valuation; for an inexact zero this is only a lower bound."""
        if self.exact_zero:
            return math.inf
        return self.val

    def is_zero(self) -> bool:
        """True when no nonzero digit is known (exact or inexact zero)."""
        return self.exact_zero or self.prec == 0

    def is_unit(self) -> bool:
        return not self.is_zero() and self.val == 0

    def abs(self) -> float:
        if self.is_zero():
            return 0.0
        return float(self.p) ** (-self.val)

    def residue(self) -> int:
        """Integer representative modulo p**absprec (requires val >= 0)."""
        if self.exact_zero:
            return 0
        if self.val < 0:
            raise ValueError("element is not integral")
        return (self.unit * self.p ** self.val) % self.p ** (self.val + self.prec)

    def to_fraction(self) -> Fraction:
        """Rational representative p**val * unit."""
        if self.exact_zero or self.prec == 0:
            return Fraction(0)
        return Fraction(self.unit) * Fraction(self.p) ** self.val

    def with_precision(self, absprec: int) -> "PadicElement":
        """Drop digits beyond absolute precision absprec."""
        if self.exact_zero:
            return PadicElement(self.p, 0, absprec, 0)
        if absprec >= self.absprec:
            return self
        if absprec <= self.val:
            return PadicElement(self.p, 0, absprec, 0)
        return PadicElement(self.p, self.unit, self.val, absprec - self.val)

    # congruence verdicts ----------------------------------------------------
    def is_zero_mod(self, m: int) -> bool:
        """Decide whether the element lies in p**m Z_p.

        Raises PrecisionError when the known digits cannot decide it.
        """
        if self.exact_zero:
            return True
        if self.prec > 0:
            return self.val >= m
        if self.val >= m:
            return True
        raise PrecisionError(f"element known only modulo p^{self.val}, cannot certify divisibility by p^{m}")

    def congruent(self, other, m: int) -> bool:
        return (self - other).is_zero_mod(m)

    # arithmetic -------------------------------------------------------------
    def _coerce(self, other, absprec_hint=None) -> "PadicElement | None":
        if isinstance(other, PadicElement):
            if other.p != self.p:
                raise ValueError("mixing different primes")
            return other
        if isinstance(other, Cyclotomic):
            if not other.is_rational():
                return None
            other = other.coeffs[0]
        if isinstance(other, (int, Fraction)):
            x = Fraction(other)
            if x == 0:
                return PadicElement.zero(self.p)
            v = valuation(x.numerator, self.p) - valuation(x.denominator, self.p)
            if self.exact_zero:
                return PadicElement.from_rational(x, self.p, DEFAULT_PRECISION)
            need = max(self.prec, int(self.absprec) - v, 1)
            return PadicElement.from_rational(x, self.p, need)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.exact_zero:
            return o
        if o.exact_zero:
            return self
        p = self.p
        A = min(self.absprec, o.absprec)
        v = min(self.val, o.val)
        if A <= v:
            return PadicElement(p, 0, A, 0)
        total = self.unit * p ** (self.val - v) + o.unit * p ** (o.val - v)
        return PadicElement(p, total, v, A - v)

    __radd__ = __add__

    def __neg__(self):
        if self.exact_zero:
            return self
        return PadicElement(self.p, -self.unit, self.val, self.prec)

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
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.exact_zero or o.exact_zero:
            return PadicElement.zero(self.p)
        if self.prec == 0 or o.prec == 0:
            return PadicElement(self.p, 0, self.val + o.val, 0)
        prec = min(self.prec, o.prec)
        return PadicElement(self.p, self.unit * o.unit, self.val + o.val, prec)

    __rmul__ = __mul__

    def inverse(self) -> "PadicElement":
        if self.exact_zero:
            raise ZeroDivisionError("division by exact zero")
        if self.prec == 0:
            raise PrecisionError("division by an element with no known nonzero digit")
        return PadicElement(self.p, pow(self.unit, -1, self.p ** self.prec), -self.val, self.prec)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        if e == 0:
            return PadicElement.from_rational(1, self.p, max(self.prec, 1) if not self.exact_zero else DEFAULT_PRECISION)
        if self.exact_zero:
            return self
        if self.prec == 0:
            return PadicElement(self.p, 0, self.val * e, 0)
        return PadicElement(self.p, pow(self.unit, e, self.p ** self.prec), self.val * e, self.prec)

    def __eq__(self, other):
        """Equality of the known digits (agreement to the common absolute precision)."""
        try:
            o = self._coerce(other)
        except ValueError:
            return False
        if o is None:
            return NotImplemented
        d = self - o
        return d.is_zero()

    __hash__ = None

    def __repr__(self):
        if self.exact_zero:
            return f"PadicElement(0, p={self.p}, exact)"
        if self.prec == 0:
            return f"PadicElement(O({self.p}^{self.val}))"
        return f"PadicElement({self.unit}*{self.p}^{self.val} + O({self.p}^{self.absprec}))"


def padic_from(x, p: int, N: int) -> PadicElement:
    if isinstance(x, PadicElement):
        return x
    if isinstance(x, Cyclotomic):
        return PadicElement.from_rational(x.to_fraction(), p, N)
    return PadicElement.from_rational(x, p, N)


# ---------------------------------------------------------------------------
# Teichmuller lifts and the embedding of roots of unity


@lru_cache(maxsize=None)
def teichmuller_int(u: int, p: int, N: int) -> int:
    """Teichmuller representative of u as an integer modulo p**N."""
    if u % p == 0:
        raise ValueError(f"{u} is divisible by {p}")
    mod = p ** N
    x = u % mod
    # each Frobenius step fixes one more digit
    for _ in range(N):
        y = pow(x, p, mod)
        if y == x:
            break
        x = y
    return x


def teichmuller(u: int, p: int, N: int) -> PadicElement:
    _check_prime(p)
    return PadicElement(p, teichmuller_int(u, p, N), 0, N)


@lru_cache(maxsize=None)
def root_of_unity_int(t: int, L: int, p: int, N: int, primitive_root: int) -> int:
    """Image of zeta_L**t modulo p**N, for L dividing p - 1."""
    if (p - 1) % L:
        if L % p == 0:
            raise WildExtensionError(f"roots of unity of order {L} need a ramified extension of Q_{p}")
        raise UnsupportedExtensionError(f"order {L} does not divide p - 1 = {p - 1}")
    w = teichmuller_int(primitive_root, p, N)
    return pow(w, ((p - 1) // L) * (t % L), p ** N)


def embed_cyclotomic(x, p: int, N: int, primitive_root: int) -> PadicElement:
    """Apply the embedding zeta_{p-1} -> teichmuller(primitive_root)."""
    _check_prime(p)
    if _order_mod(primitive_root, p) != p - 1:
        raise ValueError(f"{primitive_root} is not a primitive root mod {p}")
    if isinstance(x, PadicElement):
        return x
    if not isinstance(x, Cyclotomic):
        return PadicElement.from_rational(Fraction(x), p, N)
    if x.is_rational():
        return PadicElement.from_rational(x.coeffs[0], p, N)
    x = x.minimal_order()
    m = x.order
    if (p - 1) % m:
        if m % p == 0:
            raise WildExtensionError(f"Q(zeta_{m}) is ramified at {p}; wild characters are not supported")
        raise UnsupportedExtensionError(f"zeta_{m} does not lie in Q_{p}")
    # coefficients may have p in the denominator, so carry extra digits
    vmin = min(
        (valuation(c.numerator, p) - valuation(c.denominator, p) for c in x.coeffs if c),
        default=0,
    )
    work = N + max(0, -vmin)
    total = PadicElement.zero(p)
    for i, c in enumerate(x.coeffs):
        if c:
            z = PadicElement(p, root_of_unity_int(i, m, p, work, primitive_root), 0, work)
            total = total + z * PadicElement.from_rational(c, p, work)
    return total


def _order_mod(g: int, p: int) -> int:
    g %= p
    if g == 0:
        return 0
    o, x = 1, g
    while x != 1:
        x = x * g % p
        o += 1
    return o


# ---------------------------------------------------------------------------
# unit root of the Hecke polynomial


def hensel_unit_root(a_p: PadicElement, c: PadicElement, k: int, N: int) -> tuple[PadicElement, PadicElement]:
    """Unit root alpha of X^2 - a_p X + c and the companion root c / alpha.

    Requires a_p to be a p-adic unit and c divisible by p (c = psi(p) p^(k-1)).
    """
    p = a_p.p
    _check_prime(p)
    if not a_p.is_unit():
        raise ValueError("a_p is not a p-adic unit: the prime is not ordinary")
    if not c.exact_zero:
        if c.is_zero():
            if c.val < 1:
                raise ValueError("constant term is not known to be divisible by p")
        elif c.val < 1:
            raise ValueError("constant term must be divisible by p")
        elif k >= 2 and c.val != k - 1:
            raise ValueError(f"constant term has valuation {c.val}, expected {k - 1}")
    prec = int(min(N, a_p.absprec, c.absprec))
    mod = p ** prec
    a = a_p.residue() % mod
    cc = c.residue() % mod if not c.exact_zero else 0
    x = a
    for _ in range(2 * prec.bit_length() + 4):
        fx = (x * x - a * x + cc) % mod
        if fx == 0:
            break
        x = (x - fx * pow(2 * x - a, -1, mod)) % mod
    if (x * x - a * x + cc) % mod:
        raise ArithmeticError("Newton iteration failed to converge")
    alpha = PadicElement(p, x, 0, prec)
    if c.exact_zero:
        return alpha, PadicElement.zero(p)
    return alpha, c / alpha


# ---------------------------------------------------------------------------
# logarithm on 1 + pZ_p


def padic_log(u: PadicElement, N: int) -> PadicElement:
    p = u.p
    _check_prime(p)
    x = u - 1
    if not x.exact_zero and x.valuation < 1:
        raise ValueError("padic_log needs u = 1 mod p")
    if x.exact_zero:
        return PadicElement.zero(p)
    target = int(min(N, x.absprec))
    if x.prec == 0:
        return PadicElement(p, 0, target, 0)
    X = x.to_fraction()
    v = x.val
    total = Fraction(0)
    n = 1
    # n*v - log_p(n) increases with n and bounds the valuation of every later term
    while n * v - math.log(n, p) < target:
        total += Fraction((-1) ** (n + 1)) * X ** n / n
        n += 1
    return PadicElement.with_absolute_precision(total, p, target)
