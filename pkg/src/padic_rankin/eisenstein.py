"""Eisenstein series at non-positive integer s as exact Y-polynomial expansions.

All expansions use the normalization

    G*_w(z, s) = Gamma(w + s) / ((-2 pi i)^w pi^s) * E_w(z, s; theta, chi_0),

under which the non-constant Fourier coefficients are rational (or cyclotomic)
and the Maass-Shimura operator satisfies delta^r G*_w(s) = G*_{w+2r}(s - r)
exactly.  Only phi = trivial character mod 1 is supported.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .exactnum import DirichletCharacter, char_eval, divisors, normalize
from .nearlyhol import NearlyHolExpansion, falling_factorial
from .qexp import QExpansion


@dataclass(frozen=True)
class ConstantTermDescriptor:
    """Symbolic record of the y^s and y^{1-w-s} terms; never a number."""

    present: bool
    character: str
    s: int
    terms: tuple[str, ...] = ()


@dataclass(frozen=True)
class EisensteinSpec:
    weight: int
    s: int
    theta: DirichletCharacter
    phi: DirichletCharacter
    n_max: int

    def validate(self) -> None:
        if self.s > 0:
            raise ValueError("only non-positive integer s is supported")
        if self.weight + 2 * self.s < 1:
            raise ValueError(f"w + 2s = {self.weight + 2 * self.s} < 1")
        if self.weight + self.s <= 0:
            raise ValueError("w + s must be positive")
        if self.theta.parity() * self.phi.parity() != (-1) ** self.weight:
            raise ValueError("parity condition theta(-1) phi(-1) = (-1)^w fails")
        if self.phi.modulus != 1:
            raise NotImplementedError("only phi = trivial character mod 1 is implemented")


def whittaker_poly(alpha: int, r: int) -> tuple[Fraction, ...]:
    """W(y; alpha, -r) as ascending coefficients in y.

    sum_i (-1)^i binom(r, i) Gamma(alpha)/Gamma(alpha - i) y^{r-i}.
    """
    if r < 0:
        raise ValueError("r must be non-negative")
    if alpha - r < 1:
        raise ValueError(f"alpha - r = {alpha - r} < 1")
    coeffs = [Fraction(0)] * (r + 1)
    for i in range(r + 1):
        coeffs[r - i] = Fraction((-1) ** i * comb(r, i) * falling_factorial(alpha - 1, i))
    return tuple(coeffs)


def divisor_sum(n: int, theta: DirichletCharacter, exponent: int):
    """sum_{d d' = n} theta(d') d^exponent."""
    total = 0
    for d in divisors(n):
        ex = theta.value_exponent(n // d)
        if ex is None:
            continue
        t, L = ex
        if L == 1 or t == 0:
            total = total + d ** exponent
        elif 2 * t == L:
            total = total - d ** exponent
        else:
            total = total + char_eval(theta, n // d) * d ** exponent
    return normalize(total)


def divisor_sums(theta: DirichletCharacter, exponent: int, n_max: int) -> list:
    """divisor_sum for every n <= n_max, by a sieve over (d, d')."""
    out = [0] * (n_max + 1)
    values = [None] * (n_max + 1)
    for dp in range(1, n_max + 1):
        ex = theta.value_exponent(dp)
        values[dp] = ex
    for dp in range(1, n_max + 1):
        ex = values[dp]
        if ex is None:
            continue
        t, L = ex
        if L == 1 or t == 0:
            sign = 1
        elif 2 * t == L:
            sign = -1
        else:
            sign = char_eval(theta, dp)
        for d in range(1, n_max // dp + 1):
            out[d * dp] = out[d * dp] + sign * d ** exponent
    return [normalize(x) for x in out]


def gstar_expansion(k_minus_l: int, s: int, theta: DirichletCharacter, n_max: int,
                    level: int | None = None) -> NearlyHolExpansion:
    """Non-constant part of G*(z, s) as layers in Y.

    Layer i at index n is 2 sigma(n) (-1)^i binom(r, i) (alpha-1)_i n^{r-i}
    with r = -s, alpha = w + s and sigma(n) = sum_{dd'=n} theta(d') d^{w+2s-1}.
    """
    w = k_minus_l
    if s > 0:
        raise ValueError("s must be non-positive")
    if w + 2 * s < 1:
        raise ValueError(f"k - l + 2s = {w + 2 * s} < 1")
    r = -s
    alpha = w + s
    if alpha - r < 1:
        raise ValueError("Whittaker polynomial out of range")
    sigma = divisor_sums(theta, w + 2 * s - 1, n_max)
    layer_factor = [(-1) ** i * comb(r, i) * falling_factorial(alpha - 1, i) for i in range(r + 1)]
    layers = []
    for i in range(r + 1):
        c = [0] * (n_max + 1)
        for n in range(1, n_max + 1):
            if sigma[n] != 0:
                c[n] = 2 * layer_factor[i] * n ** (r - i) * sigma[n]
        layers.append(QExpansion(c, weight=w))
    lvl = level if level is not None else theta.modulus
    return NearlyHolExpansion(layers, w, lvl, theta)


def constant_descriptor(spec: EisensteinSpec) -> ConstantTermDescriptor:
    terms = []
    if spec.theta.is_principal():
        terms.append("C(s) y^s: 2 L_M(2s+w, phi)")
    if spec.weight + 2 * spec.s == 1 and spec.phi.is_principal():
        terms.append("D(s) y^(1-w-s): Gamma(s)^-1 pole cancelled at w+2s=1")
    return ConstantTermDescriptor(bool(terms), spec.phi.literal(), spec.s, tuple(terms))


def eis_fourier(spec: EisensteinSpec) -> tuple[NearlyHolExpansion, ConstantTermDescriptor]:
    """Exact expansion of G*_w(z, s) with the constant terms kept symbolic."""
    spec.validate()
    F = gstar_expansion(spec.weight, spec.s, spec.theta, spec.n_max)
    return F, constant_descriptor(spec)


def gstar_to_eisenstein_factor(w: int, s: int) -> complex:
    """E_w(z, s) = factor * G*_w(z, s)."""
    return (-2j * math.pi) ** w * math.pi ** s / math.gamma(w + s)


def level_conversion_exponent(w: int, s: int) -> Fraction:
    """Exponent e with E_{w,N}(z,s)|w_N = N^e E_w(z,s; theta, chi_0)."""
    return Fraction(-(w + 2 * s), 2)


# ---------------------------------------------------------------------------
# numerics (oracles only; never on a congruence path)


def evaluate_expansion(F: NearlyHolExpansion, z: complex) -> complex:
    """sum_j Y^j sum_n a_j(n) e(nz) in floating point."""
    y = z.imag
    Y = 1.0 / (4 * math.pi * y)
    total = 0j
    for j, layer in enumerate(F.layers):
        part = 0j
        for n in range(1, layer.n_max + 1):
            c = layer.coeffs[n]
            if c != 0:
                part += _to_complex(c) * cmath.exp(2j * math.pi * n * z)
        total += Y ** j * part
    return total


def _to_complex(c) -> complex:
    if hasattr(c, "to_complex"):
        return c.to_complex()
    return complex(float(c))


def lattice_sum_oracle(w: int, s: int, theta: DirichletCharacter, phi: DirichletCharacter,
                       z: complex, cutoff: int = 200) -> complex:
    """y^s sum' theta(c) phi(d) (cz+d)^{-w} |cz+d|^{-2s} over |c|, |d| <= cutoff."""
    if w + 2 * s <= 2:
        raise ValueError("lattice sum diverges unless w + 2s > 2")
    cs = np.arange(-cutoff, cutoff + 1)
    th = np.array([_to_complex(char_eval(theta, int(c))) for c in cs])
    ph = np.array([_to_complex(char_eval(phi, int(d))) for d in cs])
    C, D = np.meshgrid(cs, cs, indexing="ij")
    lin = C * z + D
    mask = (C != 0) | (D != 0)
    lin = np.where(mask, lin, 1.0)
    terms = lin ** (-w) * np.abs(lin) ** (-2 * s)
    weights = np.outer(th, ph)
    terms = np.where(mask, terms * weights, 0.0)
    return complex(z.imag ** s * terms.sum())
