"""Nearly holomorphic expansions as polynomials in Y = (4 pi y)^{-1}.

Layer j of a ``NearlyHolExpansion`` is the holomorphic q-expansion multiplying
Y^j.  The Maass-Shimura operator and the holomorphic projection act on these
layers with exact rational factors.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .exactnum import DirichletCharacter, char_product, lcm, normalize
from .qexp import QExpansion, TruncationError, _is_zero, qexp_mul


class NearlyHolExpansion:
    __slots__ = ("layers", "weight", "level", "character")

    def __init__(self, layers: Sequence[QExpansion], weight: int, level: int = 1,
                 character: DirichletCharacter | None = None):
        if not layers:
            raise ValueError("at least one layer is required")
        n = min(f.n_max for f in layers)
        self.layers = [f if f.n_max == n else f.truncate(n) for f in layers]
        self.weight = weight
        self.level = level
        self.character = character if character is not None else DirichletCharacter(1)

    @classmethod
    def from_qexp(cls, f: QExpansion) -> "NearlyHolExpansion":
        return cls([f], f.weight, f.level, f.character)

    @classmethod
    def zero(cls, n_max: int, weight: int, depth: int = 0, **meta) -> "NearlyHolExpansion":
        return cls([QExpansion([0] * (n_max + 1), weight=weight) for _ in range(depth + 1)], weight, **meta)

    @property
    def depth(self) -> int:
        return len(self.layers) - 1

    @property
    def n_max(self) -> int:
        return self.layers[0].n_max

    def effective_depth(self) -> int:
        """Index of the highest layer with a nonzero coefficient (0 for the zero form)."""
        for j in range(self.depth, -1, -1):
            if not self.layers[j].is_zero():
                return j
        return 0

    def to_qexp(self) -> QExpansion:
        if self.effective_depth() > 0:
            raise ValueError("expansion has non-holomorphic layers")
        return QExpansion(self.layers[0].coeffs, weight=self.weight, level=self.level, character=self.character)

    def coeff(self, j: int, n: int):
        return self.layers[j][n]

    def scale(self, c) -> "NearlyHolExpansion":
        return NearlyHolExpansion([f.scale(c) for f in self.layers], self.weight, self.level, self.character)

    def __add__(self, other: "NearlyHolExpansion") -> "NearlyHolExpansion":
        depth = max(self.depth, other.depth)
        n = min(self.n_max, other.n_max)
        layers = []
        for j in range(depth + 1):
            a = self.layers[j].coeffs if j <= self.depth else [0] * (n + 1)
            b = other.layers[j].coeffs if j <= other.depth else [0] * (n + 1)
            layers.append(QExpansion([x + y for x, y in zip(a[: n + 1], b[: n + 1])], weight=self.weight))
        return NearlyHolExpansion(layers, self.weight, self.level, self.character)

    def __sub__(self, other):
        return self + other.scale(-1)

    def equals(self, other: "NearlyHolExpansion", n_max: int | None = None) -> bool:
        n = min(self.n_max, other.n_max) if n_max is None else n_max
        depth = max(self.depth, other.depth)
        for j in range(depth + 1):
            for i in range(n + 1):
                a = self.layers[j][i] if j <= self.depth else 0
                b = other.layers[j][i] if j <= other.depth else 0
                if not _is_zero(a - b):
                    return False
        return True

    def __repr__(self):
        return f"NearlyHolExpansion(depth={self.depth}, k={self.weight}, n_max={self.n_max})"


def _theta(f: QExpansion) -> list:
    """d = q d/dq on coefficients."""
    return [n * c for n, c in enumerate(f.coeffs)]


def delta_op(F: NearlyHolExpansion) -> NearlyHolExpansion:
    """Maass-Shimura operator: delta_k(Y^j f) = Y^j df + (j - k) Y^{j+1} f."""
    k = F.weight
    n = F.n_max
    out = [[0] * (n + 1) for _ in range(F.depth + 2)]
    for j, f in enumerate(F.layers):
        df = _theta(f)
        for i in range(n + 1):
            c = f.coeffs[i]
            out[j][i] = out[j][i] + df[i]
            out[j + 1][i] = out[j + 1][i] + (j - k) * c
    layers = [QExpansion(c, weight=k + 2) for c in out]
    return NearlyHolExpansion(layers, k + 2, F.level, F.character)


def delta_power(F: NearlyHolExpansion, r: int) -> NearlyHolExpansion:
    if r < 0:
        raise ValueError("r must be non-negative")
    for _ in range(r):
        F = delta_op(F)
    return F


def falling_factorial(x, i: int):
    out = 1
    for t in range(i):
        out *= x - t
    return out


def hol_project(F: NearlyHolExpansion) -> QExpansion:
    """Exact holomorphic projection: c_n = sum_j a_j(n) n^j Gamma(k-1-j) / Gamma(k-1)."""
    k = F.weight
    r = F.effective_depth()
    if k <= 2:
        raise ValueError("holomorphic projection needs weight k > 2")
    if r > k - 2:
        raise ValueError(f"depth {r} >= k - 1 = {k - 1}: the projection integral diverges")
    for j, f in enumerate(F.layers[: r + 1]):
        if not _is_zero(f.coeffs[0]):
            raise ValueError(f"layer {j} has a constant term; input is not rapidly decreasing")
    # Gamma(k-1-j)/Gamma(k-1) = 1 / ((k-2)(k-3)...(k-1-j))
    ratios = [Fraction(1, falling_factorial(k - 2, j)) for j in range(r + 1)]
    n_max = F.n_max
    out = [0] * (n_max + 1)
    for n in range(1, n_max + 1):
        total = F.layers[0].coeffs[n]
        npow = 1
        for j in range(1, r + 1):
            npow *= n
            c = F.layers[j].coeffs[n]
            if not _is_zero(c):
                total = total + c * (npow * ratios[j])
        out[n] = normalize(total)
    return QExpansion(out, weight=k, level=F.level, character=F.character)


def nh_mul(F: NearlyHolExpansion, G: NearlyHolExpansion) -> NearlyHolExpansion:
    """Product of Y-polynomials with q-expansion coefficients."""
    n = min(F.n_max, G.n_max)
    depth = F.depth + G.depth
    acc: list[QExpansion | None] = [None] * (depth + 1)
    for i, f in enumerate(F.layers):
        if f.is_zero():
            continue
        for j, g in enumerate(G.layers):
            if g.is_zero():
                continue
            h = qexp_mul(f.truncate(n), g.truncate(n))
            acc[i + j] = h if acc[i + j] is None else acc[i + j] + h
    weight = F.weight + G.weight
    layers = [a if a is not None else QExpansion([0] * (n + 1)) for a in acc]
    layers = [QExpansion(l.coeffs, weight=weight) for l in layers]
    return NearlyHolExpansion(layers, weight, lcm(F.level, G.level), char_product(F.character, G.character))


def nh_v_op(F: NearlyHolExpansion, d: int) -> NearlyHolExpansion:
    """F(dz) for Y-polynomials: Y(dz) = Y(z) / d, so layer j picks up d^{-j}."""
    from .qexp import v_op
    layers = [v_op(f, d).scale(Fraction(1, d ** j)) for j, f in enumerate(F.layers)]
    return NearlyHolExpansion(layers, F.weight, F.level * d, F.character)


__all__ = [
    "NearlyHolExpansion",
    "TruncationError",
    "delta_op",
    "delta_power",
    "falling_factorial",
    "hol_project",
    "nh_mul",
    "nh_v_op",
]
