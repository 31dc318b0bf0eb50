"""Distributions on Z_p^x stored level by level, and the checks run on them.

Values are kept as integer residues modulo p^digits together with a common
power-of-p scale, so a table entry e at level m stands for e * p^shift known
modulo p^(digits + shift).  Tables are indexed by the residue itself; entries
at non-units are zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exactnum import Cyclotomic, DirichletCharacter, char_eval, characters_mod, valuation
from .padic import DEFAULT_PRECISION, PadicElement, WildExtensionError, embed_cyclotomic, root_of_unity_int

_INT64_SAFE = 2 ** 63  # products of two residues must stay below this


def _dtype_for(mod: int):
    return np.int64 if mod * mod < _INT64_SAFE else object


def unit_residues(p: int, m: int) -> np.ndarray:
    x = np.arange(p ** m, dtype=np.int64)
    return x[x % p != 0]


class FinaddError(ValueError):
    """A level table is not the pushforward of the level above it."""


@dataclass
class LevelwiseDistribution:
    p: int
    tables: dict  # level m -> array of length p^m
    digits: int
    shift: int = 0

    def __post_init__(self):
        if not self.tables:
            raise ValueError("at least one level is required")
        levels = sorted(self.tables)
        if levels != list(range(1, len(levels) + 1)):
            raise ValueError(f"levels must be 1..M, got {levels}")
        self.mod = self.p ** self.digits
        self._vcache = {}
        for m, t in self.tables.items():
            if len(t) != self.p ** m:
                raise ValueError(f"level {m} table has length {len(t)}, expected {self.p ** m}")
            if np.any(t[:: self.p] % self.mod != 0):
                raise ValueError(f"level {m} table is nonzero at a non-unit")

    @property
    def max_level(self) -> int:
        return max(self.tables)

    @classmethod
    def from_top(cls, p: int, top: np.ndarray, M: int, digits: int, shift: int = 0) -> "LevelwiseDistribution":
        """Build every lower level by summing over fibres of reduction."""
        mod = p ** digits
        tables = {M: np.asarray(top) % mod}
        for m in range(M - 1, 0, -1):
            tables[m] = tables[m + 1].reshape(p, p ** m).sum(axis=0) % mod
        return cls(p, tables, digits, shift)

    def finadd_ok(self) -> bool:
        return self.first_finadd_failure() is None

    def first_finadd_failure(self) -> tuple[int, int] | None:
        """(level, residue) of the first violated fibre sum, if any."""
        for m in range(1, self.max_level):
            lower = self.tables[m + 1].reshape(self.p, self.p ** m).sum(axis=0) % self.mod
            bad = np.nonzero((lower - self.tables[m]) % self.mod)[0]
            if len(bad):
                return m, int(bad[0])
        return None

    def assert_finadd(self) -> None:
        bad = self.first_finadd_failure()
        if bad is not None:
            raise FinaddError(f"finite additivity fails at level {bad[0]}, residue {bad[1]}")

    def value(self, m: int, x: int) -> PadicElement:
        e = int(self.tables[m][x % self.p ** m])
        return PadicElement.with_absolute_precision(e * _pow(self.p, self.shift), self.p, self.digits + self.shift)

    def valuations(self, m: int) -> np.ndarray:
        """v_p of each unit entry at level m (digits + shift where the entry vanishes)."""
        if m not in self._vcache:
            self._vcache[m] = self._valuations(m)
        return self._vcache[m]

    def _valuations(self, m: int) -> np.ndarray:
        t = np.array(self.tables[m][unit_residues(self.p, m)], dtype=object) % self.mod
        out = np.zeros(len(t), dtype=np.int64)
        live = t != 0
        for _ in range(self.digits):
            step = live & (t % self.p == 0)
            if not step.any():
                break
            out[step] += 1
            t[step] //= self.p
        out[~live] = self.digits
        return out + self.shift

    def scaled(self, unit: int) -> "LevelwiseDistribution":
        if unit % self.p == 0:
            raise ValueError("scale factor must be a unit")
        return LevelwiseDistribution(self.p, {m: t * (unit % self.mod) % self.mod for m, t in self.tables.items()},
                                     self.digits, self.shift)


def _pow(p: int, e: int):
    from fractions import Fraction
    return p ** e if e >= 0 else Fraction(1, p ** -e)


# ---------------------------------------------------------------------------
# characters of (Z/p^m)^x


@dataclass
class CharacterTable:
    """Characters of (Z/p^m)^x with exact values and, when tame, their embeddings."""

    p: int
    level: int
    primitive_root: int
    characters: list = field(default_factory=list)

    def __post_init__(self):
        if not self.characters:
            self.characters = characters_mod(self.p ** self.level)

    def value(self, chi: DirichletCharacter, x: int) -> Cyclotomic:
        return char_eval(chi, x)

    def embedded(self, chi: DirichletCharacter, x: int, digits: int) -> PadicElement:
        return embed_cyclotomic(char_eval(chi, x), self.p, digits, self.primitive_root)

    def orthogonality_holds(self) -> bool:
        """(1/phi) sum_chi conj(chi)(x) chi(y) = [x = y] over all unit pairs, exactly."""
        units = [int(x) for x in unit_residues(self.p, self.level)]
        phi = len(units)
        vals = {(i, x): char_eval(chi, x) for i, chi in enumerate(self.characters) for x in units}
        for x in units:
            for y in units:
                total = sum((vals[i, x].conjugate() * vals[i, y] for i in range(len(self.characters))),
                            Cyclotomic.rational(0))
                if total != Cyclotomic.rational(phi if x == y else 0):
                    return False
        return True


def tame_index(chi: DirichletCharacter, p: int, primitive_root: int) -> int:
    """j with chi = teichmuller^j; raises WildExtensionError for wild characters."""
    if chi.modulus == 1:
        return 0
    c = chi.conductor()
    if c not in (1, p):
        raise WildExtensionError(f"conductor {c} has a wild part at {p}")
    ex = chi.value_exponent(primitive_root)
    if ex is None:
        raise ValueError("primitive root is not coprime to the modulus")
    t, L = ex
    return (t * (p - 1) // L) % (p - 1)


def teichmuller_powers(p: int, j: int, residues: np.ndarray, digits: int, primitive_root: int) -> np.ndarray:
    """teichmuller(x)^j mod p^digits for each residue (zero at non-units)."""
    mod = p ** digits
    w = root_of_unity_int(1, p - 1, p, digits, primitive_root)
    table = np.zeros(p, dtype=_dtype_for(mod))
    e = 1
    for k in range(p - 1):
        table[e] = pow(w, (k * j) % (p - 1), mod)
        e = e * primitive_root % p
    return table[np.asarray(residues) % p]


# ---------------------------------------------------------------------------
# constructors


def dist_from_char_values(values: dict, p: int, digits: int, primitive_root: int, m: int = 1) -> LevelwiseDistribution:
    """mu(x) = (1/phi(p^m)) sum_chi conj(chi)(x) values(chi) at level m.

    Only the tame level m = 1 is supported: higher levels need characters of
    p-power order, whose values are not in Q_p.
    """
    if m != 1:
        raise WildExtensionError("characters of conductor p^m, m > 1, need a ramified extension")
    if len(values) != p - 1:
        raise ValueError(f"need all {p - 1} characters mod {p}, got {len(values)}")
    idx = {}
    for chi, v in values.items():
        j = tame_index(chi, p, primitive_root)
        if j in idx:
            raise ValueError("duplicate character")
        idx[j] = v
    known = [int(min(v.valuation, v.absprec)) for v in idx.values() if not v.exact_zero]
    shift = min(known) if known else 0
    absprec = min(v.absprec for v in idx.values())
    work = int(min(digits, absprec - shift))
    mod = p ** work
    res = unit_residues(p, 1)
    table = np.zeros(p, dtype=object)
    inv = pow(p - 1, -1, mod)
    for j, v in idx.items():
        if v.exact_zero:
            continue
        e = (v.to_fraction() / _pow(p, shift))
        e = e.numerator * pow(e.denominator, -1, mod) % mod
        chib = teichmuller_powers(p, (-j) % (p - 1), res, work, primitive_root)
        table[res] = (table[res] + chib.astype(object) * e) % mod
    table = table * inv % mod
    return LevelwiseDistribution(p, {1: _as_table(table, mod)}, work, shift)


def dist_from_point_masses(p: int, points: np.ndarray, weights: np.ndarray, M: int, digits: int,
                           shift: int = 0) -> LevelwiseDistribution:
    """sum_i weights[i] * delta(points[i]) read off at levels 1..M."""
    mod = p ** digits
    top = np.zeros(p ** M, dtype=object)
    pts = np.asarray(points) % p ** M
    if np.any(pts % p == 0):
        raise ValueError("point masses must sit on units")
    w = np.asarray(weights).astype(object) % mod
    # np.add.at keeps repeated indices
    np.add.at(top, pts, w)
    return LevelwiseDistribution.from_top(p, _as_table(top % mod, mod), M, digits, shift)


def _as_table(arr, mod: int) -> np.ndarray:
    dt = _dtype_for(mod)
    return np.array([int(x) for x in arr], dtype=dt) if dt is np.int64 else np.asarray(arr, dtype=object)


# ---------------------------------------------------------------------------
# boundedness


@dataclass(frozen=True)
class BoundedVerdict:
    bounded: bool
    min_valuation: int
    per_level: tuple
    threshold: int

    def __str__(self):
        word = "measure-compatible at inspected levels" if self.bounded else "unbounded"
        return f"{word}: min valuation {self.min_valuation} (threshold {self.threshold})"


def check_bounded(mu: LevelwiseDistribution, threshold: int = 0) -> BoundedVerdict:
    """Bounded iff every inspected value has valuation >= threshold."""
    per = []
    for m in sorted(mu.tables):
        v = mu.valuations(m)
        per.append(int(v.min()) if len(v) else mu.digits + mu.shift)
    lo = min(per)
    return BoundedVerdict(lo >= threshold, lo, tuple(per), threshold)


# ---------------------------------------------------------------------------
# abstract Kummer congruences


def congruence_relations(values: np.ndarray, p: int, n: int) -> list[np.ndarray]:
    """Generators of {c : values @ c = 0 mod p^n}.

    Smith-form elimination over the local ring Z/p^n: pivots of minimal
    valuation, column operations tracked in U.  Each generator is checked
    before it is returned.
    """
    mod = p ** n
    if mod * mod * max(values.shape) >= 2 ** 62:
        raise ValueError("modulus too large for int64 elimination")
    A = np.asarray(values, dtype=np.int64) % mod
    rows, cols = A.shape
    U = np.eye(cols, dtype=np.int64)
    exps = []
    t = 0
    while t < min(rows, cols):
        sub = A[t:, t:]
        nz = np.argwhere(sub != 0)
        if len(nz) == 0:
            break
        vals = sub[nz[:, 0], nz[:, 1]]
        vs = np.array([valuation(int(x), p) for x in vals])
        k = int(np.argmin(vs))
        v = int(vs[k])
        i, j = int(nz[k, 0]) + t, int(nz[k, 1]) + t
        A[[t, i], :] = A[[i, t], :]
        A[:, [t, j]] = A[:, [j, t]]
        U[:, [t, j]] = U[:, [j, t]]
        pv = p ** v
        unit_inv = pow(int(A[t, t]) // pv, -1, mod)
        # clear row t to the right
        factors = (A[t, t + 1:] // pv) * unit_inv % mod
        A[:, t + 1:] = (A[:, t + 1:] - np.outer(A[:, t], factors)) % mod
        U[:, t + 1:] = (U[:, t + 1:] - np.outer(U[:, t], factors)) % mod
        # clear column t below
        factors = (A[t + 1:, t] // pv) * unit_inv % mod
        A[t + 1:, :] = (A[t + 1:, :] - np.outer(factors, A[t, :])) % mod
        exps.append(v)
        t += 1
    gens = []
    for i, v in enumerate(exps):
        if v > 0:
            gens.append(U[:, i] * p ** (n - v) % mod)
    for i in range(len(exps), cols):
        gens.append(U[:, i] % mod)
    V = np.asarray(values, dtype=np.int64) % mod
    for c in gens:
        if np.any(V @ c % mod):
            raise ArithmeticError("internal: generated relation does not annihilate the value table")
    return gens


@dataclass
class KummerVerdict:
    passed: bool
    relations_checked: int
    hypothesis_failures: int = 0
    precision_insufficient: int = 0
    witness: dict | None = None
    depths: tuple = ()

    def __str__(self):
        state = "pass" if self.passed else "FAIL"
        s = f"{state}: {self.relations_checked} relations"
        if self.precision_insufficient:
            s += f", {self.precision_insufficient} undecidable at available precision"
        if self.witness:
            s += f", witness {self.witness}"
        return s


def kummer_verify(functions: np.ndarray, targets: np.ndarray, p: int, target_digits: int,
                  max_n: int, relations: list[tuple[int, np.ndarray]] | None = None,
                  shift: int = 0) -> KummerVerdict:
    """Check that every relation sum b_i f_i = 0 mod p^n transfers to sum b_i a_i.

    ``functions`` is (residues x k) with integer values on (Z/p^m)^x; ``targets``
    is (k,) or (strata x k) of integers known modulo p^target_digits.  Without
    explicit ``relations`` all generators mod p^n, n = 1..max_n, are produced
    by ``congruence_relations``.  A conclusion needing more than target_digits
    is reported as undecidable, not as a failure.  The targets stand for
    p^shift times the given integers.
    """
    F = np.asarray(functions)
    T = np.atleast_2d(np.asarray(targets))
    if F.shape[1] != T.shape[1]:
        raise ValueError("functions and targets are not aligned")
    todo = []
    if relations is None:
        for n in range(1, max_n + 1):
            todo.extend((n, c) for c in congruence_relations(F, p, n))
    else:
        todo = list(relations)
    checked = hyp_fail = insufficient = 0
    depths = set()
    for n, c in todo:
        mod = p ** n
        c = np.asarray(c, dtype=object)
        if np.any(F.astype(object) @ c % mod):
            hyp_fail += 1
            continue
        need = n - shift
        if need > target_digits:
            insufficient += 1
            continue
        lhs = T.astype(object) @ c % p ** max(need, 0)
        checked += 1
        bad = np.nonzero(lhs)[0]
        if len(bad):
            return KummerVerdict(False, checked, hyp_fail, insufficient,
                                 {"n": n, "relation": [int(x) for x in c], "stratum": int(bad[0])}, tuple(sorted(depths)))
        depths.add(n)
    return KummerVerdict(True, checked, hyp_fail, insufficient, None, tuple(sorted(depths)))


# ---------------------------------------------------------------------------
# integration


def x_p(residues: np.ndarray) -> np.ndarray:
    """The embedding Z_p -> C_p on residue representatives."""
    return np.asarray(residues)


def mellin_eval(mu: LevelwiseDistribution, chi: DirichletCharacter, r: int, primitive_root: int,
                level: int | None = None) -> PadicElement:
    """sum_x chi(x) x^r mu^(M)(x) with its Lipschitz error bound folded into the precision."""
    p = mu.p
    M = mu.max_level if level is None else level
    if M not in mu.tables:
        raise ValueError(f"level {M} not available")
    c = chi.conductor()
    if c != 1 and p ** valuation(c, p) != c:
        raise ValueError("character conductor is not a power of p")
    if c > p ** M:
        raise ValueError(f"conductor {c} exceeds the available level {M}")
    j = tame_index(chi, p, primitive_root)
    mod = mu.mod
    res = unit_residues(p, M)
    dt = _dtype_for(mod)
    vals = mu.tables[M][res].astype(dt)
    w = teichmuller_powers(p, j, res, mu.digits, primitive_root).astype(dt)
    x = x_p(res).astype(dt) % mod
    xr = np.ones(len(res), dtype=dt)
    for _ in range(r):
        xr = xr * x % mod
    total = int((vals * w % mod * xr % mod).astype(object).sum() % mod)
    absprec = mu.digits + mu.shift
    if r > 0:
        vmin = min(int(mu.valuations(M).min()), absprec)
        absprec = min(absprec, M + vmin)
    return PadicElement.with_absolute_precision(total * _pow(p, mu.shift), p, absprec)


def wild_coordinate(chi: DirichletCharacter, p: int, primitive_root: int) -> PadicElement:
    """t = chi(1 + p); exactly 1 when chi is tame."""
    tame_index(chi, p, primitive_root)
    return PadicElement.from_rational(1, p, DEFAULT_PRECISION)


__all__ = [
    "BoundedVerdict",
    "CharacterTable",
    "FinaddError",
    "KummerVerdict",
    "LevelwiseDistribution",
    "check_bounded",
    "congruence_relations",
    "dist_from_char_values",
    "dist_from_point_masses",
    "kummer_verify",
    "mellin_eval",
    "tame_index",
    "teichmuller_powers",
    "unit_residues",
    "wild_coordinate",
    "x_p",
]
