"""Run configuration, data ingestion, the coefficient functional, Psi values and the verify suite."""

from __future__ import annotations

import math
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

import numpy as np
import sympy

from .exactnum import Cyclotomic, DirichletCharacter, characters_mod, normalize, parse_character, valuation
from .measures import (
    LevelwiseDistribution,
    check_bounded,
    congruence_relations,
    dist_from_char_values,
    dist_from_point_masses,
    mellin_eval,
    tame_index,
    teichmuller_powers,
    unit_residues,
)
from .padic import PadicElement, embed_cyclotomic
from .qexp import (
    NewformData,
    NewformValidationError,
    QExpansion,
    TruncationError,
    eta_delta,
    eta_product_coeffs,
    hecke_t,
    u_op,
    validate_newform,
)
from .rankin import (
    AdmissibilityError,
    KTildeForm,
    RankinContext,
    check_admissible,
    gamma_omega_free,
    k_tilde,
    pair_terms,
    prop41_series,
    stratum_pairs,
    teichmuller_power_table,
)

SCHEMA_VERSION = "padic-rankin-report/1"


class ConfigError(ValueError):
    """Startup error: bad configuration or an input violating a standing hypothesis."""


# ---------------------------------------------------------------------------
# newform files


def _data_path(name: str) -> str:
    return str(resources.files("padic_rankin") / "data" / name)


def _parse_coeff_line(line: str, order: int) -> tuple[int, object]:
    parts = line.split()
    n = int(parts[0])
    vals = [Fraction(x) for x in parts[1:]]
    width = sympy.totient(order) if order > 1 else 1
    if len(vals) != width:
        raise ValueError(f"coefficient line for n = {n} has {len(vals)} entries, expected {width}")
    if order <= 2:
        return n, normalize(vals[0])
    return n, normalize(Cyclotomic(order, vals + [Fraction(0)] * (order - len(vals))))


_FIELD_HINT = re.compile(r"#\s*field\s+(\d+)\s*$")


def _read_lines(path: str) -> tuple[list[str], int | None]:
    """Non-comment lines, plus m from a `# field m` comment if one is present."""
    hint = None
    lines = []
    with open(path) as fh:
        for ln in fh:
            s = ln.strip()
            m = _FIELD_HINT.match(s)
            if m:
                hint = int(m.group(1))
            elif s and not s.startswith("#"):
                lines.append(s)
    return lines, hint


def _inferred_order(chi: DirichletCharacter, width: int) -> int | None:
    """The m a reader picks for phi(m) = width: the first of chi.order() * 2^i."""
    if width == 1:
        return 1
    order = chi.order()
    while sympy.totient(order) != width:
        order *= 2
        if order > 10 ** 4:
            return None
    return order


def _coefficient_field_order(chi: DirichletCharacter, lines: list[str], hint: int | None = None) -> int:
    # the power basis width fixes the order m with phi(m) entries per line
    width = len(lines[0].split()) - 1 if lines else 1
    if hint is not None:
        if (int(sympy.totient(hint)) if hint > 1 else 1) != width:
            raise ValueError(f"field {hint} does not match {width} coefficients per line")
        return hint
    order = _inferred_order(chi, width)
    if order is None:
        raise ValueError("cannot match the coefficient width to a cyclotomic field")
    return order


def load_newform(path: str, extender=None, validate_bound: int | None = 300) -> NewformData:
    """Read `weight k` / `level N` / character literal / `n c_0 ... c_{phi(m)-1}` lines."""
    try:
        lines, hint = _read_lines(path)
        if len(lines) < 4:
            raise ValueError("file too short")
        m = re.fullmatch(r"weight\s+(\d+)", lines[0])
        lv = re.fullmatch(r"level\s+(\d+)", lines[1])
        if not m or not lv:
            raise ValueError("expected 'weight k' and 'level N' header lines")
        k, N = int(m.group(1)), int(lv.group(1))
        chi = parse_character(lines[2])
        body = lines[3:]
        order = _coefficient_field_order(chi, body, hint)
        coeffs = {}
        for ln in body:
            n, c = _parse_coeff_line(ln, order)
            coeffs[n] = c
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot parse newform file {path}: {exc}") from exc
    n_max = max(coeffs)
    if sorted(coeffs) != list(range(1, n_max + 1)):
        raise ConfigError(f"{path}: coefficients must be listed for n = 1..{n_max} without gaps")
    q = QExpansion([0] + [coeffs[n] for n in range(1, n_max + 1)], weight=k, level=N, character=chi)
    validate_newform(q, validate_bound)
    return NewformData(q, conductor=N, extender=extender)


def write_qexp(path: str, f: QExpansion, comments: list[str] = ()) -> None:
    """Same layout as newform files; rational coefficients only use one column."""
    need = 1
    for c in f.coeffs:
        if isinstance(c, Cyclotomic) and not c.is_rational():
            need = math.lcm(need, c.minimal_order().order)
    width = int(sympy.totient(need)) if need > 1 else 1
    order = _inferred_order(f.character, width)
    hinted = order is None or (order != need and not (order == 2 * need and need % 2))
    if hinted:
        order = need
    with open(path, "w") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        if hinted:
            fh.write(f"# field {order}\n")
        fh.write(f"weight {f.weight}\nlevel {f.level}\n{f.character.literal()}\n")
        for n in range(1, f.n_max + 1):
            c = f.coeffs[n]
            if isinstance(c, Cyclotomic):
                vals = c.minimal_order().lift(order).coeffs[:width] if order > 1 else [c.to_fraction()]
            else:
                vals = [Fraction(c)]
            fh.write(f"{n} " + " ".join(str(Fraction(v)) for v in vals) + "\n")


def load_basis(path: str) -> list[QExpansion]:
    """Forms grouped under `form i` headers; each block has the newform header layout."""
    with open(path) as fh:
        raw = [ln.rstrip("\n") for ln in fh]
    blocks: list[list[str]] = []
    hints: list[int | None] = []
    for ln in raw:
        s = ln.strip()
        m = _FIELD_HINT.match(s)
        if m and blocks:
            hints[-1] = int(m.group(1))
        if not s or s.startswith("#"):
            continue
        if re.fullmatch(r"form\s+\d+", s):
            blocks.append([])
            hints.append(None)
        elif not blocks:
            raise ConfigError(f"{path}: coefficient data before the first 'form' header")
        else:
            blocks[-1].append(s)
    forms = []
    for b, hint in zip(blocks, hints):
        k = int(b[0].split()[1])
        N = int(b[1].split()[1])
        chi = parse_character(b[2])
        order = _coefficient_field_order(chi, b[3:], hint)
        coeffs = dict(_parse_coeff_line(ln, order) for ln in b[3:])
        n_max = max(coeffs)
        forms.append(QExpansion([0] + [coeffs.get(n, 0) for n in range(1, n_max + 1)], weight=k, level=N, character=chi))
    if not forms:
        raise ConfigError(f"{path}: no forms")
    return forms


def eta_extender(spec: str):
    """`eta:1,2,7,14` -> coefficients of prod eta(d z) as a callable n -> list."""
    m = re.fullmatch(r"eta:\s*([\d,\s^]+)", spec.strip())
    if not m:
        raise ConfigError(f"unknown extension spec {spec!r}")
    exps: dict[int, int] = {}
    for tok in m.group(1).split(","):
        tok = tok.strip()
        d, _, e = tok.partition("^")
        exps[int(d)] = exps.get(int(d), 0) + (int(e) if e else 1)
    weight = sum(exps.values()) // 2
    dtype = np.int64 if weight <= 2 else object
    return lambda n: eta_product_coeffs(exps, n, dtype=dtype)


# ---------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    f_source: str = "builtin:delta"
    g_source: str = "builtin:g14a"
    g_extend: str | None = "eta:1,2,7,14"
    p: int = 11
    precision: int = 30
    primitive_root: int | None = 2
    n_max: int = 400
    mprimes: tuple = (14641, 161051)
    characters: str = "tame"
    r_range: tuple = (0, 9)
    functional: str = "xi: 1=1"
    out_dir: str = "out"
    digits: int = 9
    kummer_levels: int = 3
    kummer_mprime: int | None = None
    kummer_n: tuple = (1, 2)
    measure_mprime: int | None = None
    measure_levels: int | None = None
    bounded_threshold: int = 0
    prop41_terms: int = 10
    omega_unit: int = 1
    base_dir: str = "."

    @classmethod
    def parse(cls, text: str, base_dir: str = ".") -> "RunConfig":
        cfg = cls(base_dir=base_dir)
        conv = {
            "f": ("f_source", str), "g": ("g_source", str), "g_extend": ("g_extend", _opt_str),
            "p": ("p", int), "precision": ("precision", int), "precision_digits": ("precision", int), "primitive_root": ("primitive_root", _opt_int),
            "n_max": ("n_max", int), "mprime": ("mprimes", _int_tuple), "characters": ("characters", str),
            "r_range": ("r_range", _range), "functional": ("functional", str), "out_dir": ("out_dir", str),
            "digits": ("digits", int), "kummer_levels": ("kummer_levels", int),
            "kummer_mprime": ("kummer_mprime", _opt_int), "kummer_n": ("kummer_n", _int_tuple),
            "measure_mprime": ("measure_mprime", _opt_int), "measure_levels": ("measure_levels", _opt_int),
            "bounded_threshold": ("bounded_threshold", int), "prop41_terms": ("prop41_terms", int),
            "omega_unit": ("omega_unit", int),
        }
        seen = set()
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value'")
            key, value = (x.strip() for x in line.split("=", 1))
            if key not in conv:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            if conv[key][0] in seen:
                raise ConfigError(f"line {lineno}: duplicate key {key!r}")
            seen.add(conv[key][0])
            attr, fn = conv[key]
            try:
                setattr(cfg, attr, fn(value))
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from exc
        return cfg

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        if path == "builtin":
            path = _data_path("fixture.cfg")
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.parse(text, os.path.dirname(os.path.abspath(path)))

    def echo(self) -> list[tuple[str, str]]:
        keys = ["f_source", "g_source", "g_extend", "p", "precision", "primitive_root", "n_max", "mprimes",
                "characters", "r_range", "functional", "digits", "kummer_levels", "kummer_mprime", "kummer_n",
                "measure_mprime", "measure_levels", "bounded_threshold", "prop41_terms", "omega_unit"]
        return [(k, str(getattr(self, k))) for k in keys]


def _opt_str(v: str):
    return None if v.lower() in ("", "none") else v


def _opt_int(v: str):
    return None if v.lower() in ("", "none", "auto") else int(v)


def _int_tuple(v: str):
    return tuple(int(x) for x in v.replace(" ", "").split(",") if x)


def _range(v: str):
    m = re.fullmatch(r"\s*(\d+)\s*\.\.\s*(\d+)\s*", v)
    if not m:
        raise ValueError("expected a..b")
    return int(m.group(1)), int(m.group(2))


def _resolve(cfg: RunConfig, source: str) -> str:
    if source.startswith("builtin:"):
        return _data_path(source.split(":", 1)[1] + ".newform")
    path = source[5:] if source.startswith("file:") else source
    return path if os.path.isabs(path) else os.path.join(cfg.base_dir, path)


def load_forms(cfg: RunConfig) -> tuple[NewformData, NewformData]:
    if cfg.f_source == "builtin:delta":
        f = eta_delta(cfg.n_max)
        validate_newform(f.expansion, 200)
    else:
        f = load_newform(_resolve(cfg, cfg.f_source))
    ext = eta_extender(cfg.g_extend) if cfg.g_extend else None
    g = load_newform(_resolve(cfg, cfg.g_source), extender=ext)
    return f, g


def config_characters(cfg: RunConfig) -> list[DirichletCharacter]:
    if cfg.characters.strip() == "tame":
        return characters_mod(cfg.p)
    return [parse_character(x) for x in cfg.characters.split("|") if x.strip()]


def validate_config(cfg: RunConfig, f: NewformData, g: NewformData) -> None:
    """The standing hypotheses, each failure named after the condition it breaks."""
    p = cfg.p
    if not sympy.isprime(p) or p == 2:
        raise ConfigError(f"p = {p} must be an odd prime")
    k, l = f.weight, g.weight
    if not 2 <= l < k:
        raise ConfigError(f"weight condition 2 <= l < k fails (k = {k}, l = {l})")
    if math.gcd(f.conductor, g.conductor) != 1:
        raise ConfigError("conductor condition (C_f, C_g) = 1 fails")
    if f.conductor % p == 0 or g.conductor % p == 0:
        raise ConfigError("conductor condition (p, C_f) = (p, C_g) = 1 fails")
    if cfg.primitive_root is not None and sympy.n_order(cfg.primitive_root, p) != p - 1:
        raise ConfigError(f"{cfg.primitive_root} is not a primitive root mod {p}")
    ap = f[p]
    g0 = cfg.primitive_root or int(sympy.primitive_root(p))
    if embed_cyclotomic(ap if isinstance(ap, Cyclotomic) else Cyclotomic.rational(ap), p, 5, g0).valuation != 0:
        raise ConfigError(f"ordinarity condition fails: a({p}) is not a {p}-adic unit")
    lo, hi = cfg.r_range
    if not 0 <= lo <= hi <= k - l - 1:
        raise ConfigError(f"r range {lo}..{hi} outside 0..{k - l - 1}")
    for chi in config_characters(cfg):
        if chi.modulus % p and chi.modulus != 1:
            raise ConfigError(f"{chi.literal()} is not a character of Z_{p}^x")
        for M in cfg.mprimes:
            try:
                check_admissible(M, chi, p)
            except AdmissibilityError as exc:
                raise ConfigError(f"condition (M') fails for {chi.literal()}: {exc}") from exc


# ---------------------------------------------------------------------------
# the functional


@dataclass
class FunctionalSpec:
    mode: str  # "supplied" or "eigen"
    xi: dict = field(default_factory=dict)
    basis: list = field(default_factory=list)
    eigenvalues: dict = field(default_factory=dict)  # q -> a(q) for q not dividing pC
    up_value: PadicElement | None = None

    @classmethod
    def parse(cls, text: str, base_dir: str = ".") -> "FunctionalSpec":
        kind, _, body = text.partition(":")
        kind = kind.strip()
        if kind == "xi":
            xi = {}
            for tok in body.split(","):
                tok = tok.strip()
                if not tok:
                    continue
                n, _, v = tok.partition("=")
                xi[int(n)] = normalize(Fraction(v.strip()))
            return cls("supplied", xi=xi)
        if kind == "eigen":
            path = body.strip()
            path = path if os.path.isabs(path) else os.path.join(base_dir, path)
            if body.strip().startswith("builtin:"):
                path = _data_path(body.strip().split(":", 1)[1])
            return cls("eigen", basis=load_basis(path))
        raise ConfigError(f"unknown functional spec {text!r}")


class FunctionalError(ValueError):
    """Singular or defective eigen system."""


@dataclass
class Functional:
    mode: str  # "supplied", "eigen", or "per-basis" when the eigenline is not unique
    xi: dict = field(default_factory=dict)
    # eigen mode
    basis: list = field(default_factory=list)
    pivots: list = field(default_factory=list)
    pivot_inverse: list = field(default_factory=list)
    dual: list = field(default_factory=list)
    eigenspace_dim: int = 1
    p: int = 0
    digits: int = 0
    primitive_root: int = 2

    @property
    def support(self) -> list[int]:
        return sorted(n for n, v in self.xi.items() if v != 0)

    def coordinates(self, K: QExpansion) -> list:
        """Exact coordinates of K in the basis; raises if K is not in the span."""
        coords = [sum(self.pivot_inverse[i][j] * Fraction(K[n]) for j, n in enumerate(self.pivots))
                  for i in range(len(self.basis))]
        top = min(K.n_max, min(b.n_max for b in self.basis))
        for n in range(1, top + 1):
            if sum(c * Fraction(b[n]) for c, b in zip(coords, self.basis)) != Fraction(K[n]):
                raise FunctionalError(f"form is not in the span of the basis (index {n})")
        return coords

    def __call__(self, K):
        if isinstance(K, KTildeForm):
            K = K.expansion
        if self.mode == "supplied":
            return normalize(sum((v * K[n] for n, v in self.xi.items()), 0))
        coords = self.coordinates(K)
        if self.mode == "per-basis":
            return [PadicElement.from_rational(c, self.p, self.digits) if c else PadicElement.zero(self.p)
                    for c in coords]
        total = PadicElement.zero(self.p)
        for lam, c in zip(self.dual, coords):
            if c:
                total = total + lam * c
        return total


def build_functional(spec: FunctionalSpec, ctx: RankinContext | None = None, operators: tuple = (2, 3)) -> Functional:
    """Supplied mode: the finite sum of xi_n a(n, K).  Eigen mode: the left
    eigenvector of the Hecke action on the basis span for T_q = a(q) and
    U_p = alpha, normalized to 1 on the matching right eigenvector."""
    if spec.mode == "supplied":
        return Functional("supplied", xi=dict(spec.xi))
    if ctx is None:
        raise FunctionalError("eigen mode needs the run context")
    basis = spec.basis
    d = len(basis)
    pivots, inv = _pivot_system(basis)
    fn = Functional("eigen", basis=basis, pivots=pivots, pivot_inverse=inv, p=ctx.p, digits=ctx.precision,
                    primitive_root=ctx.primitive_root)
    mats = []
    eig = dict(spec.eigenvalues)
    for q in operators:
        if q in eig:
            continue
        if (ctx.p * ctx.C) % q == 0:
            continue
        eig[q] = ctx.f[q]
    for q, a in sorted(eig.items()):
        A = _operator_matrix(fn, [hecke_t(b, q) for b in basis])
        mats.append([[PadicElement.from_rational(x, ctx.p, ctx.precision) if x else PadicElement.zero(ctx.p)
                      for x in row] for row in A])
        for i in range(d):
            mats[-1][i][i] = mats[-1][i][i] - ctx.embed(a)
    U = _operator_matrix(fn, [u_op(b, ctx.p) for b in basis])
    alpha = spec.up_value if spec.up_value is not None else ctx.alpha
    Up = [[PadicElement.from_rational(x, ctx.p, ctx.precision) if x else PadicElement.zero(ctx.p) for x in row]
          for row in U]
    for i in range(d):
        Up[i][i] = Up[i][i] - alpha
    mats.append(Up)
    # right eigenvectors: stack rows of every (A - a); left: stack columns
    right = _padic_kernel([row for A in mats for row in A], ctx.p)
    left = _padic_kernel([[A[i][j] for i in range(d)] for A in mats for j in range(d)], ctx.p)
    fn.eigenspace_dim = len(right)
    if len(right) != 1 or len(left) != 1:
        # no eigenline to project to: report coordinates along each basis vector instead
        fn.mode = "per-basis"
        return fn
    v, lam = right[0], left[0]
    norm = sum((a * b for a, b in zip(lam, v)), PadicElement.zero(ctx.p))
    if norm.is_zero():
        raise FunctionalError("left and right eigenvectors are orthogonal: defective eigen system")
    fn.dual = [x / norm for x in lam]
    fn.eigenvector = v
    return fn


def _pivot_system(basis: list[QExpansion]) -> tuple[list[int], list[list[Fraction]]]:
    """Indices n_1..n_d with invertible (b_i[n_j]) and the inverse matrix."""
    d = len(basis)
    top = min(b.n_max for b in basis)
    rows = sympy.Matrix([[Fraction(b[n]) for b in basis] for n in range(1, top + 1)])
    _, piv = rows.T.rref()
    if len(piv) < d:
        raise FunctionalError("basis forms are linearly dependent")
    pivots = [piv[i] + 1 for i in range(d)]
    Msub = sympy.Matrix([[sympy.Rational(Fraction(basis[i][n]).numerator, Fraction(basis[i][n]).denominator)
                          for i in range(d)] for n in pivots])
    inv = Msub.inv()
    return pivots, [[Fraction(int(inv[i, j].p), int(inv[i, j].q)) for j in range(d)] for i in range(d)]


def _operator_matrix(fn: Functional, images: list[QExpansion]) -> list[list[Fraction]]:
    """Column i holds the coordinates of images[i]; span stability is checked."""
    cols = [fn.coordinates(h) for h in images]
    d = len(images)
    return [[cols[j][i] for j in range(d)] for i in range(d)]


def _padic_kernel(rows: list[list[PadicElement]], p: int) -> list[list[PadicElement]]:
    """Right kernel of a small p-adic matrix; full pivoting on the least valuation keeps precision."""
    A = [list(r) for r in rows]
    ncols = len(A[0]) if A else 0
    pivcol = []
    r = 0
    while r < len(A):
        best = None
        for i in range(r, len(A)):
            for c in range(ncols):
                if c in pivcol or A[i][c].is_zero():
                    continue
                if best is None or A[i][c].valuation < A[best[0]][best[1]].valuation:
                    best = (i, c)
        if best is None:
            break
        i0, c = best
        A[r], A[i0] = A[i0], A[r]
        piv = A[r][c]
        A[r] = [x / piv for x in A[r]]
        for i in range(len(A)):
            if i != r and not A[i][c].is_zero():
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        pivcol.append(c)
        r += 1
    free = [c for c in range(ncols) if c not in pivcol]
    out = []
    for fc in free:
        v = [PadicElement.zero(p) for _ in range(ncols)]
        v[fc] = PadicElement.from_rational(1, p, 40)
        for i, c in enumerate(pivcol):
            v[c] = -A[i][fc]
        out.append(v)
    return out


# ---------------------------------------------------------------------------
# Psi values


@dataclass
class PsiValue:
    value: PadicElement
    r: int
    chi: DirichletCharacter
    mprime: int
    tag: str = "x Omega"

    def __str__(self):
        return f"{self.value} {self.tag}"


class Run:
    """A loaded configuration with caches for divisor-pair sweeps."""

    def __init__(self, cfg: RunConfig, f: NewformData | None = None, g: NewformData | None = None,
                 functional: Functional | None = None, jobs: int = 1):
        self.cfg = cfg
        if f is None or g is None:
            f, g = load_forms(cfg)
        validate_config(cfg, f, g)
        self.ctx = RankinContext(f, g, cfg.p, cfg.precision, cfg.primitive_root)
        self.functional = functional if functional is not None else build_functional(
            FunctionalSpec.parse(cfg.functional, cfg.base_dir), self.ctx)
        self.characters = config_characters(cfg)
        self.jobs = max(1, jobs)
        self._pairs = {}
        self._terms = {}

    @property
    def r_values(self) -> range:
        lo, hi = self.cfg.r_range
        return range(lo, hi + 1)

    def pairs(self, mprime: int, n: int):
        key = (mprime, n)
        if key not in self._pairs:
            self._pairs[key] = stratum_pairs(self.ctx, mprime, n, self.cfg.digits)
        return self._pairs[key]

    def terms(self, mprime: int, n: int, r: int) -> np.ndarray:
        key = (mprime, n, r)
        if key not in self._terms:
            self._terms[key] = pair_terms(self.ctx, self.pairs(mprime, n), r)
        return self._terms[key]

    def prefetch_terms(self, mprime: int, ns, rs) -> None:
        for n in ns:
            self.pairs(mprime, n)
        todo = [(n, r) for n in ns for r in rs if (mprime, n, r) not in self._terms]
        with ThreadPoolExecutor(self.jobs) as ex:
            for (n, r), t in zip(todo, ex.map(lambda nr: pair_terms(self.ctx, self.pairs(mprime, nr[0]), nr[1]), todo)):
                self._terms[(mprime, n, r)] = t

    def xi_residues(self) -> dict[int, int]:
        if self.functional.mode != "supplied":
            raise FunctionalError("the p-adic route needs a supplied functional")
        mod = self.ctx.p ** self.cfg.digits
        out = {}
        for n, v in self.functional.xi.items():
            e = self.ctx.embed(v)
            if e.valuation < 0:
                raise FunctionalError("xi values must be p-integral")
            out[n] = int(e.to_fraction() % mod) if not e.exact_zero else 0
        return out


def psi_value(r: int, chi: DirichletCharacter, mprime: int, run: Run, route: str = "padic") -> PsiValue:
    """gamma(M') times the functional applied to K~_{M'}(r - k + l + 1), without Omega."""
    ctx = run.ctx
    k, l, p = ctx.k, ctx.l, ctx.p
    if not 0 <= r <= k - l - 1:
        raise ValueError(f"r = {r} outside 0..{k - l - 1}")
    check_admissible(mprime, chi, p)
    gam = gamma_omega_free(mprime, ctx).padic()
    if route == "exact":
        fn = run.functional
        n_top = max(fn.support) if fn.mode == "supplied" and fn.support else max(
            (b.n_max for b in fn.basis), default=1)
        if fn.mode == "supplied" and not fn.support:
            return PsiValue(PadicElement.zero(p), r, chi, mprime)
        K = k_tilde(mprime, r - (k - l - 1), chi, ctx, n_top)
        val = fn(K)
        if isinstance(val, list):
            return PsiValue([v * gam * run.cfg.omega_unit for v in val], r, chi, mprime, "x Omega (per basis vector)")
        val = val if isinstance(val, PadicElement) else ctx.embed(val)
        return PsiValue(val * gam * run.cfg.omega_unit, r, chi, mprime)
    if route != "padic":
        raise ValueError(f"unknown route {route!r}")
    digits = run.cfg.digits
    mod = p ** digits
    j = tame_index(chi, p, ctx.primitive_root)
    T = teichmuller_power_table(p, digits, ctx.primitive_root)
    total = 0
    for n, xn in run.xi_residues().items():
        if xn == 0:
            continue
        pairs = run.pairs(mprime, n)
        t = run.terms(mprime, n, r)
        total += xn * int((t * T[j, pairs.u % p] % mod).astype(object).sum())
    val = PadicElement.with_absolute_precision(total % mod, p, digits) * gam * run.cfg.omega_unit
    return PsiValue(val, r, chi, mprime)


# ---------------------------------------------------------------------------
# verify suite


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    skipped: bool = False

    @property
    def verdict(self) -> str:
        return "SKIP" if self.skipped else ("PASS" if self.passed else "FAIL")


@dataclass
class SuiteResult:
    config: list
    checks: list
    psi_table: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed or c.skipped for c in self.checks) and not any(
            c.skipped for c in self.checks)


def _stratum_d_table(run: Run, mprime: int, n: int, r: int, m: int) -> np.ndarray:
    """(strata x characters) residues of d(n1, n2; r-k+l+1, chi_j) modulo p^m."""
    ctx = run.ctx
    p = ctx.p
    mod = p ** run.cfg.digits
    pairs = run.pairs(mprime, n)
    terms = run.terms(mprime, n, r)
    nS = (mprime * n) // ctx.C_f + 1
    W = np.zeros((nS, p), dtype=object)
    np.add.at(W, (pairs.n1, pairs.u % p), terms.astype(object))
    W %= mod
    T = teichmuller_power_table(p, run.cfg.digits, ctx.primitive_root).astype(object)
    return (W @ T.T % (p ** m)).astype(np.int64)


def _family_values(p: int, m: int, js: list[int], rs: list[int], g: int) -> np.ndarray:
    """Columns chi_j(x) x^r on (Z/p^m)^x, ordered (j, r) with r fastest."""
    mod = p ** m
    res = unit_residues(p, m)
    cols = []
    for j in js:
        w = teichmuller_powers(p, j, res, m, g).astype(np.int64)
        for r in rs:
            cols.append(w * np.array([pow(int(x), r, mod) for x in res], dtype=np.int64) % mod)
    return np.stack(cols, 1)


def kummer_checks(run: Run, sign: bool = True) -> tuple[CheckResult, CheckResult]:
    """(a) relations among characters at fixed r; (b) the mixed family chi_j x^r with (-1)^r."""
    cfg, ctx = run.cfg, run.ctx
    p = ctx.p
    M = cfg.kummer_mprime or _default_kummer_mprime(run)
    js = [tame_index(c, p, ctx.primitive_root) for c in run.characters]
    rs = list(run.r_values)
    levels = min(cfg.kummer_levels, valuation(M, p) - valuation(math.factorial(ctx.k - 2), p), cfg.digits)
    run.prefetch_terms(M, cfg.kummer_n, rs)
    d_tabs = {}
    for m in range(1, levels + 1):
        blocks = []
        for n in cfg.kummer_n:
            per_r = [_stratum_d_table(run, M, n, r, m)[:, js] for r in rs]
            blocks.append(np.stack(per_r, axis=2))  # strata x j x r
        d_tabs[m] = np.concatenate(blocks)
    n_strata = len(next(iter(d_tabs.values()))) if d_tabs else 0
    # (a)
    a_rel = 0
    a_fail = None
    for m in range(1, levels + 1):
        F = _family_values(p, m, js, [0], ctx.primitive_root)
        for c in congruence_relations(F, p, m):
            a_rel += 1
            for ri, r in enumerate(rs):
                lhs = d_tabs[m][:, :, ri] @ c % p ** m
                bad = np.nonzero(lhs)[0]
                if len(bad) and a_fail is None:
                    a_fail = {"m": m, "r": r, "relation": [int(x) for x in c], "stratum": int(bad[0])}
    res_a = CheckResult("kummer_characters", a_fail is None,
                        {"relations": a_rel, "strata": n_strata, "levels": levels, "mprime": M,
                         **({"witness": a_fail} if a_fail else {})})
    # (b)
    b_rel = 0
    b_fail = None
    depth = 0
    signs = np.array([(-1) ** r if sign else 1 for _ in js for r in rs], dtype=np.int64)
    for m in range(1, levels + 1):
        mod = p ** m
        F = _family_values(p, m, js, rs, ctx.primitive_root)
        D = d_tabs[m].reshape(len(d_tabs[m]), len(js) * len(rs)) % mod
        ok_level = True
        for c in congruence_relations(F, p, m):
            b_rel += 1
            lhs = D @ (signs * c % mod) % mod
            bad = np.nonzero(lhs)[0]
            if len(bad):
                ok_level = False
                if b_fail is None:
                    b_fail = {"m": m, "relation": [int(x) for x in c], "stratum": int(bad[0])}
        if ok_level and b_fail is None:
            depth = m
    res_b = CheckResult("kummer_mixed_family", b_fail is None,
                        {"relations": b_rel, "strata": n_strata, "depth": depth, "mprime": M,
                         "signed": sign, **({"witness": b_fail} if b_fail else {})})
    return res_a, res_b


def _default_kummer_mprime(run: Run) -> int:
    p = run.ctx.p
    c = max(ch.conductor() for ch in run.characters)
    e = max(2 + 2 * valuation(c, p), run.cfg.kummer_levels + 1 + valuation(math.factorial(run.ctx.k - 2), p))
    return p ** e


def _default_measure_mprime(run: Run) -> int:
    return run.cfg.measure_mprime or run.ctx.p * _default_kummer_mprime(run)


def assemble_measure(run: Run, mprime: int, levels: int) -> LevelwiseDistribution:
    """Point masses gamma * xi_n * (r = 0 pair term) at u, read off at levels 1..M."""
    ctx = run.ctx
    p, digits = ctx.p, run.cfg.digits
    mod = p ** digits
    gam = gamma_omega_free(mprime, ctx).padic() * run.cfg.omega_unit
    gu = int(gam.to_fraction() / Fraction(p) ** gam.val) % mod
    pts, wts = [], []
    for n, xn in run.xi_residues().items():
        if xn == 0:
            continue
        pairs = run.pairs(mprime, n)
        pts.append(pairs.u)
        wts.append(run.terms(mprime, n, 0).astype(object) * (xn * gu % mod) % mod)
    if not pts:
        return LevelwiseDistribution.from_top(p, np.zeros(p ** levels, dtype=np.int64), levels, digits)
    return dist_from_point_masses(p, np.concatenate(pts), np.concatenate(wts), levels, digits, shift=int(gam.val))


def measure_checks(run: Run, sign: bool = True) -> tuple[CheckResult, list]:
    cfg, ctx = run.cfg, run.ctx
    p = ctx.p
    M = _default_measure_mprime(run)
    vM = valuation(M, p) - valuation(math.factorial(ctx.k - 2), p)
    levels = min(cfg.measure_levels or vM, vM)
    rs = list(run.r_values)
    run.prefetch_terms(M, [n for n in run.functional.support], rs)
    mu = assemble_measure(run, M, levels)
    mu.assert_finadd()
    bounded = check_bounded(mu, cfg.bounded_threshold)
    psi = {(chi, r): psi_value(r, chi, M, run) for chi in run.characters for r in rs}
    detail = {"mprime": M, "levels": levels, "min_valuation": bounded.min_valuation,
              "per_level_min_valuation": list(bounded.per_level)}
    if not bounded.bounded:
        return CheckResult("measure", False, {**detail, "witness": "unbounded"}), list(psi.values())
    # level 1 against the character transform of Psi_l
    if set(tame_index(c, p, ctx.primitive_root) for c in run.characters) == set(range(p - 1)) and 0 in rs:
        mu1 = dist_from_char_values({chi: psi[chi, 0].value for chi in run.characters}, p, cfg.digits,
                                    ctx.primitive_root)
        for x in range(1, p):
            if not (mu1.value(1, x) - mu.value(1, x)).is_zero():
                return CheckResult("measure", False, {**detail, "witness": {"level": 1, "residue": x}}), list(psi.values())
        detail["level1_matches_character_transform"] = True
    worst = None
    for chi in run.characters:
        for r in rs:
            me = mellin_eval(mu, chi, r, ctx.primitive_root)
            target = psi[chi, r].value * ((-1) ** r if sign else 1)
            diff = me - target
            if not diff.is_zero():
                return CheckResult("measure", False, {**detail, "witness": {"character": chi.literal(), "r": r,
                                                                             "level": levels}}), list(psi.values())
            worst = me.absprec if worst is None else min(worst, me.absprec)
    detail["mellin_agreement_absprec"] = int(worst) if worst is not None else None
    return CheckResult("measure", True, detail), list(psi.values())


def mprime_independence_check(run: Run) -> CheckResult:
    """Normalized Dirichlet coefficients at M' = p^2 C^2 and p^3 C^2 agree termwise."""
    ctx = run.ctx
    p = ctx.p
    B = p * p * run.cfg.prop41_terms
    worst = None
    for chi in run.characters:
        c = chi.conductor()
        Ms = (p * p * c * c, p ** 3 * c * c)
        for r in run.r_values:
            s = ctx.l + r
            S1 = prop41_series(ctx, chi, s, Ms[0], B)
            S2 = prop41_series(ctx, chi, s, Ms[1], B)
            for m in range(1, B + 1):
                a, b = S1.terms[m], S2.terms[m]
                d = a - b
                if not d.is_zero():
                    return CheckResult("mprime_independence", False,
                                       {"witness": {"character": chi.literal(), "r": r, "m": m}})
                if not a.is_zero():
                    rel = int(min(d.absprec, b.absprec) - a.valuation)
                    worst = rel if worst is None else min(worst, rel)
    return CheckResult("mprime_independence", worst is not None and worst >= 10,
                       {"min_relative_digits": worst, "terms": B})


def verify_suite(run: Run, sign: bool = True) -> SuiteResult:
    """Kummer congruences, then the mixed family, then the measure, then M'-independence.

    The first failing check stops the suite; later checks are reported as skipped.
    """
    checks = []
    psi_rows = []
    stages = [
        lambda: list(kummer_checks(run, sign)),
        lambda: [_measure_stage(run, sign, psi_rows)],
        lambda: [mprime_independence_check(run)],
    ]
    names = [["kummer_characters", "kummer_mixed_family"], ["measure"], ["mprime_independence"]]
    failed = False
    for stage, nm in zip(stages, names):
        if failed:
            checks.extend(CheckResult(x, False, skipped=True) for x in nm)
            continue
        out = stage()
        checks.extend(out)
        failed = not all(c.passed for c in out)
    return SuiteResult(run.cfg.echo(), checks, psi_rows)


def _measure_stage(run: Run, sign: bool, psi_rows: list) -> CheckResult:
    res, psis = measure_checks(run, sign)
    psi_rows.extend(psis)
    return res


# ---------------------------------------------------------------------------
# report


def format_report(result: SuiteResult | None, config: list | None = None) -> str:
    lines = [f"# {SCHEMA_VERSION}"]
    if result is None:
        return "\n".join(lines) + "\n"
    lines.append("[config]")
    lines.extend(f"{k} = {v}" for k, v in (config or result.config))
    lines.append("[checks]")
    for c in result.checks:
        lines.append(f"{c.name} = {c.verdict}")
        for k in sorted(c.detail):
            lines.append(f"  {c.name}.{k} = {c.detail[k]}")
    lines.append("[psi]")
    for row in sorted(result.psi_table, key=lambda x: (x.mprime, x.r, x.chi.literal())):
        v = row.value
        lines.append(f"M'={row.mprime} r={row.r} {row.chi.literal()} = {_fmt_padic(v)} {row.tag}")
    lines.append(f"[summary]\nverdict = {'PASS' if result.passed else 'FAIL'}")
    return "\n".join(lines) + "\n"


def _fmt_padic(x: PadicElement) -> str:
    if x.exact_zero:
        return "0"
    if x.prec == 0:
        return f"O({x.p}^{x.val})"
    return f"{x.unit}*{x.p}^{x.val} + O({x.p}^{int(x.absprec)})"


def emit_report(result: SuiteResult | None, path: str) -> str:
    text = format_report(result)
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        fh.write(text)
    return text


__all__ = [
    "CheckResult",
    "ConfigError",
    "Functional",
    "FunctionalError",
    "FunctionalSpec",
    "PsiValue",
    "Run",
    "RunConfig",
    "SCHEMA_VERSION",
    "SuiteResult",
    "assemble_measure",
    "build_functional",
    "emit_report",
    "format_report",
    "kummer_checks",
    "load_basis",
    "load_forms",
    "load_newform",
    "measure_checks",
    "mprime_independence_check",
    "psi_value",
    "validate_config",
    "verify_suite",
    "write_qexp",
]
