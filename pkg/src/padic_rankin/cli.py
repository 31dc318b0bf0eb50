"""Command line entry point: `padic-rankin [--config PATH] [--out DIR] [--jobs N] <command>`.

Exit codes: 0 when every verdict passes, 1 on a verification failure,
2 on a configuration or ingestion error.
"""

from __future__ import annotations

import argparse
import os
import random
import sys

import numpy as np

from .eisenstein import EisensteinSpec, eis_fourier
from .exactnum import DirichletCharacter, parse_character
from .measures import LevelwiseDistribution, kummer_verify, teichmuller_powers, unit_residues
from .nearlyhol import hol_project
from .padic import PrecisionError, UnsupportedExtensionError
from .pipeline import (
    ConfigError,
    FunctionalError,
    Run,
    RunConfig,
    emit_report,
    load_forms,
    psi_value,
    validate_config,
    verify_suite,
    write_qexp,
)
from .qexp import NewformValidationError, QExpansion, TruncationError
from .rankin import AdmissibilityError, RankinContext, k_star, k_tilde

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="padic-rankin", description=__doc__.splitlines()[0])
    ap.add_argument("--config", default="builtin", help="key = value config file ('builtin' for the shipped fixture)")
    ap.add_argument("--out", default=None, help="output directory (overrides out_dir)")
    ap.add_argument("--jobs", type=int, default=1, help="worker threads for independent (r, chi) cells")
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("ingest", help="load and validate f and g, print their invariants")

    e = sub.add_parser("eisenstein", help="write the Y-layer expansion of G*_w(z, s)")
    e.add_argument("--w", type=int, required=True)
    e.add_argument("--s", type=int, required=True)
    e.add_argument("--theta", required=True, help="character literal")
    e.add_argument("--n", type=int, default=50)

    h = sub.add_parser("holproj", help="holomorphic projection of K*(s, chi)")
    h.add_argument("--s", type=int, required=True)
    h.add_argument("--chi", required=True)
    h.add_argument("--n", type=int, default=20)

    k = sub.add_parser("ktilde", help="exact K~_{M'}(r - k + l + 1, chi)")
    k.add_argument("--mprime", type=int, required=True)
    k.add_argument("--r", type=int, required=True)
    k.add_argument("--chi", required=True)
    k.add_argument("--n", type=int, default=5)
    k.add_argument("--relaxed", action="store_true", help="skip the (M') admissibility check")

    kv = sub.add_parser("kummer-verify", help="necessity check of the Kummer congruences on a distribution file")
    kv.add_argument("--dist", required=True)
    kv.add_argument("--relations", default=None)
    kv.add_argument("--level", type=int, default=None)

    ps = sub.add_parser("psi", help="one Omega-free Psi value")
    ps.add_argument("--r", type=int, required=True)
    ps.add_argument("--chi", required=True)
    ps.add_argument("--mprime", type=int, default=None)
    ps.add_argument("--route", choices=("padic", "exact"), default="padic")

    rp = sub.add_parser("report", help="run the verify suite and write the report")
    rp.add_argument("--omega-check", action="store_true", help="rerun with Omega scaled by a random unit")
    rp.add_argument("--drop-sign", action="store_true", help="omit (-1)^r; the suite is expected to fail")
    rp.add_argument("--dist-out", action="store_true", help="also write the assembled measure as a distribution file")
    return ap


def _chi(text: str, p: int) -> DirichletCharacter:
    text = text.strip()
    if text.startswith("chi{"):
        return parse_character(text)
    if text.startswith("tame:"):
        return DirichletCharacter.from_generator_images(p, [(_root(p), int(text[5:]))])
    raise ConfigError(f"cannot read character {text!r}; use a literal or tame:j")


def _root(p: int) -> int:
    import sympy

    return int(sympy.primitive_root(p))


def _out_dir(args, cfg: RunConfig) -> str:
    d = args.out or (cfg.out_dir if os.path.isabs(cfg.out_dir) else os.path.join(os.getcwd(), cfg.out_dir))
    os.makedirs(d, exist_ok=True)
    return d


def write_nearlyhol(path: str, F, comments=()) -> None:
    """Layers j = 0..depth under `layer j` headers, each in the newform file layout."""
    with open(path, "w") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
    for j, layer in enumerate(F.layers):
        tmp = path + f".layer{j}"
        write_qexp(tmp, QExpansion(layer.coeffs, weight=F.weight, level=F.level, character=F.character))
        with open(tmp) as src, open(path, "a") as fh:
            fh.write(f"layer {j}\n")
            fh.write(src.read())
        os.remove(tmp)


def read_distribution(path: str) -> LevelwiseDistribution:
    """Header lines `p`, `digits`, `shift`; then `m x value` lines (value in units of p^shift)."""
    head = {}
    rows = []
    with open(path) as fh:
        for ln in fh:
            ln = ln.split("#", 1)[0].strip()
            if not ln:
                continue
            parts = ln.split()
            if parts[0] in ("p", "digits", "shift"):
                head[parts[0]] = int(parts[1])
            else:
                rows.append(tuple(int(x) for x in parts))
    try:
        p, digits, shift = head["p"], head["digits"], head.get("shift", 0)
    except KeyError as exc:
        raise ConfigError(f"{path}: missing header {exc}") from exc
    levels = sorted({m for m, _, _ in rows})
    tables = {m: np.zeros(p ** m, dtype=object) for m in levels}
    for m, x, v in rows:
        tables[m][x % p ** m] = v
    return LevelwiseDistribution(p, tables, digits, shift)


def write_distribution(path: str, mu: LevelwiseDistribution) -> None:
    with open(path, "w") as fh:
        fh.write(f"p {mu.p}\ndigits {mu.digits}\nshift {mu.shift}\n")
        for m in sorted(mu.tables):
            t = mu.tables[m]
            for x in range(len(t)):
                if x % mu.p:
                    fh.write(f"{m} {x} {int(t[x])}\n")


def read_relations(path: str) -> list[tuple[int, np.ndarray]]:
    """Lines `n c_1 ... c_k`: a relation modulo p^n."""
    out = []
    with open(path) as fh:
        for ln in fh:
            ln = ln.split("#", 1)[0].strip()
            if ln:
                vals = [int(x) for x in ln.split()]
                out.append((vals[0], np.array(vals[1:], dtype=object)))
    return out


def _cmd_ingest(args, cfg):
    f, g = load_forms(cfg)
    validate_config(cfg, f, g)
    ctx = RankinContext(f, g, cfg.p, cfg.precision, cfg.primitive_root)
    print(f"f: weight {f.weight}, conductor {f.conductor}, {f.character.literal()}, n_max {f.n_max}")
    print(f"g: weight {g.weight}, conductor {g.conductor}, {g.character.literal()}, n_max {g.n_max}")
    print(f"a({cfg.p}) = {f[cfg.p]}; unit root alpha = {ctx.alpha}")
    return EXIT_PASS


def _cmd_eisenstein(args, cfg):
    spec = EisensteinSpec(args.w, args.s, parse_character(args.theta), DirichletCharacter(1), args.n)
    F, const = eis_fourier(spec)
    path = os.path.join(_out_dir(args, cfg), f"eisenstein_w{args.w}_s{args.s}.nh")
    write_nearlyhol(path, F, [f"G*_{args.w}(z, {args.s}), theta = {args.theta}",
                              f"constant terms: {'; '.join(const.terms) or 'none'}"])
    print(path)
    return EXIT_PASS


def _cmd_holproj(args, cfg):
    run = Run(cfg, jobs=args.jobs)
    chi = _chi(args.chi, cfg.p)
    h = hol_project(k_star(args.s, chi, run.ctx, args.n))
    path = os.path.join(_out_dir(args, cfg), f"holproj_s{args.s}.qexp")
    write_qexp(path, h, [f"hol projection of K*(s = {args.s}, {chi.literal()})"])
    print(path)
    return EXIT_PASS


def _cmd_ktilde(args, cfg):
    run = Run(cfg, jobs=args.jobs)
    chi = _chi(args.chi, cfg.p)
    ctx = run.ctx
    s = args.r - (ctx.k - ctx.l - 1)
    K = k_tilde(args.mprime, s, chi, ctx, args.n, enforce_admissible=not args.relaxed)
    path = os.path.join(_out_dir(args, cfg), f"ktilde_M{args.mprime}_r{args.r}.qexp")
    write_qexp(path, K.expansion, [f"K~ at M' = {args.mprime}, s = {s}, {chi.literal()}"])
    print(path)
    return EXIT_PASS


def _cmd_kummer(args, cfg):
    mu = read_distribution(args.dist)
    p = mu.p
    M = args.level or mu.max_level
    res = unit_residues(p, M)
    g = cfg.primitive_root or _root(p)
    lo, hi = cfg.r_range
    js = range(p - 1)
    mod = p ** mu.digits
    cols = []
    for j in js:
        w = teichmuller_powers(p, j, res, mu.digits, g).astype(object)
        for r in range(lo, hi + 1):
            cols.append(w * np.array([pow(int(x), r, mod) for x in res], dtype=object) % mod)
    F = np.stack(cols, 1)
    targets = (mu.tables[M][res].astype(object) @ F) % mod
    rel = read_relations(args.relations) if args.relations else None
    verdict = kummer_verify(F % p ** M, targets, p, mu.digits, M, rel, shift=mu.shift)
    print(f"kummer-verify level {M}: {verdict}")
    return EXIT_PASS if verdict.passed else EXIT_FAIL


def _cmd_psi(args, cfg):
    run = Run(cfg, jobs=args.jobs)
    chi = _chi(args.chi, cfg.p)
    M = args.mprime or cfg.mprimes[0]
    val = psi_value(args.r, chi, M, run, route=args.route)
    print(f"Psi_(l+{args.r})({chi.literal()}) at M' = {M}: {val}")
    return EXIT_PASS


def _cmd_report(args, cfg):
    from .pipeline import assemble_measure, _default_measure_mprime

    run = Run(cfg, jobs=args.jobs)
    result = verify_suite(run, sign=not args.drop_sign)
    out = _out_dir(args, cfg)
    text = emit_report(result, os.path.join(out, "report.txt"))
    for c in result.checks:
        print(f"{c.name}: {c.verdict}")
    ok = result.passed
    if args.omega_check:
        unit = random.Random().randrange(1, cfg.p ** cfg.digits)
        while unit % cfg.p == 0:
            unit += 1
        cfg.omega_unit = unit
        again = verify_suite(Run(cfg, jobs=args.jobs), sign=not args.drop_sign)
        same = [c.verdict for c in again.checks] == [c.verdict for c in result.checks]
        print(f"omega rescaling by {unit}: verdicts {'identical' if same else 'DIFFER'}")
        ok = ok and same
        cfg.omega_unit = 1
    if args.dist_out:
        mu = assemble_measure(run, _default_measure_mprime(run), cfg.measure_levels or 3)
        write_distribution(os.path.join(out, "measure.dist"), mu)
    print(os.path.join(out, "report.txt"))
    return EXIT_PASS if ok else EXIT_FAIL


_COMMANDS = {
    "ingest": _cmd_ingest,
    "eisenstein": _cmd_eisenstein,
    "holproj": _cmd_holproj,
    "ktilde": _cmd_ktilde,
    "kummer-verify": _cmd_kummer,
    "psi": _cmd_psi,
    "report": _cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = RunConfig.load(args.config)
        return _COMMANDS[args.command](args, cfg)
    except (ConfigError, NewformValidationError, AdmissibilityError, FunctionalError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TruncationError as exc:
        print(f"truncation shortfall: {exc}; raise n_max", file=sys.stderr)
        return EXIT_CONFIG
    except (UnsupportedExtensionError, PrecisionError, NotImplementedError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
