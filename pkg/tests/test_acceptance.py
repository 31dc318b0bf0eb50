"""Acceptance suite: one test per criterion, each asserting its tolerance and runtime budget."""

import copy
import math
import random
import time
from fractions import Fraction

import pytest

from padic_rankin.eisenstein import (
    evaluate_expansion,
    gstar_expansion,
    gstar_to_eisenstein_factor,
    lattice_sum_oracle,
)
from padic_rankin.exactnum import DirichletCharacter, characters_mod, char_eval, gauss_sum, valuation
from padic_rankin.nearlyhol import delta_power, hol_project
from padic_rankin.padic import PadicElement, hensel_unit_root, teichmuller
from padic_rankin.pipeline import kummer_checks, measure_checks, mprime_independence_check
from padic_rankin.qexp import u_op
from padic_rankin.rankin import euler_product_coeffs, k_star, k_tilde, p_s_poly, rankin_coeffs

from conftest import P, tame
from test_nearlyhol import gamma_integral_coefficient, nh, random_cusp
from test_rankin import ps_oracle

K, L = 12, 2
trivial = DirichletCharacter(1)
quad3 = DirichletCharacter.from_generator_images(3, [(2, 1)])
quad5 = DirichletCharacter.from_generator_images(5, [(2, 2)])
Z_POINTS = (0.1 + 1j, -0.3 + 0.8j, 0.45 + 1.3j)


class Clock:
    def __init__(self, budget: float):
        self.budget = budget

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        if exc[0] is None:
            assert self.elapsed < self.budget, f"{self.elapsed:.1f} s over the {self.budget} s budget"


def verdict(label: str, ok: bool, detail: str = "") -> None:
    print(f"criterion {label}: {'PASS' if ok else 'FAIL'} {detail}".rstrip())
    assert ok, detail


@pytest.mark.criterion("1")
def test_euler_product_identity(delta, g14):
    with Clock(10):
        a = rankin_coeffs(delta, g14, 0, 200)
        b = euler_product_coeffs(delta, g14, 0, 200)
        bad = a.first_mismatch(b)
    verdict("1", bad is None and a.bound == 200, f"first mismatch {bad}")


def _lattice_error(w, s, theta):
    F = gstar_expansion(w, s, theta, 60)
    worst = 0.0
    for z in Z_POINTS:
        series = evaluate_expansion(F, z) * gstar_to_eisenstein_factor(w, s)
        lattice = lattice_sum_oracle(w, s, theta, trivial, z, 200)
        worst = max(worst, abs(series - lattice) / abs(lattice))
    return worst


@pytest.mark.criterion("2a")
@pytest.mark.xfail(strict=True, raises=AssertionError,
                   reason="w = 10 with an odd character violates theta(-1) = (-1)^w; the lattice sum vanishes")
def test_eisenstein_lattice_literal_case():
    with Clock(30):
        err = _lattice_error(10, 0, quad3)
    verdict("2a", err <= 1e-6, f"relative error {err:.2e}")


@pytest.mark.criterion("2a")
@pytest.mark.parametrize("w,s,theta", [(11, 0, quad3), (10, 0, quad5)], ids=["w11-mod3", "w10-mod5"])
def test_eisenstein_lattice_valid_parity(w, s, theta):
    with Clock(30):
        err = _lattice_error(w, s, theta)
    verdict("2a", err <= 1e-6, f"relative error {err:.2e}")


@pytest.mark.criterion("2b")
def test_eisenstein_delta_shift():
    with Clock(30):
        ok = all(delta_power(gstar_expansion(w, 0, th, 50), r).equals(gstar_expansion(w + 2 * r, -r, th, 50))
                 for r in (1, 2) for w, th in ((10, quad5), (11, quad3), (10, trivial)))
    verdict("2b", ok)


@pytest.mark.criterion("3")
def test_holomorphic_projection():
    with Clock(20):
        killed = all(hol_project(delta_power(random_cusp(100, seed), j)).is_zero()
                     for seed in range(10) for j in (1, 2, 3))
        rng = random.Random(13)
        worst = 0.0
        for n in (1, 2, 3, 5, 8):
            layers = [[0] + [rng.randint(-9, 9) for _ in range(8)] for _ in range(3)]
            exact = float(hol_project(nh(layers[0], K, layers[1:]))[n])
            num = gamma_integral_coefficient([x[n] for x in layers], K, n)
            worst = max(worst, abs(num - exact) / max(1.0, abs(exact)))
    verdict("3", killed and worst <= 1e-8, f"quadrature error {worst:.1e}")


@pytest.mark.criterion("4")
def test_route_equivalence(ctx):
    M, n = P * P, 20
    with Clock(120):
        bad = []
        for chi in (tame(0), tame(5)):
            for s in (0, -1, -2):
                direct = k_tilde(M, s, chi, ctx, n, enforce_admissible=False).expansion
                via = u_op(hol_project(k_star(s, chi, ctx, M * n)), M)
                if not direct.coefficients_equal(via):
                    bad.append((chi.literal(), s))
    verdict("4", not bad, f"mismatches {bad}")


@pytest.mark.criterion("5")
def test_ps_polynomials():
    rng = random.Random(5)
    gk = math.factorial(K - 2)
    with Clock(10):
        forms_ok = True
        for s in range(L - K + 1, 1):
            Ps = p_s_poly(s, K, L)
            forms_ok &= all(isinstance(q, int) for q in Ps.q_coeffs)
            for _ in range(5):
                x, y = rng.randint(1, 10 ** 4), rng.randint(1, 10 ** 4)
                forms_ok &= Ps(x, y) == ps_oracle(s, K, L, x, y)
                forms_ok &= Fraction(Ps.scaled(x, y)).denominator == 1
        seeds_ok = True
        for _ in range(50):
            r = rng.randint(0, K - L - 1)
            s = r - (K - L - 1)
            e = rng.randint(2, 6)
            mprime = P ** e * rng.choice([1, 2, 3, 5])
            n, n2 = rng.randint(1, 500), rng.randint(1, 10 ** 6)
            m = rng.randint(1, valuation(mprime, P) - valuation(gk, P))
            diff = Fraction(p_s_poly(s, K, L)(n2, mprime * n)) - n2 ** (K - L - 1 - r)
            seeds_ok &= diff == 0 or (valuation(diff.numerator, P) - valuation(diff.denominator, P)) >= m
    verdict("5", forms_ok and seeds_ok)


@pytest.mark.criterion("6")
def test_kummer_congruences(fixture_run):
    with Clock(300):
        a, b = kummer_checks(fixture_run)
    print(f"  mixed family: {b.detail['relations']} relations, depth {b.detail['depth']}, "
          f"{b.detail['strata']} strata; characters alone: {a.detail['relations']} relations")
    _, unsigned = kummer_checks(fixture_run, sign=False)
    verdict("6", a.passed and b.passed and b.detail["depth"] == 3 and not unsigned.passed,
            f"unsigned witness {unsigned.detail.get('witness')}")


@pytest.mark.criterion("7")
def test_measure(fixture_run):
    with Clock(120):
        res, _ = measure_checks(fixture_run)
    unsigned, _ = measure_checks(fixture_run, sign=False)
    verdict("7", res.passed and not unsigned.passed,
            f"levels {res.detail['levels']}, min valuation {res.detail['min_valuation']}, "
            f"agreement O(11^{res.detail.get('mellin_agreement_absprec')})")


@pytest.mark.criterion("8")
def test_mprime_independence(fixture_run):
    with Clock(300):
        res = mprime_independence_check(fixture_run)
    # normalizing by the wrong root must break the agreement
    mutated = copy.copy(fixture_run)
    mutated.ctx = copy.copy(fixture_run.ctx)
    mutated.ctx.alpha, mutated.ctx.alpha_prime = fixture_run.ctx.alpha_prime, fixture_run.ctx.alpha
    wrong = mprime_independence_check(mutated)
    verdict("8", res.passed and res.detail["min_relative_digits"] >= 10 and not wrong.passed,
            f"{res.detail['min_relative_digits']} relative digits over {res.detail['terms']} terms")


@pytest.mark.criterion("9")
def test_arithmetic_substrate():
    with Clock(5):
        teich = True
        for p in (3, 5, 7, 11, 13):
            for u in range(1, p):
                w = teichmuller(u, p, 20)
                teich &= (w ** (p - 1) - 1).is_zero() and w.residue() % p == u
        N = 30
        ap = PadicElement.from_rational(534612, P, N)
        alpha, _ = hensel_unit_root(ap, PadicElement.from_rational(P ** 11, P, N), K, N)
        hensel = (alpha * alpha - ap * alpha + P ** 11).is_zero() and alpha.valuation == 0
        gauss = True
        count = 0
        for c in range(1, 16):
            for chi in characters_mod(c):
                if chi.conductor() != c:
                    continue
                count += 1
                gauss &= gauss_sum(chi) * gauss_sum(chi.conjugate()) == char_eval(chi, -1) * c
    verdict("9", teich and hensel and gauss, f"{count} primitive characters")
