import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from padic_rankin.nearlyhol import NearlyHolExpansion, delta_op, delta_power, hol_project, nh_mul
from padic_rankin.qexp import QExpansion, eta_delta


def nh(coeffs, k, depth_layers=()):
    layers = [QExpansion(coeffs, weight=k)] + [QExpansion(c, weight=k) for c in depth_layers]
    return NearlyHolExpansion(layers, k)


def random_cusp(n, seed, k=12):
    rng = random.Random(seed)
    return NearlyHolExpansion.from_qexp(QExpansion([0] + [rng.randint(-99, 99) for _ in range(n)], weight=k))


class TestDelta:
    def test_holomorphic_rule(self):
        f = eta_delta(20).expansion
        D = delta_op(NearlyHolExpansion.from_qexp(f))
        assert D.weight == 14 and D.depth == 1
        assert all(D.coeff(0, n) == n * f[n] for n in range(21))
        assert all(D.coeff(1, n) == -12 * f[n] for n in range(21))

    def test_zero(self):
        Z = NearlyHolExpansion.zero(10, 4)
        assert delta_op(Z).layers[0].is_zero() and delta_op(Z).layers[1].is_zero()

    def test_constant_weight_zero(self):
        one = nh([1, 0, 0], 0)
        D = delta_op(one)
        assert D.layers[0].coeffs == [0, 0, 0] and D.layers[1].coeffs == [0, 0, 0]

    def test_power_zero_and_one(self):
        F = random_cusp(10, 1)
        assert delta_power(F, 0).equals(F)
        assert delta_power(F, 1).equals(delta_op(F))

    @pytest.mark.parametrize("r", [1, 2, 3])
    def test_closed_form(self, r):
        # depth-0 input: layer r-j is binom(r, j) Gamma(r+k)/Gamma(j+k) (-1)^{r-j} d^j f
        k = 6
        F = random_cusp(25, r, k)
        Dr = delta_power(F, r)
        for j in range(r + 1):
            c = math.comb(r, j) * Fraction(math.factorial(r + k - 1), math.factorial(j + k - 1)) * (-1) ** (r - j)
            for n in range(26):
                assert Dr.coeff(r - j, n) == c * n ** j * F.coeff(0, n)

    @given(st.lists(st.integers(-9, 9), min_size=12, max_size=12),
           st.lists(st.integers(-9, 9), min_size=12, max_size=12),
           st.integers(0, 6), st.integers(0, 6))
    @settings(max_examples=30)
    def test_leibniz(self, a, b, k, s):
        f, g = nh([0] + a[1:], k), nh([0] + b[1:], s)
        lhs = delta_op(nh_mul(f, g))
        rhs = nh_mul(delta_op(f), g) + nh_mul(f, delta_op(g))
        assert lhs.equals(rhs)


class TestHolProject:
    def test_identity_on_cusp_forms(self):
        f = eta_delta(30).expansion
        assert hol_project(NearlyHolExpansion.from_qexp(f)).coefficients_equal(f)

    def test_kills_delta(self):
        F = random_cusp(40, 5, 10)
        assert hol_project(delta_op(F)).is_zero()

    @pytest.mark.parametrize("j", [1, 2, 3])
    def test_kills_delta_powers(self, j):
        for seed in range(4):
            assert hol_project(delta_power(random_cusp(40, seed, 8), j)).is_zero()

    def test_depth_guard(self):
        F = nh([0, 1, 2], 4, ([0, 1, 1], [0, 2, 1], [0, 3, 1]))
        with pytest.raises(ValueError, match="diverges"):
            hol_project(F)

    def test_constant_term_rejected(self):
        with pytest.raises(ValueError):
            hol_project(nh([1, 1, 0], 12))


def gamma_integral_coefficient(layers, k, n):
    """Numerical (4 pi n)^{k-1}/(k-2)! int_0^inf c_n(y) e^{-4 pi n y} y^{k-2} dy."""
    def integrand(y):
        Y = 1.0 / (4 * math.pi * y)
        return sum(float(a) * Y ** j for j, a in enumerate(layers)) * math.exp(-4 * math.pi * n * y) * y ** (k - 2)

    val, _ = quad(integrand, 0, math.inf, epsabs=0, epsrel=1e-13, limit=400)
    return (4 * math.pi * n) ** (k - 1) / math.factorial(k - 2) * val


def test_closed_form_matches_quadrature():
    rng = random.Random(7)
    k = 12
    a0 = [0] + [rng.randint(-9, 9) for _ in range(8)]
    a1 = [0] + [rng.randint(-9, 9) for _ in range(8)]
    a2 = [0] + [rng.randint(-9, 9) for _ in range(8)]
    h = hol_project(nh(a0, k, (a1, a2)))
    for n in (1, 2, 3, 5, 8):
        exact = float(h[n])
        num = gamma_integral_coefficient([a0[n], a1[n], a2[n]], k, n)
        assert abs(num - exact) <= 1e-8 * max(1.0, abs(exact))
