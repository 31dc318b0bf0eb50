from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from padic_rankin.exactnum import Cyclotomic
from padic_rankin.padic import (
    PadicElement,
    PrecisionError,
    UnsupportedExtensionError,
    WildExtensionError,
    embed_cyclotomic,
    hensel_unit_root,
    padic_log,
    teichmuller,
)


def pe(x, p=5, N=20):
    return PadicElement.from_rational(x, p, N)


class TestTeichmuller:
    def test_one(self):
        assert teichmuller(1, 5, 10) == pe(1, 5, 10)

    def test_minus_one(self):
        assert (teichmuller(4, 5, 10) + 1).is_zero()

    def test_two_mod_25(self):
        assert teichmuller(2, 5, 2).residue() == 7

    def test_rejects_multiple_of_p(self):
        with pytest.raises(ValueError):
            teichmuller(10, 5, 3)

    @pytest.mark.parametrize("p", [3, 5, 7, 11, 13])
    def test_residue_sweep(self, p):
        for u in range(1, p):
            w = teichmuller(u, p, 15)
            assert (w ** (p - 1) - 1).is_zero()
            assert w.residue() % p == u

    @pytest.mark.parametrize("p", [5, 11])
    def test_multiplicative(self, p):
        for u in range(1, p):
            for v in range(1, p):
                lhs = teichmuller(u * v % p, p, 12)
                assert (lhs - teichmuller(u, p, 12) * teichmuller(v, p, 12)).is_zero()


class TestHensel:
    def test_delta_at_eleven(self):
        p, N = 11, 30
        alpha, alpha_p = hensel_unit_root(pe(534612, p, N), pe(11 ** 11, p, N), 12, N)
        assert alpha.residue() % p == 1
        assert alpha.valuation == 0
        assert alpha_p.valuation == 11
        assert (alpha * alpha - 534612 * alpha + 11 ** 11).is_zero()
        assert (alpha + alpha_p - 534612).is_zero()
        assert (alpha * alpha_p - 11 ** 11).is_zero()

    def test_degenerate(self):
        alpha, alpha_p = hensel_unit_root(pe(1), PadicElement.zero(5), 2, 10)
        assert (alpha - 1).is_zero() and alpha_p.exact_zero

    def test_rejects_non_ordinary(self):
        with pytest.raises(ValueError):
            hensel_unit_root(pe(10), pe(5 ** 3), 4, 10)

    @given(st.integers(1, 10 ** 6).filter(lambda a: a % 7), st.integers(2, 14))
    @settings(max_examples=40)
    def test_vieta(self, a, k):
        p, N = 7, 25
        c = pe(p ** (k - 1), p, N)
        alpha, alpha_p = hensel_unit_root(pe(a, p, N), c, k, N)
        assert alpha.is_unit()
        assert (alpha * alpha_p - c).is_zero()
        assert (alpha + alpha_p - a).is_zero()


class TestEmbedding:
    def test_rational(self):
        assert embed_cyclotomic(Fraction(3, 2), 5, 10, 2) == pe(Fraction(3, 2), 5, 10)

    def test_zeta4(self):
        assert embed_cyclotomic(Cyclotomic.root_of_unity(4), 5, 2, 2).residue() == 7

    def test_minus_one(self):
        assert (embed_cyclotomic(Cyclotomic.root_of_unity(2), 5, 10, 2) + 1).is_zero()

    def test_wild_order_rejected(self):
        with pytest.raises(WildExtensionError):
            embed_cyclotomic(Cyclotomic.root_of_unity(5), 5, 10, 2)

    def test_unramified_outside_qp_rejected(self):
        with pytest.raises(UnsupportedExtensionError):
            embed_cyclotomic(Cyclotomic.root_of_unity(3), 5, 10, 2)

    @given(st.lists(st.integers(-20, 20), min_size=4, max_size=4),
           st.lists(st.integers(-20, 20), min_size=4, max_size=4))
    @settings(max_examples=40)
    def test_ring_homomorphism(self, xs, ys):
        p, N, g = 11, 15, 2
        x, y = Cyclotomic(10, xs + [0] * 6), Cyclotomic(10, ys + [0] * 6)
        ex, ey = embed_cyclotomic(x, p, N, g), embed_cyclotomic(y, p, N, g)
        assert (embed_cyclotomic(x + y, p, N, g) - (ex + ey)).is_zero()
        assert (embed_cyclotomic(x * y, p, N, g) - ex * ey).is_zero()


class TestLog:
    def test_one(self):
        assert padic_log(pe(1), 10).is_zero()

    def test_square_doubles(self):
        assert (padic_log(pe(36), 10) - 2 * padic_log(pe(6), 10)).is_zero()

    def test_six_mod_125(self):
        # long partial sum of the series, reduced mod 5^3
        total = sum(Fraction((-1) ** (n + 1) * 5 ** n, n) for n in range(1, 60))
        got = padic_log(pe(6, 5, 3), 3)
        assert (got - PadicElement.with_absolute_precision(total, 5, 3)).is_zero()

    def test_rejects_non_principal_unit(self):
        with pytest.raises(ValueError):
            padic_log(pe(2), 10)

    @given(st.integers(0, 10 ** 6), st.integers(0, 10 ** 6))
    @settings(max_examples=40)
    def test_homomorphism(self, a, b):
        p, N = 7, 12
        u, v = pe(1 + p * a, p, N), pe(1 + p * b, p, N)
        diff = padic_log(u * v, N) - padic_log(u, N) - padic_log(v, N)
        assert diff.is_zero() or diff.valuation >= N - 1


class TestElement:
    def test_exact_zero_is_distinguished(self):
        z = PadicElement.zero(5)
        assert z.exact_zero and z.valuation == float("inf")
        inexact = pe(5 ** 3, 5, 3) - pe(5 ** 3, 5, 3)
        assert not inexact.exact_zero and inexact.is_zero()

    def test_is_zero_mod_needs_precision(self):
        x = PadicElement.with_absolute_precision(25, 5, 3)
        assert x.is_zero_mod(2)
        with pytest.raises(PrecisionError):
            PadicElement.with_absolute_precision(0, 5, 3).is_zero_mod(5)

    def test_division_by_non_unit_tracks_valuation(self):
        q = pe(3) / pe(25)
        assert q.valuation == -2 and q.to_fraction() == Fraction(3, 25)
