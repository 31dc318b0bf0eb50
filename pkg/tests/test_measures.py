import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from padic_rankin.exactnum import DirichletCharacter, characters_mod
from padic_rankin.measures import (
    CharacterTable,
    FinaddError,
    LevelwiseDistribution,
    check_bounded,
    congruence_relations,
    dist_from_char_values,
    dist_from_point_masses,
    kummer_verify,
    mellin_eval,
    tame_index,
    teichmuller_powers,
    unit_residues,
    wild_coordinate,
)
from padic_rankin.padic import PadicElement, WildExtensionError, embed_cyclotomic, teichmuller


def pe(x, p, N=12):
    return PadicElement.from_rational(x, p, N)


def chars(p, g):
    return [DirichletCharacter.from_generator_images(p, [(g, j)]) for j in range(p - 1)]


class TestFromCharValues:
    def test_two_point(self):
        chi0, chi1 = chars(3, 2)
        a, b = pe(5, 3), pe(7, 3)
        mu = dist_from_char_values({chi0: a, chi1: b}, 3, 10, 2)
        assert (mu.value(1, 1) - (a + b) / 2).is_zero()
        assert (mu.value(1, 2) - (a - b) / 2).is_zero()

    def test_constant_gives_dirac(self):
        v = pe(13, 11)
        mu = dist_from_char_values({c: v for c in chars(11, 2)}, 11, 10, 2)
        assert (mu.value(1, 1) - v).is_zero()
        assert all(mu.value(1, x).is_zero() for x in range(2, 11))

    @given(st.lists(st.integers(-10 ** 6, 10 ** 6), min_size=10, max_size=10))
    @settings(max_examples=25)
    def test_round_trip(self, vals):
        cs = chars(11, 2)
        values = {c: pe(v, 11, 9) if v else PadicElement.zero(11) for c, v in zip(cs, vals)}
        mu = dist_from_char_values(values, 11, 9, 2)
        for c in cs:
            back = mellin_eval(mu, c, 0, 2)
            assert (back - values[c]).is_zero()

    def test_higher_level_is_gated(self):
        with pytest.raises(WildExtensionError):
            dist_from_char_values({c: pe(1, 5) for c in chars(5, 2)}, 5, 5, 2, m=2)

    def test_missing_character(self):
        with pytest.raises(ValueError):
            dist_from_char_values({chars(5, 2)[0]: pe(1, 5)}, 5, 5, 2)


class TestBounded:
    def test_dirac(self):
        mu = dist_from_point_masses(7, np.array([3]), np.array([1]), 3, 8)
        v = check_bounded(mu)
        assert v.bounded and v.min_valuation == 0

    def test_unbounded(self):
        # mu^(m)(x) = p^-m is finitely additive and unbounded
        M, p = 4, 5
        top = np.ones(p ** M, dtype=np.int64)
        top[::p] = 0
        mu = LevelwiseDistribution(p, {M: top}, 10, -M) if M == 1 else None
        tables = {m: np.array([0 if x % p == 0 else p ** (M - m) for x in range(p ** m)], dtype=np.int64)
                  for m in range(1, M + 1)}
        mu = LevelwiseDistribution(p, tables, 10, -M)
        assert mu.finadd_ok()
        v = check_bounded(mu)
        assert not v.bounded and v.min_valuation == -M
        assert list(v.per_level) == [-1, -2, -3, -4]


class TestFinadd:
    def test_point_masses_are_additive(self):
        rng = np.random.default_rng(0)
        pts = rng.integers(1, 7 ** 4, 50)
        pts = pts[pts % 7 != 0]
        mu = dist_from_point_masses(7, pts, rng.integers(0, 100, len(pts)), 4, 6)
        assert mu.finadd_ok()

    def test_broken_tables_are_reported(self):
        t1 = np.array([0, 1, 1, 1, 1], dtype=np.int64)
        t2 = np.zeros(25, dtype=np.int64)
        t2[1] = 1
        mu = LevelwiseDistribution(5, {1: t1, 2: t2}, 4)
        assert mu.first_finadd_failure() is not None
        with pytest.raises(FinaddError):
            mu.assert_finadd()


class TestCharacterTable:
    def test_orthogonality_level_two(self):
        assert CharacterTable(5, 2, 2).orthogonality_holds()

    def test_orthogonality_tame(self):
        assert CharacterTable(11, 1, 2).orthogonality_holds()

    def test_embedding_is_teichmuller_power(self):
        tab = CharacterTable(11, 1, 2, chars(11, 2))
        for j, c in enumerate(tab.characters):
            for x in (1, 2, 7):
                assert (tab.embedded(c, x, 10) - teichmuller(x, 11, 10) ** j).is_zero()


class TestMellin:
    def test_dirac(self):
        p, u = 11, 29
        mu = dist_from_point_masses(p, np.array([u]), np.array([1]), 3, 9)
        for c in chars(p, 2)[:4]:
            for r in (0, 1, 3):
                want = embed_cyclotomic(c(u), p, 9, 2) * u ** r
                assert (mellin_eval(mu, c, r, 2) - want).is_zero()

    def test_refinement(self):
        p, u, M = 7, 1234, 3
        lo = dist_from_point_masses(p, np.array([u]), np.array([1]), M, 8)
        hi = dist_from_point_masses(p, np.array([u]), np.array([1]), M + 1, 8)
        c = chars(p, 3)[2]
        a, b = mellin_eval(lo, c, 1, 3), mellin_eval(hi, c, 1, 3, level=M + 1)
        assert (a - b).is_zero_mod(M)
        assert a.absprec == M

    def test_conductor_too_large(self):
        mu = dist_from_point_masses(5, np.array([1]), np.array([1]), 1, 4)
        wild = [c for c in characters_mod(25) if c.conductor() == 25][0]
        with pytest.raises(ValueError):
            mellin_eval(mu, wild, 0, 2)


class TestWild:
    def test_tame_is_one(self):
        assert (wild_coordinate(chars(11, 2)[3], 11, 2) - 1).is_zero()

    def test_trivial_is_one(self):
        assert (wild_coordinate(DirichletCharacter(1), 11, 2) - 1).is_zero()

    def test_wild_is_gated(self):
        wild = [c for c in characters_mod(121) if c.order() == 11][0]
        with pytest.raises(WildExtensionError):
            wild_coordinate(wild, 11, 2)


class TestRelations:
    @given(st.integers(0, 10 ** 9), st.integers(1, 3), st.integers(2, 4))
    @settings(max_examples=25, deadline=None)
    def test_complete_and_sound(self, seed, cols, rows):
        p, n = 3, 2
        mod = p ** n
        rng = np.random.default_rng(seed)
        A = rng.integers(0, mod, (rows, cols))
        gens = congruence_relations(A, p, n)
        span = set()
        for coeffs in itertools.product(range(mod), repeat=len(gens)):
            v = sum((c * g for c, g in zip(coeffs, gens)), np.zeros(cols, dtype=np.int64)) % mod
            span.add(tuple(int(x) for x in v))
        kernel = {c for c in itertools.product(range(mod), repeat=cols) if not np.any(A @ np.array(c) % mod)}
        assert span == kernel

    def test_tame_characters_are_independent(self):
        res = unit_residues(11, 1)
        F = np.stack([teichmuller_powers(11, j, res, 1, 2) for j in range(10)], 1)
        assert congruence_relations(F, 11, 1) == []


class TestKummer:
    def _family(self, p, g):
        res = unit_residues(p, 1)
        F = np.stack([teichmuller_powers(p, j, res, 4, g) for j in range(p - 1)] + [res], 1)
        return res, F

    def test_evaluation_distribution_passes(self):
        p, g = 7, 3
        res, F = self._family(p, g)
        targets = F[list(res).index(1)]
        v = kummer_verify(F % p, targets, p, 4, 1)
        assert v.passed and v.relations_checked >= 1

    def test_perturbed_target_fails(self):
        p, g = 7, 3
        res, F = self._family(p, g)
        targets = F[list(res).index(1)].astype(object).copy()
        targets[1] += 1
        v = kummer_verify(F % p, targets, p, 4, 1)
        assert not v.passed and v.witness["n"] == 1

    def test_shift(self):
        p, g = 7, 3
        res, F = self._family(p, g)
        targets = F[list(res).index(1)].astype(object)
        assert kummer_verify(F % p, targets, p, 4, 1, shift=2).passed
        # dividing the masses by p breaks integrality
        assert not kummer_verify(F % p, targets, p, 4, 1, shift=-1).passed

    def test_precision_shortfall_is_not_failure(self):
        p, g = 7, 3
        res, F = self._family(p, g)
        relations = [(3, np.array([0] * (p - 1) + [p ** 3]))]
        v = kummer_verify(F % p ** 3, np.zeros(p), p, 2, 3, relations)
        assert v.passed and v.precision_insufficient == 1

    def test_hypothesis_failure_skipped(self):
        p = 7
        F = np.eye(3, dtype=np.int64)
        v = kummer_verify(F, np.array([1, 0, 0]), p, 4, 1, [(1, np.array([1, 0, 0]))])
        assert v.passed and v.hypothesis_failures == 1 and v.relations_checked == 0


def test_tame_index_rejects_wild():
    wild = [c for c in characters_mod(121) if c.conductor() == 121][0]
    with pytest.raises(WildExtensionError):
        tame_index(wild, 11, 2)
