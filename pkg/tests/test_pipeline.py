import dataclasses
import math
from fractions import Fraction

import pytest

from padic_rankin.exactnum import DirichletCharacter, divisors
from padic_rankin.padic import PadicElement
from padic_rankin.pipeline import (
    ConfigError,
    Functional,
    FunctionalError,
    FunctionalSpec,
    Run,
    RunConfig,
    SCHEMA_VERSION,
    build_functional,
    emit_report,
    format_report,
    load_basis,
    load_forms,
    load_newform,
    psi_value,
    validate_config,
    verify_suite,
    write_qexp,
)
from padic_rankin.qexp import NewformData, NewformValidationError, QExpansion, eta_delta, v_op
from padic_rankin.rankin import RankinContext, gamma_omega_free, k_tilde

from conftest import P, g14_newform, tame
from test_rankin import ps_oracle, sparse_g


def small_config(**overrides) -> RunConfig:
    """The fixture pair on a reduced grid so the whole suite runs in about a second."""
    cfg = RunConfig.load("builtin")
    cfg = dataclasses.replace(cfg, r_range=(0, 3), kummer_mprime=1331, kummer_levels=2,
                              measure_mprime=14641, measure_levels=2, prop41_terms=1)
    return dataclasses.replace(cfg, **overrides)


@pytest.fixture(scope="module")
def small_run():
    return Run(small_config())


class TestConfig:
    def test_builtin_loads(self, fixture_config):
        assert fixture_config.p == 11 and fixture_config.mprimes == (14641, 161051)

    def test_comments_and_alias(self):
        cfg = RunConfig.parse("p = 13  # a prime\nprecision_digits = 20\n")
        assert cfg.p == 13 and cfg.precision == 20

    @pytest.mark.parametrize("text, match", [
        ("bogus = 1", "unknown key"),
        ("p = 11\np = 13", "duplicate"),
        ("precision = 10\nprecision_digits = 20", "duplicate"),
        ("r_range = 3", "bad value"),
        ("p 11", "key = value"),
    ])
    def test_parse_errors(self, text, match):
        with pytest.raises(ConfigError, match=match):
            RunConfig.parse(text)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            RunConfig.load(str(tmp_path / "nope.cfg"))


@pytest.fixture(scope="module")
def forms():
    return eta_delta(400), g14_newform(400)


@pytest.fixture(scope="module")
def eigen_spec():
    return FunctionalSpec.parse("eigen: builtin:delta_level11.basis")


@pytest.fixture(scope="module")
def small_result(small_run):
    return verify_suite(small_run)


class TestValidation:
    def test_fixture_passes(self, fixture_config, forms):
        validate_config(fixture_config, *forms)

    def test_non_ordinary_prime(self, forms):
        # tau(2411) is divisible by 2411
        cfg = RunConfig(p=2411, primitive_root=None, mprimes=(2411 ** 2,), characters="chi{modulus=1; gen_images=[]}")
        f = eta_delta(2500)
        with pytest.raises(ConfigError, match="ordinarity"):
            validate_config(cfg, f, forms[1])

    def test_p_divides_conductor(self, forms):
        cfg = RunConfig(p=7, primitive_root=3, mprimes=(49,))
        with pytest.raises(ConfigError, match=r"\(p, C_f\)"):
            validate_config(cfg, *forms)

    def test_conductors_coprime(self, forms):
        f = NewformData(forms[0].expansion, conductor=2)
        with pytest.raises(ConfigError, match=r"\(C_f, C_g\) = 1"):
            validate_config(RunConfig(), f, forms[1])

    def test_weights(self, forms):
        with pytest.raises(ConfigError, match="2 <= l < k"):
            validate_config(RunConfig(), forms[1], forms[0])

    def test_admissible_level(self, forms):
        with pytest.raises(ConfigError, match=r"\(M'\)"):
            validate_config(RunConfig(mprimes=(121,)), *forms)

    def test_not_a_prime(self, forms):
        with pytest.raises(ConfigError, match="odd prime"):
            validate_config(RunConfig(p=15), *forms)

    def test_r_range(self, forms):
        with pytest.raises(ConfigError, match="r range"):
            validate_config(RunConfig(r_range=(0, 10)), *forms)

    def test_primitive_root(self, forms):
        with pytest.raises(ConfigError, match="primitive root"):
            validate_config(RunConfig(primitive_root=3), *forms)


class TestNewformFiles:
    def test_delta_round_trip(self, tmp_path):
        path = tmp_path / "delta.newform"
        write_qexp(str(path), eta_delta(60).expansion, ["Ramanujan delta"])
        f = load_newform(str(path))
        assert f[6] == f[2] * f[3] == -6048
        assert f.weight == 12 and f.conductor == 1

    def test_builtin_g(self, fixture_config):
        _, g = load_forms(fixture_config)
        assert g.conductor == 14 and [g[n] for n in range(1, 6)] == [1, -1, -2, 1, 0]

    def _broken(self, tmp_path, n, value):
        f = eta_delta(30).expansion
        c = list(f.coeffs)
        c[n] = value
        path = tmp_path / "bad.newform"
        write_qexp(str(path), QExpansion(c, weight=12, level=1, character=f.character))
        return str(path)

    def test_rejects_a1(self, tmp_path):
        with pytest.raises(NewformValidationError, match=r"a\(1\)"):
            load_newform(self._broken(tmp_path, 1, 2))

    def test_rejects_multiplicativity(self, tmp_path):
        with pytest.raises(NewformValidationError, match=r"a\(6\) != a\(2\) a\(3\)"):
            load_newform(self._broken(tmp_path, 6, 1))

    def test_cyclotomic_round_trip(self, tmp_path, small_run):
        K = k_tilde(121, 0, tame(1), small_run.ctx, 2, enforce_admissible=False).expansion
        path = tmp_path / "k.qexp"
        write_qexp(str(path), K)
        path.write_text("form 1\n" + path.read_text())
        back = load_basis(str(path))[0]
        assert back.coefficients_equal(K)

    def test_gap_is_config_error(self, tmp_path):
        path = tmp_path / "gap.newform"
        path.write_text("weight 2\nlevel 14\nchi{modulus=14; gen_images=[(3,0)]}\n1 1\n3 -2\n")
        with pytest.raises(ConfigError, match="without gaps"):
            load_newform(str(path))

    def test_garbage_is_config_error(self, tmp_path):
        path = tmp_path / "junk.newform"
        path.write_text("hello\n")
        with pytest.raises(ConfigError):
            load_newform(str(path))

    def test_basis_file(self):
        fn_spec = FunctionalSpec.parse("eigen: builtin:delta_level11.basis")
        assert len(fn_spec.basis) == 2
        d = eta_delta(100)
        assert fn_spec.basis[0].truncate(100).coefficients_equal(d.expansion)
        assert fn_spec.basis[1].truncate(100).coefficients_equal(v_op(d.expansion, 11).truncate(100))


class TestSuppliedFunctional:
    def test_first_coefficient(self):
        fn = build_functional(FunctionalSpec.parse("xi: 1=1"))
        K = QExpansion([0, 7, 3, 5], weight=12)
        assert fn(K) == 7 and fn.support == [1]

    def test_linear_combination(self):
        fn = build_functional(FunctionalSpec.parse("xi: 2=1/3, 3=-2"))
        assert fn(QExpansion([0, 7, 3, 5], weight=12)) == Fraction(-9)

    def test_empty_is_zero(self):
        fn = build_functional(FunctionalSpec.parse("xi:"))
        assert fn(QExpansion([0, 7, 3, 5], weight=12)) == 0

    def test_unknown_mode(self):
        with pytest.raises(ConfigError):
            FunctionalSpec.parse("petersson: f")


class TestEigenFunctional:
    def test_dual_to_the_stabilization(self, eigen_spec, ctx):
        fn = build_functional(eigen_spec, ctx)
        assert fn.mode == "eigen" and fn.eigenspace_dim == 1
        D, DV = fn(eigen_spec.basis[0]), fn(eigen_spec.basis[1])
        # Delta - alpha' Delta|V is the U_p = alpha eigenvector, Delta - alpha Delta|V the other one
        assert (D - ctx.alpha_prime * DV - 1).valuation >= 20
        assert (D - ctx.alpha * DV).valuation >= 20

    def test_non_eigenvalue_downgrades(self, eigen_spec, ctx):
        bad = dataclasses.replace(eigen_spec, up_value=PadicElement.from_rational(5, P, 30))
        fn = build_functional(bad, ctx)
        assert fn.mode == "per-basis" and fn.eigenspace_dim == 0
        vals = fn(eigen_spec.basis[1])
        assert len(vals) == 2 and vals[0].is_zero() and (vals[1] - 1).is_zero()

    def test_outside_span(self, eigen_spec, ctx):
        fn = build_functional(eigen_spec, ctx)
        with pytest.raises(FunctionalError, match="span"):
            fn(QExpansion([0, 1] + [0] * 50, weight=12))

    def test_unstable_span(self, ctx):
        # Delta|V alone is not stable under U_p
        spec = FunctionalSpec("eigen", basis=[v_op(eta_delta(1300).expansion, 11).truncate(1300)])
        with pytest.raises(FunctionalError):
            build_functional(spec, ctx)

    def test_needs_context(self, eigen_spec):
        with pytest.raises(FunctionalError):
            build_functional(eigen_spec)


class TestPsi:
    def test_zero_functional(self, small_run):
        run = Run(small_run.cfg, small_run.ctx.f, small_run.ctx.g, Functional("supplied", xi={}))
        for route in ("padic", "exact"):
            assert psi_value(0, tame(1), 14641, run, route).value.is_zero()

    def test_routes_agree(self, small_run):
        for r in (0, 9):
            a = psi_value(r, tame(0), 121, small_run, "padic").value
            b = psi_value(r, tame(0), 121, small_run, "exact").value
            assert (a - b).is_zero()
            assert a.absprec >= 9 + a.valuation - 5

    def test_quadratic_character_routes_agree(self, small_run):
        a = psi_value(2, tame(5), 14641, small_run, "padic").value
        b = psi_value(2, tame(5), 14641, small_run, "exact").value
        assert (a - b).is_zero()

    def test_single_stratum(self, delta, small_run):
        # with b(n) = 0 for n > 1 only the n1 = 1 stratum survives
        g = sparse_g(14, {1: 1}, 200)
        cfg = dataclasses.replace(small_run.cfg, g_extend=None)
        run = Run(cfg, delta, g, build_functional(FunctionalSpec.parse("xi: 1=1")))
        k, l, M = 12, 2, 121
        for r in (0, 4, 9):
            s = r - (k - l - 1)
            n2 = M - 1
            inner = sum(d ** (2 * s + k - l - 1) if 2 * s + k - l - 1 >= 0 else Fraction(1, d ** -(2 * s + k - l - 1))
                        for d in divisors(n2) if math.gcd(n2 // d, 154) == 1)
            hand = 2 * Fraction(14) ** (-s) * ps_oracle(s, k, l, n2, M) * inner
            ctx = run.ctx
            want = ctx.embed(hand) * gamma_omega_free(M, ctx).padic()
            assert k_tilde(M, s, tame(0), ctx, 1)[1] == hand
            for route in ("padic", "exact"):
                got = psi_value(r, tame(0), M, run, route).value
                assert (got - want).is_zero()

    def test_r_out_of_range(self, small_run):
        with pytest.raises(ValueError):
            psi_value(10, tame(0), 14641, small_run)

    def test_per_basis_tag(self, ctx):
        spec = FunctionalSpec.parse("eigen: builtin:delta_level11.basis")
        spec.up_value = PadicElement.from_rational(5, P, 30)
        cfg = small_config()
        run = Run(cfg, ctx.f, ctx.g, build_functional(spec, ctx))
        assert run.functional.mode == "per-basis"


class TestSuite:
    def test_passes(self, small_result):
        assert small_result.passed
        assert [c.name for c in small_result.checks] == ["kummer_characters", "kummer_mixed_family", "measure",
                                                   "mprime_independence"]
        detail = {c.name: c.detail for c in small_result.checks}
        assert detail["kummer_mixed_family"]["depth"] == 2
        assert detail["measure"]["min_valuation"] == 5

    def test_drop_sign_fails_with_witness(self, small_run):
        res = verify_suite(small_run, sign=False)
        assert not res.passed
        verdicts = [c.verdict for c in res.checks]
        assert verdicts == ["PASS", "FAIL", "SKIP", "SKIP"]
        w = res.checks[1].detail["witness"]
        assert w["m"] == 1 and "relation" in w and "stratum" in w

    def test_single_character_is_vacuous(self):
        run = Run(small_config(characters="chi{modulus=11; gen_images=[(2,3)]}", kummer_levels=1))
        a = verify_suite(run).checks[0]
        assert a.passed and a.detail["relations"] == 0

    def test_omega_unit_leaves_verdicts(self, small_result):
        run = Run(small_config(omega_unit=7))
        other = verify_suite(run)
        assert [c.verdict for c in other.checks] == [c.verdict for c in small_result.checks]
        for x, y in zip(small_result.psi_table, other.psi_table):
            assert (x.value * 7 - y.value).is_zero()


class TestReport:
    def test_empty(self, tmp_path):
        text = emit_report(None, str(tmp_path / "r.txt"))
        assert text == f"# {SCHEMA_VERSION}\n"

    def test_deterministic(self, tmp_path):
        a = emit_report(verify_suite(Run(small_config())), str(tmp_path / "a.txt"))
        b = emit_report(verify_suite(Run(small_config())), str(tmp_path / "b.txt"))
        assert (tmp_path / "a.txt").read_bytes() == (tmp_path / "b.txt").read_bytes()
        assert "kummer_mixed_family = PASS" in a
        assert "[psi]" in a and "x Omega" in a and a.endswith("verdict = PASS\n")
        assert "measure.per_level_min_valuation" in a

    def test_failed_run_report(self, small_run):
        text = format_report(verify_suite(small_run, sign=False))
        assert "mprime_independence = SKIP" in text and "verdict = FAIL" in text
