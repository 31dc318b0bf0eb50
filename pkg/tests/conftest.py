import numpy as np
import pytest

from padic_rankin.exactnum import DirichletCharacter
from padic_rankin.pipeline import Run, RunConfig, load_forms
from padic_rankin.qexp import NewformData, QExpansion, eta_delta, eta_product_coeffs
from padic_rankin.rankin import RankinContext

P = 11
PRIMITIVE_ROOT = 2


def g14_newform(n_max: int = 3000) -> NewformData:
    """eta(z) eta(2z) eta(7z) eta(14z) with an extender for long sweeps."""
    exps = {1: 1, 2: 1, 7: 1, 14: 1}
    c = eta_product_coeffs(exps, n_max, dtype=np.int64)
    q = QExpansion(c, weight=2, level=14, character=DirichletCharacter.principal(14))
    return NewformData(q, conductor=14, extender=lambda N: eta_product_coeffs(exps, N, dtype=np.int64))


def tame(j: int) -> DirichletCharacter:
    return DirichletCharacter.from_generator_images(P, [(PRIMITIVE_ROOT, j)])


@pytest.fixture(scope="session")
def delta():
    return eta_delta(400)


@pytest.fixture(scope="session")
def g14():
    return g14_newform()


@pytest.fixture(scope="session")
def ctx(delta, g14):
    return RankinContext(delta, g14, P, 30, PRIMITIVE_ROOT)


@pytest.fixture(scope="session")
def fixture_config():
    return RunConfig.load("builtin")


@pytest.fixture(scope="session")
def fixture_run(fixture_config):
    return Run(fixture_config)


# one line per acceptance criterion in the terminal summary
_CRITERIA: dict[str, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        if getattr(rep, "wasxfail", None) is not None:
            status = "XFAIL (strict, recorded)" if rep.skipped else "FAIL (unexpected pass)"
        else:
            status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[rep.outcome]
        _CRITERIA[item.nodeid] = (str(mark.args[0]), status)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, (label, status) in sorted(_CRITERIA.items(), key=lambda kv: (kv[1][0], kv[0])):
        terminalreporter.write_line(f"criterion {label:<3} {status:<26} {nodeid.split('::', 1)[1]}")
