import pytest

from optograv.params import ParameterSet, fixed_delta, preset
from optograv.steady import select_branch


def small_system(**changes) -> ParameterSet:
    """Stable, well-separated time scales; cheap to simulate."""
    base = ParameterSet(
        m1=1e-10, m2=1e-12, dx=1e-8, dy=1e-6, omega_c=1e11, L=1e-3, kappa=1e4,
        drive_E=1e6, omega_2=1e3, gamma_m=10.0, T=300.0, detuning_mode=fixed_delta(3e3),
    )
    return base.replace(**changes) if changes else base


@pytest.fixture(scope="session")
def preset_a():
    return preset("A")


@pytest.fixture(scope="session")
def preset_b():
    return preset("B")


@pytest.fixture(scope="session")
def steady_a(preset_a):
    return select_branch(preset_a)


@pytest.fixture
def small():
    return small_system()


# criterion -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def record(criterion: str, passed: bool, detail: str) -> None:
    ACCEPTANCE[criterion] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE, key=lambda k: int(k.split(".")[0])):
        ok, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
