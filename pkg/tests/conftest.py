import numpy as np
import pytest
from scipy.linalg import hadamard

from lenscs.sensing import SensingMode, SensingSpec, make_sensing_spec


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def identity_2x2():
    """2x2 grid, identity permutation, all four rows in natural order."""
    return SensingSpec(2, 2, SensingMode.PERMUTED_HADAMARD, [0, 1, 2, 3])


def explicit_matrix(spec):
    """Signed sensing matrix built by materializing each pattern, then mapping to +/-1."""
    from lenscs.sensing import pattern_for_row

    return np.array([2.0 * pattern_for_row(spec, k) - 1.0 for k in range(spec.num_measurements)])


def sylvester_matrix(spec):
    """Same matrix from scipy's Hadamard construction and the permutation."""
    h = hadamard(spec.transform_order).astype(float)
    return h[spec.row_indices][:, spec.permutation[: spec.num_pixels]]


@pytest.fixture
def small_spec():
    return make_sensing_spec(5, 3, 9, permutation_seed=77)


# one PASS/FAIL line per acceptance criterion, printed after the run
_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1].split("[")[0]
        outcomes = _ACCEPTANCE.setdefault(name, set())
        outcomes.add(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE, key=lambda n: int(n.split("_")[2])):
        num = int(name.split("_")[2])
        title = " ".join(name.split("_")[3:])
        verdict = "PASS" if _ACCEPTANCE[name] == {"passed"} else "FAIL"
        terminalreporter.write_line(f"criterion {num:2d}  {verdict}  {title}")
