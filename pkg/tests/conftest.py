import numpy as np
import pytest

from mcartest import ColumnRoles, Dataset

# one line per acceptance criterion, emitted after the test run so the
# PASS/FAIL verdicts survive pytest's output capture
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20260815)


def make_dataset(rng, n, p, q, miss_prob=0.25, clayton=False):
    """Random dataset with p complete and q incomplete columns.

    Forces at least one missing and one observed cell per incomplete column
    so the covariance of the response indicators never collapses.
    """
    d = p + q
    if clayton:
        # common-frailty mixture at theta = 1, exponential margins
        v = rng.gamma(1.0, 1.0, size=n)
        e = rng.exponential(1.0, size=(n, d))
        values = -np.log1p(-((1.0 + e / v[:, None]) ** -1.0))
    else:
        values = rng.standard_normal((n, d))
    mask = np.ones((n, d), dtype=bool)
    for j in range(p, d):
        observed = rng.random(n) >= miss_prob
        i_obs = int(rng.integers(n))
        i_mis = (i_obs + 1 + int(rng.integers(n - 1))) % n
        observed[i_obs] = True
        observed[i_mis] = False
        mask[:, j] = observed
    names = tuple(f"x{u}" for u in range(1, p + 1)) + tuple(
        f"y{v}" for v in range(1, q + 1)
    )
    ds = Dataset(values, mask, names)
    roles = ColumnRoles(tuple(range(p)), tuple(range(p, d)))
    return ds, roles
