"""Session-scoped shooting fixtures shared by the acceptance tests.

The acceptance criteria revisit one fixed family of runs: the 8-point
quadrant sweeps on both theorem bundles for (3, 2), the two (1, 1)
boundary runs with their nudged companions, and tolerance-halved twins
of all of them.  Each run is integrated once per session over the full
horizon (no early stop), so classification, per-sample membership, and
terminal-state comparisons all read the same trajectories.
"""

import math
import time

import pytest

from spin7flow.aw_algebra import AWParams
from spin7flow.shooting import ShootSpec, integrate, quadrant_grid

P32 = AWParams(3, 2)
P11 = AWParams(1, 1)

S_LINE = (-3.0 / math.sqrt(10.0), 1.0 / math.sqrt(10.0))
S_CURVE = (-1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0))
S_LINE_NUDGED = (S_LINE[0] + 0.05, S_LINE[1])
S_CURVE_NUDGED = (S_CURVE[0] + 0.05, S_CURVE[1])

BASE_TOL = {"rel_tol": 1e-10, "abs_tol": 1e-12}
HALVED_TOL = {"rel_tol": 5e-11, "abs_tol": 5e-13}

SWEEP_BUNDLES = (("k+l", "spin+"), ("k", "spin-"))

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    """Repeat the per-criterion verdict lines where capture cannot hide
    them, so a plain ``pytest -v`` run still shows one line per criterion."""
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
BOUNDARY_RUNS = (
    ("line", P11, "k+l", "spin+", S_LINE),
    ("curve", P11, "k", "spin-", S_CURVE),
    ("line_nudged", P11, "k+l", "spin+", S_LINE_NUDGED),
    ("curve_nudged", P11, "k", "spin-", S_CURVE_NUDGED),
)


def _timed_runs(specs):
    start = time.perf_counter()
    runs = {key: integrate(spec) for key, spec in specs}
    return runs, time.perf_counter() - start


def _sweep_specs(tol):
    for bundle, mode in SWEEP_BUNDLES:
        for j, s in enumerate(quadrant_grid(8)):
            yield (bundle, j), ShootSpec(P32, bundle, mode, s,
                                         stop_on_converged=False, **tol)


def _boundary_specs(tol):
    for key, params, bundle, mode, s in BOUNDARY_RUNS:
        yield key, ShootSpec(params, bundle, mode, s,
                             stop_on_converged=False, **tol)


@pytest.fixture(scope="session")
def alc_family_runs():
    """(bundle, index) -> full-horizon trajectory for the 16 sweep runs."""
    runs, elapsed = _timed_runs(_sweep_specs(BASE_TOL))
    runs["elapsed"] = elapsed
    return runs


@pytest.fixture(scope="session")
def alc_family_runs_halved():
    runs, _ = _timed_runs(_sweep_specs(HALVED_TOL))
    return runs


@pytest.fixture(scope="session")
def boundary_runs():
    """The two printed boundary runs and their nudged companions."""
    runs, elapsed = _timed_runs(_boundary_specs(BASE_TOL))
    runs["elapsed"] = elapsed
    return runs


@pytest.fixture(scope="session")
def boundary_runs_halved():
    runs, _ = _timed_runs(_boundary_specs(HALVED_TOL))
    return runs


@pytest.fixture(scope="session")
def interior_run_32():
    """The canonical (3, 2) K+L ALC run used by the reconstruction tests."""
    return integrate(ShootSpec(P32, "k+l", "spin+", (0.6, 0.8),
                               stop_on_converged=False))
