"""Acceptance suite: one test group per headline criterion.

Every test here carries a ``criterion`` marker; the terminal summary prints a
single PASS/FAIL line per criterion (see ``conftest.py``).
"""

from __future__ import annotations

import csv
import io
import math
import time
from functools import lru_cache
from itertools import combinations

import numpy as np
import pytest
from click.testing import CliRunner

from amls.cli import main
from amls.core import (
    amlsbound,
    brute_bound,
    esaamlsbound,
    g_dtau,
    g_dtautau,
    g_star,
    g_star_alt,
    g_value,
    hessian_det,
    m_of,
)
from amls.discrete import base_estimate, f_value, hypergeom_tail
from amls.search import (
    PlantedInstance,
    amls_run,
    det_amls_run,
    make_planted_oracle,
    make_rng,
)
from amls.specs import OracleSpec

from .oracles import tail_by_enumeration
from .reference import BETAS_FINE, FIXTURES, TABLES

TABLE = "Table reproduction"
EXACT = "Exact-setting identity"
ESA = "ESA coincidence"
BENCH = "Benchmark inequalities"
SANDWICH = "Discrete-continuous sandwich"
PROPS = "Property suites"
SIM = "Simulation"


def rounded_close(value: float, expected: float, tol: float = 5e-4) -> bool:
    return abs(round(value, 4) - expected) <= tol


def run_cli(args: list[str]) -> str:
    result = CliRunner().invoke(main, args, env={"AMLS_THREADS": "1"})
    assert result.exit_code == 0, result.output
    return result.output


def read_csv(text: str) -> list[dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text)))


# ---------------------------------------------------------------------------
# Table reproduction
# ---------------------------------------------------------------------------


@pytest.mark.criterion(TABLE)
@pytest.mark.parametrize("fixture", list(TABLES))
def test_table_reproduction(fixture, spec_file):
    betas, rows = TABLES[fixture]
    beta_arg = ",".join(repr(b) for b in betas)
    start = time.perf_counter()
    mismatches = []
    for label, (source, expected) in rows.items():
        if source[0] == "esa":
            specs, column = FIXTURES[fixture], "esa"
        else:
            specs, column = source, "d"
        out = run_cli(["table", "--spec", spec_file(specs), "--betas", beta_arg, "--columns", "d,esa"])
        cells = read_csv(out)
        assert [float(r["beta"]) for r in cells] == pytest.approx(list(betas))
        for beta, row, want in zip(betas, cells, expected):
            got = float(row[column])
            if not rounded_close(got, want):
                mismatches.append((label, beta, got, want))
    elapsed = time.perf_counter() - start
    assert not mismatches, mismatches
    assert elapsed <= 10.0, f"full {fixture} table took {elapsed:.2f} s"


@pytest.mark.criterion(TABLE)
@pytest.mark.parametrize(
    "specs, beta, expected",
    [
        (((1.0, 2.69998),), 1.1, 1.4156),
        (((1.0, 2.69998),), 1.2, 1.3289),
        (((1.0, 2.69998),), 1.3, 1.2753),
        (((1.0, 2.69998),), 1.4, 1.2378),
        (FIXTURES["FVS"], 1.5, 1.2068),
        (((1.0, 1.618),), 1.1, 1.2348),
        (FIXTURES["OCT"], 1.1, 1.3689),
        (FIXTURES["OCT"], 1.5, 1.185),
        (FIXTURES["PVC"], 1.1, 1.6588),
    ],
)
def test_named_table_cells(specs, beta, expected, spec_file):
    out = run_cli(["compute", "--spec", spec_file(specs), "--beta", repr(beta)])
    assert out.startswith("d=")
    assert rounded_close(float(out.strip()[2:]), expected)


# ---------------------------------------------------------------------------
# Exact-setting identity
# ---------------------------------------------------------------------------


@pytest.mark.criterion(EXACT)
@pytest.mark.parametrize("c", [1.5, 2.0, 2.3146, 4.0, 10.0])
def test_exact_setting_identity(c):
    result = amlsbound([(1.0, c)], 1.0, eps=1e-10)
    assert abs(result.d - (2.0 - 1.0 / c)) <= 1e-8


# ---------------------------------------------------------------------------
# ESA coincidence
# ---------------------------------------------------------------------------


@pytest.mark.criterion(ESA)
@pytest.mark.parametrize("beta", np.linspace(1.1, 3.0, 5).tolist())
@pytest.mark.parametrize("c", np.linspace(1.2, 8.0, 5).tolist())
def test_esa_coincidence(beta, c):
    d = amlsbound([(beta, c)], beta, eps=1e-8).d
    assert abs(d - esaamlsbound(beta, c)) <= 1e-6


# ---------------------------------------------------------------------------
# Benchmark inequalities
# ---------------------------------------------------------------------------


@pytest.mark.criterion(BENCH)
@pytest.mark.parametrize("fixture", list(FIXTURES))
def test_below_brute_force(fixture):
    for beta in BETAS_FINE:
        assert amlsbound(FIXTURES[fixture], beta).d < brute_bound(beta) - 1e-7


ESA_GRID = [
    (1.0, 2.0, 1.2),
    (1.0, 2.69998, 1.5),
    (1.0, 4.0, 2.5),
    (1.2, 3.0, 1.5),
    (1.5, 1.618, 1.9),
    (1.1, 8.0, 1.3),
    (2.0, 5.0, 3.0),
    (1.0, 1.2, 1.1),
    (1.3, 2.3146, 1.4),
    (2.5, 10.0, 2.6),
]


@pytest.mark.criterion(BENCH)
@pytest.mark.parametrize("alpha, c, beta", ESA_GRID)
def test_better_than_equal_ratio_oracle(alpha, c, beta):
    assert amlsbound([(alpha, c)], beta).d < esaamlsbound(beta, c)


@pytest.mark.criterion(BENCH)
def test_near_brute_force_case():
    d = amlsbound([(2.0, 1024.0)], 1.1).d
    assert 1.7151 <= d <= 1.7153
    assert brute_bound(1.1) == pytest.approx(1.71527, abs=1e-5)
    assert d < brute_bound(1.1)


# ---------------------------------------------------------------------------
# Discrete-continuous sandwich
# ---------------------------------------------------------------------------

SANDWICH_NS = (100, 200, 400, 600)


@pytest.mark.criterion(SANDWICH)
@pytest.mark.parametrize("beta", [1.1, 1.5])
@pytest.mark.parametrize("fixture", list(FIXTURES))
def test_sandwich(fixture, beta):
    start = time.perf_counter()
    target = amlsbound(FIXTURES[fixture], beta).d
    gaps = [abs(base_estimate(f_value(FIXTURES[fixture], beta, n)) - target) for n in SANDWICH_NS]
    elapsed = time.perf_counter() - start
    fitted = max(abs(math.log1p(g / target)) * n / math.log(n) for g, n in zip(gaps, SANDWICH_NS))
    print(f"{fixture} beta={beta}: gaps={[round(g, 5) for g in gaps]} fitted C={fitted:.3f}")
    assert gaps[-1] <= 0.02
    assert all(later < earlier for earlier, later in zip(gaps, gaps[1:])), gaps
    assert elapsed <= 30.0, f"{elapsed:.1f} s"


# ---------------------------------------------------------------------------
# Property suites
# ---------------------------------------------------------------------------


def random_params(rng: np.random.Generator, simple: bool = False):
    while True:
        alpha = float(rng.uniform(1.0, 4.0))
        beta = float(rng.uniform(1.05, 3.0))
        c = float(rng.uniform(1.0, 6.0))
        if not simple or (abs(alpha - beta) > 1e-3 and not (alpha < beta and c < 1.0 + 1e-3)):
            return alpha, beta, c


def interior_point(rng, alpha, beta, lo=0.05, hi=0.95):
    kappa = float(rng.uniform(lo, hi)) / beta
    left, right = m_of(alpha, beta, kappa), beta * kappa
    tau = left + float(rng.uniform(lo, hi)) * (right - left)
    return kappa, tau


@pytest.mark.criterion(PROPS)
def test_tau_convexity():
    rng = np.random.default_rng(101)
    for _ in range(200):
        alpha, beta, c = random_params(rng)
        kappa = float(rng.uniform(0.01, 0.99)) / beta
        left, right = m_of(alpha, beta, kappa), beta * kappa
        a, b = sorted(rng.uniform(left, right, size=2))
        mid = 0.5 * (a + b)
        lhs = g_value(alpha, beta, c, kappa, mid)
        rhs = 0.5 * (g_value(alpha, beta, c, kappa, a) + g_value(alpha, beta, c, kappa, b))
        assert lhs <= rhs + 1e-10


@pytest.mark.criterion(PROPS)
def test_kappa_concavity():
    rng = np.random.default_rng(102)
    for _ in range(100):
        alpha, beta, c = random_params(rng)
        a, b = sorted(rng.uniform(0.0, 1.0 / beta, size=2))
        a, b = max(a, 1e-9), min(b, 1.0 / beta - 1e-9)
        mid = 0.5 * (a + b)
        value = lambda k: g_star(alpha, beta, c, k).value  # noqa: E731
        assert value(mid) >= 0.5 * (value(a) + value(b)) - 1e-8


@pytest.mark.criterion(PROPS)
def test_derivatives_match_finite_differences():
    rng = np.random.default_rng(103)
    step = 1e-6
    for _ in range(50):
        alpha, beta, c = random_params(rng)
        kappa, tau = interior_point(rng, alpha, beta, 0.2, 0.8)
        g = lambda t: g_value(alpha, beta, c, kappa, t)  # noqa: E731
        d1 = lambda t: g_dtau(alpha, beta, c, kappa, t)  # noqa: E731
        fd1 = (g(tau + step) - g(tau - step)) / (2 * step)
        fd2 = (d1(tau + step) - d1(tau - step)) / (2 * step)
        assert d1(tau) == pytest.approx(fd1, rel=1e-5, abs=1e-7)
        assert g_dtautau(alpha, beta, c, kappa, tau) == pytest.approx(fd2, rel=1e-5)


@pytest.mark.criterion(PROPS)
def test_hessian_negative_at_minimizer():
    rng = np.random.default_rng(104)
    for _ in range(20):
        alpha, beta, c = random_params(rng, simple=True)
        for share in (0.1, 0.5, 0.9):
            kappa = share / beta
            tau = g_star(alpha, beta, c, kappa).tau_star
            assert hessian_det(alpha, beta, c, kappa, tau) < 0.0


@lru_cache(maxsize=None)
def _enumerated(n: int, k: int, t: int, x: int):
    return tail_by_enumeration(n, k, t, x)


@pytest.mark.criterion(PROPS)
@pytest.mark.parametrize("n", range(1, 13))
def test_tail_matches_enumeration(n):
    rng = np.random.default_rng(105 + n)
    for _ in range(100):
        k = int(rng.integers(0, n + 1))
        t = int(rng.integers(0, n + 1))
        x = int(rng.integers(-1, min(k, t) + 2))
        assert hypergeom_tail(n, k, t, x).exact == _enumerated(n, k, t, x)


@pytest.mark.criterion(PROPS)
def test_two_variable_formulation_agrees():
    rng = np.random.default_rng(106)
    grid = 1e-3
    for _ in range(10):
        beta = float(rng.uniform(1.1, 3.0))
        alpha = float(rng.uniform(1.0, beta))
        c = float(rng.uniform(1.2, 6.0))
        kappa = float(rng.uniform(0.1, 0.9)) / beta
        alt = g_star_alt(alpha, beta, c, kappa, grid=grid)
        assert abs(alt - g_star(alpha, beta, c, kappa).value) <= 3 * grid


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------

EXACT_ORACLE = OracleSpec(1.0, 2.0)
_SIM_CLOCK = {"spent": 0.0}


def check_ledger(result):
    ledger = result.ledger
    assert ledger.recomputed_cost() == ledger.oracle_cost
    assert ledger.op_count >= len(ledger.queries)


@pytest.mark.criterion(SIM)
@pytest.mark.parametrize("n, k, beta", [(16, 4, 1.5), (20, 5, 1.2)])
def test_randomized_success_frequency(n, k, beta):
    start = time.perf_counter()
    wins = 0
    trials = 400
    for seed in range(trials):
        rng = make_rng(seed)
        instance = PlantedInstance.random(n, k, beta, rng)
        oracle = make_planted_oracle(instance, EXACT_ORACLE)
        result = amls_run(instance, [EXACT_ORACLE], beta, [oracle], rng)
        assert instance.contains(result.solution)
        check_ledger(result)
        wins += result.size <= math.floor(beta * k + 1e-9)
    _SIM_CLOCK["spent"] += time.perf_counter() - start
    assert wins / trials >= 0.45


@pytest.mark.criterion(SIM)
def test_derandomized_exhaustive_plantings():
    start = time.perf_counter()
    n, k, beta = 12, 3, 1.5
    for R in combinations(range(n), k):
        instance = PlantedInstance(n, frozenset(R), beta)
        oracle = make_planted_oracle(instance, EXACT_ORACLE)
        result = det_amls_run(instance, [EXACT_ORACLE], beta, [oracle])
        assert instance.contains(result.solution)
        assert result.size <= 4
        check_ledger(result)
    _SIM_CLOCK["spent"] += time.perf_counter() - start


@pytest.mark.criterion(SIM)
def test_simulation_runtime_budget():
    assert _SIM_CLOCK["spent"] <= 60.0, f"simulation took {_SIM_CLOCK['spent']:.1f} s"
