"""
End-to-end acceptance checks, one numbered criterion per group.

A per-criterion PASS/FAIL summary is printed at the end of the run by the
hook in conftest.py.
"""

import math
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import erfcx

from thetacq import harness, stepper
from thetacq.harness import ExperimentConfig, compute_rate
from thetacq.mittag_leffler import ml_eval
from thetacq.series import (
    BDF2,
    consistency_defect,
    default_weight_count,
    omega_weights,
    series_oracle,
    shift_weights,
)

# Published reference values at t = 0.5, tau = 2^-5 .. 2^-8:
# (alpha, theta) -> (corrected errors, corrected rate, standard errors, standard rate)
PUBLISHED_SMOOTH = {
    (0.1, -0.9): ((4.33e-06, 3.10e-06, 6.92e-07, 1.62e-07), 2.09,
                  (7.50e-04, 3.91e-04, 1.96e-04, 9.82e-05), 1.00),
    (0.1, -0.5): ((1.86e-06, 8.76e-07, 2.65e-07, 7.13e-08), 1.89,
                  (1.86e-06, 8.76e-07, 2.65e-07, 7.13e-08), 1.89),
    (0.1, 0.5): ((1.47e-04, 3.43e-05, 8.27e-06, 2.02e-06), 2.03,
                 (2.02e-03, 9.97e-04, 4.95e-04, 2.47e-04), 1.01),
    (0.1, 0.9): ((2.53e-04, 5.78e-05, 1.38e-05, 3.37e-06), 2.03,
                 (2.87e-03, 1.41e-03, 6.95e-04, 3.46e-04), 1.01),
    (0.5, -0.8): ((1.15e-04, 2.49e-05, 5.78e-06, 1.39e-06), 2.05,
                  (3.15e-03, 1.60e-03, 8.04e-04, 4.03e-04), 1.00),
    (0.5, -0.5): ((3.86e-05, 6.97e-06, 1.44e-06, 3.24e-07), 2.15,
                  (3.86e-05, 6.97e-06, 1.44e-06, 3.24e-07), 2.15),
    (0.5, 0.0): ((2.35e-04, 5.70e-05, 1.40e-05, 3.49e-06), 2.01,
                 (5.49e-03, 2.72e-03, 1.35e-03, 6.74e-04), 1.00),
    (0.5, 0.6): ((2.35e-04, 5.70e-05, 1.40e-05, 3.49e-06), 2.01,
                 (1.23e-02, 6.02e-03, 2.98e-03, 1.49e-03), 1.01),
    (0.9, -0.5): ((2.35e-04, 5.70e-05, 1.40e-05, 3.49e-06), 2.01,
                  (3.05e-04, 7.23e-05, 1.76e-05, 4.35e-06), 2.02),
    (0.9, -0.2): ((1.28e-04, 2.95e-05, 7.10e-06, 1.74e-06), 2.03,
                  (6.78e-03, 3.30e-03, 1.63e-03, 8.10e-04), 1.01),
    (0.9, 0.3): ((3.56e-04, 8.65e-05, 2.14e-05, 5.31e-06), 2.01,
                 (1.78e-02, 8.72e-03, 4.33e-03, 2.15e-03), 1.01),
    (0.9, 0.6): ((7.64e-04, 1.84e-04, 4.51e-05, 1.12e-05), 2.01,
                 (2.44e-02, 1.20e-02, 5.95e-03, 2.96e-03), 1.01),
}

PUBLISHED_NONSMOOTH = {
    (0.2, -0.5): ((2.68e-06, 7.74e-07, 2.03e-07, 5.14e-08), 1.98,
                  (2.68e-06, 7.74e-07, 2.03e-07, 5.14e-08), 1.98),
    (0.2, -0.3): ((7.66e-06, 1.92e-06, 4.80e-07, 1.18e-07), 2.02,
                  (9.41e-05, 4.69e-05, 2.28e-05, 1.07e-05), 1.09),
    (0.2, 0.0): ((1.83e-05, 4.39e-06, 1.07e-06, 2.62e-07), 2.03,
                 (2.42e-04, 1.19e-04, 5.75e-05, 2.68e-05), 1.10),
    (0.2, 0.9): ((7.69e-05, 1.75e-05, 4.14e-06, 9.97e-07), 2.06,
                 (7.07e-04, 3.40e-04, 1.63e-04, 7.56e-05), 1.11),
    (0.8, -0.5): ((8.79e-05, 2.12e-05, 5.20e-06, 1.28e-06), 2.03,
                  (8.79e-05, 2.12e-05, 5.20e-06, 1.28e-06), 2.03),
    (0.8, 0.1): ((1.99e-04, 4.64e-05, 1.12e-05, 2.71e-06), 2.04,
                 (7.59e-04, 3.95e-04, 1.95e-04, 9.18e-05), 1.09),
    (0.8, 0.5): ((3.28e-04, 7.47e-05, 1.77e-05, 4.27e-06), 2.05,
                 (1.36e-03, 6.82e-04, 3.31e-04, 1.54e-04), 1.10),
    (0.8, 0.7): ((4.11e-04, 9.26e-05, 2.18e-05, 5.25e-06), 2.06,
                 (1.68e-03, 8.29e-04, 3.99e-04, 1.86e-04), 1.10),
}

RATE_TOL = 0.15
SMOOTH_CELLS = list(PUBLISHED_SMOOTH)
NONSMOOTH_CELLS = list(PUBLISHED_NONSMOOTH)


def timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


@pytest.fixture(scope="module")
def smooth_table():
    return timed(harness.run_table1, ExperimentConfig("table1", SMOOTH_CELLS, M=1023))


@pytest.fixture(scope="module")
def nonsmooth_table():
    return timed(harness.run_table2, ExperimentConfig("table2", NONSMOOTH_CELLS, M=1023))


@pytest.fixture(scope="module")
def sweep():
    cfg = ExperimentConfig("alpha_sweep", taus=(2.0**-7,), M=1023)
    return timed(harness.run_alpha_sweep, cfg, alphas=harness.SWEEP_ALPHAS, thetas=(0.1, 0.4))


@pytest.fixture(scope="module")
def coincidence_runs():
    """Five random (alpha, tau, problem) draws, each solved with both schemes."""
    rng = np.random.default_rng(11)
    makers = [harness.example1_smooth, harness.example1_indicator, harness.example2]
    runs = []
    for _ in range(5):
        alpha = float(rng.uniform(0.05, 0.95))
        tau = 2.0 ** -int(rng.integers(4, 8))
        problem = makers[int(rng.integers(0, 3))](alpha)
        space = stepper.Space.build(problem.a, problem.b, 255)
        N = int(round(0.5 / tau))
        pair = [stepper.solve(stepper.SchemeConfig(alpha, -0.5, tau, N, corrected=c), problem, space)
                for c in (True, False)]
        runs.append(pair)
    return runs


# -- 1 ----------------------------------------------------------------------

def _relative_gap(alpha, theta, N=2000):
    a = omega_weights(BDF2, BDF2, alpha, theta, N).values
    b = series_oracle(BDF2, BDF2, alpha, theta, N).values
    return float(np.max(np.abs(a - b) / np.abs(b)))


@pytest.mark.criterion(1)
def test_c1_fifty_random_tuples():
    rng = np.random.default_rng(0)
    tuples = [(rng.uniform(0.01, 0.99), rng.uniform(-1.0, 1.0)) for _ in range(50)]
    gaps = [_relative_gap(a, th) for a, th in tuples]
    worst = int(np.argmax(gaps))
    assert gaps[worst] <= 1e-12, f"alpha, theta = {tuples[worst]}: relative gap {gaps[worst]:.3g}"


@pytest.mark.criterion(1)
@settings(max_examples=50, deadline=None, derandomize=True)
@given(alpha=st.floats(0.01, 0.99),
       theta=st.floats(-1.0, 1.0, exclude_min=True, exclude_max=True))
def test_c1_property(alpha, theta):
    assert _relative_gap(alpha, theta) <= 1e-12


@pytest.mark.criterion(1)
def test_c1_runtime():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    for _ in range(50):
        a, th = rng.uniform(0.01, 0.99), rng.uniform(-1.0, 1.0)
        omega_weights(BDF2, BDF2, a, th, 2000)
        series_oracle(BDF2, BDF2, a, th, 2000)
    assert time.perf_counter() - t0 < 1.0


# -- 2 ----------------------------------------------------------------------

@pytest.mark.criterion(2)
def test_c2_consistency_order():
    t0 = time.perf_counter()
    taus = [2.0**-k for k in range(3, 9)]
    # the weights do not depend on tau, so one long sequence serves every level
    n = default_weight_count(taus[-1])
    bad = []
    for alpha in (0.1, 0.5, 0.9):
        for theta in (-0.9, 0.0, 0.9):
            w = omega_weights(BDF2, BDF2, alpha, theta, n)
            d = [consistency_defect(w, alpha, theta, t) for t in taus]
            slope = math.log2(d[-2] / d[-1])
            if abs(slope - 2.0) > 0.15:
                bad.append((alpha, theta, slope))
    elapsed = time.perf_counter() - t0
    assert not bad
    assert elapsed < 1.0


# -- 3 ----------------------------------------------------------------------

@pytest.mark.criterion(3)
@pytest.mark.parametrize("cell", SMOOTH_CELLS, ids=str)
def test_c3_rates(smooth_table, cell):
    table, _ = smooth_table
    _, rate_c, _, rate_s = PUBLISHED_SMOOTH[cell]
    assert abs(table.row(*cell, "corrected").rate - rate_c) <= RATE_TOL
    assert abs(table.row(*cell, "standard").rate - rate_s) <= RATE_TOL


@pytest.mark.criterion(3)
@pytest.mark.parametrize("cell", SMOOTH_CELLS, ids=str)
def test_c3_finest_error_magnitude(smooth_table, cell):
    table, _ = smooth_table
    ours = table.row(*cell, "corrected").errors[-1]
    published = PUBLISHED_SMOOTH[cell][0][-1]
    assert 0.5 <= ours / published <= 2.0, f"{ours:.3g} vs {published:.3g}"


@pytest.mark.criterion(3)
def test_c3_runtime(smooth_table):
    assert smooth_table[1] < 120.0


# -- 4 ----------------------------------------------------------------------

@pytest.mark.criterion(4)
@pytest.mark.parametrize("cell", NONSMOOTH_CELLS, ids=str)
def test_c4_rates(nonsmooth_table, cell):
    table, _ = nonsmooth_table
    _, rate_c, _, rate_s = PUBLISHED_NONSMOOTH[cell]
    assert abs(table.row(*cell, "corrected").rate - rate_c) <= RATE_TOL
    assert abs(table.row(*cell, "standard").rate - rate_s) <= RATE_TOL


@pytest.mark.criterion(4)
@pytest.mark.parametrize("alpha", [0.2, 0.8])
def test_c4_minus_half_rows_identical(nonsmooth_table, alpha):
    table, _ = nonsmooth_table
    assert table.row(alpha, -0.5, "corrected").errors == table.row(alpha, -0.5, "standard").errors


# -- 5 ----------------------------------------------------------------------

@pytest.mark.criterion(5)
def test_c5_minus_half_coincidence(coincidence_runs):
    for a, b in coincidence_runs:
        assert np.max(np.abs(a.W - b.W)) == 0.0


# -- 6 ----------------------------------------------------------------------

@pytest.mark.criterion(6)
@pytest.mark.parametrize("theta", [0.1, 0.4])
def test_c6_small_alpha_ratio(sweep, theta):
    res, _ = sweep
    errs = [res.error(a, theta) for a in harness.SWEEP_ALPHAS]
    assert all(np.isfinite(errs))
    assert res.ratio(theta, small=1e-3, base=0.5) < 10.0


@pytest.mark.criterion(6)
def test_c6_runtime(sweep):
    assert sweep[1] < 30.0


# -- 7 ----------------------------------------------------------------------

@pytest.mark.criterion(7)
@pytest.mark.parametrize("theta", [-0.9, -0.5, 0.5, 0.9])
def test_c7_shift_decay(theta):
    w = np.abs(shift_weights(BDF2, theta, 60).values)
    n = np.arange(5, 61)
    slope = np.polyfit(n, np.log(w[5:]), 1)[0]
    assert slope < -0.3
    assert w[60] < 1e-10


# -- 8 ----------------------------------------------------------------------

@pytest.mark.criterion(8)
def test_c8_omega_decay():
    w = omega_weights(BDF2, BDF2, 0.5, 0.3, 5000).values
    n = np.arange(100, 5001)
    prod = np.abs(w[n]) * n**1.5
    assert prod.max() / prod.min() < 10.0


# -- 9 ----------------------------------------------------------------------

@pytest.mark.criterion(9)
def test_c9_smooth_table_residuals(smooth_table):
    res = smooth_table[0].residuals
    assert len(res) == len(SMOOTH_CELLS) * 2 * 4
    assert max(res.values()) <= 1e-11


@pytest.mark.criterion(9)
def test_c9_nonsmooth_table_residuals(nonsmooth_table):
    res = nonsmooth_table[0].residuals
    assert res and max(res.values()) <= 1e-11


@pytest.mark.criterion(9)
def test_c9_coincidence_residuals(coincidence_runs):
    for pair in coincidence_runs:
        for traj in pair:
            assert harness.sample_residuals(traj, k=10) <= 1e-11


@pytest.mark.criterion(9)
def test_c9_sweep_residuals(sweep):
    res = sweep[0].residuals
    assert res and max(res.values()) <= 1e-11


# -- 10 ---------------------------------------------------------------------

@pytest.mark.criterion(10)
def test_c10_exponential():
    z = np.linspace(-2.0, 0.0, 100)
    assert max(abs(ml_eval(1.0, x) - math.exp(x)) for x in z) <= 1e-13


@pytest.mark.criterion(10)
def test_c10_half_order():
    assert abs(ml_eval(0.5, -1.0) - erfcx(1.0)) <= 1e-12


def test_finest_pair_rate_convention():
    # the rate column is the log2 ratio of the two finest errors
    errs = PUBLISHED_SMOOTH[(0.5, 0.0)][0]
    assert compute_rate(errs) == pytest.approx(2.004, abs=1e-3)
