import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from fpcqaoa.ansatz import QaoaParams, TrotterConfig, build_fpc_circuit
from fpcqaoa.ising import InvalidInputError, IsingProblem
from fpcqaoa.optimize import (
    Init,
    _CircuitObjective,
    ObjectiveConfig,
    OptimizerConfig,
    cvar_from_counts,
    cvar_from_distribution,
    cvar_from_histogram,
    optimize,
    run_fpc,
    run_qaoa,
    run_random_sampling,
)
from fpcqaoa.schedules import ScheduleSet
from fpcqaoa.simulator import SimConfig, SimMode


def per_shot_cvar(energies, counts, alpha):
    """Reference: expand every shot, sort, average the lowest ceil(alpha K)."""
    shots = np.sort(np.repeat(np.asarray(energies, float), counts))
    m = max(1, math.ceil(round(alpha * shots.size, 9)))
    return shots[:m].mean()


def ring(n, g=1.0):
    return IsingProblem(n, {}, {tuple(sorted((j, (j + 1) % n))): g for j in range(n)})


def test_cvar_examples(edge):
    assert cvar_from_counts(np.array([-2.0, 0.0, 1.0]), np.array([1, 2, 1]), 0.25) == -2.0
    assert cvar_from_counts(np.array([-2.0, 0.0, 1.0]), np.array([1, 2, 1]), 0.5) == -1.0
    assert cvar_from_counts(np.array([-2.0, 0.0, 1.0]), np.array([1, 2, 1]), 1.0) == -0.25
    hist = {"00": 5, "01": 5}
    assert cvar_from_histogram(edge, hist, 1.0) == -0.5
    assert cvar_from_histogram(edge, hist, 0.5) == -1.0
    # ceil(0.1 * 30) is 3, not 4
    assert cvar_from_counts(np.arange(30.0), np.ones(30, int), 0.1) == 1.0


def test_cvar_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        cvar_from_counts(np.array([0.0]), np.array([1]), 0.0)
    with pytest.raises(InvalidInputError):
        cvar_from_counts(np.array([0.0]), np.array([0]), 0.5)


@settings(max_examples=150, deadline=None)
@given(
    data=st.lists(st.tuples(st.floats(-50, 50, allow_nan=False), st.integers(0, 40)), min_size=1, max_size=12),
    alpha=st.floats(0.01, 1.0),
)
def test_cvar_matches_per_shot_reference(data, alpha):
    energies = np.array([e for e, _ in data])
    counts = np.array([c for _, c in data])
    if counts.sum() == 0:
        return
    got = cvar_from_counts(energies, counts, alpha)
    assert got == pytest.approx(per_shot_cvar(energies, counts, alpha), abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(
    counts=st.lists(st.integers(0, 30), min_size=2, max_size=10),
    a=st.floats(0.01, 1.0),
    b=st.floats(0.01, 1.0),
)
def test_cvar_monotone_in_alpha(counts, a, b):
    counts = np.array(counts)
    if counts.sum() == 0:
        return
    energies = np.linspace(-1, 1, counts.size) ** 3
    lo, hi = sorted((a, b))
    assert cvar_from_counts(energies, counts, lo) <= cvar_from_counts(energies, counts, hi) + 1e-12
    mean = counts @ energies / counts.sum()
    assert cvar_from_counts(energies, counts, 1.0) == pytest.approx(mean, abs=1e-12)
    assert cvar_from_counts(energies, counts, lo) >= energies[counts > 0].min() - 1e-12


def test_distribution_cvar():
    e = np.array([3.0, -1.0, 0.0])
    p = np.array([0.5, 0.25, 0.25])
    assert cvar_from_distribution(e, p, 0.25) == -1.0
    assert cvar_from_distribution(e, p, 0.5) == -0.5
    assert cvar_from_distribution(e, p, 1.0) == pytest.approx(e @ p, abs=1e-15)


def test_optimize_parabola():
    res = optimize(lambda x: float((x[0] - 1.0) ** 2), [0.0], max_evals=50)
    assert abs(res.best_params[0] - 1.0) < 1e-3 and res.nfev <= 50


def test_optimize_sphere_against_nelder_mead():
    f = lambda x: float(np.sum(x**2))
    x0 = np.array([0.7, -0.4, 0.9])
    res = optimize(f, x0, bounds=[(-2, 2)] * 3, max_evals=100, tol=1e-4)
    oracle = minimize(f, x0, method="Nelder-Mead", options={"xatol": 1e-6, "fatol": 1e-10})
    assert abs(res.best_value - oracle.fun) < 1e-3
    assert np.linalg.norm(res.best_params) < 1e-2 and res.nfev <= 100


def test_optimize_constant_function_stops():
    res = optimize(lambda x: 2.0, [0.3, 0.3], max_evals=200)
    assert res.status == "converged" and res.nfev < 200 and res.best_value == 2.0


def test_optimize_respects_bounds_and_budget():
    res = optimize(lambda x: float(-x[0]), [0.0], bounds=[(-1, 1)], max_evals=30)
    # bounds are linear constraints, so iterates may step slightly past them
    assert res.nfev <= 30
    assert 1.0 - 1e-3 <= res.best_params[0] <= 1.0 + 0.1


def test_optimize_single_evaluation():
    res = optimize(lambda x: 5.0, [1.0, 2.0], max_evals=1)
    assert res.nfev == 1 and res.status == "max_evals" and res.best_params.tolist() == [1.0, 2.0]
    with pytest.raises(InvalidInputError):
        optimize(lambda x: 0.0, [1.0, 2.0], max_evals=3)
    with pytest.raises(InvalidInputError):
        optimize(lambda x: 0.0, [3.0], bounds=[(-1, 1)])


def test_optimize_nonfinite_stops_with_status():
    calls = []

    def f(x):
        calls.append(1)
        return math.nan if len(calls) == 3 else float(x[0] ** 2)

    res = optimize(f, [1.0], max_evals=50)
    assert res.status == "nonfinite" and res.nfev == 3 and math.isfinite(res.best_value)


def test_best_value_bounds_trace(rng):
    noise = np.random.default_rng(0)
    res = optimize(lambda x: float(np.sum(x**2) + noise.normal(0, 0.01)), [1.0, 1.0], max_evals=60)
    assert all(res.best_value <= v for v in res.value_trace)
    assert len(res.params_trace) == len(res.value_trace) == res.nfev


SMALL = SimConfig(shots=500, seed=0)


@pytest.mark.parametrize("n_layers", [3, 5, 7])
def test_fpc_dimension_is_fixed(n_layers):
    rec = run_fpc(ring(4), 1, TrotterConfig(n_layers), SMALL, opt=OptimizerConfig(max_evals=12))
    assert len(rec.final_params) == 3
    assert all(len(x) == 3 for x in rec.params_trace)
    assert rec.iterations == len(rec.value_trace) <= 12


def test_qaoa_dimension_grows():
    rec = run_qaoa(ring(4), TrotterConfig(3), SMALL, opt=OptimizerConfig(max_evals=10))
    assert len(rec.final_params) == 6


def test_linear_ramp_single_evaluation_beats_plus_state():
    rec = run_fpc(ring(6), 1, TrotterConfig(100, 20.0), SimConfig(mode=SimMode.EXACT),
                  ObjectiveConfig(alpha_cvar=1.0), init=Init.LINEAR_RAMP, opt=OptimizerConfig(max_evals=1))
    assert rec.iterations == 1 and rec.metrics.r_value > 0.9


def test_qaoa_linear_ramp_init():
    cfg = TrotterConfig(4, 2.0)
    rec = run_qaoa(ring(4), cfg, SMALL, opt=OptimizerConfig(max_evals=1))
    assert np.allclose(rec.params_trace[0], QaoaParams.linear_ramp(cfg).to_vector())
    assert rec.config["optimizer"]["trust_radius_scale"] == 0.5


def test_runs_are_deterministic():
    args = (ring(5), 1, TrotterConfig(3), SMALL)
    a = run_fpc(*args, seed=4, opt=OptimizerConfig(max_evals=15)).to_json()
    b = run_fpc(*args, seed=4, opt=OptimizerConfig(max_evals=15)).to_json()
    assert a == b
    c = run_fpc(*args, seed=5, opt=OptimizerConfig(max_evals=15)).to_json()
    assert a["params_trace"][0] != c["params_trace"][0]


def test_run_record_contents():
    rec = run_fpc(ring(4), 1, TrotterConfig(3), SMALL, opt=OptimizerConfig(max_evals=8))
    data = rec.to_json()
    assert data["iterations_unit"] == "objective evaluations"
    assert rec.final_histogram.shots == 500
    m = rec.metrics
    assert m.e_ground == -4.0 and m.e_init == pytest.approx(0.0, abs=1e-12)
    assert m.r_value == pytest.approx((m.e_init - m.e_final) / (m.e_init - m.e_ground), abs=1e-12)
    assert rec.extras["best_cvar"] == min(rec.value_trace)


def test_random_sampling_baseline(edge):
    rec = run_random_sampling(edge, SimConfig(shots=4000, seed=1), seed=9)
    assert rec.extras["best_energy"] == -1.0
    # energies -1 or 0 with equal probability: mean -0.5, std 0.5
    assert abs(rec.extras["avg_energy"] + 0.5) < 4 * 0.5 / np.sqrt(4000)
    assert rec.final_histogram.shots == 4000
    again = run_random_sampling(edge, SimConfig(shots=4000, seed=1), seed=9)
    assert again.to_json() == rec.to_json()


def test_out_of_bounds_policies():
    p = ring(4)
    build = lambda x: build_fpc_circuit(p, ScheduleSet.from_vector(x), TrotterConfig(2))
    exact = SimConfig(mode=SimMode.EXACT)
    box = [(-2.0, 2.0)] * 3
    clamp = _CircuitObjective(p, build, exact, ObjectiveConfig(1.0), box, None)
    reject = _CircuitObjective(p, build, exact, ObjectiveConfig(1.0, penalize_oob=True), box, None)
    outside, edge_pt = np.array([2.5, 0.3, 0.0]), np.array([2.0, 0.3, 0.0])
    assert clamp(outside) == clamp(edge_pt)
    assert reject(outside) > p.energies.max()
    assert math.isfinite(reject(outside))
