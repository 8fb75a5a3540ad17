import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_problem
from fpcqaoa.ansatz import Circuit, QaoaParams, TrotterConfig, build_fpc_circuit, build_qaoa_circuit
from fpcqaoa.ising import CapacityError, IsingProblem, expectation_from_histogram
from fpcqaoa.rng import derive_seed, make_rng
from fpcqaoa.schedules import linear_ramp_set
from fpcqaoa.simulator import (
    SimConfig,
    StateVector,
    dense_hamiltonian,
    dense_oracle_evolve,
    exact_expectation,
    run_statevector,
    sample_histogram,
)


def random_circuit(rng, n, length):
    circ = Circuit(n)
    for _ in range(length):
        kind = rng.choice(["H", "RX", "RZ", "RZZ"]) if n > 1 else rng.choice(["H", "RX", "RZ"])
        theta = float(rng.uniform(-2 * np.pi, 2 * np.pi))
        if kind == "H":
            circ.h(int(rng.integers(n)))
        elif kind == "RX":
            circ.rx(int(rng.integers(n)), theta)
        elif kind == "RZ":
            circ.rz(int(rng.integers(n)), theta)
        else:
            a, b = rng.choice(n, size=2, replace=False)
            circ.rzz(int(a), int(b), theta)
    return circ


def test_single_gate_examples():
    amp = run_statevector(Circuit(1).rx(0, np.pi)).amplitudes
    assert abs(amp[0]) < 1e-15 and abs(amp[1] - (-1j)) < 1e-15
    plus = run_statevector(Circuit(2).h(0).h(1))
    assert np.allclose(plus.probabilities(), 0.25, atol=1e-15)
    assert np.allclose(run_statevector(Circuit(2).rzz(0, 1, 0.3)).amplitudes, [np.exp(-0.15j), 0, 0, 0])


def test_qubit_zero_is_most_significant():
    amp = run_statevector(Circuit(3).rx(0, np.pi)).amplitudes
    assert np.flatnonzero(np.abs(amp) > 0.5).tolist() == [4]
    assert StateVector.basis("100").amplitudes[4] == 1


def test_matches_dense_oracle_on_random_circuits(rng):
    for _ in range(100):
        n = int(rng.integers(1, 7))
        circ = random_circuit(rng, n, int(rng.integers(1, 40)))
        fast = run_statevector(circ).amplitudes
        slow = dense_oracle_evolve(circ).amplitudes
        assert np.max(np.abs(fast - slow)) < 1e-10


def test_fpc_circuit_matches_oracle(rng):
    p = random_problem(rng, 5)
    circ = build_fpc_circuit(p, linear_ramp_set(2), TrotterConfig(4, 3.0))
    assert np.max(np.abs(run_statevector(circ).amplitudes - dense_oracle_evolve(circ).amplitudes)) < 1e-10


def test_norm_preserved_over_long_circuit(rng):
    state = run_statevector(random_circuit(rng, 8, 10_000))
    assert abs(state.norm() - 1.0) < 1e-10


def test_capacity_guards():
    with pytest.raises(CapacityError):
        run_statevector(Circuit(5), capacity=4)
    with pytest.raises(CapacityError):
        dense_oracle_evolve(Circuit(7))


def test_exact_expectation_examples(edge):
    assert exact_expectation(run_statevector(Circuit(2).h(0).h(1)), edge) == pytest.approx(-0.5, abs=1e-15)
    assert exact_expectation(StateVector.basis("01"), edge) == -1.0


def test_exact_expectation_matches_dense_operator(rng):
    p = random_problem(rng, 5)
    state = run_statevector(random_circuit(rng, 5, 30))
    psi = state.amplitudes
    oracle = float(np.real(np.conj(psi) @ dense_hamiltonian(p) @ psi))
    assert abs(exact_expectation(state, p) - oracle) < 1e-12


def test_sampled_agrees_with_exact_within_four_sigma(rng):
    p = random_problem(rng, 6)
    state = run_statevector(random_circuit(rng, 6, 40))
    probs = state.probabilities()
    mean = exact_expectation(state, p)
    sigma = np.sqrt(probs @ (p.energies - mean) ** 2)
    shots = 1_000_000
    hist = sample_histogram(state, SimConfig(shots=shots, seed=3))
    assert hist.shots == shots
    assert abs(expectation_from_histogram(p, hist) - mean) < 4 * sigma / np.sqrt(shots)


def test_sampling_is_deterministic(rng):
    state = run_statevector(random_circuit(rng, 4, 20))
    cfg = SimConfig(shots=500, seed=42)
    assert sample_histogram(state, cfg) == sample_histogram(state, cfg)
    assert sample_histogram(state, cfg) != sample_histogram(state, SimConfig(shots=500, seed=43))


def test_uniform_qubit_statistics():
    state = run_statevector(Circuit(1).h(0))
    shots = 100_000
    hist = sample_histogram(state, SimConfig(shots=shots, seed=0))
    assert abs(hist.get("0", 0) - shots / 2) < 5 * np.sqrt(shots * 0.25)


def test_seed_derivation():
    assert derive_seed(1, "a", 2) == derive_seed(1, "a", 2)
    assert derive_seed(1, "a", 2) != derive_seed(1, "a", 3)
    assert derive_seed(1, "ab") != derive_seed(1, "a", "b")
    assert 0 <= derive_seed(0) < 2**64
    assert make_rng(5, "x").random() == make_rng(5, "x").random()


@settings(max_examples=40, deadline=None)
@given(theta=st.floats(-10, 10, allow_nan=False), n=st.integers(2, 5))
def test_rzz_is_diagonal_phase(theta, n):
    circ = Circuit(n)
    for q in range(n):
        circ.h(q)
    circ.rzz(0, n - 1, theta)
    state = run_statevector(circ)
    assert np.allclose(state.probabilities(), 1 / 2**n, atol=1e-14)


def test_trotter_error_shrinks_with_depth():
    # adiabatic ring preparation: evolution at fixed T converges as N grows
    ring = IsingProblem(4, {0: 0.2}, {(0, 1): 1.0, (1, 2): 1.0, (2, 3): 1.0, (0, 3): 1.0})
    sched = linear_ramp_set(1)
    ref = run_statevector(build_fpc_circuit(ring, sched, TrotterConfig(2048, 6.0))).amplitudes
    errs = []
    for n_layers in (16, 32, 64, 128):
        amp = run_statevector(build_fpc_circuit(ring, sched, TrotterConfig(n_layers, 6.0))).amplitudes
        errs.append(np.linalg.norm(amp - ref))
    assert all(b < a for a, b in zip(errs, errs[1:]))
    # first-order splitting: error roughly halves per doubling
    assert errs[-1] < errs[0] / 4


def test_qaoa_and_fpc_share_the_simulator_path():
    ring = IsingProblem(3, {}, {(0, 1): 1.0, (1, 2): 1.0, (0, 2): 1.0})
    cfg = TrotterConfig(3, 1.5)
    a = run_statevector(build_fpc_circuit(ring, linear_ramp_set(1), cfg)).amplitudes
    b = run_statevector(build_qaoa_circuit(ring, QaoaParams.linear_ramp(cfg))).amplitudes
    assert np.max(np.abs(a - b)) < 1e-14
