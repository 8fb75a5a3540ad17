"""Exact statevector simulation of {H, RX, RZ, RZZ} circuits and shot sampling.

Amplitude index i encodes qubit q in bit (n - 1 - q), so qubit 0 is the most
significant bit and the leftmost bitstring character.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache, reduce

import numpy as np

from fpcqaoa.ansatz import Circuit
from fpcqaoa.ising import (
    CapacityError,
    InvalidInputError,
    IsingProblem,
    ShotHistogram,
    index_to_bitstring,
    z_signs,
)
from fpcqaoa.rng import make_rng

DEFAULT_CAPACITY = 26
DENSE_ORACLE_CAP = 6
DEFAULT_SHOTS = 10_000

_INV_SQRT2 = 1.0 / np.sqrt(2.0)


class SimMode(str, enum.Enum):
    SAMPLED = "sampled"
    EXACT = "exact"


@dataclass(frozen=True)
class SimConfig:
    shots: int = DEFAULT_SHOTS
    seed: int = 0
    mode: SimMode = SimMode.SAMPLED

    def __post_init__(self):
        object.__setattr__(self, "mode", SimMode(self.mode))
        if self.mode is SimMode.SAMPLED and self.shots < 1:
            raise InvalidInputError(f"sampled mode needs shots >= 1, got {self.shots}")

    def to_json(self) -> dict:
        return {"shots": self.shots, "seed": self.seed, "mode": self.mode.value}


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    @classmethod
    def zero(cls, n: int) -> "StateVector":
        amp = np.zeros(1 << n, dtype=np.complex128)
        amp[0] = 1.0
        return cls(n, amp)

    @classmethod
    def basis(cls, bits: str) -> "StateVector":
        state = cls(len(bits), np.zeros(1 << len(bits), dtype=np.complex128))
        state.amplitudes[int(bits, 2)] = 1.0
        return state

    def probabilities(self) -> np.ndarray:
        return self.amplitudes.real**2 + self.amplitudes.imag**2

    def norm(self) -> float:
        return float(np.sqrt(self.probabilities().sum()))


@lru_cache(maxsize=4)
def _z_table(n: int) -> np.ndarray | None:
    return z_signs(n) if n <= 22 else None


def _z(n: int, q: int) -> np.ndarray:
    table = _z_table(n)
    if table is not None:
        return table[q]
    idx = np.arange(1 << n, dtype=np.int64)
    return (1 - 2 * ((idx >> (n - 1 - q)) & 1)).astype(np.int8)


def _apply_1q(amp: np.ndarray, n: int, q: int, name: str, theta: float | None) -> None:
    view = amp.reshape(1 << q, 2, -1)
    a0 = view[:, 0, :].copy()
    a1 = view[:, 1, :]
    if name == "H":
        view[:, 0, :] = (a0 + a1) * _INV_SQRT2
        view[:, 1, :] = (a0 - a1) * _INV_SQRT2
    else:  # RX
        c, s = np.cos(theta / 2.0), -1j * np.sin(theta / 2.0)
        view[:, 0, :] = c * a0 + s * a1
        view[:, 1, :] = s * a0 + c * a1


def run_statevector(circuit: Circuit, capacity: int = DEFAULT_CAPACITY) -> StateVector:
    """Apply the circuit to |0...0>.

    Runs of consecutive RZ / RZZ gates are accumulated into one phase table and
    applied with a single complex multiply.
    """
    n = circuit.n_qubits
    if n > capacity:
        raise CapacityError(f"{n} qubits exceed simulator capacity of {capacity}")
    state = StateVector.zero(n)
    amp = state.amplitudes
    phase = None
    for op in circuit.ops:
        if op.name in ("RZ", "RZZ"):
            if phase is None:
                phase = np.zeros(amp.size, dtype=np.float64)
            if op.name == "RZ":
                z = _z(n, op.qubits[0])
            else:
                z = _z(n, op.qubits[0]) * _z(n, op.qubits[1])
            phase -= (0.5 * op.angle) * z
            continue
        if phase is not None:
            amp *= np.exp(1j * phase)
            phase = None
        if op.name in ("H", "RX"):
            _apply_1q(amp, n, op.qubits[0], op.name, op.angle)
        else:
            raise InvalidInputError(f"unsupported gate {op.name}")
    if phase is not None:
        amp *= np.exp(1j * phase)
    return state


def sample_counts(probs: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    p = probs / probs.sum()
    return rng.multinomial(shots, p)


def sample_histogram(
    state: StateVector, cfg: SimConfig, rng: np.random.Generator | None = None
) -> ShotHistogram:
    """Multinomial draw of ``cfg.shots`` outcomes; ``rng`` defaults to one seeded by ``cfg.seed``."""
    rng = make_rng(cfg.seed) if rng is None else rng
    counts = sample_counts(state.probabilities(), cfg.shots, rng)
    return ShotHistogram.from_counts(counts, state.n_qubits)


def exact_expectation(state: StateVector, problem: IsingProblem) -> float:
    if state.n_qubits != problem.n:
        raise InvalidInputError(
            f"state has {state.n_qubits} qubits, problem has {problem.n}"
        )
    return float(state.probabilities() @ problem.energies)


# ---------------------------------------------------------------- dense oracle

_I2 = np.eye(2, dtype=np.complex128)
_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
_H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0)


def _embed(n: int, factors: dict[int, np.ndarray]) -> np.ndarray:
    return reduce(np.kron, [factors.get(q, _I2) for q in range(n)])


def _dense_gate(n: int, name: str, qubits: tuple, theta: float | None) -> np.ndarray:
    if name == "H":
        return _embed(n, {qubits[0]: _H})
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    if name == "RX":
        generator = _embed(n, {qubits[0]: _X})
    elif name == "RZ":
        generator = _embed(n, {qubits[0]: _Z})
    elif name == "RZZ":
        generator = _embed(n, {qubits[0]: _Z, qubits[1]: _Z})
    else:
        raise InvalidInputError(f"unsupported gate {name}")
    # Pauli-string generators square to identity: exp(-i t P / 2) = cos(t/2) I - i sin(t/2) P
    return c * np.eye(1 << n, dtype=np.complex128) - 1j * s * generator


def dense_oracle_evolve(circuit: Circuit) -> StateVector:
    """Reference evolution by explicit 2**n x 2**n matrices; validation only."""
    n = circuit.n_qubits
    if n > DENSE_ORACLE_CAP:
        raise CapacityError(f"dense oracle limited to {DENSE_ORACLE_CAP} qubits, got {n}")
    psi = StateVector.zero(n).amplitudes
    for op in circuit.ops:
        psi = _dense_gate(n, op.name, op.qubits, op.angle) @ psi
    return StateVector(n, psi)


def dense_hamiltonian(problem: IsingProblem) -> np.ndarray:
    """Problem Hamiltonian as a dense matrix built from Kronecker products."""
    if problem.n > DENSE_ORACLE_CAP:
        raise CapacityError(f"dense Hamiltonian limited to {DENSE_ORACLE_CAP} qubits")
    dim = 1 << problem.n
    mat = problem.offset * np.eye(dim, dtype=np.complex128)
    for j, w in problem.linear.items():
        mat += w * _embed(problem.n, {j: _Z})
    for (j, k), g in problem.quadratic.items():
        mat += g * _embed(problem.n, {j: _Z, k: _Z})
    return mat


def bitstrings(n: int):
    return [index_to_bitstring(i, n) for i in range(1 << n)]
