"""Gate-level circuits for standard QAOA and fixed-parameter-count QAOA.

Rotation conventions: RZ(t) = exp(-i t Z / 2), RX(t) = exp(-i t X / 2),
RZZ(t) = exp(-i t Z Z / 2).  A term c * P evolved for time d is therefore the
rotation with angle 2 c d.  The mixer is H_i = -eps * sum_j X_j, so its layer is
RX(-2 eps d) on every qubit.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from fpcqaoa.ising import InvalidInputError, IsingProblem
from fpcqaoa.schedules import ScheduleSet


class Op(NamedTuple):
    name: str  # "H", "RX", "RZ", "RZZ"
    qubits: tuple
    angle: float | None = None

    def text(self) -> str:
        qs = " ".join(f"q{q}" for q in self.qubits)
        if self.angle is None:
            return f"{self.name} {qs}"
        return f"{self.name} {qs} {self.angle:.12f}"


_ARITY = {"H": 1, "RX": 1, "RZ": 1, "RZZ": 2}


@dataclass
class Circuit:
    n_qubits: int
    ops: list = field(default_factory=list)

    def _add(self, name: str, qubits: tuple, angle: float | None = None) -> "Circuit":
        if len(qubits) != _ARITY[name]:
            raise InvalidInputError(f"{name} acts on {_ARITY[name]} qubit(s), got {qubits}")
        for q in qubits:
            if not 0 <= q < self.n_qubits:
                raise InvalidInputError(f"qubit {q} outside [0, {self.n_qubits})")
        if name == "RZZ" and qubits[0] == qubits[1]:
            raise InvalidInputError("RZZ endpoints must be distinct")
        self.ops.append(Op(name, tuple(int(q) for q in qubits), None if angle is None else float(angle)))
        return self

    def h(self, q: int):
        return self._add("H", (q,))

    def rx(self, q: int, theta: float):
        return self._add("RX", (q,), theta)

    def rz(self, q: int, theta: float):
        return self._add("RZ", (q,), theta)

    def rzz(self, q1: int, q2: int, theta: float):
        return self._add("RZZ", (q1, q2), theta)

    def append(self, op: Op):
        return self._add(op.name, op.qubits, op.angle)

    def __len__(self) -> int:
        return len(self.ops)

    def count(self, name: str) -> int:
        return sum(op.name == name for op in self.ops)

    def to_text(self) -> str:
        return "".join(op.text() + "\n" for op in self.ops)


@dataclass(frozen=True)
class TrotterConfig:
    n_layers: int
    total_time: float | None = None  # defaults to n_layers, i.e. dt = 1
    epsilon: float = 1.0

    def __post_init__(self):
        if int(self.n_layers) != self.n_layers or self.n_layers < 1:
            raise InvalidInputError(f"n_layers must be a positive integer, got {self.n_layers!r}")
        if self.total_time is None:
            object.__setattr__(self, "total_time", float(self.n_layers))
        if not self.total_time > 0:
            raise InvalidInputError(f"total time must be positive, got {self.total_time}")
        if not self.epsilon > 0:
            raise InvalidInputError(f"mixer strength must be positive, got {self.epsilon}")

    @property
    def dt(self) -> float:
        return self.total_time / self.n_layers

    def midpoints(self) -> np.ndarray:
        """Normalized sample points (j + 1/2) dt / T, j = 0 .. N-1."""
        return (np.arange(self.n_layers) + 0.5) * self.dt / self.total_time

    def to_json(self) -> dict:
        return {"n_layers": self.n_layers, "total_time": self.total_time, "epsilon": self.epsilon}


@dataclass(frozen=True)
class QaoaParams:
    alphas: tuple
    betas: tuple

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if len(self.alphas) != len(self.betas):
            raise InvalidInputError(
                f"{len(self.alphas)} mixer angles but {len(self.betas)} problem angles"
            )

    @property
    def n_layers(self) -> int:
        return len(self.alphas)

    @classmethod
    def from_vector(cls, vec) -> "QaoaParams":
        vec = np.asarray(vec, dtype=np.float64).ravel()
        if vec.size % 2:
            raise InvalidInputError(f"QAOA vector length {vec.size} is odd")
        n = vec.size // 2
        return cls(vec[:n].tolist(), vec[n:].tolist())

    def to_vector(self) -> np.ndarray:
        return np.array(self.alphas + self.betas, dtype=np.float64)

    @classmethod
    def from_schedules(cls, schedules: ScheduleSet, cfg: TrotterConfig) -> "QaoaParams":
        """alpha_j = F1(s_j) dt, beta_j = F2(s_j) dt at the layer midpoints."""
        s = cfg.midpoints()
        return cls(
            (schedules(1, s) * cfg.dt).tolist(),
            (schedules(2, s) * cfg.dt).tolist(),
        )

    @classmethod
    def linear_ramp(cls, cfg: TrotterConfig) -> "QaoaParams":
        s = cfg.midpoints()
        return cls(((1.0 - s) * cfg.dt).tolist(), (s * cfg.dt).tolist())


def _prologue(n: int) -> Circuit:
    circ = Circuit(n)
    for q in range(n):
        circ.h(q)
    return circ


def _problem_block(circ: Circuit, problem: IsingProblem, duration: float) -> None:
    for q, w in problem.linear.items():
        circ.rz(q, 2.0 * w * duration)
    for (q1, q2), g in problem.quadratic.items():
        circ.rzz(q1, q2, 2.0 * g * duration)


def _mixer_block(circ: Circuit, n: int, epsilon: float, duration: float) -> None:
    for q in range(n):
        circ.rx(q, -2.0 * epsilon * duration)


def build_fpc_circuit(problem: IsingProblem, schedules: ScheduleSet, cfg: TrotterConfig) -> Circuit:
    """|+...+> followed by N layers of problem, auxiliary-bias and mixer rotations."""
    circ = _prologue(problem.n)
    s = cfg.midpoints()
    dt = cfg.dt
    f1 = schedules(1, s)
    f2 = schedules(2, s)
    f3 = schedules(3, s)
    aux = [(q, w) for q, w in problem.linear.items() if w != 0.0]
    for j in range(cfg.n_layers):
        _problem_block(circ, problem, float(f2[j]) * dt)
        bias = float(f3[j]) * dt
        for q, w in aux:
            circ.rz(q, 2.0 * w * bias)
        _mixer_block(circ, problem.n, cfg.epsilon, float(f1[j]) * dt)
    return circ


def build_qaoa_circuit(problem: IsingProblem, params: QaoaParams, epsilon: float = 1.0) -> Circuit:
    circ = _prologue(problem.n)
    for alpha, beta in zip(params.alphas, params.betas):
        _problem_block(circ, problem, beta)
        _mixer_block(circ, problem.n, epsilon, alpha)
    return circ


class Mode(str, enum.Enum):
    FPC = "FPC"
    QAOA = "QAOA"


def count_trainable(mode: Mode | str, size: int) -> int:
    """3 * n_p for FPC-QAOA, 2 * N for QAOA."""
    mode = Mode(mode)
    return 3 * size if mode is Mode.FPC else 2 * size


def gate_count(problem: IsingProblem, n_layers: int) -> int:
    """Rotation count of an FPC circuit (Hadamards excluded)."""
    aux = sum(1 for w in problem.linear.values() if w != 0.0)
    return n_layers * (problem.num_terms + aux + problem.n)

