"""Diagonal Ising Hamiltonians, classical energies, brute-force ground states and metrics.

Bit convention: bit 0 is the sigma^z eigenvalue +1, bit 1 is -1.  Qubit 0 is the
leftmost character of a bitstring and the most significant bit of a basis index,
so ``format(index, f"0{n}b")`` is the bitstring of basis state ``index``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

DEFAULT_BRUTE_FORCE_CAP = 24


class InvalidInputError(ValueError):
    """Structurally invalid argument (length mismatch, bad index, empty data)."""


class CapacityError(RuntimeError):
    """Requested size exceeds an enumeration or memory cap."""


class DegenerateInstanceError(ArithmeticError):
    """A metric is undefined for this instance (zero denominator)."""


Bits = Union[str, Sequence[int], np.ndarray]


def bits_to_array(bits: Bits, n: int | None = None) -> np.ndarray:
    if isinstance(bits, str):
        if any(c not in "01" for c in bits):
            raise InvalidInputError(f"bitstring {bits!r} contains characters other than 0/1")
        arr = np.fromiter((c == "1" for c in bits), dtype=np.int8, count=len(bits))
    else:
        arr = np.asarray(bits, dtype=np.int8).ravel()
        if np.any((arr != 0) & (arr != 1)):
            raise InvalidInputError("bit vector entries must be 0 or 1")
    if n is not None and arr.size != n:
        raise InvalidInputError(f"bit vector has length {arr.size}, problem has {n} qubits")
    return arr


def index_to_bitstring(index: int, n: int) -> str:
    return format(int(index), f"0{n}b") if n else ""


def bitstring_to_index(bits: str) -> int:
    return int(bits, 2) if bits else 0


def z_signs(n: int) -> np.ndarray:
    """Array of shape (n, 2**n): sigma^z eigenvalue of qubit q in basis state i."""
    idx = np.arange(1 << n, dtype=np.int64)
    shifts = (n - 1 - np.arange(n, dtype=np.int64))[:, None]
    return (1 - 2 * ((idx[None, :] >> shifts) & 1)).astype(np.int8)


class ShotHistogram(dict):
    """Bitstring -> count map produced by shot sampling."""

    @property
    def shots(self) -> int:
        return int(sum(self.values()))

    def to_json(self) -> dict:
        return {"shots": self.shots, "counts": {k: int(self[k]) for k in sorted(self)}}

    @classmethod
    def from_json(cls, data: Mapping) -> "ShotHistogram":
        hist = cls({str(k): int(v) for k, v in data["counts"].items()})
        if "shots" in data and int(data["shots"]) != hist.shots:
            raise InvalidInputError("histogram 'shots' disagrees with the sum of counts")
        return hist

    @classmethod
    def from_counts(cls, counts: np.ndarray, n: int) -> "ShotHistogram":
        nz = np.flatnonzero(counts)
        return cls({index_to_bitstring(i, n): int(counts[i]) for i in nz})


@dataclass(frozen=True, eq=True)
class IsingProblem:
    """H = offset + sum_j linear[j] Z_j + sum_{j<k} quadratic[(j, k)] Z_j Z_k."""

    n: int
    linear: Mapping[int, float] = field(default_factory=dict)
    quadratic: Mapping[tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise InvalidInputError(f"qubit count must be a positive integer, got {self.n!r}")
        n = int(self.n)
        lin = {}
        for j, w in self.linear.items():
            j = int(j)
            if not 0 <= j < n:
                raise InvalidInputError(f"linear index {j} outside [0, {n})")
            lin[j] = float(w)
        quad = {}
        for key, g in self.quadratic.items():
            j, k = (int(key[0]), int(key[1]))
            if j == k:
                raise InvalidInputError(f"quadratic term ({j}, {k}) has equal endpoints")
            if not (0 <= j < n and 0 <= k < n):
                raise InvalidInputError(f"quadratic index ({j}, {k}) outside [0, {n})")
            pair = (j, k) if j < k else (k, j)
            if pair in quad:
                raise InvalidInputError(f"duplicate quadratic pair {pair}")
            quad[pair] = float(g)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "linear", dict(sorted(lin.items())))
        object.__setattr__(self, "quadratic", dict(sorted(quad.items())))
        object.__setattr__(self, "offset", float(self.offset))

    @classmethod
    def from_terms(
        cls,
        n: int,
        linear: Iterable[tuple[int, float]] = (),
        quadratic: Iterable[tuple[int, int, float]] = (),
        offset: float = 0.0,
    ) -> "IsingProblem":
        """Build a problem, summing repeated terms instead of rejecting them."""
        lin: dict[int, float] = {}
        for j, w in linear:
            lin[j] = lin.get(j, 0.0) + w
        quad: dict[tuple[int, int], float] = {}
        for j, k, g in quadratic:
            pair = (min(j, k), max(j, k))
            quad[pair] = quad.get(pair, 0.0) + g
        return cls(n, lin, quad, offset)

    @property
    def num_terms(self) -> int:
        return len(self.linear) + len(self.quadratic)

    @cached_property
    def energies(self) -> np.ndarray:
        """Diagonal of H over all 2**n basis states (index order)."""
        if self.n > 26:
            raise CapacityError(f"cannot tabulate 2**{self.n} energies")
        z = z_signs(self.n)
        diag = np.full(1 << self.n, self.offset, dtype=np.float64)
        for j, w in self.linear.items():
            diag += w * z[j]
        for (j, k), g in self.quadratic.items():
            diag += g * (z[j] * z[k])
        diag.flags.writeable = False
        return diag

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "linear": [[j, w] for j, w in self.linear.items()],
            "quadratic": [[j, k, g] for (j, k), g in self.quadratic.items()],
            "offset": self.offset,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "IsingProblem":
        return cls(
            int(data["n"]),
            {int(j): float(w) for j, w in data.get("linear", [])},
            {(int(j), int(k)): float(g) for j, k, g in data.get("quadratic", [])},
            float(data.get("offset", 0.0)),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


@dataclass
class MetricsRecord:
    e_init: float
    e_final: float
    e_ground: float
    r_value: float
    eta: float | None = None

    def to_json(self) -> dict:
        return {
            "e_init": self.e_init,
            "e_final": self.e_final,
            "e_ground": self.e_ground,
            "r_value": self.r_value,
            "eta": self.eta,
        }


def energy_of_bitstring(problem: IsingProblem, bits: Bits) -> float:
    z = 1 - 2 * bits_to_array(bits, problem.n).astype(np.int64)
    e = problem.offset
    for j, w in problem.linear.items():
        e += w * z[j]
    for (j, k), g in problem.quadratic.items():
        e += g * z[j] * z[k]
    return float(e)


def expectation_from_histogram(problem: IsingProblem, hist: Mapping[str, int]) -> float:
    total = sum(hist.values())
    if not hist or total <= 0:
        raise InvalidInputError("histogram is empty")
    acc = 0.0
    for bits, count in hist.items():
        acc += count * energy_of_bitstring(problem, bits)
    return acc / total


def brute_force_ground(
    problem: IsingProblem, cap: int = DEFAULT_BRUTE_FORCE_CAP
) -> tuple[float, str]:
    """Exact minimum energy and its lexicographically smallest minimizer."""
    if problem.n > cap:
        raise CapacityError(f"brute force over 2**{problem.n} states exceeds cap 2**{cap}")
    energies = problem.energies
    # argmin returns the first (smallest index == lexicographically smallest) minimizer
    i = int(np.argmin(energies))
    return float(energies[i]), index_to_bitstring(i, problem.n)


def compute_r(e_init: float, e_final: float, e_ground: float) -> float:
    denom = e_init - e_ground
    if not denom > 0:
        raise DegenerateInstanceError(
            f"initial energy {e_init} does not exceed ground energy {e_ground}; R undefined"
        )
    return (e_init - e_final) / denom


def compute_eta(r_fpc: float, r_qaoa: float) -> float:
    if not r_qaoa > 0:
        raise DegenerateInstanceError(f"R_QAOA = {r_qaoa} <= 0; enhancement ratio undefined")
    return r_fpc / r_qaoa



def energies_of_bits(problem: IsingProblem, bits: np.ndarray) -> np.ndarray:
    """Energies of a (shots, n) 0/1 matrix without tabulating all 2**n states."""
    bits = np.asarray(bits)
    if bits.ndim != 2 or bits.shape[1] != problem.n:
        raise InvalidInputError(f"expected a (shots, {problem.n}) bit matrix, got {bits.shape}")
    z = 1.0 - 2.0 * bits
    e = np.full(bits.shape[0], problem.offset)
    if problem.linear:
        idx = np.fromiter(problem.linear.keys(), dtype=np.int64)
        e += z[:, idx] @ np.fromiter(problem.linear.values(), dtype=np.float64)
    if problem.quadratic:
        pairs = np.array(list(problem.quadratic.keys()), dtype=np.int64)
        g = np.fromiter(problem.quadratic.values(), dtype=np.float64)
        e += (z[:, pairs[:, 0]] * z[:, pairs[:, 1]]) @ g
    return e
