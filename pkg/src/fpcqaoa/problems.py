"""Seedable benchmark instance generators.

Three families: MaxCut on random k-regular graphs, weighted Ising models on
cycle / star / wheel graphs, and Tail Assignment (set-cover style) QUBOs together
with their exact reduction to Ising form.
"""

from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from fpcqaoa.ising import InvalidInputError, IsingProblem
from fpcqaoa.rng import make_rng

DEFAULT_REJECTION_BUDGET = 10_000
DEFAULT_COST_RANGE = (2.0, 10.0)
DEFAULT_TAP_DENSITY = 0.3
HARDWARE_MEAN_COVERAGE = 2.7


class InvalidSpecError(InvalidInputError):
    pass


class GenerationFailure(RuntimeError):
    pass


class Topology(str, enum.Enum):
    KREGULAR = "kregular"
    CYCLE = "cycle"
    STAR = "star"
    WHEEL = "wheel"


_MIN_NODES = {Topology.CYCLE: 3, Topology.STAR: 2, Topology.WHEEL: 4}


@dataclass(frozen=True)
class GraphSpec:
    topology: Topology
    n: int
    seed: int = 0
    k: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "topology", Topology(self.topology))
        if self.n < 1:
            raise InvalidSpecError(f"node count must be positive, got {self.n}")
        if self.topology is Topology.KREGULAR:
            if self.k is None:
                raise InvalidSpecError("k-regular topology needs a degree k")
            if not 0 <= self.k < self.n:
                raise InvalidSpecError(f"degree k={self.k} must satisfy 0 <= k < n={self.n}")
            if (self.n * self.k) % 2:
                raise InvalidSpecError(f"n*k = {self.n * self.k} is odd; no {self.k}-regular graph")

    @classmethod
    def half_regular(cls, n: int, seed: int = 0) -> "GraphSpec":
        """k-regular spec with k = n // 2 (raised by one when n * k would be odd)."""
        k = n // 2
        if (n * k) % 2:
            k += 1
        return cls(Topology.KREGULAR, n, seed, k)

    def params(self) -> dict:
        out = {"topology": self.topology.value, "n": self.n, "seed": self.seed}
        if self.k is not None:
            out["k"] = self.k
        return out


# ---------------------------------------------------------------- regular graphs


def _pairing_round(n: int, k: int, rng: np.random.Generator) -> list[tuple[int, int]] | None:
    # Pair remaining stubs at random; stubs whose pairing would form a loop or a
    # repeated edge go back to the pool.  Return None when the pool is stuck.
    edges: set[tuple[int, int]] = set()
    stubs = np.repeat(np.arange(n), k)
    while stubs.size:
        stubs = rng.permutation(stubs)
        leftover: dict[int, int] = defaultdict(int)
        for u, v in zip(stubs[0::2].tolist(), stubs[1::2].tolist()):
            if u > v:
                u, v = v, u
            if u != v and (u, v) not in edges:
                edges.add((u, v))
            else:
                leftover[u] += 1
                leftover[v] += 1
        if not leftover:
            break
        nodes = sorted(leftover)
        if not any(
            (a, b) not in edges for i, a in enumerate(nodes) for b in nodes[i + 1 :]
        ):
            return None
        stubs = np.repeat(np.array(nodes), [leftover[u] for u in nodes])
    return sorted(edges)


def random_regular_edges(
    n: int, k: int, rng: np.random.Generator, budget: int = DEFAULT_REJECTION_BUDGET
) -> list[tuple[int, int]]:
    """Edges of a simple k-regular graph on n nodes from the pairing model."""
    if (n * k) % 2 or not 0 <= k < n:
        raise InvalidSpecError(f"no simple {k}-regular graph on {n} nodes")
    if k == 0:
        return []
    for _ in range(budget):
        edges = _pairing_round(n, k, rng)
        if edges is not None:
            return edges
    raise GenerationFailure(f"no simple {k}-regular graph on {n} nodes after {budget} attempts")


def maxcut_ising(n: int, edges) -> IsingProblem:
    """H = 1/2 sum_{(j,k) in E} (Z_j Z_k - 1): minus the cut size."""
    quad = {}
    for j, k in edges:
        quad[(j, k)] = 0.5
    return IsingProblem(n, {}, quad, -0.5 * len(quad))


def gen_maxcut(spec: GraphSpec, budget: int = DEFAULT_REJECTION_BUDGET) -> IsingProblem:
    if spec.topology is not Topology.KREGULAR:
        raise InvalidSpecError(f"MaxCut generator needs a k-regular spec, got {spec.topology.value}")
    rng = make_rng(spec.seed, "maxcut", spec.n, spec.k)
    return maxcut_ising(spec.n, random_regular_edges(spec.n, spec.k, rng, budget))


# ---------------------------------------------------------------- C_n, S_n, W_n


def topology_bonds(topology: Topology, n: int) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
    """(primary bonds, ring bonds) for a cycle, star or wheel on n nodes; hub is node 0."""
    topology = Topology(topology)
    if topology is Topology.KREGULAR:
        raise InvalidSpecError("k-regular graphs are random; use gen_maxcut")
    if n < _MIN_NODES[topology]:
        raise InvalidSpecError(f"{topology.value} needs n >= {_MIN_NODES[topology]}, got {n}")
    if topology is Topology.CYCLE:
        return [(j, (j + 1) % n) for j in range(n)], []
    spokes = [(0, j) for j in range(1, n)]
    if topology is Topology.STAR:
        return spokes, []
    # outer ring over nodes 1..n-1, closing n-1 -> 1
    ring = [(j, j + 1) for j in range(1, n - 1)] + [(n - 1, 1)]
    return spokes, ring


def gen_topology_ising(spec: GraphSpec, seed: int | None = None) -> IsingProblem:
    """Ising model with local fields and couplings drawn uniformly from [-1, 1]."""
    seed = spec.seed if seed is None else seed
    bonds, ring = topology_bonds(spec.topology, spec.n)
    rng = make_rng(seed, "topology", spec.topology.value, spec.n)
    omega = rng.uniform(-1.0, 1.0, size=spec.n)
    g = rng.uniform(-1.0, 1.0, size=len(bonds))
    h = rng.uniform(-1.0, 1.0, size=len(ring))
    return IsingProblem.from_terms(
        spec.n,
        linear=enumerate(omega.tolist()),
        quadratic=[(j, k, w) for (j, k), w in zip(bonds + ring, g.tolist() + h.tolist())],
    )


# ---------------------------------------------------------------- tail assignment


@dataclass
class TapInstance:
    costs: np.ndarray
    incidence: np.ndarray  # shape (n_flights, n_routes), entries 0/1
    penalty: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.costs = np.asarray(self.costs, dtype=np.float64)
        self.incidence = np.asarray(self.incidence, dtype=np.int64)
        if self.incidence.ndim != 2 or self.incidence.shape[1] != self.costs.size:
            raise InvalidInputError(
                f"incidence shape {self.incidence.shape} does not match {self.costs.size} routes"
            )
        if np.any((self.incidence != 0) & (self.incidence != 1)):
            raise InvalidInputError("incidence entries must be 0 or 1")
        if not self.penalty > 0:
            raise InvalidInputError(f"penalty must be positive, got {self.penalty}")
        uncovered = np.flatnonzero(self.incidence.sum(axis=1) == 0)
        if uncovered.size:
            raise InvalidInputError(f"flights {uncovered.tolist()} are covered by no route")

    @property
    def n_routes(self) -> int:
        return self.costs.size

    @property
    def n_flights(self) -> int:
        return self.incidence.shape[0]

    def qubo_cost(self, x) -> float:
        x = np.asarray(x, dtype=np.float64)
        slack = 1.0 - self.incidence @ x
        return float(self.costs @ x + self.penalty * np.sum(slack**2))

    def statistics(self) -> dict:
        per_flight = self.incidence.sum(axis=1)
        shared = self.incidence.T @ self.incidence
        np.fill_diagonal(shared, 0)
        return {
            "mean_routes_per_flight": float(per_flight.mean()),
            "mean_flights_per_route": float(self.incidence.sum(axis=0).mean()),
            "mean_interaction_valency": float((shared > 0).sum(axis=1).mean()),
        }

    def to_json(self) -> dict:
        return {
            "n_routes": self.n_routes,
            "n_flights": self.n_flights,
            "costs": self.costs.tolist(),
            "incidence": self.incidence.tolist(),
            "penalty": float(self.penalty),
        }

    @classmethod
    def from_json(cls, data: dict) -> "TapInstance":
        return cls(np.array(data["costs"]), np.array(data["incidence"]), float(data["penalty"]))


def gen_tap(
    n_routes: int,
    n_flights: int | None = None,
    penalty: float | None = None,
    cost_range: tuple[float, float] = DEFAULT_COST_RANGE,
    density: float = DEFAULT_TAP_DENSITY,
    seed: int = 0,
) -> TapInstance:
    """Random TAP instance; each route covers each flight with probability ``density``.

    Defaults: ``n_flights = 5 * n_routes`` and ``penalty = max(cost_range) + 1``.
    Flights left uncovered by the Bernoulli draw get one uniformly chosen route.
    """
    if n_routes < 1:
        raise InvalidSpecError(f"n_routes must be positive, got {n_routes}")
    n_flights = 5 * n_routes if n_flights is None else n_flights
    if n_flights < 1:
        raise InvalidSpecError(f"n_flights must be positive, got {n_flights}")
    if not 0 < density <= 1:
        raise InvalidSpecError(f"density must lie in (0, 1], got {density}")
    lo, hi = map(float, cost_range)
    if hi < lo:
        raise InvalidSpecError(f"cost range {cost_range} is reversed")
    penalty = hi + 1.0 if penalty is None else float(penalty)

    rng = make_rng(seed, "tap", n_routes, n_flights)
    costs = rng.uniform(lo, hi, size=n_routes)
    incidence = (rng.random((n_flights, n_routes)) < density).astype(np.int64)
    repaired = 0
    for f in np.flatnonzero(incidence.sum(axis=1) == 0):
        incidence[f, rng.integers(n_routes)] = 1
        repaired += 1
    tap = TapInstance(costs, incidence, penalty)
    tap.meta = {
        "n_routes": n_routes,
        "n_flights": n_flights,
        "penalty": penalty,
        "cost_range": [lo, hi],
        "density": density,
        "seed": seed,
        "repaired_flights": repaired,
        **tap.statistics(),
    }
    return tap


def density_for_mean_coverage(n_routes: int, mean_coverage: float = HARDWARE_MEAN_COVERAGE) -> float:
    return min(1.0, mean_coverage / n_routes)


def tap_to_ising(tap: TapInstance) -> IsingProblem:
    """Exact Ising form of Q(x) under x_r = (1 - Z_r) / 2, constant included.

    Couplings are stored once per unordered pair r < r', so each carries
    P/2 * (number of flights shared by r and r').
    """
    a = tap.incidence.astype(np.float64)
    P = tap.penalty
    cover = a.sum(axis=1)  # routes covering each flight
    h = -0.5 * tap.costs - 0.5 * P * (a.T @ (cover - 2.0))
    shared = a.T @ a
    quad = {}
    for r in range(tap.n_routes):
        for rp in range(r + 1, tap.n_routes):
            if shared[r, rp]:
                quad[(r, rp)] = 0.5 * P * shared[r, rp]
    offset = 0.5 * tap.costs.sum() + P * float(np.sum((2.0 - cover) ** 2 / 4.0 + cover / 4.0))
    return IsingProblem(tap.n_routes, dict(enumerate(h.tolist())), quad, offset)
