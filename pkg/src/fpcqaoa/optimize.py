"""CVaR objective, derivative-free optimization loop, and the three solvers.

``run_fpc`` trains 3 * n_p schedule control values, ``run_qaoa`` trains 2 * N
layer angles, and ``run_random_sampling`` is the uniform-bitstring baseline.
Iteration counts everywhere are objective (circuit) evaluations.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.optimize import minimize

from fpcqaoa.ansatz import QaoaParams, TrotterConfig, build_fpc_circuit, build_qaoa_circuit
from fpcqaoa.ising import (
    DegenerateInstanceError,
    InvalidInputError,
    IsingProblem,
    MetricsRecord,
    ShotHistogram,
    brute_force_ground,
    compute_r,
    energies_of_bits,
    energy_of_bitstring,
)
from fpcqaoa.rng import make_rng
from fpcqaoa.schedules import ScheduleSet, linear_ramp_set
from fpcqaoa.simulator import SimConfig, SimMode, run_statevector, sample_counts

log = logging.getLogger(__name__)

DEFAULT_ALPHA_CVAR = 0.25
DEFAULT_MAX_EVALS = 250
HARDWARE_MAX_EVALS = 25
DEFAULT_TOL = 1e-3
DEFAULT_RHOBEG = 0.5
FPC_BOUNDS = (-2.0, 2.0)


class Init(str, enum.Enum):
    RANDOM = "random"
    LINEAR_RAMP = "linear_ramp"


@dataclass(frozen=True)
class ObjectiveConfig:
    alpha_cvar: float = DEFAULT_ALPHA_CVAR
    penalize_oob: bool = False  # False: clamp into bounds, True: reject with a penalty value

    def __post_init__(self):
        if not 0 < self.alpha_cvar <= 1:
            raise InvalidInputError(f"CVaR fraction must lie in (0, 1], got {self.alpha_cvar}")


@dataclass(frozen=True)
class OptimizerConfig:
    max_evals: int = DEFAULT_MAX_EVALS
    tol: float = DEFAULT_TOL
    rhobeg: float = DEFAULT_RHOBEG

    def to_json(self) -> dict:
        return {"max_evals": self.max_evals, "tol": self.tol, "rhobeg": self.rhobeg}


# ---------------------------------------------------------------- CVaR


def _tail_size(alpha: float, shots: int) -> int:
    # round first so that e.g. 0.1 * 30 does not ceil to 4
    return max(1, math.ceil(round(alpha * shots, 9)))


def cvar_from_counts(energies: np.ndarray, counts: np.ndarray, alpha: float) -> float:
    """Mean of the lowest ceil(alpha * K) per-shot energies; ``counts[i]`` shots hit ``energies[i]``."""
    if not 0 < alpha <= 1:
        raise InvalidInputError(f"CVaR fraction must lie in (0, 1], got {alpha}")
    counts = np.asarray(counts)
    mask = counts > 0
    e = np.asarray(energies, dtype=np.float64)[mask]
    c = counts[mask].astype(np.int64)
    total = int(c.sum())
    if total <= 0:
        raise InvalidInputError("histogram is empty")
    if alpha == 1.0:
        return float(c @ e / total)
    m = _tail_size(alpha, total)
    order = np.argsort(e, kind="stable")
    e, c = e[order], c[order]
    cum = np.cumsum(c)
    full = int(np.searchsorted(cum, m, side="left"))
    taken = c[:full]
    partial = m - int(taken.sum())
    return float((taken @ e[:full] + partial * e[full]) / m)


def cvar_from_histogram(problem: IsingProblem, hist: Mapping[str, int], alpha: float) -> float:
    if not hist or sum(hist.values()) <= 0:
        raise InvalidInputError("histogram is empty")
    keys = list(hist)
    energies = np.array([energy_of_bitstring(problem, b) for b in keys])
    return cvar_from_counts(energies, np.array([hist[k] for k in keys]), alpha)


def cvar_from_distribution(energies: np.ndarray, probs: np.ndarray, alpha: float) -> float:
    """Noise-free CVaR: expected energy over the lowest alpha probability mass."""
    order = np.argsort(energies, kind="stable")
    e, p = energies[order], probs[order] / probs.sum()
    cum = np.cumsum(p)
    take = np.clip(alpha - (cum - p), 0.0, p)
    return float(take @ e / take.sum())


# ---------------------------------------------------------------- optimizer


class NonFiniteObjective(FloatingPointError):
    def __init__(self, x, value):
        super().__init__(f"objective returned {value!r} at {list(x)}")
        self.x = x
        self.value = value


@dataclass
class OptimizeResult:
    params_trace: list
    value_trace: list
    best_params: np.ndarray
    best_value: float
    status: str  # "converged", "max_evals", "nonfinite"
    message: str = ""

    @property
    def nfev(self) -> int:
        return len(self.value_trace)


def optimize(
    objective: Callable[[np.ndarray], float],
    x0,
    bounds: Sequence[tuple[float, float]] | None = None,
    max_evals: int = DEFAULT_MAX_EVALS,
    tol: float = DEFAULT_TOL,
    rhobeg: float = DEFAULT_RHOBEG,
) -> OptimizeResult:
    """COBYLA with bound constraints; every evaluation is recorded.

    Returns the best evaluated point rather than COBYLA's last iterate, which
    matters for stochastic objectives.  Bounds enter as linear constraints, so
    intermediate iterates can sit slightly outside the box; objectives decide
    how to treat such points.
    """
    x0 = np.asarray(x0, dtype=np.float64).ravel()
    dim = x0.size
    if bounds is not None:
        bounds = [(float(lo), float(hi)) for lo, hi in bounds]
        if len(bounds) != dim:
            raise InvalidInputError(f"{len(bounds)} bounds for {dim} parameters")
        if any(not lo <= x <= hi for x, (lo, hi) in zip(x0, bounds)):
            raise InvalidInputError("initial point lies outside the bounds")
    if max_evals < 1 or 1 < max_evals < dim + 2:
        raise InvalidInputError(f"max_evals must be 1 or at least dim + 2 = {dim + 2}")

    params_trace: list = []
    value_trace: list = []

    def recorded(x):
        x = np.array(x, dtype=np.float64)
        value = float(objective(x))
        params_trace.append(x.tolist())
        value_trace.append(value)
        if not math.isfinite(value):
            raise NonFiniteObjective(x, value)
        return value

    status, message = "converged", ""
    try:
        if max_evals == 1:
            recorded(x0)
            status = "max_evals"
        else:
            res = minimize(
                recorded,
                x0,
                method="COBYLA",
                bounds=bounds,
                options={"rhobeg": rhobeg, "tol": tol, "maxiter": max_evals},
            )
            status = "max_evals" if res.status == 2 or len(value_trace) >= max_evals else "converged"
            message = str(res.message)
    except NonFiniteObjective as exc:
        status, message = "nonfinite", str(exc)
        log.warning("optimization aborted: %s", exc)

    finite = [i for i, v in enumerate(value_trace) if math.isfinite(v)]
    if finite:
        best = min(finite, key=lambda i: value_trace[i])
        best_params, best_value = np.array(params_trace[best]), value_trace[best]
    else:
        best_params, best_value = x0, math.nan
    return OptimizeResult(params_trace, value_trace, best_params, best_value, status, message)


# ---------------------------------------------------------------- runs


@dataclass
class RunRecord:
    algorithm: str  # "FPC", "QAOA", "RandomSampling"
    params_trace: list
    value_trace: list
    iterations: int
    final_params: list
    final_histogram: ShotHistogram | None
    metrics: MetricsRecord | None
    status: str = "converged"
    extras: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def to_json(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "status": self.status,
            "iterations": self.iterations,
            "iterations_unit": "objective evaluations",
            "final_params": list(self.final_params),
            "params_trace": self.params_trace,
            "value_trace": self.value_trace,
            "final_histogram": None if self.final_histogram is None else self.final_histogram.to_json(),
            "metrics": None if self.metrics is None else self.metrics.to_json(),
            "extras": self.extras,
            "config": self.config,
        }


class _CircuitObjective:
    """CVaR of the circuit built from a parameter vector; remembers the best shot record."""

    def __init__(self, problem, build, sim: SimConfig, obj: ObjectiveConfig, bounds, rng):
        self.problem = problem
        self.build = build
        self.sim = sim
        self.obj = obj
        self.bounds = np.asarray(bounds, dtype=np.float64)
        self.rng = rng
        self.energies = problem.energies
        self.best_value = math.inf
        self.best_counts = None
        self.best_probs = None

    def feasible(self, x: np.ndarray) -> np.ndarray:
        """The point actually simulated for ``x`` under clamping."""
        return np.clip(x, self.bounds[:, 0], self.bounds[:, 1])

    def __call__(self, x: np.ndarray) -> float:
        lo, hi = self.bounds[:, 0], self.bounds[:, 1]
        if np.any(x < lo) or np.any(x > hi):
            if self.obj.penalize_oob:
                # worse than any energy and growing with the violation, but finite
                # so the trust-region loop keeps going
                gap = float(np.sum(np.abs(x - self.feasible(x))))
                return float(self.energies.max()) + 1.0 + gap
            x = self.feasible(x)
        probs = run_statevector(self.build(x)).probabilities()
        if self.sim.mode is SimMode.EXACT:
            counts = None
            value = cvar_from_distribution(self.energies, probs, self.obj.alpha_cvar)
        else:
            counts = sample_counts(probs, self.sim.shots, self.rng)
            value = cvar_from_counts(self.energies, counts, self.obj.alpha_cvar)
        if value < self.best_value:
            self.best_value, self.best_counts, self.best_probs = value, counts, probs
        return value


def _metrics(problem: IsingProblem, counts, probs) -> tuple[MetricsRecord | None, dict]:
    energies = problem.energies
    e_init = float(energies.mean())  # <+...+| H |+...+>
    e_exact = float(probs @ energies)
    e_final = e_exact if counts is None else float(counts @ energies / counts.sum())
    e_ground, ground_bits = brute_force_ground(problem)
    try:
        r = compute_r(e_init, e_final, e_ground)
    except DegenerateInstanceError:
        r = None
    extras = {"e_final_exact": e_exact, "ground_bitstring": ground_bits}
    return MetricsRecord(e_init, e_final, e_ground, r), extras


def _finish(algorithm, problem, objective: _CircuitObjective, res: OptimizeResult, config) -> RunRecord:
    counts, probs = objective.best_counts, objective.best_probs
    metrics, extras = (None, {}) if probs is None else _metrics(problem, counts, probs)
    hist = None if counts is None else ShotHistogram.from_counts(counts, problem.n)
    extras["best_cvar"] = res.best_value
    if res.message:
        extras["optimizer_message"] = res.message
    return RunRecord(
        algorithm=algorithm,
        params_trace=res.params_trace,
        value_trace=res.value_trace,
        iterations=res.nfev,
        final_params=objective.feasible(res.best_params).tolist(),
        final_histogram=hist,
        metrics=metrics,
        status=res.status,
        extras=extras,
        config=config,
    )


def _common_config(cfg, sim, obj, opt, init, seed, bounds) -> dict:
    return {
        "trotter": cfg.to_json(),
        "sim": sim.to_json(),
        "alpha_cvar": obj.alpha_cvar,
        "penalize_oob": obj.penalize_oob,
        "optimizer": {"method": "COBYLA", **opt.to_json()},
        "init": Init(init).value,
        "seed": seed,
        "bounds": [list(b) for b in bounds],
    }


def run_fpc(
    problem: IsingProblem,
    n_p: int,
    cfg: TrotterConfig,
    sim: SimConfig = SimConfig(),
    obj: ObjectiveConfig = ObjectiveConfig(),
    init: Init | str = Init.RANDOM,
    seed: int = 0,
    opt: OptimizerConfig = OptimizerConfig(),
    bounds: tuple[float, float] = FPC_BOUNDS,
) -> RunRecord:
    dim = 3 * n_p
    box = [tuple(bounds)] * dim
    if Init(init) is Init.RANDOM:
        x0 = make_rng(seed, "init").uniform(0.0, 1.0, size=dim)
    else:
        x0 = linear_ramp_set(n_p).to_vector()

    def build(x):
        return build_fpc_circuit(problem, ScheduleSet.from_vector(x), cfg)

    objective = _CircuitObjective(problem, build, sim, obj, box, make_rng(seed, "shots"))
    res = optimize(objective, x0, box, opt.max_evals, opt.tol, opt.rhobeg)
    config = {"n_p": n_p, **_common_config(cfg, sim, obj, opt, init, seed, box)}
    return _finish("FPC", problem, objective, res, config)


def qaoa_bounds(cfg: TrotterConfig) -> list[tuple[float, float]]:
    half = math.pi * cfg.dt
    return [(-half, half)] * (2 * cfg.n_layers)


def run_qaoa(
    problem: IsingProblem,
    cfg: TrotterConfig,
    sim: SimConfig = SimConfig(),
    obj: ObjectiveConfig = ObjectiveConfig(),
    init: Init | str = Init.LINEAR_RAMP,
    seed: int = 0,
    opt: OptimizerConfig = OptimizerConfig(),
) -> RunRecord:
    box = qaoa_bounds(cfg)
    if Init(init) is Init.RANDOM:
        x0 = make_rng(seed, "init").uniform(0.0, 1.0, size=2 * cfg.n_layers) * cfg.dt
    else:
        x0 = QaoaParams.linear_ramp(cfg).to_vector()

    def build(x):
        return build_qaoa_circuit(problem, QaoaParams.from_vector(x), cfg.epsilon)

    objective = _CircuitObjective(problem, build, sim, obj, box, make_rng(seed, "shots"))
    # angles are schedule values times dt, so trust radii scale with dt too
    res = optimize(objective, x0, box, opt.max_evals, opt.tol * cfg.dt, opt.rhobeg * cfg.dt)
    config = _common_config(cfg, sim, obj, opt, init, seed, box)
    config["optimizer"]["trust_radius_scale"] = cfg.dt
    return _finish("QAOA", problem, objective, res, config)


def run_random_sampling(problem: IsingProblem, sim: SimConfig = SimConfig(), seed: int = 0) -> RunRecord:
    """Uniformly random bitstrings; works without tabulating 2**n energies."""
    rng = make_rng(seed, "random_sampling")
    bits = rng.integers(0, 2, size=(sim.shots, problem.n), dtype=np.int8)
    energies = energies_of_bits(problem, bits)
    best = int(np.argmin(energies))
    rows = ["".join(map(str, row)) for row in bits.tolist()]
    hist = ShotHistogram()
    for r in rows:
        hist[r] = hist.get(r, 0) + 1
    extras = {
        "avg_energy": float(energies.mean()),
        "best_energy": float(energies[best]),
        "best_bitstring": rows[best],
        "shots": sim.shots,
    }
    return RunRecord(
        algorithm="RandomSampling",
        params_trace=[[]],
        value_trace=[extras["avg_energy"]],
        iterations=1,
        final_params=[],
        final_histogram=ShotHistogram(sorted(hist.items())),
        metrics=None,
        status="converged",
        extras=extras,
        config={"sim": sim.to_json(), "seed": seed},
    )
