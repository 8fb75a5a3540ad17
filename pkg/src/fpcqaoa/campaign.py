"""Benchmark campaigns: instance generation, paired QAOA / FPC-QAOA runs, reports.

Directory layout under ``output_dir``::

    campaign.json                    resolved campaign configuration
    instances/<family>_n<n>_i<k>.json
    runs/<instance>_N<N>_<algo>.json full run records with traces
    runs.csv                         one row per run
    summary.csv                      one row per (instance, N) pair
    report_eta.csv, report_iterations.csv

All randomness flows from ``master_seed`` through :func:`fpcqaoa.rng.derive_seed`.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import logging
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from fpcqaoa.ansatz import TrotterConfig
from fpcqaoa.ising import (
    DegenerateInstanceError,
    IsingProblem,
    compute_eta,
)
from fpcqaoa.optimize import (
    DEFAULT_ALPHA_CVAR,
    DEFAULT_MAX_EVALS,
    DEFAULT_RHOBEG,
    DEFAULT_TOL,
    Init,
    ObjectiveConfig,
    OptimizerConfig,
    run_fpc,
    run_qaoa,
    run_random_sampling,
)
from fpcqaoa.problems import (
    DEFAULT_TAP_DENSITY,
    GraphSpec,
    TapInstance,
    Topology,
    gen_maxcut,
    gen_tap,
    gen_topology_ising,
    tap_to_ising,
)
from fpcqaoa.rng import derive_seed
from fpcqaoa.simulator import DEFAULT_SHOTS, SimConfig

log = logging.getLogger(__name__)

FAMILIES = ("maxcut", "cycle", "star", "wheel", "tap")
DESK_SIZES = (10,)
DESK_DEPTHS = (3, 5, 7)
DESK_INSTANCES = 20
FULL_SIZES = (10, 15, 20)
FULL_INSTANCES = 100

SUMMARY_COLUMNS = [
    "family", "n", "N", "n_p", "instance", "R_qaoa", "R_fpc", "eta",
    "iters_qaoa", "iters_fpc", "excluded_flag",
    "converged_qaoa", "converged_fpc", "instance_sha256",
]
RUN_COLUMNS = [
    "instance", "algorithm", "N", "n_p", "iterations", "E_final", "best_energy",
    "R", "pair_id", "status", "instance_sha256",
]


def default_output_dir() -> str:
    return os.environ.get("FPCQAOA_OUT", "fpcqaoa_out")


class CampaignConfigError(ValueError):
    pass


class CampaignIOError(OSError):
    pass


@dataclass
class CampaignSpec:
    family: str = "maxcut"
    sizes: list = field(default_factory=lambda: list(DESK_SIZES))
    depths: list = field(default_factory=lambda: list(DESK_DEPTHS))
    n_p: int = 1
    instances_per_cell: int = DESK_INSTANCES
    shots: int = DEFAULT_SHOTS
    alpha_cvar: float = DEFAULT_ALPHA_CVAR
    master_seed: int = 0
    output_dir: str = field(default_factory=lambda: default_output_dir())
    max_evals: int = DEFAULT_MAX_EVALS
    tol: float = DEFAULT_TOL
    rhobeg: float = DEFAULT_RHOBEG
    epsilon: float = 1.0
    time_per_layer: float = 1.0  # dt; total time T = N * dt
    init_fpc: str = Init.RANDOM.value
    init_qaoa: str = Init.LINEAR_RAMP.value
    tap_density: float = DEFAULT_TAP_DENSITY
    tap_penalty: float | None = None
    jobs: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.family not in FAMILIES:
            raise CampaignConfigError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if not self.sizes or not self.depths:
            raise CampaignConfigError("sizes and depths must be non-empty")
        if any(int(n) < 1 for n in self.sizes) or any(int(d) < 1 for d in self.depths):
            raise CampaignConfigError("sizes and depths must be positive")
        if self.instances_per_cell < 1:
            raise CampaignConfigError("instances_per_cell must be at least 1")
        if self.n_p < 0:
            raise CampaignConfigError("n_p must be non-negative")
        if not 0 < self.alpha_cvar <= 1:
            raise CampaignConfigError(f"alpha_cvar must lie in (0, 1], got {self.alpha_cvar}")
        if self.shots < 1 or self.max_evals < 1 or self.jobs < 1:
            raise CampaignConfigError("shots, max_evals and jobs must be positive")
        if not self.time_per_layer > 0 or not self.epsilon > 0:
            raise CampaignConfigError("time_per_layer and epsilon must be positive")
        for init in (self.init_fpc, self.init_qaoa):
            try:
                Init(init)
            except ValueError:
                raise CampaignConfigError(f"unknown init {init!r}") from None

    @classmethod
    def from_dict(cls, data: dict) -> "CampaignSpec":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise CampaignConfigError(f"unknown campaign keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise CampaignConfigError(str(exc)) from None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @property
    def out(self) -> Path:
        return Path(self.output_dir)


# ---------------------------------------------------------------- file helpers


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, columns: list, rows: list[dict]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row.get(c)) for c in columns])
    _write_text(path, buf.getvalue())


def _write_text(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CampaignIOError(f"cannot write {path}: {exc}") from exc


def _write_json(path: Path, data) -> None:
    _write_text(path, json.dumps(data, indent=1, sort_keys=True) + "\n")


def read_csv(path) -> list[dict]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            return list(csv.DictReader(fh))
    except OSError as exc:
        raise CampaignIOError(f"cannot read {path}: {exc}") from exc


def file_sha256(path) -> str:
    try:
        return hashlib.sha256(Path(path).read_bytes()).hexdigest()
    except OSError as exc:
        raise CampaignIOError(f"cannot read {path}: {exc}") from exc


# ---------------------------------------------------------------- generation


def instance_name(family: str, n: int, index: int) -> str:
    return f"{family}_n{n}_i{index:03d}"


def make_instance(spec: CampaignSpec, n: int, index: int) -> dict:
    """Instance document: IsingProblem JSON plus a ``meta`` block (and raw TAP data)."""
    seed = derive_seed(spec.master_seed, "instance", spec.family, n, index)
    meta = {"family": spec.family, "n": n, "index": index, "seed": seed,
            "master_seed": spec.master_seed}
    extra = {}
    if spec.family == "maxcut":
        gspec = GraphSpec.half_regular(n, seed)
        problem = gen_maxcut(gspec)
        meta.update(generator="gen_maxcut", params=gspec.params())
    elif spec.family == "tap":
        tap = gen_tap(n, penalty=spec.tap_penalty, density=spec.tap_density, seed=seed)
        problem = tap_to_ising(tap)
        meta.update(generator="gen_tap", params=tap.meta)
        extra["tap"] = tap.to_json()
    else:
        gspec = GraphSpec(Topology(spec.family), n, seed)
        problem = gen_topology_ising(gspec)
        meta.update(generator="gen_topology_ising", params=gspec.params())
    return {**problem.to_json(), "meta": meta, **extra}


def load_instance(path) -> tuple[IsingProblem, dict]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise CampaignIOError(f"cannot read {path}: {exc}") from exc
    problem = IsingProblem.from_json(data)
    if "tap" in data:
        TapInstance.from_json(data["tap"])  # validates the raw data
    return problem, data


def cmd_generate(spec: CampaignSpec) -> list[Path]:
    paths = []
    for n in spec.sizes:
        for index in range(spec.instances_per_cell):
            path = spec.out / "instances" / f"{instance_name(spec.family, n, index)}.json"
            _write_json(path, make_instance(spec, int(n), index))
            paths.append(path)
    _write_json(spec.out / "campaign.json", spec.to_dict())
    return paths


# ---------------------------------------------------------------- runs


def _run_job(job: tuple) -> dict:
    spec_dict, path, N, algorithm = job
    spec = CampaignSpec.from_dict(spec_dict)
    problem, doc = load_instance(path)
    meta = doc["meta"]
    seed = derive_seed(spec.master_seed, "run", meta["family"], meta["n"], meta["index"], N)
    cfg = TrotterConfig(N, N * spec.time_per_layer, spec.epsilon)
    sim = SimConfig(spec.shots, seed)
    obj = ObjectiveConfig(spec.alpha_cvar)
    opt = OptimizerConfig(spec.max_evals, spec.tol, spec.rhobeg)
    if algorithm == "FPC":
        rec = run_fpc(problem, spec.n_p, cfg, sim, obj, spec.init_fpc, seed, opt)
    else:
        rec = run_qaoa(problem, cfg, sim, obj, spec.init_qaoa, seed, opt)
    out = rec.to_json()
    hist = rec.final_histogram
    out["extras"]["best_energy"] = (
        float(min(problem.energies[int(b, 2)] for b in hist)) if hist else None
    )
    return out


def _safe_job(job: tuple) -> dict:
    try:
        return _run_job(job)
    except Exception as exc:  # campaign keeps going; failure is recorded
        log.exception("run failed: %s N=%s %s", job[1], job[2], job[3])
        return {"algorithm": job[3], "status": "failed", "error": f"{type(exc).__name__}: {exc}",
                "iterations": None, "metrics": None, "extras": {}}


def _list_instances(spec: CampaignSpec) -> list[Path]:
    paths = []
    for n in spec.sizes:
        for index in range(spec.instances_per_cell):
            path = spec.out / "instances" / f"{instance_name(spec.family, n, index)}.json"
            if not path.exists():
                raise CampaignIOError(f"missing instance {path}; run 'generate' first")
            paths.append(path)
    return paths


def pair_row(family, n, N, n_p, instance, digest, qaoa: dict, fpc: dict) -> dict:
    def r_of(rec):
        m = rec.get("metrics")
        return None if not m else m.get("r_value")

    r_q, r_f = r_of(qaoa), r_of(fpc)
    eta, excluded = None, True
    if r_q is not None and r_f is not None and "failed" not in (qaoa["status"], fpc["status"]):
        try:
            eta, excluded = compute_eta(r_f, r_q), False
        except DegenerateInstanceError:
            pass
    return {
        "family": family, "n": n, "N": N, "n_p": n_p, "instance": instance,
        "R_qaoa": r_q, "R_fpc": r_f, "eta": eta,
        "iters_qaoa": qaoa.get("iterations"), "iters_fpc": fpc.get("iterations"),
        "excluded_flag": excluded,
        "converged_qaoa": qaoa["status"] == "converged",
        "converged_fpc": fpc["status"] == "converged",
        "instance_sha256": digest,
    }


def cmd_run(spec: CampaignSpec) -> dict:
    """Paired runs for every (instance, N); returns {"rows", "failures"}."""
    paths = _list_instances(spec)
    spec_dict = spec.to_dict()
    jobs = [(spec_dict, str(p), int(N), algo) for p in paths for N in spec.depths
            for algo in ("QAOA", "FPC")]
    if spec.jobs > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            results = list(pool.map(_safe_job, jobs))
    else:
        results = [_safe_job(j) for j in jobs]

    by_key = {}
    for (_, path, N, algo), rec in zip(jobs, results):
        by_key[(path, N, algo)] = rec

    rows, run_rows, failures = [], [], 0
    for path in paths:
        _, doc = load_instance(path)
        meta = doc["meta"]
        digest = file_sha256(path)
        stem = Path(path).stem
        for N in spec.depths:
            N = int(N)
            pair = {}
            for algo in ("QAOA", "FPC"):
                rec = by_key[(str(path), N, algo)]
                rec["instance"] = stem
                rec["instance_sha256"] = digest
                rec["pair_id"] = f"{stem}_N{N}"
                failures += rec["status"] == "failed"
                _write_json(spec.out / "runs" / f"{stem}_N{N}_{algo}.json", rec)
                m = rec.get("metrics") or {}
                run_rows.append({
                    "instance": stem, "algorithm": algo, "N": N, "n_p": spec.n_p,
                    "iterations": rec.get("iterations"), "E_final": m.get("e_final"),
                    "best_energy": rec["extras"].get("best_energy"), "R": m.get("r_value"),
                    "pair_id": rec["pair_id"], "status": rec["status"], "instance_sha256": digest,
                })
                pair[algo] = rec
            rows.append(pair_row(meta["family"], meta["n"], N, spec.n_p, stem, digest,
                                 pair["QAOA"], pair["FPC"]))

    rows.sort(key=lambda r: (r["family"], r["n"], r["N"], r["instance"]))
    run_rows.sort(key=lambda r: (r["instance"], r["N"], r["algorithm"]))
    _write_csv(spec.out / "summary.csv", SUMMARY_COLUMNS, rows)
    _write_csv(spec.out / "runs.csv", RUN_COLUMNS, run_rows)
    _write_json(spec.out / "campaign.json", spec.to_dict())
    return {"rows": rows, "failures": failures}


def summary_from_runs(spec: CampaignSpec) -> list[dict]:
    """Rebuild summary rows from the per-run JSON records alone."""
    rows = []
    for path in _list_instances(spec):
        stem = Path(path).stem
        for N in spec.depths:
            recs = {}
            for algo in ("QAOA", "FPC"):
                run_path = spec.out / "runs" / f"{stem}_N{int(N)}_{algo}.json"
                try:
                    recs[algo] = json.loads(run_path.read_text(encoding="utf-8"))
                except OSError as exc:
                    raise CampaignIOError(f"cannot read {run_path}: {exc}") from exc
            _, doc = load_instance(path)
            meta = doc["meta"]
            rows.append(pair_row(meta["family"], meta["n"], int(N), spec.n_p, stem,
                                 recs["QAOA"]["instance_sha256"], recs["QAOA"], recs["FPC"]))
    rows.sort(key=lambda r: (r["family"], r["n"], r["N"], r["instance"]))
    return rows


# ---------------------------------------------------------------- reports


def _num(text: str):
    return None if text in ("", None) else float(text)


def aggregate(rows: list[dict]) -> tuple[list[dict], list[dict]]:
    """Per-(family, n, N) eta statistics and per-algorithm iteration means.

    ``rows`` may hold CSV strings or native values.
    """
    cells: dict = {}
    for row in rows:
        key = (row["family"], int(row["n"]), int(row["N"]))
        cells.setdefault(key, []).append(row)

    eta_rows, iter_rows = [], []
    for key in sorted(cells):
        group = cells[key]
        flags = [str(r["excluded_flag"]) in ("1", "True") for r in group]
        etas = [_num(_fmt(r["eta"])) for r, f in zip(group, flags) if not f]
        etas = [e for e in etas if e is not None]
        family, n, N = key
        eta_rows.append({
            "family": family, "n": n, "N": N,
            "n_included": len(etas), "n_excluded": sum(flags),
            "eta_median": statistics.median(etas) if etas else None,
            "eta_mean": statistics.fmean(etas) if etas else None,
        })
        for algo, col, conv in (("QAOA", "iters_qaoa", "converged_qaoa"),
                                ("FPC", "iters_fpc", "converged_fpc")):
            iters = [(_num(_fmt(r[col])), str(r[conv]) in ("1", "True")) for r in group]
            iters = [(i, c) for i, c in iters if i is not None]
            conv_only = [i for i, c in iters if c]
            iter_rows.append({
                "family": family, "n": n, "N": N, "algorithm": algo,
                "n_runs": len(iters),
                "mean_iterations": statistics.fmean(i for i, _ in iters) if iters else None,
                "n_converged": len(conv_only),
                "mean_iterations_converged": statistics.fmean(conv_only) if conv_only else None,
            })
    return eta_rows, iter_rows


ETA_COLUMNS = ["family", "n", "N", "n_included", "n_excluded", "eta_median", "eta_mean"]
ITER_COLUMNS = ["family", "n", "N", "algorithm", "n_runs", "mean_iterations",
                "n_converged", "mean_iterations_converged"]


def cmd_report(summary_csv, out_dir=None) -> tuple[list[dict], list[dict]]:
    rows = read_csv(summary_csv)
    if not rows:
        raise CampaignConfigError(f"{summary_csv} has no rows")
    eta_rows, iter_rows = aggregate(rows)
    out = Path(out_dir) if out_dir is not None else Path(summary_csv).parent
    _write_csv(out / "report_eta.csv", ETA_COLUMNS, eta_rows)
    _write_csv(out / "report_iterations.csv", ITER_COLUMNS, iter_rows)
    return eta_rows, iter_rows


# ---------------------------------------------------------------- baseline


def cmd_baseline(instance_path, shots: int = DEFAULT_SHOTS, seed: int = 0) -> dict:
    problem, doc = load_instance(instance_path)
    rec = run_random_sampling(problem, SimConfig(shots, seed), seed)
    return {
        "instance": Path(instance_path).stem,
        "algorithm": "RandomSampling",
        "N": None,
        "shots": shots,
        "seed": seed,
        "avg_energy": rec.extras["avg_energy"],
        "best_energy": rec.extras["best_energy"],
        "best_bitstring": rec.extras["best_bitstring"],
        "iterations": rec.iterations,
    }

