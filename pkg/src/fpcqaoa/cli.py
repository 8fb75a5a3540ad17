"""Command-line entry point: ``fpcqaoa {generate,run,report,baseline,schedule-dump}``.

Exit codes: 0 success, 2 invalid configuration, 3 some runs failed, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from fpcqaoa.campaign import (
    FAMILIES,
    FULL_INSTANCES,
    FULL_SIZES,
    CampaignConfigError,
    CampaignIOError,
    CampaignSpec,
    cmd_baseline,
    cmd_generate,
    cmd_report,
    cmd_run,
)
from fpcqaoa.ising import InvalidInputError
from fpcqaoa.schedules import ScheduleSet, linear_ramp_set

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL, EXIT_IO = 0, 2, 3, 4

# flag dest -> CampaignSpec field
_OVERRIDES = {
    "family": "family",
    "sizes": "sizes",
    "depths": "depths",
    "np": "n_p",
    "shots": "shots",
    "alpha_cvar": "alpha_cvar",
    "seed": "master_seed",
    "instances": "instances_per_cell",
    "max_evals": "max_evals",
    "jobs": "jobs",
    "out": "output_dir",
    "tol": "tol",
    "rhobeg": "rhobeg",
    "epsilon": "epsilon",
    "dt": "time_per_layer",
    "init_fpc": "init_fpc",
    "init_qaoa": "init_qaoa",
    "tap_density": "tap_density",
    "tap_penalty": "tap_penalty",
}


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _campaign_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="campaign JSON file; flags override its values")
    p.add_argument("--family", choices=FAMILIES)
    p.add_argument("--sizes", type=_int_list, help="e.g. 10,12")
    p.add_argument("--depths", type=_int_list, help="Trotter depths, e.g. 3,5,7")
    p.add_argument("--np", type=int, help="control values per schedule")
    p.add_argument("--shots", type=int)
    p.add_argument("--alpha-cvar", type=float)
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--instances", type=int, help="instances per (family, size) cell")
    p.add_argument("--max-evals", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--out", help="output directory (default: $FPCQAOA_OUT or ./fpcqaoa_out)")
    p.add_argument("--tol", type=float, help="final trust radius")
    p.add_argument("--rhobeg", type=float, help="initial trust radius")
    p.add_argument("--epsilon", type=float, help="mixer strength")
    p.add_argument("--dt", type=float, help="time per Trotter layer (T = N * dt)")
    p.add_argument("--init-fpc", choices=["random", "linear_ramp"])
    p.add_argument("--init-qaoa", choices=["random", "linear_ramp"])
    p.add_argument("--tap-density", type=float)
    p.add_argument("--tap-penalty", type=float)
    p.add_argument("--full-grid", action="store_true",
                   help="sizes 10,15,20 with 100 instances per cell")


def build_spec(args: argparse.Namespace) -> CampaignSpec:
    data: dict = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise CampaignIOError(f"cannot read {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise CampaignConfigError(f"{args.config} is not valid JSON: {exc}") from exc
    if args.full_grid:
        data.update(sizes=list(FULL_SIZES), instances_per_cell=FULL_INSTANCES)
    for dest, key in _OVERRIDES.items():
        value = getattr(args, dest, None)
        if value is not None:
            data[key] = value
    return CampaignSpec.from_dict(data)


def _print_rows(rows: list[dict]) -> None:
    for row in rows:
        print(json.dumps(row, sort_keys=True))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="fpcqaoa", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="write benchmark instances")
    _campaign_flags(p_gen)
    p_run = sub.add_parser("run", help="paired QAOA / FPC-QAOA runs over generated instances")
    _campaign_flags(p_run)
    p_run.add_argument("--generate", action="store_true", help="generate instances first")

    p_rep = sub.add_parser("report", help="aggregate a summary CSV")
    p_rep.add_argument("summary", help="summary.csv written by 'run'")
    p_rep.add_argument("--out", help="directory for report CSVs (default: next to summary)")

    p_base = sub.add_parser("baseline", help="uniform random-sampling baseline for one instance")
    p_base.add_argument("instance")
    p_base.add_argument("--shots", type=int, default=10_000)
    p_base.add_argument("--seed", type=int, default=0)
    p_base.add_argument("--out", help="write the JSON record here instead of stdout")

    p_dump = sub.add_parser("schedule-dump", help="export F1, F2, F3 curves as CSV")
    src = p_dump.add_mutually_exclusive_group()
    src.add_argument("--schedule", help="ScheduleSet JSON file")
    src.add_argument("--run-record", help="FPC run record JSON; uses its final parameters")
    p_dump.add_argument("--np", type=int, default=1, help="linear-ramp set size when no file given")
    p_dump.add_argument("--points", type=int, default=101)
    p_dump.add_argument("--out", help="CSV path (default: stdout)")

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _dispatch(args)
    except (CampaignConfigError, InvalidInputError, KeyError) as exc:
        print(f"fpcqaoa: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CampaignIOError, OSError) as exc:
        print(f"fpcqaoa: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


def _dispatch(args) -> int:
    if args.command == "generate":
        spec = build_spec(args)
        paths = cmd_generate(spec)
        print(f"wrote {len(paths)} instances to {spec.out / 'instances'}")
        return EXIT_OK

    if args.command == "run":
        spec = build_spec(args)
        if args.generate:
            cmd_generate(spec)
        result = cmd_run(spec)
        print(f"wrote {len(result['rows'])} summary rows to {spec.out / 'summary.csv'}")
        if result["failures"]:
            print(f"{result['failures']} run(s) failed; see run records", file=sys.stderr)
            return EXIT_PARTIAL
        return EXIT_OK

    if args.command == "report":
        eta_rows, iter_rows = cmd_report(args.summary, args.out)
        _print_rows(eta_rows)
        _print_rows(iter_rows)
        return EXIT_OK

    if args.command == "baseline":
        record = cmd_baseline(args.instance, args.shots, args.seed)
        text = json.dumps(record, indent=1, sort_keys=True) + "\n"
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
        return EXIT_OK

    if args.command == "schedule-dump":
        if args.schedule:
            sched = ScheduleSet.from_json(json.loads(Path(args.schedule).read_text(encoding="utf-8")))
        elif args.run_record:
            rec = json.loads(Path(args.run_record).read_text(encoding="utf-8"))
            if rec.get("algorithm") != "FPC":
                raise CampaignConfigError(f"{args.run_record} is not an FPC run record")
            sched = ScheduleSet.from_vector(rec["final_params"])
        else:
            sched = linear_ramp_set(args.np)
        text = sched.curve_csv(args.points)
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
        return EXIT_OK
    raise CampaignConfigError(f"unknown command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
