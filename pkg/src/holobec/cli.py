"""Command line entry point.

    holobec <experiment> [--config FILE] [--key value ...] [--out FILE] [--workers N]

Exit status: 0 when every oracle comparison passes, 2 when a comparison is
out of tolerance (the full record is still written), 1 on any error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from .experiments import (
    EXPERIMENTS,
    ConfigError,
    monotone_trends,
    run,
    sweep_points,
    sweep_row,
    validate,
)

EXIT_PASS, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


def _parser():
    p = argparse.ArgumentParser(
        prog="holobec",
        description="Berry phase and holonomy experiments on a two-mode condensate spin.",
        epilog="Any other --key value pair overrides the config file; see the README for keys.",
    )
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", help="JSON file with experiment keys")
    p.add_argument("--out", help="write the JSON record (CSV for sweep) here instead of stdout")
    p.add_argument("--workers", type=int, default=None, help="sweep worker processes (default $HOLOBEC_WORKERS or 1)")
    p.add_argument("--axis", action="append", default=[], help="sweep axis, name=v1,v2 or name=start:stop:num")
    return p


def parse_overrides(tokens: list[str]) -> dict:
    """``--key value`` / ``--key=value`` pairs; values are JSON when they parse."""
    out, i = {}, 0
    while i < len(tokens):
        tok = tokens[i]
        if not tok.startswith("--") or len(tok) < 3:
            raise ConfigError(f"{tok}: expected --key value")
        key, eq, value = tok[2:].partition("=")
        if not eq:
            if i + 1 >= len(tokens):
                raise ConfigError(f"{key}: missing value")
            value = tokens[i + 1]
            i += 1
        i += 1
        try:
            out[key.replace("-", "_")] = json.loads(value)
        except json.JSONDecodeError:
            out[key.replace("-", "_")] = value
    return out


def load_config(experiment: str, path: str | None, overrides: dict) -> dict:
    values = {}
    if path:
        try:
            with open(path) as fh:
                values = json.load(fh)
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(f"config: cannot read {path}: {err}") from None
        if not isinstance(values, dict):
            raise ConfigError("config: file must hold a JSON object")
        named = values.pop("experiment", experiment)
        if named != experiment:
            raise ConfigError(f"experiment: config file is for {named!r}, not {experiment!r}")
    values.update(overrides)
    return validate(experiment, values)


def _workers(arg):
    if arg is not None:
        n = arg
    else:
        try:
            n = int(os.environ.get("HOLOBEC_WORKERS", "1"))
        except ValueError:
            raise ConfigError("HOLOBEC_WORKERS: must be an integer") from None
    if n < 1:
        raise ConfigError(f"workers: must be >= 1, got {n}")
    return n


def run_sweep(config: dict, workers: int = 1) -> list[dict]:
    """Rows of a sweep, in input order whatever the execution order."""
    points = sweep_points(config)
    axes = list(config["axes"])
    args = [(config["base"], axes, p) for p in points]
    if workers == 1 or len(points) == 1:
        return [sweep_row(*a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(sweep_row, *zip(*args)))


def rows_to_csv(rows: list[dict]) -> str:
    header = list(rows[0])
    for row in rows[1:]:
        header += [k for k in row if k not in header]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=header, lineterminator="\r\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args, rest = _parser().parse_known_args(argv)
    try:
        overrides = parse_overrides(rest)
        if args.experiment == "sweep" and args.axis:
            overrides["axes"] = args.axis
        config = load_config(args.experiment, args.config, overrides)
        if args.experiment == "sweep":
            rows = run_sweep(config, _workers(args.workers))
            _emit(rows_to_csv(rows), args.out)
            passed = sum(r["passed"] for r in rows)
            print(f"sweep: {passed}/{len(rows)} points passed", file=sys.stderr)
            if len(config["axes"]) == 1:
                axis = next(iter(config["axes"]))
                for name, trend in monotone_trends(rows, axis).items():
                    if name.endswith(".abs_error"):
                        print(f"sweep: {name} is {trend} in {axis}", file=sys.stderr)
            return EXIT_PASS if passed == len(rows) else EXIT_FAIL
        record = run(args.experiment, config)
    except ConfigError as err:
        print(f"holobec: invalid config: {err}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as err:  # noqa: BLE001 - every failure maps to exit 1
        print(f"holobec: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_ERROR
    _emit(json.dumps(record, indent=2) + "\n", args.out)
    for comp in record["comparisons"]:
        if not comp["passed"]:
            print(
                f"holobec: {comp['name']} out of tolerance: error {comp['abs_error']:.3g} > {comp['tolerance']:.3g}",
                file=sys.stderr,
            )
    return EXIT_PASS if record["passed"] else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
