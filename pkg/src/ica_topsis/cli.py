"""Command-line front end: rank, separate, experiment.

Subcommands
-----------
rank        Rank a decision matrix from CSV with one of the four methods.
separate    Estimate and disambiguate latent variables from observed data.
experiment  Run the Monte-Carlo SNR sweep and write a long-format CSV.

CSV dialect: comma separated, UTF-8, header row required. Decision-matrix
files carry the alternative label in the first column and criterion labels
in the remaining header cells. Floats are written with 17 significant
digits so files round-trip exactly. All randomness is controlled by
``--seed``; set ``ICA_TOPSIS_LOG_LEVEL`` to adjust log verbosity.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys

import numpy as np

from .alignment import correct_permutation, correct_sign
from .exceptions import IcaTopsisError, NotConvergedError
from .experiment import (
    DEFAULT_SNR_GRID_DB,
    METHODS,
    ExperimentConfig,
    ExperimentResult,
    MixingSpec,
    rank_with_method,
    run_experiment,
)
from .ica import IcaOptions, fastica, infomax
from .topsis import DecisionMatrix, WeightVector

log = logging.getLogger("ica_topsis")

EXIT_OK = 0
EXIT_ERROR = 1


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def read_decision_matrix(path: str) -> DecisionMatrix:
    """Read a decision matrix CSV: label column first, criteria after.

    Lines starting with ``#`` are ignored. Parse failures name the
    offending line.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [
            (lineno, row)
            for lineno, row in enumerate(csv.reader(fh), start=1)
            if row and not row[0].lstrip().startswith("#")
        ]
    if len(rows) < 2:
        raise ValueError(f"{path}: need a header row and at least one data row")
    header = rows[0][1]
    if len(header) < 2:
        raise ValueError(f"{path}: header must name at least one criterion")
    criterion_labels = [h.strip() for h in header[1:]]
    labels, values = [], []
    for lineno, row in rows[1:]:
        if len(row) != len(header):
            raise ValueError(
                f"{path}, line {lineno}: expected {len(header)} fields, got {len(row)}"
            )
        labels.append(row[0].strip())
        try:
            values.append([float(cell) for cell in row[1:]])
        except ValueError as err:
            raise ValueError(f"{path}, line {lineno}: {err}") from None
    return DecisionMatrix(
        np.array(values), alternative_labels=labels, criterion_labels=criterion_labels
    )


def write_decision_matrix(path: str, decision: DecisionMatrix, label_header: str = "alternative"):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([label_header, *decision.criterion_labels])
        for label, row in zip(decision.alternative_labels, decision.values):
            writer.writerow([label, *[_fmt(v) for v in row]])


def _read_matrix(path: str) -> np.ndarray:
    """Read a plain numeric CSV (no header, no labels)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row and not row[0].lstrip().startswith("#")]
    if not rows:
        raise ValueError(f"{path}: empty matrix file")
    try:
        return np.array([[float(cell) for cell in row] for row in rows])
    except ValueError as err:
        raise ValueError(f"{path}: {err}") from None


def _parse_weights(spec: str, n_criteria: int) -> WeightVector:
    """Accept inline comma-separated weights or a path to a one-row CSV."""
    try:
        return WeightVector([float(f) for f in spec.split(",")])
    except ValueError:
        pass
    with open(spec, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                return WeightVector([float(cell) for cell in row])
            except ValueError:
                continue  # header row; keep looking for a numeric row
    raise ValueError(f"{spec}: no numeric weight row found")


def _write_rows(path: str, header: list[str], rows):
    """Write CSV atomically: temp file in place, then rename."""
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    os.replace(tmp, path)


def cmd_rank(args) -> int:
    decision = read_decision_matrix(args.input)
    if args.weights is None:
        weights = WeightVector.uniform(decision.n_criteria)
    else:
        weights = _parse_weights(args.weights, decision.n_criteria)
    if len(weights) != decision.n_criteria:
        raise ValueError(
            f"got {len(weights)} weights for {decision.n_criteria} criteria"
        )
    options = IcaOptions(seed=args.seed)
    ranking, failed = rank_with_method(decision, weights, args.method, options)
    rows = [
        [decision.alternative_labels[alt], _fmt(ranking.scores[alt]), rank + 1]
        for rank, alt in enumerate(ranking.order)
    ]
    _write_rows(args.output, ["alternative_label", "score", "rank"], rows)
    log.info("wrote %s (%d alternatives, method %s)", args.output, len(rows), args.method)
    if failed:
        print("warning: separation did not converge; ranked best iterate", file=sys.stderr)
    return EXIT_OK


def _write_labeled_matrix(path, row_labels, col_labels, matrix, flag=None):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if flag:
            fh.write(f"# {flag}\n")
        writer = csv.writer(fh)
        writer.writerow(["", *col_labels])
        for label, row in zip(row_labels, matrix):
            writer.writerow([label, *[_fmt(v) for v in row]])


def cmd_separate(args) -> int:
    data = read_decision_matrix(args.input)
    latent_labels = None
    if args.inject_mixing is not None:
        mixing = _read_matrix(args.inject_mixing)
        if mixing.ndim != 2 or mixing.shape[0] != mixing.shape[1]:
            raise ValueError(
                f"{args.inject_mixing}: injected mixing matrix must be square"
            )
        if mixing.shape[0] != data.n_criteria:
            raise ValueError(
                f"{args.inject_mixing}: {mixing.shape[0]}x{mixing.shape[0]} matrix "
                f"does not match {data.n_criteria} input columns"
            )
        sources = data.values.T
        converged, iterations, algorithm = True, 0, "injected"
        latent_labels = data.criterion_labels
    else:
        separate = fastica if args.algorithm == "fastica" else infomax
        options = IcaOptions(
            seed=args.seed,
            max_iter=args.max_iter,
            tol=args.tol,
            restarts=args.restarts,
            learning_rate=args.learning_rate,
            variant=args.variant,
        )
        try:
            separation = separate(data.values.T, options)
        except NotConvergedError as err:
            separation = err.result
        mixing = separation.estimated_mixing
        sources = separation.sources
        converged = separation.converged
        iterations = separation.iterations
        algorithm = separation.algorithm

    permuted, permuted_sources, permutation = correct_permutation(mixing, sources)
    adjusted = correct_sign(permuted, permuted_sources, permutation)

    n = adjusted.mixing_adjusted.shape[0]
    if latent_labels is None:
        latent_labels = [f"latent_{i + 1}" for i in range(n)]
    flag = None if converged else "WARNING: separation did not converge; best iterate"
    _write_labeled_matrix(
        f"{args.output_prefix}_mixing.csv",
        data.criterion_labels,
        latent_labels,
        adjusted.mixing_adjusted,
        flag=flag,
    )
    _write_labeled_matrix(
        f"{args.output_prefix}_sources.csv",
        data.alternative_labels,
        latent_labels,
        adjusted.sources_adjusted.T,
        flag=flag,
    )
    diagnostics = {
        "algorithm": algorithm,
        "converged": bool(converged),
        "iterations": int(iterations),
        "permutation_applied": adjusted.permutation_applied.tolist(),
        "signs_applied": adjusted.signs_applied.tolist(),
    }
    with open(f"{args.output_prefix}_diagnostics.json", "w", encoding="utf-8") as fh:
        json.dump(diagnostics, fh, indent=2)
        fh.write("\n")
    log.info("wrote %s_{mixing,sources,diagnostics}", args.output_prefix)
    if not converged:
        print("warning: separation did not converge; wrote best iterate", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


def _config_from_sources(args) -> ExperimentConfig:
    """Defaults, overridden by the config file, overridden by flags."""
    file_cfg = {}
    if args.config is not None:
        with open(args.config, encoding="utf-8") as fh:
            file_cfg = json.load(fh)
        unknown = set(file_cfg) - {
            "alternatives",
            "mixing",
            "weights",
            "snr_grid_db",
            "realizations",
            "seed",
            "methods",
            "ica",
        }
        if unknown:
            raise ValueError(f"{args.config}: unknown config keys {sorted(unknown)}")

    kwargs = {}
    kwargs["alternatives"] = (
        args.alternatives
        if args.alternatives is not None
        else file_cfg.get("alternatives", 100)
    )
    if "mixing" in file_cfg:
        kwargs["mixing"] = MixingSpec(np.array(file_cfg["mixing"], dtype=float))
    if "weights" in file_cfg:
        kwargs["weights"] = WeightVector(file_cfg["weights"])
    if args.snr_grid is not None:
        kwargs["snr_grid_db"] = tuple(float(s) for s in args.snr_grid.split(","))
    else:
        kwargs["snr_grid_db"] = tuple(file_cfg.get("snr_grid_db", DEFAULT_SNR_GRID_DB))
    kwargs["realizations"] = (
        args.realizations
        if args.realizations is not None
        else file_cfg.get("realizations", 1000)
    )
    kwargs["seed"] = args.seed if args.seed is not None else file_cfg.get("seed", 0)
    if args.methods is not None:
        kwargs["methods"] = tuple(args.methods.split(","))
    elif "methods" in file_cfg:
        kwargs["methods"] = tuple(file_cfg["methods"])
    if "ica" in file_cfg:
        kwargs["ica"] = IcaOptions(**file_cfg["ica"])
    return ExperimentConfig(**kwargs)


def experiment_rows(result: ExperimentResult):
    for i, method in enumerate(result.methods):
        for j, snr in enumerate(result.snr_grid_db):
            yield [
                method,
                _fmt(snr),
                _fmt(result.mean_tau[i, j]),
                _fmt(result.std_tau[i, j]),
                int(result.realizations[i, j]),
                int(result.failures[i, j]),
            ]


def cmd_experiment(args) -> int:
    config = _config_from_sources(args)
    log.info(
        "running sweep: %d realizations x %d SNR points, methods %s, seed %d",
        config.realizations,
        len(config.snr_grid_db),
        ",".join(config.methods),
        config.seed,
    )
    result = run_experiment(config, n_jobs=args.jobs)
    _write_rows(
        args.output,
        ["method", "snr_db", "mean_tau", "std_tau", "realizations", "failures"],
        experiment_rows(result),
    )
    log.info("wrote %s", args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ica-topsis",
        description="TOPSIS ranking on observed or ICA-recovered latent criteria",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_rank = sub.add_parser("rank", help="rank a decision matrix CSV")
    p_rank.add_argument("--input", required=True, help="decision matrix CSV")
    p_rank.add_argument(
        "--weights", help="inline comma-separated weights or a CSV path (default: uniform)"
    )
    p_rank.add_argument("--method", choices=METHODS, default="topsis-e")
    p_rank.add_argument("--seed", type=int, default=0)
    p_rank.add_argument("--output", required=True, help="ranking CSV to write")
    p_rank.set_defaults(func=cmd_rank)

    p_sep = sub.add_parser("separate", help="estimate latent variables from observations")
    p_sep.add_argument("--input", required=True, help="observations CSV (samples as rows)")
    p_sep.add_argument("--algorithm", choices=("fastica", "infomax"), default="fastica")
    p_sep.add_argument("--seed", type=int, default=0)
    p_sep.add_argument("--max-iter", type=int, default=None)
    p_sep.add_argument("--tol", type=float, default=None)
    p_sep.add_argument("--restarts", type=int, default=5)
    p_sep.add_argument("--learning-rate", type=float, default=0.01)
    p_sep.add_argument("--variant", choices=("extended", "logistic"), default="extended")
    p_sep.add_argument(
        "--inject-mixing",
        metavar="CSV",
        help="diagnostic hook: skip estimation, disambiguate this mixing matrix "
        "against the input columns taken as sources",
    )
    p_sep.add_argument("--output-prefix", required=True)
    p_sep.set_defaults(func=cmd_separate)

    p_exp = sub.add_parser("experiment", help="run the Monte-Carlo SNR sweep")
    p_exp.add_argument("--config", help="JSON config file")
    p_exp.add_argument("--seed", type=int, default=None)
    p_exp.add_argument("--realizations", type=int, default=None)
    p_exp.add_argument("--snr-grid", help="comma-separated SNR values in dB")
    p_exp.add_argument("--alternatives", type=int, default=None)
    p_exp.add_argument("--methods", help="comma-separated subset of methods")
    p_exp.add_argument("--jobs", type=int, default=1, help="worker processes")
    p_exp.add_argument("--output", required=True, help="results CSV to write")
    p_exp.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("ICA_TOPSIS_LOG_LEVEL", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (IcaTopsisError, ValueError, OSError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
