"""
Command-line interface: fit, scores, simulate, diagnose.

Exit codes: 0 success, 2 invalid arguments, 3 data or domain error,
4 fit did not converge (the model is still written), 5 numerical failure.
Messages go to standard error; results only to the named files.
"""

import argparse
import contextlib
import json
import sys
import time
from typing import List, Optional, Sequence, Union

import structlog
from pydantic import ValidationError
from threadpoolctl import threadpool_limits

from randfa.core.config import settings
from randfa.core.exceptions import FactorAnalysisError, InvalidInputError
from randfa.core.logging import log_error, log_performance, setup_logging
from randfa.models.fa_config import FaConfig, UpdateRule
from randfa.models.scores import ScoreKind
from randfa.repositories.csv_repository import csv_repository, load_csv, write_matrix_csv, write_trace_csv
from randfa.repositories.model_repository import load_model, load_sim_spec, save_model
from randfa.services.diagnostics import diagnose
from randfa.services.estimator import fit
from randfa.services.plotting import emit_convergence_plots
from randfa.services.scores import bartlett_scores, thomson_scores
from randfa.services.simulation import simulate_with_truth

logger = structlog.get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NOT_CONVERGED = 4
EXIT_INTERNAL = 5


def _message(text: str) -> None:
    print(f"randfa: {text}", file=sys.stderr)


def _psi_init(value: str) -> Union[float, List[float]]:
    """A scalar fraction of diag(S_xx) or a comma-separated list of values"""
    try:
        if "," in value:
            return [float(part) for part in value.split(",")]
        return float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid psi2 initialization {value!r}")


def _add_table_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--header", action=argparse.BooleanOptionalAction, default=False,
                        help="first CSV row holds column names")
    parser.add_argument("--delimiter", default=",", help="CSV field delimiter")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="randfa",
        description="Random-factor analysis by SVD fixed-point iteration",
    )
    parser.add_argument("--log-level", default=None, help="override FA_LOG_LEVEL")
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.APP_VERSION}")
    commands = parser.add_subparsers(dest="command", required=True)

    fit_cmd = commands.add_parser("fit", help="fit a k-factor model")
    fit_cmd.add_argument("--input", required=True)
    fit_cmd.add_argument("--k", type=int, required=True)
    fit_cmd.add_argument("--rule", choices=[rule.value for rule in UpdateRule], default=UpdateRule.SUBTRACT.value)
    fit_cmd.add_argument("--psi-init", type=_psi_init, default=None,
                         help="fraction of each sample variance, or comma-separated values")
    fit_cmd.add_argument("--max-iter", type=int, default=settings.DEFAULT_MAX_ITER)
    fit_cmd.add_argument("--tol-psi", type=float, default=settings.DEFAULT_TOL_PSI)
    fit_cmd.add_argument("--tol-trace", type=float, default=settings.DEFAULT_TOL_TRACE)
    fit_cmd.add_argument("--standardize", action=argparse.BooleanOptionalAction, default=True,
                         help="scale columns to unit sample variance (default on)")
    fit_cmd.add_argument("--output", required=True)
    fit_cmd.add_argument("--trace-out")
    fit_cmd.add_argument("--plot-out", help="prefix for the convergence figures")
    _add_table_options(fit_cmd)
    fit_cmd.set_defaults(handler=run_fit)

    scores_cmd = commands.add_parser("scores", help="factor scores for data under a fitted model")
    scores_cmd.add_argument("--model", required=True)
    scores_cmd.add_argument("--input", required=True)
    scores_cmd.add_argument("--kind", choices=[kind.value for kind in ScoreKind], default=ScoreKind.BARTLETT.value)
    scores_cmd.add_argument("--output", required=True)
    scores_cmd.add_argument("--residuals-out")
    _add_table_options(scores_cmd)
    scores_cmd.set_defaults(handler=run_scores)

    sim_cmd = commands.add_parser("simulate", help="draw data from a simulation spec")
    sim_cmd.add_argument("--spec", required=True)
    sim_cmd.add_argument("--output", required=True)
    sim_cmd.add_argument("--factors-out", help="also write the true factors")
    _add_table_options(sim_cmd)
    sim_cmd.set_defaults(handler=run_simulate)

    diag_cmd = commands.add_parser("diagnose", help="check a fitted model against data")
    diag_cmd.add_argument("--model", required=True)
    diag_cmd.add_argument("--input", required=True)
    diag_cmd.add_argument("--report-out", help="also write the report as JSON")
    _add_table_options(diag_cmd)
    diag_cmd.set_defaults(handler=run_diagnose)

    return parser


def run_fit(args: argparse.Namespace) -> int:
    data = load_csv(args.input, has_header=args.header, delimiter=args.delimiter, standardize=args.standardize)
    config = FaConfig(
        k=args.k,
        rule=args.rule,
        psi2_init=args.psi_init,
        max_iter=args.max_iter,
        tol_psi=args.tol_psi,
        tol_trace=args.tol_trace,
    )
    model = fit(data, config)
    save_model(model, args.output)
    if args.trace_out:
        write_trace_csv(args.trace_out, model.trace)
    if args.plot_out:
        emit_convergence_plots(model.trace, args.plot_out, k=model.k, p=model.p)

    for note in model.warnings:
        _message(f"warning: {note}")
    if not model.converged:
        _message(f"fit did not converge after {len(model.trace)} iterations; model written to {args.output}")
        return EXIT_NOT_CONVERGED
    _message(f"converged in {len(model.trace)} iterations")
    return EXIT_OK


def _load_with_model_preprocessing(args: argparse.Namespace, model):
    return load_csv(
        args.input,
        has_header=args.header,
        delimiter=args.delimiter,
        column_means=model.column_means,
        column_scales=model.column_scales,
    )


def run_scores(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    data = _load_with_model_preprocessing(args, model)
    bartlett = bartlett_scores(model, data)
    result = bartlett if ScoreKind(args.kind) is ScoreKind.BARTLETT else thomson_scores(model, data)
    write_matrix_csv(args.output, result.scores, [f"f{j + 1}" for j in range(model.k)], args.delimiter)
    if args.residuals_out:
        # residuals are always those of the Bartlett fit
        write_matrix_csv(args.residuals_out, bartlett.residuals_z, list(model.column_names), args.delimiter)
    return EXIT_OK


def run_simulate(args: argparse.Namespace) -> int:
    spec = load_sim_spec(args.spec)
    result = simulate_with_truth(spec)
    names = list(result.data.column_names) if args.header else None
    write_matrix_csv(args.output, result.data.values, names, args.delimiter)
    if args.factors_out:
        write_matrix_csv(args.factors_out, result.factors, [f"f{j + 1}" for j in range(spec.k)], args.delimiter)
    return EXIT_OK


def run_diagnose(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    data = _load_with_model_preprocessing(args, model)
    report = diagnose(model, data)
    for line in report.lines():
        print(line, file=sys.stderr)
    if args.report_out:
        csv_repository.write_text(args.report_out, json.dumps(report.to_dict(), indent=2) + "\n")
    return EXIT_OK


def _thread_limits():
    if settings.SVD_THREADS:
        return threadpool_limits(limits=settings.SVD_THREADS)
    return contextlib.nullcontext()


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    setup_logging(args.log_level)
    logger.debug("Command started", command=args.command)
    start = time.perf_counter()
    try:
        with _thread_limits():
            code = args.handler(args)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"])
        error = InvalidInputError(f"invalid {location}: {first['msg']}")
        log_error(error, {"command": args.command})
        _message(f"error: {error}")
        return error.exit_code
    except FactorAnalysisError as e:
        log_error(e, {"command": args.command})
        _message(f"error: {e}")
        return e.exit_code
    except Exception as e:
        log_error(e, {"command": args.command})
        _message(f"internal error: {e}")
        return EXIT_INTERNAL

    log_performance(args.command, time.perf_counter() - start, exit_code=code)
    return code


if __name__ == "__main__":
    sys.exit(main())
