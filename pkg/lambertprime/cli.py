#!/usr/bin/env python3
"""
Command-line interface.

Results go to stdout as tsv, csv or json-lines; structured logs go to stderr.
Exit codes: 0 on success, 2 for domain and input errors, 3 when a capacity
or search budget is exceeded.
"""
import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import pandas as pd
from pydantic import ValidationError

from . import __version__
from .base import import_estimator
from .config import DEFAULT_PRECISION, OUTPUT_FORMATS
from .errors import RESOURCE_ERRORS, USER_ERRORS, BudgetExhausted, DomainError
from .estimators.base import ProgressInfo
from .estimators.gram_inverse_pn import gram_inverse
from .fitting import SliceMetric, evaluate_gaps, fit_model, tune_slices
from .geoprime import AnnealConfig, GeoConstant, geo_search_chains, geo_streak
from .plouffe_model import (CorrectionForm, CorrectionModel, LogCurve, corrected_pn, f_poly_pn,
                            invert_pi, resolve_model, shipped_model, write_model)
from .precision_core import check_precision, format_fixed
from .prime_oracle import build_sample_table, load_table, nth_prime, sieve_pi, write_table
from .reference import F_TABLE, PI_POWERS_OF_TEN, VALUE_TABLE_ROWS
from .scan_estimators import scan_all_estimators
from .structured_output import emit_lines, emit_result, emit_rows, get_logger, set_log_level

logger = get_logger(__name__)

TABLE_PREFIX = '@table:'


def log_progress(info: ProgressInfo) -> None:
    logger.info(f"Progress: {info['percentage']:.1f}%", **info)


def _pi_argument(value: Optional[str], n: int) -> Optional[int]:
    """Exact integer, or @table:<path> to look pi(n) up in a table file."""
    if value is None:
        return None
    if value.startswith(TABLE_PREFIX):
        return load_table(value[len(TABLE_PREFIX):]).pi_of(n)
    try:
        return int(value)
    except ValueError:
        raise DomainError(f"--pi expects an integer or {TABLE_PREFIX}<path>, got '{value}'") from None


def _key_values(pairs: Sequence[str]) -> dict:
    params = {}
    for pair in pairs:
        key, sep, value = pair.partition('=')
        if not sep:
            raise DomainError(f"--param expects KEY=VALUE, got '{pair}'")
        params[key] = value
    return params


def _emit_tables(frames: Sequence[pd.DataFrame], fmt: str) -> None:
    for i, frame in enumerate(frames):
        if i and fmt != 'json-lines':
            emit_lines([''])
        emit_rows(frame, fmt)


def _geo_output(result: GeoConstant, fmt: str) -> None:
    if fmt == 'json-lines':
        emit_result('geo', result.model_dump(mode='json'))
    else:
        emit_lines([result.summary_line()])


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_estimate(args) -> int:
    Model = import_estimator(args.est)
    params_fields = _key_values(args.param)
    if args.rest:
        params_fields['subtract_rest'] = 'true'
    if args.model:
        params_fields['model'] = args.model
    params = Model.params_class()(**params_fields)
    model = resolve_model(args.model) if args.model else None
    estimate = Model.estimate(args.n, params, pi_n=_pi_argument(args.pi, args.n), model=model,
                              prec=args.precision)
    emit_rows(pd.DataFrame([{
        'n': str(args.n),
        'estimator': str(estimate['estimator']),
        'value': format_fixed(estimate['value'], args.precision),
        'flags': ','.join(estimate['flags']),
    }]), args.format)
    return 0


def cmd_invert(args) -> int:
    model = resolve_model(args.model) if args.model else None
    value = invert_pi(args.k, model, args.precision)
    emit_rows(pd.DataFrame([{
        'k': str(args.k),
        'invert_pi': format_fixed(value, args.precision),
        'gram_inverse': format_fixed(gram_inverse(args.k, prec=args.precision), args.precision),
    }]), args.format)
    return 0


def _slice_frame(reports) -> pd.DataFrame:
    return pd.DataFrame(reports, columns=['slice_index', 'k', 'rows', 'mean_gap_before',
                                          'mean_gap_after', 'flagged'])


def cmd_fit(args) -> int:
    table = load_table(args.table)
    model, report = fit_model(
        table, name=args.name, s=args.s, slice_width=args.slice_width, k_bound=args.k_bound,
        metric=args.metric, form=CorrectionForm(args.form), prec=args.precision,
        n_jobs=args.threads, progress_callback=log_progress,
    )
    write_model(model, args.out)
    logger.info(f"Model written to {args.out}")
    fit = report['fit']
    summary = pd.DataFrame([{
        'a': format_fixed(fit['a'], args.precision),
        'b': format_fixed(fit['b'], args.precision),
        'r2': format_fixed(fit['r2'], args.precision),
        'points': fit['point_count'],
        'mean_gap_base': format_fixed(report['gaps_base']['mean_gap'], 12),
        'mean_gap_curve': format_fixed(report['gaps_curve']['mean_gap'], 12),
        'mean_gap_tuned': format_fixed(report['gaps_tuned']['mean_gap'], 12),
        'improvement': report['improvement'],
    }])
    _emit_tables([summary, _slice_frame(report['slices'])], args.format)
    return 0


def cmd_tune(args) -> int:
    table = load_table(args.table)
    curve = LogCurve(a=args.a, b=args.b)
    form = CorrectionForm(args.form)
    slices, reports = tune_slices(
        table, curve, args.s, args.slice_width, args.k_bound, metric=args.metric, form=form,
        prec=args.precision, n_jobs=args.threads, progress_callback=log_progress,
    )
    if args.out:
        lo = max(table.rows[0].n, 1)
        model = CorrectionModel(name=args.name, curve=curve, slices=slices,
                                valid_range=(lo, slices.range_max), form=form)
        write_model(model, args.out)
        logger.info(f"Model written to {args.out}")
    emit_rows(_slice_frame(reports), args.format)
    return 0


def cmd_sieve(args) -> int:
    if args.sieve_command == 'pi':
        emit_rows(pd.DataFrame([{'n': str(args.n), 'pi_n': str(sieve_pi(args.n))}]), args.format)
    elif args.sieve_command == 'nth':
        emit_rows(pd.DataFrame([{'k': str(args.k), 'p_k': str(nth_prime(args.k))}]), args.format)
    else:
        table = build_sample_table(args.start, args.step, args.count, with_primes=args.primes)
        if args.out is None:
            emit_rows(table.to_frame().fillna('-'), args.format)
        else:
            write_table(table, args.out)
            logger.info(f"Table with {len(table)} rows written to {args.out}")
    return 0


def cmd_compare(args) -> int:
    table = load_table(args.table)
    model = resolve_model(args.model) if args.model else None
    rows = []
    for name in args.est.split(','):
        stats = evaluate_gaps(name.strip(), table, model=model, prec=args.precision,
                              n_jobs=args.threads, progress_callback=log_progress)
        rows.append({
            'estimator': name.strip(),
            'count': stats['count'],
            'min_gap': format_fixed(stats['min_gap'], args.precision),
            'max_gap': format_fixed(stats['max_gap'], args.precision),
            'mean_gap': format_fixed(stats['mean_gap'], args.precision),
        })
    emit_rows(pd.DataFrame(rows), args.format)
    return 0


def cmd_geo(args) -> int:
    if args.geo_command == 'verify':
        result = geo_streak(args.c, args.start, args.max)
    else:
        cfg = AnnealConfig(
            initial_temperature=args.temperature,
            cooling_rate=args.cooling,
            steps_per_digit=args.steps,
            rng_seed=args.seed,
        )
        try:
            result = geo_search_chains(args.lo, args.hi, args.target, cfg, chains=args.chains,
                                       start_n=args.start, n_jobs=args.threads)
        except BudgetExhausted as e:
            if e.best is not None:
                _geo_output(e.best, args.format)
            raise
    _geo_output(result, args.format)
    return 0


def cmd_estimators(args) -> int:
    rows = [
        {
            'name': info['name'],
            'label': info['label'],
            'truth': info['truth'],
            'needs_pi': info['needs_pi'],
            'params_schema': json.dumps(info['params_schema'], sort_keys=True),
        }
        for info in scan_all_estimators()
    ]
    emit_rows(pd.DataFrame(rows), args.format)
    return 0


def _parse_rows(text: str) -> list[int]:
    rows = []
    for part in text.split(','):
        first, _, last = part.partition('-')
        rows.extend(range(int(first), int(last or first) + 1))
    return rows


def cmd_table(args) -> int:
    prec = args.precision
    if args.table_command == 'f':
        rows = []
        for entry in F_TABLE:
            n = 10**entry.exponent
            value = f_poly_pn(n, PI_POWERS_OF_TEN[entry.exponent], prec)
            rows.append({
                'n': f"10^{entry.exponent}",
                'f_value': format_fixed(value, prec),
                'published': entry.f_value,
                'p_n': str(entry.p_n),
                'difference': format_fixed(value - entry.p_n, 12),
            })
    else:
        model = resolve_model(args.model) if args.model else shipped_model('g_large')
        by_row = {row.row: row for row in VALUE_TABLE_ROWS}
        rows = []
        for index in _parse_rows(args.rows):
            if index not in by_row:
                raise DomainError(f"value table row {index} is not available (rows 1..{len(VALUE_TABLE_ROWS)})")
            row = by_row[index]
            value = corrected_pn(row.n, row.pi_n, model, prec)
            rows.append({
                'row': index,
                'n': str(row.n),
                'pi_n': str(row.pi_n),
                'g_value': format_fixed(value, prec),
                'published': str(row.g_value),
                'p_n': str(row.p_n),
                'gap': format_fixed(abs(value - row.p_n), 12),
            })
    emit_rows(pd.DataFrame(rows), args.format)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--format', choices=OUTPUT_FORMATS, default='tsv', help='Output format')
    common.add_argument('--precision', type=int, default=DEFAULT_PRECISION,
                        help='Significant decimal digits of printed values')
    common.add_argument('--threads', type=int, default=os.cpu_count() or 1,
                        help='Worker processes for tuning, gap evaluation and search chains')
    common.add_argument('--log-level', default='INFO', help='DEBUG, INFO, WARNING, ERROR or CRITICAL')

    parser = argparse.ArgumentParser(prog='lambertprime', description=__doc__.strip().splitlines()[0])
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    commands = parser.add_subparsers(dest='command', required=True)

    estimate = commands.add_parser('estimate', parents=[common], help='Evaluate one estimator at n')
    estimate.add_argument('n', type=int)
    estimate.add_argument('--est', required=True, help='Estimator id, see the estimators command')
    estimate.add_argument('--pi', help=f'pi(n) as an integer or {TABLE_PREFIX}<path>')
    estimate.add_argument('--model', help='Correction model name or file for plouffe_g')
    estimate.add_argument('--param', action='append', default=[], metavar='KEY=VALUE',
                          help='Estimator parameter, repeatable')
    estimate.add_argument('--rest', action='store_true', help='base_w_pn: subtract n / W0(n)')
    estimate.set_defaults(handler=cmd_estimate)

    invert = commands.add_parser('invert', parents=[common], help='pi(k) by model inversion next to R^-1(k)')
    invert.add_argument('k', type=int)
    invert.add_argument('--model', help='Correction model name or file, f_inversion by default')
    invert.set_defaults(handler=cmd_invert)

    def tuning_arguments(sub):
        sub.add_argument('table', type=Path, help='Table file with pi(n) and p(n)')
        sub.add_argument('--s', default='0.9999999999', help='Slice base, 0 < s < 1')
        sub.add_argument('--slice-width', type=int, default=10**7)
        sub.add_argument('--k-bound', type=int, default=1000)
        sub.add_argument('--metric', choices=[m.value for m in SliceMetric], default='mean')
        sub.add_argument('--form', choices=[f.value for f in CorrectionForm], default='difference')
        sub.add_argument('--name', default='fitted', help='Model name recorded in the file')

    fit = commands.add_parser('fit', parents=[common], help='Fit a correction model to a table')
    tuning_arguments(fit)
    fit.add_argument('--out', type=Path, required=True, help='Model file to write')
    fit.set_defaults(handler=cmd_fit)

    tune = commands.add_parser('tune', parents=[common], help='Tune slice exponents for a given curve')
    tuning_arguments(tune)
    tune.add_argument('--a', required=True, help='Curve intercept')
    tune.add_argument('--b', required=True, help='Curve slope in ln n')
    tune.add_argument('--out', type=Path, help='Model file to write')
    tune.set_defaults(handler=cmd_tune)

    sieve = commands.add_parser('sieve', help='Exact values by segmented sieve')
    sieve_commands = sieve.add_subparsers(dest='sieve_command', required=True)
    sieve_pi_parser = sieve_commands.add_parser('pi', parents=[common], help='pi(n)')
    sieve_pi_parser.add_argument('n', type=int)
    sieve_nth = sieve_commands.add_parser('nth', parents=[common], help='The k-th prime')
    sieve_nth.add_argument('k', type=int)
    sieve_table = sieve_commands.add_parser('table', parents=[common], help='Write a sampled table file')
    sieve_table.add_argument('--start', type=int, required=True)
    sieve_table.add_argument('--step', type=int, required=True)
    sieve_table.add_argument('--count', type=int, required=True)
    sieve_table.add_argument('--primes', action='store_true', help='Also record p(n)')
    sieve_table.add_argument('--out', type=Path, help='Table file to write, stdout when omitted')
    sieve.set_defaults(handler=cmd_sieve)

    compare = commands.add_parser('compare', parents=[common], help='Gap statistics of estimators on a table')
    compare.add_argument('table', type=Path)
    compare.add_argument('--est', required=True, help='Comma-separated estimator ids')
    compare.add_argument('--model', help='Correction model for plouffe_g')
    compare.set_defaults(handler=cmd_compare)

    geo = commands.add_parser('geo', help='Constants with prime nearest-integer powers')
    geo_commands = geo.add_subparsers(dest='geo_command', required=True)
    verify = geo_commands.add_parser('verify', parents=[common], help='Prime streak of a constant')
    verify.add_argument('c', help='Constant as a decimal string')
    verify.add_argument('--max', type=int, default=100, help='Last exponent tested')
    verify.add_argument('--start', type=int, default=1, help='First exponent')
    search = geo_commands.add_parser('search', parents=[common], help='Search an interval for a constant')
    search.add_argument('lo')
    search.add_argument('hi')
    search.add_argument('--target', type=int, required=True, help='Prime terms wanted')
    search.add_argument('--seed', type=int, default=0)
    search.add_argument('--start', type=int, default=1, help='First exponent')
    search.add_argument('--temperature', type=float, default=2.0)
    search.add_argument('--cooling', type=float, default=0.95)
    search.add_argument('--steps', type=int, default=2000, help='Steps per target term')
    search.add_argument('--chains', type=int, default=1, help='Independent chains, seeds seed..seed+chains-1')
    geo.set_defaults(handler=cmd_geo)

    listing = commands.add_parser('estimators', parents=[common], help='List estimators and parameter schemas')
    listing.set_defaults(handler=cmd_estimators)

    table = commands.add_parser('table', help='Reproduce the published F and G tables')
    table_commands = table.add_subparsers(dest='table_command', required=True)
    table_commands.add_parser('f', parents=[common], help='F(n) against p(n) for n = 10^16..10^24')
    table_g = table_commands.add_parser('g', parents=[common], help='G(n) for value-table rows, n = row * 10^14')
    table_g.add_argument('--rows', default='1-18', help='Rows such as 1-5,10')
    table_g.add_argument('--model', help='Correction model name or file, g_large by default')
    table.set_defaults(handler=cmd_table)

    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run one command and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        set_log_level(args.log_level)
        check_precision(args.precision)
        return args.handler(args)
    except RESOURCE_ERRORS as e:
        logger.error(f"Error: {e}", exc_info=True)
        return 3
    except (*USER_ERRORS, ValidationError, ValueError, TypeError, OSError) as e:
        logger.error(f"Error: {e}", exc_info=True)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
