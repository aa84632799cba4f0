"""Command-line interface: ``cegof {test,compare,simulate,reproduce,entropy}``."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .entropy import EntropyConfig, true_ce
from .exceptions import CegofError, ConfigError, InputError
from .gof import FamilyFailure, bootstrap_p_value, compare_families
from .ranks import to_pseudo_obs
from .simulation import (
    ExperimentGrid,
    gaussian_paper_grid,
    gumbel_paper_grid,
    run_experiment,
    summarize,
    write_results_csv,
    write_summary_csv,
)
from .special import RngStream

EXIT_OK, EXIT_INPUT, EXIT_ESTIMATION, EXIT_IO = 0, 2, 3, 4


class _IOFailure(Exception):
    pass


def read_numeric_csv(path) -> np.ndarray:
    """Parse a comma-separated numeric file; a non-numeric first row is a header."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            raw = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    raw = [(i + 1, row) for i, row in enumerate(raw) if row and any(c.strip() for c in row)]
    if not raw:
        raise InputError(f"{path} is empty")
    try:
        [float(c) for c in raw[0][1]]
    except ValueError:
        raw = raw[1:]
    if not raw:
        raise InputError(f"{path} has a header but no data")
    width = len(raw[0][1])
    data = []
    for lineno, row in raw:
        if len(row) != width:
            raise InputError(f"line {lineno}: expected {width} fields, got {len(row)}")
        try:
            data.append([float(c) for c in row])
        except ValueError as exc:
            raise InputError(f"line {lineno}: {exc}") from exc
    arr = np.array(data)
    if not np.all(np.isfinite(arr)):
        line = raw[int(np.argwhere(~np.isfinite(arr))[0, 0])][0]
        raise InputError(f"line {line}: non-finite value")
    return arr


def parse_grid(text: str) -> tuple:
    """``"0.1,0.5,0.9"`` or ``"start:stop:step"`` (stop inclusive)."""
    try:
        if ":" in text:
            start, stop, step = (float(p) for p in text.split(":"))
            if step <= 0:
                raise ValueError("step must be positive")
            count = int(round((stop - start) / step)) + 1
            return tuple(round(start + i * step, 12) for i in range(count))
        return tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}: {exc}") from exc


def _load_input(args, min_cols=2) -> np.ndarray:
    if not args.input:
        raise InputError("--input is required")
    x = read_numeric_csv(args.input)
    if x.shape[1] < min_cols:
        raise InputError(f"need at least {min_cols} columns, got {x.shape[1]}")
    return x


def _emit(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise _IOFailure(f"cannot write {out}: {exc.strerror or exc}") from exc


def _report_csv(dicts) -> str:
    cols = ["family", "t_stat", "hypothesis_ce", "true_ce", "fitted_param", "p_value", "error"]
    lines = [",".join(cols)]
    for d in dicts:
        fp = d.get("fitted_params", {}).get("params", {})
        param = fp.get("alpha", fp.get("sigma_rho", [[None, None]])[0][1]) if fp else None
        vals = [d.get("family"), d.get("t_stat"), d.get("hypothesis_ce"), d.get("true_ce"),
                param, d.get("p_value"), d.get("error", "")]
        lines.append(",".join("" if v is None else repr(v) if isinstance(v, float) else str(v)
                              for v in vals))
    return "\n".join(lines) + "\n"


def cmd_test(args) -> int:
    x = _load_input(args)
    report = bootstrap_p_value(x, args.family, EntropyConfig(args.k), b=args.bootstrap,
                               seed=args.seed, n_jobs=args.n_jobs)
    fmt = args.format or "json"
    body = (json.dumps(report.to_dict(), indent=2) + "\n" if fmt == "json"
            else _report_csv([report.to_dict()]))
    _emit(body, args.out)
    if report.p_value is None:
        line = f"{report.family}: T = {report.t_stat:.6f} (no bootstrap, no decision)"
    else:
        verdict = "REJECT" if report.p_value <= args.level else "FAIL TO REJECT"
        line = (f"{verdict} at {args.level:g}: {report.family} T = {report.t_stat:.6f}, "
                f"p = {report.p_value:.4f}")
    print(line)
    return EXIT_OK


def cmd_compare(args) -> int:
    x = _load_input(args)
    families = [f.strip() for f in args.family.split(",")] if args.family else ["gaussian", "gumbel"]
    ranked = compare_families(x, families, EntropyConfig(args.k), seed=args.seed)
    dicts = [{"family": r.family, "error": r.error} if isinstance(r, FamilyFailure)
             else r.to_dict() for r in ranked]
    fmt = args.format or "json"
    _emit(json.dumps(dicts, indent=2) + "\n" if fmt == "json" else _report_csv(dicts), args.out)
    return EXIT_OK


def _write_tables(rows, summary, results_path, summary_path, fmt, comment=None):
    try:
        if fmt == "json":
            Path(results_path).write_text(json.dumps(rows, indent=1) + "\n")
            Path(summary_path).write_text(json.dumps(summary, indent=1) + "\n")
        else:
            write_results_csv(rows, results_path, comment)
            write_summary_csv(summary, summary_path, comment)
    except OSError as exc:
        raise _IOFailure(f"cannot write results: {exc.strerror or exc}") from exc


def _summary_path(out: Path, fmt: str) -> Path:
    return out.with_name(out.stem + "_summary" + out.suffix) if out.suffix else \
        out.with_name(out.name + "_summary." + fmt)


def cmd_simulate(args) -> int:
    family = args.family or "gaussian"
    if family == "gaussian":
        values = parse_grid(args.rho_grid) if args.rho_grid else None
        grid = gaussian_paper_grid(args.replicates, args.seed, args.sample_size,
                                   args.margins or "standard-normal", values)
    else:
        values = parse_grid(args.alpha_grid) if args.alpha_grid else None
        grid = gumbel_paper_grid(args.margins or "standard-normal", args.replicates,
                                 args.seed, args.sample_size, values)
    fmt = args.format or "csv"
    rows = run_experiment(grid, EntropyConfig(args.k), n_jobs=args.n_jobs)
    out = Path(args.out or f"{family}_results.{fmt}")
    _write_tables(rows, summarize(rows), out, _summary_path(out, fmt), fmt,
                  comment=f"margins={grid.margins}")
    print(f"wrote {len(rows)} rows to {out}")
    return EXIT_OK


def cmd_reproduce(args) -> int:
    outdir = Path(args.out or "results")
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise _IOFailure(f"cannot create {outdir}: {exc.strerror or exc}") from exc
    cfg = EntropyConfig(args.k)
    fmt = args.format or "csv"
    rho = parse_grid(args.rho_grid) if args.rho_grid else None
    alpha = parse_grid(args.alpha_grid) if args.alpha_grid else None

    g1 = gaussian_paper_grid(args.replicates, args.seed, args.sample_size, param_values=rho)
    rows = run_experiment(g1, cfg, n_jobs=args.n_jobs)
    _write_tables(rows, summarize(rows), outdir / f"gaussian_results.{fmt}",
                  outdir / f"gaussian_summary.{fmt}", fmt, comment="margins=standard-normal")

    tables = {}
    for margins in ("standard-normal", "exponential"):
        g2 = gumbel_paper_grid(margins, args.replicates, args.seed, args.sample_size, alpha)
        tables[margins] = run_experiment(g2, cfg, n_jobs=args.n_jobs)
    normal, expo = tables["standard-normal"], tables["exponential"]
    same = [repr(a["t_stat"]) for a in normal] == [repr(b["t_stat"]) for b in expo]
    if not same:
        print("error: Gumbel t_stat columns differ between margin sets", file=sys.stderr)
        return EXIT_ESTIMATION
    _write_tables(normal, summarize(normal), outdir / f"gumbel_results.{fmt}",
                  outdir / f"gumbel_summary.{fmt}", fmt,
                  comment="margins=standard-normal,exponential (t_stat columns identical)")
    print(f"wrote 4 files to {outdir}")
    return EXIT_OK


def cmd_entropy(args) -> int:
    x = _load_input(args)
    value = true_ce(to_pseudo_obs(x, RngStream(args.seed, 0)), EntropyConfig(args.k))
    _emit(f"{value!r}\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cegof", description="Copula goodness-of-fit tests based on copula entropy.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--k", type=int, default=3, help="kNN neighbour count (default 3)")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--out", help="output file (directory for reproduce)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--n-jobs", type=int, default=1, dest="n_jobs")

    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (("test", "bootstrap test of one copula family"),
                           ("compare", "rank families by statistic"),
                           ("entropy", "nonparametric copula entropy of a sample")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--input", help="numeric CSV, one column per variable")
        if name != "entropy":
            p.add_argument("--family", default="gaussian" if name == "test" else None,
                           help="gaussian or gumbel (comma list for compare)")
        if name == "test":
            p.add_argument("--bootstrap", type=int, default=200)
            p.add_argument("--level", type=float, default=0.05)
    for name, helptext in (("simulate", "run one simulation grid"),
                           ("reproduce", "run both reference experiments")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--replicates", type=int, default=50)
        p.add_argument("--sample-size", type=int, default=300, dest="sample_size")
        p.add_argument("--rho-grid", dest="rho_grid", help="e.g. 0.1:0.9:0.1")
        p.add_argument("--alpha-grid", dest="alpha_grid", help="e.g. 2:10:1")
        if name == "simulate":
            p.add_argument("--family", choices=("gaussian", "gumbel"))
            p.add_argument("--margins", choices=("uniform", "standard-normal", "exponential"))
    return parser


COMMANDS = {"test": cmd_test, "compare": cmd_compare, "simulate": cmd_simulate,
            "reproduce": cmd_reproduce, "entropy": cmd_entropy}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (InputError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except _IOFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except CegofError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION


if __name__ == "__main__":
    sys.exit(main())
