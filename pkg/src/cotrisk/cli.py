"""Command line entry points.

Every command writes JSON (sorted keys) and/or CSV files into ``--out-dir``.
Options can also be set through environment variables named
``COTRISK_<COMMAND>_<OPTION>``, e.g. ``COTRISK_FIT_M=5``; explicit flags win.
Failures exit with status 2 after writing ``error.json``.
"""

import json
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from functools import partial, wraps
from pathlib import Path

import click
import numpy as np
import scipy

from . import __version__
from .data_io import FitArchive, input_digest, load_csv, log_returns, rolling_windows, write_csv
from .errors import CotriskError, InvalidArgument
from .extreme_tails import DEFAULT_SECOND_ORDER_RHO, evi_curves, pareto_qq_data, y_values
from .pipeline import fit_sample
from .risk_measures import risk_report
from .simulate import sample_elliptical, spec_for
from .smooth_quantile import XI_POLICIES, quantile_contour
from .volumes import elliptical_volume, gaussian_radial_quantile, volume_curve

EXIT_ERROR = 2


def _metadata(**extra):
    meta = {
        "package": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
        "command": ["cotrisk", *sys.argv[1:]],
    }
    meta.update(extra)
    return meta


def _write_json(out_dir, name, payload):
    path = Path(out_dir) / name
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1, default=_jsonable)
        fh.write("\n")
    return path


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _guarded(func):
    """Turn library errors into an ``error.json`` record and a nonzero exit."""

    @wraps(func)
    def wrapper(*args, **kwargs):
        out_dir = kwargs.get("out_dir") or "."
        try:
            Path(out_dir).mkdir(parents=True, exist_ok=True)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                return func(*args, **kwargs)
        except CotriskError as exc:
            record = exc.to_record()
        except OSError as exc:
            record = {"code": "io_cli.io_error", "message": str(exc), "details": {}}
        try:
            _write_json(out_dir, "error.json", record)
        except OSError:
            pass
        click.echo(json.dumps(record, sort_keys=True, default=_jsonable), err=True)
        sys.exit(EXIT_ERROR)

    return wrapper


def _workers(threads, sequential):
    return 1 if sequential else max(1, threads)


out_dir_opt = click.option("--out-dir", default=".", show_default=True,
                           type=click.Path(file_okay=False), help="Directory for outputs.")
seed_opt = click.option("--seed", default=0, show_default=True, type=int)
threads_opt = click.option("--threads", default=1, show_default=True, type=int,
                           help="Worker processes; results are merged in a fixed order.")
sequential_opt = click.option("--sequential", is_flag=True, help="Run everything in one process.")
fit_opt = click.option("--fit", "fit_path", default=None, type=click.Path(dir_okay=False),
                       help="Fit archive to read (default: <out-dir>/fit.json).")


def _sample_options(f):
    for opt in reversed([
        click.option("--input", "input_path", default=None, type=click.Path(dir_okay=False),
                     help="CSV of observations; overrides simulation."),
        click.option("--date-column", default=None),
        click.option("--log-returns", is_flag=True, help="Convert prices to log-returns."),
        click.option("--n", default=1000, show_default=True, type=int),
        click.option("--d", default=2, show_default=True, type=int),
        click.option("--dist", default="gaussian", show_default=True,
                     help="gaussian, t<nu> (e.g. t3) or hyperbolic<gamma>."),
    ]):
        f = opt(f)
    return f


def _fit_options(f):
    for opt in reversed([
        click.option("--m", default=10, show_default=True, type=int,
                     help="Number of averaged random grids."),
        click.option("--xi-log", default=None, type=float, help="Explicit log(xi)."),
        click.option("--xi-policy", default="hard-max", show_default=True,
                     type=click.Choice(XI_POLICIES)),
    ]):
        f = opt(f)
    return f


def _load_table(input_path, date_column, use_log_returns):
    table = load_csv(input_path, date_column)
    return log_returns(table) if use_log_returns else table


def _obtain_sample(input_path, date_column, use_log_returns, n, d, dist, seed):
    if input_path:
        table = _load_table(input_path, date_column, use_log_returns)
        return table.values, {"input": str(input_path), "columns": list(table.columns)}
    spec = spec_for(dist, d)
    return sample_elliptical(n, spec, seed), {"dist": dist}


def _load_fit(fit_path, out_dir):
    return FitArchive.load(fit_path or Path(out_dir) / "fit.json")


@click.group(context_settings={"auto_envvar_prefix": "COTRISK",
                               "help_option_names": ["-h", "--help"]})
@click.version_option(__version__)
def main():
    """Center-outward quantiles, risk measures, volumes and tail indices."""


@main.command()
@click.option("--n", default=1000, show_default=True, type=int)
@click.option("--d", default=2, show_default=True, type=int)
@click.option("--dist", default="gaussian", show_default=True)
@seed_opt
@out_dir_opt
@_guarded
def simulate(n, d, dist, seed, out_dir):
    """Draw a benchmark sample and write samples.csv."""
    x = sample_elliptical(n, spec_for(dist, d), seed)
    write_csv(Path(out_dir) / "samples.csv", [f"x{i + 1}" for i in range(d)], x)
    _write_json(out_dir, "samples.json",
                {"metadata": _metadata(seed=seed, dist=dist, n=n, d=d),
                 "digest": input_digest(x)})


@main.command()
@_sample_options
@_fit_options
@seed_opt
@threads_opt
@sequential_opt
@out_dir_opt
@_guarded
def fit(input_path, date_column, log_returns, n, d, dist, m, xi_log, xi_policy, seed,
        threads, sequential, out_dir):
    """Fit the smoothed quantile map and write fit.json."""
    x, source = _obtain_sample(input_path, date_column, log_returns, n, d, dist, seed)
    result = fit_sample(x, m=m, seed=seed, xi_log=xi_log, xi_policy=xi_policy,
                        workers=_workers(threads, sequential))
    prov = _metadata(seed=seed, xi_policy=xi_policy if xi_log is None else "explicit",
                     m=m, input_digest=input_digest(result.x), **source)
    prov["delta"] = result.delta if np.isfinite(result.delta) else None
    FitArchive(result, prov).save(Path(out_dir) / "fit.json")


@main.command()
@fit_opt
@click.option("--p", default=0.05, show_default=True, type=float, help="Tail probability.")
@out_dir_opt
@_guarded
def risk(fit_path, p, out_dir):
    """Global, tail and trimmed maximal-correlation risk; writes risk.json."""
    archive = _load_fit(fit_path, out_dir)
    report = risk_report(archive.fit, p)
    _write_json(out_dir, "risk.json", {
        "report": report.to_dict(),
        "metadata": _metadata(xi_log=archive.fit.xi_log, m=archive.fit.m,
                              fit=archive.provenance.get("input_digest")),
    })


@main.command()
@fit_opt
@click.option("--p", "orders", multiple=True, type=float, default=(0.2, 0.5, 0.8),
              show_default=True, help="Contour orders; repeat for several.")
@click.option("--points", default=256, show_default=True, type=int)
@out_dir_opt
@_guarded
def contours(fit_path, orders, points, out_dir):
    """Smoothed quantile contours as a long CSV (order, index, coordinates)."""
    f = _load_fit(fit_path, out_dir).fit
    rows = []
    for p in orders:
        for i, q in enumerate(quantile_contour(f, p, points)):
            rows.append([p, i, *q])
    write_csv(Path(out_dir) / "contours.csv", ["p", "index", *[f"x{i + 1}" for i in range(f.d)]],
              rows)


@main.command()
@fit_opt
@click.option("--p", "orders", multiple=True, type=float,
              help="Orders; default 0.02, 0.04, ..., 0.98.")
@click.option("--xi-log", default=None, type=float,
              help="log(xi) for the Jacobian; default (log n)^2 when the fit is a hard max.")
@out_dir_opt
@_guarded
def volumes(fit_path, orders, xi_log, out_dir):
    """Quantile-region volumes with Gaussian reference values."""
    f = _load_fit(fit_path, out_dir).fit
    p = np.sort(np.array(orders, dtype=float)) if orders else np.arange(1, 50) / 50.0
    curve = volume_curve(f, p, xi_log=xi_log)
    ref = elliptical_volume(p, f.d, 1.0, gaussian_radial_quantile(f.d))
    ref = np.atleast_1d(ref)
    se = curve.std_errors if curve.std_errors is not None else [""] * p.size
    rows = [[a, b, e, c] for a, b, e, c in zip(p, curve.volumes, se, ref)]
    write_csv(Path(out_dir) / "volumes.csv", ["p", "volume", "std_error", "gaussian_reference"],
              rows)
    diag = {k: v for k, v in curve.diagnostics.items() if k != "history"}
    _write_json(out_dir, "volumes.json", {"method": curve.method, "diagnostics": diag,
                                          "metadata": _metadata()})


def _evi_options(f):
    for opt in reversed([
        click.option("--k-max", default=200, show_default=True, type=int),
        click.option("--tau", default=0.0, show_default=True, type=float,
                     help="Ridge penalty; 0 gives least squares."),
        click.option("--rho2", default=DEFAULT_SECOND_ORDER_RHO, show_default=True, type=float,
                     help="Second-order parameter (negative)."),
    ]):
        f = opt(f)
    return f


@main.command()
@fit_opt
@_evi_options
@click.option("--smoothed", is_flag=True, help="Use scores of the smoothed map.")
@out_dir_opt
@_guarded
def evi(fit_path, k_max, tau, rho2, smoothed, out_dir):
    """Hill, least-squares and ridge tail-index curves; writes evi.csv and evi.json."""
    f = _load_fit(fit_path, out_dir).fit
    est = evi_curves(y_values(f, smoothed), k_max, tau, rho2)
    write_csv(Path(out_dir) / "evi.csv", ["k", "hill", "ls", "ridge"], est.rows())
    _write_json(out_dir, "evi.json", {
        "ks": est.ks, "hill": est.hill, "ls": est.ls, "ridge": est.ridge,
        "tau": est.tau, "second_order_rho": est.second_order_rho,
        "metadata": _metadata(**est.meta, second_order_rho_is_default=rho2 == DEFAULT_SECOND_ORDER_RHO),
    })


@main.command()
@fit_opt
@click.option("--smoothed", is_flag=True, help="Use scores of the smoothed map.")
@out_dir_opt
@_guarded
def qq(fit_path, smoothed, out_dir):
    """Pareto QQ points of the transport scores; writes pareto_qq.csv."""
    y = y_values(_load_fit(fit_path, out_dir).fit, smoothed)
    q, logy = pareto_qq_data(y)
    write_csv(Path(out_dir) / "pareto_qq.csv", ["j", "exp_quantile", "log_y"],
              [[j + 1, a, b] for j, (a, b) in enumerate(zip(q, logy))])
    _write_json(out_dir, "pareto_qq.json", {"dropped": y.dropped, "metadata": _metadata()})


def _window_report(label, sample, m, seed, xi_log, xi_policy, p, k_max, tau, rho2):
    row = {"label": label, "n": sample.n, "error": ""}
    try:
        f = fit_sample(sample.rows, m=m, seed=seed, xi_log=xi_log, xi_policy=xi_policy)
        rep = risk_report(f, p)
        row.update(rho=rep.rho, rho_tail=rep.rho_tail, rho_trimmed=rep.rho_trimmed,
                   n_tail=rep.n_tail, tail_share=rep.tail_share, delta=f.delta)
        y = y_values(f)
        k = min(k_max, y.n - 1)
        est = evi_curves(y, k, tau, rho2)
        row.update(k=k, hill=float(est.hill[-1]), ridge=float(est.ridge[-1]), dropped=y.dropped)
    except CotriskError as exc:
        row["error"] = exc.code
    return row


def _window_report_args(label, sample, args):
    return _window_report(label, sample, *args)


ROLLING_FIELDS = ["label", "n", "rho", "rho_tail", "rho_trimmed", "n_tail", "tail_share",
                  "delta", "k", "hill", "ridge", "dropped", "error"]


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(dir_okay=False))
@click.option("--date-column", default=None)
@click.option("--log-returns", is_flag=True, help="Convert prices to log-returns first.")
@click.option("--window-months", default=36, show_default=True, type=int)
@click.option("--step-months", default=1, show_default=True, type=int)
@_fit_options
@click.option("--p", default=0.05, show_default=True, type=float)
@_evi_options
@seed_opt
@threads_opt
@sequential_opt
@out_dir_opt
@_guarded
def rolling(input_path, date_column, log_returns, window_months, step_months, m, xi_log,
            xi_policy, p, k_max, tau, rho2, seed, threads, sequential, out_dir):
    """Risk and tail-index report for each trailing calendar window."""
    table = _load_table(input_path, date_column, log_returns)
    windows = rolling_windows(table, window_months, step_months)
    if not windows:
        raise InvalidArgument("no complete window in the data", module="io_cli")
    args = (m, seed, xi_log, xi_policy, p, k_max, tau, rho2)
    workers = _workers(threads, sequential)
    if workers == 1:
        rows = [_window_report(lab, s, *args) for lab, s in windows]
    else:
        labels, samples = zip(*windows)
        # separate processes: the assignment solver does not release the GIL
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(partial(_window_report_args, args=args), labels, samples))
    write_csv(Path(out_dir) / "rolling.csv", ROLLING_FIELDS,
              [[r.get(k, "") for k in ROLLING_FIELDS] for r in rows])
    _write_json(out_dir, "rolling.json", {
        "windows": rows,
        "metadata": _metadata(seed=seed, m=m, xi_policy=xi_policy, xi_log=xi_log,
                              window_months=window_months, step_months=step_months,
                              columns=list(table.columns), input=os.fspath(input_path)),
    })


if __name__ == "__main__":
    main()
