"""Command-line interface: ``galqr fit | simulate | assess | rerun``.

Every command writes into ``--out`` and finishes with ``manifest.json``
recording the command line, inputs, seed, version and wall-clock time. On
failure it writes ``error.json`` instead and exits with status 2.
"""
from __future__ import annotations

import argparse
import json
import shutil
import sys
import time
import traceback
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, assess, io
from .config import apply_transform, fit_settings, load_toml, resolve_prior, sim_scenario
from .data import Dataset
from .lasso import fit_lasso
from .sampler import posterior_predictive_replicates, predictive_error_density, run_chain
from .simulate import THREADS_ENV, run_scenario


def build_dataset(table: dict, settings) -> Dataset:
    if settings.response not in table:
        raise ValueError(f"response column {settings.response!r} not found; available: {sorted(table)}")
    covs = settings.covariates or [c for c in table if c not in (settings.response, settings.censored)]
    cols = [np.asarray(apply_transform(table, c), dtype=float) for c in covs]
    n = table[settings.response].shape[0]
    x = np.column_stack(cols) if cols else np.empty((n, 0))
    names = list(covs)
    if settings.intercept:
        x = np.column_stack([np.ones(n), x])
        names = ["intercept", *names]
    if x.shape[1] == 0:
        raise ValueError("the design has no columns")
    cens = None
    if settings.censored:
        if settings.censored not in table:
            raise ValueError(f"censoring column {settings.censored!r} not found")
        flags = table[settings.censored]
        if np.any((flags != 0) & (flags != 1)):
            raise ValueError(f"censoring column {settings.censored!r} must contain only 0 and 1")
        cens = flags.astype(bool)
    return Dataset(x, table[settings.response], cens, settings.threshold, names, settings.response)


def _load_fit_inputs(args):
    raw = load_toml(args.config) if args.config else {}
    overrides = dict(p0=args.p0, seed=args.seed, model=args.model,
                     lasso=True if args.lasso else None, tobit=True if args.tobit else None)
    settings = fit_settings(raw, overrides)
    data = build_dataset(io.read_table(args.data), settings)
    if settings.tobit and not data.is_censored:
        raise ValueError("Tobit fit requested but no row is censored")
    return settings, data


def fit(settings, data: Dataset):
    config = resolve_prior(settings, data.p)
    if config.seed is None:
        config = replace(config, seed=0)
    rng = np.random.default_rng(config.seed)
    if settings.lasso:
        return fit_lasso(data, config, rng)
    return run_chain(data, config, rng)


def cmd_fit(args, out: Path) -> list[str]:
    settings, data = _load_fit_inputs(args)
    samples = fit(settings, data)
    model = settings.model + ("-lasso" if settings.lasso else "") + ("-tobit" if data.is_censored else "")
    io.write_samples(samples, out / "samples.csv", dict(model=model, coefficient_names=data.names))
    summary = samples.summary()
    for row, name in zip(summary, data.names):
        row["name"] = name
    io.write_rows(summary, out / "summary.csv",
                  ["parameter", "name", "mean", "sd", "q2_5", "q50", "q97_5"])
    diag = dict(samples.diagnostics, acceptance_rate=samples.acceptance_rate, model=model,
                n=data.n, n_censored=data.n - data.n_uncensored)
    io.write_json(diag, out / "diagnostics.json")
    # predictive error density around the fitted quantile (location 0)
    width = settings.density_width * float(samples.sigma.mean())
    grid = np.linspace(-width, width, settings.density_points)
    mc = settings.mc_draws or None
    dens = predictive_error_density(samples, grid, mc, np.random.default_rng(samples.seed))
    io.write_rows([dict(error=g, density=d) for g, d in zip(grid, dens)], out / "density.csv", ["error", "density"])
    return ["samples.csv", "samples.meta.json", "summary.csv", "diagnostics.json", "density.csv"]


def cmd_simulate(args, out: Path) -> list[str]:
    raw = load_toml(args.config) if args.config else {}
    scenario = sim_scenario(raw, dict(seed=args.seed, p0=args.p0))
    if args.paper_scale:
        scenario = scenario.full_scale()
    result = run_scenario(scenario, workers=args.workers)
    rows = result.rows
    fields = ["replicate", "model", "status", "error", "cie", "mcl", "ppl_quadratic", "ppl_quadratic_P",
              "ppl_quadratic_G", "ppl_check", "ppl_check_P", "ppl_check_G", "gamma_mean", "acceptance"]
    io.write_rows(rows, out / "replicates.csv", fields)
    io.write_rows(result.summary(), out / "summary.csv",
                  ["model", "criterion", "n_ok", "n_failed", "median", "sd"])
    io.write_rows(result.table(), out / "table.csv", ["criterion", *[m.upper() for m in scenario.models]])
    io.write_json(scenario.to_dict(), out / "scenario.json")
    return ["replicates.csv", "summary.csv", "table.csv", "scenario.json"]


def cmd_assess(args, out: Path) -> list[str]:
    rows = []
    if args.loglik is not None:
        if args.k is None or args.n is None:
            raise ValueError("--loglik needs --k and --n")
        crit = "bic_censored" if args.censored_bic else "bic"
        rows += assess.report_rows("given", float("nan"), {crit: assess.bic(args.loglik, args.k, args.n)})
    if args.samples:
        if not args.data:
            raise ValueError("--samples needs --data")
        samples = io.read_samples(args.samples)
        meta = json.loads(io.meta_path(args.samples).read_text()) if io.meta_path(args.samples).exists() else {}
        raw = load_toml(args.config) if args.config else {}
        settings = fit_settings(raw, dict(p0=samples.p0))
        data = build_dataset(io.read_table(args.data), settings)
        if data.p != samples.beta.shape[1]:
            raise ValueError(f"data has {data.p} design columns but samples have {samples.beta.shape[1]}")
        model = meta.get("model", "al" if samples.config.gamma_fixed_at_zero else "gal")
        ll, b = assess.bic_from_samples(samples, data)
        seed = args.seed if args.seed is not None else (samples.seed or 0)
        reps = posterior_predictive_replicates(samples, data.x, np.random.default_rng(seed))
        y = data.y
        quad = assess.ppl_quadratic(reps, y, args.m_weight)
        chk = assess.ppl_check(reps, y, samples.p0)
        crit = {"loglik": ll, "bic_censored" if data.is_censored else "bic": b,
                "ppl_quadratic_D": quad.D, "ppl_quadratic_P": quad.P, "ppl_quadratic_G": quad.G,
                "ppl_check_D": chk.D, "ppl_check_P": chk.P, "ppl_check_G": chk.G}
        rows += assess.report_rows(model, samples.p0, crit)
    if not rows:
        raise ValueError("nothing to assess: give --samples/--data or --loglik/--k/--n")
    assess.write_report(rows, out / "report.csv")
    return ["report.csv"]


COMMANDS = {"fit": cmd_fit, "simulate": cmd_simulate, "assess": cmd_assess}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="galqr", description="Bayesian quantile regression with GAL errors")
    parser.add_argument("--version", action="version", version=f"galqr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, help="TOML configuration file")
        p.add_argument("--out", type=Path, required=True, help="output directory")
        p.add_argument("--seed", type=int, help="master seed (overrides the config)")
        p.add_argument("--p0", type=float, help="quantile level (overrides the config)")

    p = sub.add_parser("fit", help="fit a quantile regression to CSV data")
    common(p)
    p.add_argument("--data", type=Path, required=True, help="CSV with header")
    p.add_argument("--model", choices=["al", "gal"], help="error distribution")
    p.add_argument("--lasso", action="store_true", help="hierarchical Laplace prior on slopes")
    p.add_argument("--tobit", action="store_true", help="require a censored column (left-censored fit)")

    p = sub.add_parser("simulate", help="run a simulation scenario")
    common(p)
    p.add_argument("--paper-scale", action="store_true",
                   help="100 replicates, burn-in 50000, thin 20, keep 5000")
    p.add_argument("--workers", type=int, help=f"parallel processes (default: ${THREADS_ENV} or 1)")

    p = sub.add_parser("assess", help="model criteria for a fit")
    common(p)
    p.add_argument("--samples", type=Path, help="samples.csv written by fit")
    p.add_argument("--data", type=Path, help="the data the samples were fit to")
    p.add_argument("--m-weight", type=float, default=float("inf"), help="m in D_m (default infinity)")
    p.add_argument("--loglik", type=float, help="log-likelihood for plain BIC arithmetic")
    p.add_argument("--k", type=int, help="number of parameters")
    p.add_argument("--n", type=int, help="number of (uncensored) observations")
    p.add_argument("--censored-bic", action="store_true", help="label the arithmetic result as revised BIC")

    p = sub.add_parser("rerun", help="repeat a run from its manifest")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    return parser


def _write_manifest(out: Path, args, argv, outputs, started, status):
    manifest = dict(
        command=args.command,
        argv=_absolute_argv(argv),
        cwd=str(Path.cwd()),
        config=str(args.config) if getattr(args, "config", None) else None,
        inputs={k: str(getattr(args, k)) for k in ("data", "samples") if getattr(args, k, None)},
        out=str(out),
        outputs=outputs,
        seed=getattr(args, "seed", None),
        version=__version__,
        status=status,
        wall_clock_seconds=round(time.time() - started, 3),
        started=time.strftime("%Y-%m-%dT%H:%M:%S", time.localtime(started)),
    )
    io.write_json(manifest, out / "manifest.json")


_PATH_FLAGS = ("--config", "--data", "--samples")


def _absolute_argv(argv):
    """argv with input paths made absolute so a manifest can be rerun from anywhere."""
    out = list(argv)
    for i, a in enumerate(out[:-1]):
        if a in _PATH_FLAGS:
            out[i + 1] = str(Path(out[i + 1]).resolve())
    return out


def _rerun_argv(manifest_path: Path, out: Path) -> list[str]:
    manifest = json.loads(manifest_path.read_text())
    argv = list(manifest["argv"])
    if "--out" not in argv:
        raise ValueError("manifest argv has no --out")
    argv[argv.index("--out") + 1] = str(out)
    return argv


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "rerun":
        try:
            new_argv = _rerun_argv(args.manifest, args.out)
        except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
            print(f"galqr: cannot rerun: {exc}", file=sys.stderr)
            return 2
        return main(new_argv)

    out = args.out
    started = time.time()
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"galqr: cannot create output directory {out}: {exc}", file=sys.stderr)
        return 2
    for stale in ("error.json", "manifest.json"):
        (out / stale).unlink(missing_ok=True)
    try:
        outputs = COMMANDS[args.command](args, out)
    except (ValueError, OSError, FloatingPointError, np.linalg.LinAlgError) as exc:
        record = dict(command=args.command, error=type(exc).__name__, message=str(exc),
                      traceback=traceback.format_exc(limit=5))
        io.write_json(record, out / "error.json")
        print(f"galqr {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    if args.config and Path(args.config).resolve() != (out / "config.toml").resolve():
        shutil.copyfile(args.config, out / "config.toml")
        outputs.append("config.toml")
    _write_manifest(out, args, argv, outputs, started, "ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
