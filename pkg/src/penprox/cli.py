"""Command-line interface: fit, path, simulate, gradcheck and operator tables.

Outputs are batch artifacts: JSON reports for single fits, CSV for
matrices and paths, PNG figures rendered next to them.  Exit codes:
1 configuration error, 2 data error, 3 divergence.
"""

from __future__ import annotations

import json
import sys
from dataclasses import fields
from pathlib import Path

import click
import numpy as np

from . import plots
from .design import DesignSpec, load_csv
from .errors import ConfigError, DataError, DivergedError
from .likelihoods import FAMILIES, LikelihoodFamily, finite_diff_check
from .objective import PenaltyConfig, exponential_rho, half_cauchy_rho, penalty_value_grad
from .optimizer import OptimizerConfig, fit
from .path import PathConfig, default_tau_grid, run_path
from .priors import PriorSpec, finite_diff_check_prior, read_group_file, write_group_file
from .prox import prox_vp, prox_vp_log
from .simulate import SynthSpec, generate

REPORT_SCHEMA = "penprox-fit-report/1"
PRIOR_KINDS = ("independent_half_cauchy", "sparse_group", "overlapping_group")
MODE_ALIASES = {"full": "full_batch", "svrg": "svrg", "bcd": "bcd_reweighted"}

CONFIG_SECTIONS = {
    "design": ("standardize", "intercept", "second_order", "response_column"),
    "penalty": ("tau", "barrier_a"),
    "prior": ("kind", "group_scale", "softmax_temp"),
    "optimizer": tuple(f.name for f in fields(OptimizerConfig)),
    "path": ("tau_grid", "warm_start", "reset_gamma", "median_window", "holdout_fraction"),
}


def _fail(code, message):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_config(path):
    if path is None:
        return {}
    try:
        cfg = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}")
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    for section, content in cfg.items():
        if section not in CONFIG_SECTIONS:
            raise ConfigError(f"unknown config section {section!r}")
        if not isinstance(content, dict):
            raise ConfigError(f"config section {section!r} must be an object")
        for key in content:
            if key not in CONFIG_SECTIONS[section]:
                raise ConfigError(f"unknown key {section}.{key} in config file")
    return cfg


def _merge(section_values, overrides):
    merged = dict(section_values)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    return merged


def _parse_tau_grid(text, n_obs):
    if text is None:
        return default_tau_grid(n_obs)
    if isinstance(text, (list, tuple)):
        return np.asarray(text, dtype=float)
    text = str(text)
    if text.startswith("log:"):
        parts = text.split(":")
        if len(parts) != 4:
            raise ConfigError("--tau-grid log form is log:HI:LO:NUM")
        hi, lo, num = float(parts[1]), float(parts[2]), int(parts[3])
        return np.geomspace(hi, lo, num)
    try:
        return np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError:
        raise ConfigError(f"cannot parse --tau-grid {text!r}")


def _build_family(family, aux, fit_aux):
    if family not in FAMILIES:
        raise ConfigError(f"--family must be one of {FAMILIES}")
    return LikelihoodFamily(family, aux=aux, fit_aux=fit_aux)


def _build_prior(kind, groups_path, group_scale, softmax_temp):
    if kind not in PRIOR_KINDS:
        raise ConfigError(f"--prior must be one of {PRIOR_KINDS}")
    groups = None
    if groups_path is not None:
        try:
            groups = read_group_file(groups_path)
        except (OSError, ValueError) as exc:
            raise DataError(f"bad group file: {exc}")
    try:
        return PriorSpec(kind, groups=groups, group_scale=group_scale, softmax_temp=softmax_temp)
    except ValueError as exc:
        raise ConfigError(str(exc))


def _load_dataset(data, response, design_cfg, family):
    if data is None:
        raise ConfigError("--data is required")
    response = response or design_cfg.get("response_column")
    if response is None:
        raise ConfigError("--response is required")
    spec = DesignSpec(
        source=data,
        response_column=response,
        standardize=design_cfg.get("standardize", True),
        intercept=design_cfg.get("intercept", True),
        second_order=design_cfg.get("second_order", False),
    )
    return load_csv(spec, family)


def _report_from_fit(dataset, fam, spec, cfg, opt, res):
    names = dataset.model_column_names()
    beta = res.state.beta
    report = {
        "schema": REPORT_SCHEMA,
        "family": fam.kind,
        "aux": res.state.aux,
        "prior": spec.kind if spec is not None else None,
        "tau": cfg.tau,
        "barrier_a": cfg.barrier_a,
        "mode": opt.mode,
        "seed": opt.seed,
        "n_obs": int(dataset.n_obs),
        "n_train": int(dataset.n_obs - (res.holdout_idx.size if res.holdout_idx is not None else 0)),
        "n_model_columns": int(dataset.n_model_columns),
        "coefficients": {n: float(b) for n, b in zip(names, beta)},
        "lambda": [float(v) for v in res.state.lam],
        "gamma": None if res.state.gamma is None else [float(v) for v in res.state.gamma],
        "nonzero_count": int(np.count_nonzero(beta)),
        "nonzero": [n for n, b in zip(names, beta) if b != 0.0],
        "final_objective": float(res.objective_trace[-1]),
        "heldout_nll": None if not res.heldout_trace.size else float(res.best_heldout),
        "iterations": int(res.iterations),
        "converged_reason": res.converged_reason,
        "elapsed_seconds": float(res.elapsed_seconds),
        "coefficients_original": None,
        "intercept_original": None,
    }
    back = dataset.original_scale_coefficients(beta)
    if back is not None:
        coefs, icept = back
        feat = dataset.feature_names or [f"x{i}" for i in range(dataset.X.shape[1])]
        report["coefficients_original"] = {n: float(c) for n, c in zip(feat, coefs)}
        report["intercept_original"] = float(icept) if dataset.intercept else None
    return report


def _write_json(path, payload):
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


common_fit_options = [
    click.option("--data", type=click.Path(), help="input CSV with header"),
    click.option("--response", help="response column name"),
    click.option("--family", default="gaussian", show_default=True,
                 type=click.Choice(FAMILIES)),
    click.option("--aux", type=float, default=None,
                 help="family scale (gaussian sd, negbin overdispersion, cauchy scale)"),
    click.option("--fit-aux", is_flag=True, default=False,
                 help="jointly optimize the negbin overdispersion"),
    click.option("--prior", default=None, type=click.Choice(PRIOR_KINDS),
                 help="weight prior [default: independent_half_cauchy]"),
    click.option("--groups", "groups_path", type=click.Path(),
                 help="group file: predictor_index,group_index lines (0-based)"),
    click.option("--standardize/--no-standardize", default=None,
                 help="standardize feature columns [default: standardize]"),
    click.option("--intercept/--no-intercept", default=None,
                 help="append an unpenalized intercept [default: intercept]"),
    click.option("--second-order", is_flag=True, default=None,
                 help="expand to mains, squares and pairwise interactions"),
    click.option("--mode", default="full", show_default=True,
                 type=click.Choice(sorted(MODE_ALIASES))),
    click.option("--seed", type=int, default=None, help="RNG seed [default: 0]"),
    click.option("--step", type=float, default=None, help="base step size [default: 1e-2]"),
    click.option("--minibatch", type=int, default=None, help="svrg minibatch [default: 256]"),
    click.option("--patience", type=int, default=None,
                 help="early-stopping patience [default: 500]"),
    click.option("--holdout", type=int, default=None,
                 help="held-out rows for early stopping [default: min(1000, N//10)]"),
    click.option("--max-iters", type=int, default=None, help="iteration cap [default: 10000]"),
    click.option("--bcd-eps", type=float, default=None,
                 help="reweighting offset for bcd mode [default: 1e-6]"),
    click.option("--config", "config_path", type=click.Path(),
                 help="JSON config file; flags override file values"),
    click.option("--out", type=click.Path(), required=True, help="output directory"),
    click.option("--plots/--no-plots", "render_plots", default=True, show_default=True),
]


def _add_options(options):
    def wrap(fn):
        for opt in reversed(options):
            fn = opt(fn)
        return fn
    return wrap


def _assemble(kwargs):
    cfg_file = _load_config(kwargs.get("config_path"))
    design_cfg = _merge(cfg_file.get("design", {}), {
        "standardize": kwargs.get("standardize"),
        "intercept": kwargs.get("intercept"),
        "second_order": kwargs.get("second_order"),
    })
    prior_cfg = cfg_file.get("prior", {})
    prior_kind = kwargs.get("prior") or prior_cfg.get("kind") or "independent_half_cauchy"
    fam = _build_family(kwargs["family"], kwargs.get("aux"), kwargs.get("fit_aux", False))
    spec = _build_prior(prior_kind, kwargs.get("groups_path"),
                        prior_cfg.get("group_scale"), prior_cfg.get("softmax_temp"))
    opt_cfg = _merge(cfg_file.get("optimizer", {}), {
        "seed": kwargs.get("seed"),
        "step": kwargs.get("step"),
        "minibatch": kwargs.get("minibatch"),
        "patience": kwargs.get("patience"),
        "holdout": kwargs.get("holdout"),
        "max_iters": kwargs.get("max_iters"),
        "bcd_eps": kwargs.get("bcd_eps"),
        "mode": MODE_ALIASES[kwargs.get("mode", "full")],
    })
    if "holdout" not in opt_cfg:
        opt_cfg["holdout"] = None
    opt = OptimizerConfig(**opt_cfg)
    dataset = _load_dataset(kwargs.get("data"), kwargs.get("response"), design_cfg, fam)
    return cfg_file, dataset, fam, spec, opt


@click.group()
@click.version_option()
def main():
    """Sparse regression with jointly optimized penalty weights."""


@main.command("fit")
@_add_options(common_fit_options)
@click.option("--tau", type=float, default=None, help="penalty strength")
@click.option("--barrier-a", type=float, default=None,
              help="log-barrier coefficient [default: 1/tau]")
def cmd_fit(**kwargs):
    """Fit one model and write a JSON report (plus trace figures)."""
    try:
        cfg_file, dataset, fam, spec, opt = _assemble(kwargs)
        pen_cfg = _merge(cfg_file.get("penalty", {}), {
            "tau": kwargs.get("tau"), "barrier_a": kwargs.get("barrier_a"),
        })
        if "tau" not in pen_cfg or pen_cfg["tau"] is None:
            raise ConfigError("--tau is required (flag or config)")
        try:
            cfg = PenaltyConfig(**pen_cfg)
        except ValueError as exc:
            raise ConfigError(str(exc))
        out = Path(kwargs["out"])
        out.mkdir(parents=True, exist_ok=True)
        res = fit(dataset, fam, spec, cfg, opt)
        report = _report_from_fit(dataset, fam, spec, cfg, opt, res)
        _write_json(out / "fit.json", report)
        if kwargs["render_plots"]:
            plots.save_figure(plots.fit_figure(res), out / "fit_trace.png")
        click.echo(f"wrote {out / 'fit.json'} ({report['nonzero_count']} nonzero)")
    except ConfigError as exc:
        _fail(1, exc)
    except DataError as exc:
        _fail(2, exc)
    except DivergedError as exc:
        _fail(3, f"fit diverged: {exc}")


@main.command("path")
@_add_options(common_fit_options)
@click.option("--tau-grid", "tau_grid", default=None,
              help="comma list of strengths, or log:HI:LO:NUM "
                   "[default: 30 log-spaced points from N down to 1e-3*N]")
@click.option("--median-window", type=int, default=None,
              help="rolling-median window over the grid [default: 5]")
@click.option("--no-warm-start", is_flag=True, default=False)
@click.option("--holdout-fraction", type=float, default=None,
              help="selection holdout fraction [default: 0.5]")
def cmd_path(**kwargs):
    """Fit along a strength grid; write path.csv, report and figures."""
    try:
        cfg_file, dataset, fam, spec, opt = _assemble(kwargs)
        path_cfg = _merge(cfg_file.get("path", {}), {
            "tau_grid": kwargs.get("tau_grid"),
            "median_window": kwargs.get("median_window"),
            "holdout_fraction": kwargs.get("holdout_fraction"),
        })
        grid = _parse_tau_grid(path_cfg.get("tau_grid"), dataset.n_obs)
        pcfg = PathConfig(
            tau_grid=grid,
            warm_start=not kwargs["no_warm_start"] and path_cfg.get("warm_start", True),
            reset_gamma=path_cfg.get("reset_gamma", True),
            median_window=path_cfg.get("median_window") or 5,
            holdout_fraction=path_cfg.get("holdout_fraction") or 0.5,
        )
        out = Path(kwargs["out"])
        out.mkdir(parents=True, exist_ok=True)
        res = run_path(dataset, fam, spec, opt, pcfg)
        names = dataset.model_column_names()
        header = ["tau", "nonzero_count", "heldout_nll"] + names
        rows = np.column_stack([
            res.taus, res.nonzero_counts, res.heldout_nll, res.coefficients,
        ])
        _write_csv(out / "path.csv", header, rows)
        smoothed = np.column_stack([
            res.taus, res.nonzero_counts, res.heldout_nll, res.smoothed,
        ])
        _write_csv(out / "path_smoothed.csv", header, smoothed)
        _write_json(out / "path.json", {
            "schema": "penprox-path-report/1",
            "selected_tau": res.selected_tau,
            "selected_index": int(res.selected_index),
            "heldout_nll": [float(v) for v in res.heldout_nll],
            "taus": [float(v) for v in res.taus],
            "nonzero_counts": [int(v) for v in res.nonzero_counts],
            "failed_indices": [int(k) for k in res.failed],
        })
        if kwargs["render_plots"]:
            plots.save_figure(plots.path_figure(res), out / "path.png")
        click.echo(f"wrote {out / 'path.csv'} (selected tau {res.selected_tau:g})")
    except ConfigError as exc:
        _fail(1, exc)
    except DataError as exc:
        _fail(2, exc)
    except DivergedError as exc:
        _fail(3, f"path diverged everywhere: {exc}")


def _write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in np.atleast_2d(rows):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


@main.command("simulate")
@click.option("--family", default="gaussian", show_default=True, type=click.Choice(FAMILIES))
@click.option("--structure", default="independent", show_default=True,
              type=click.Choice(["independent", "group", "hierarchical"]))
@click.option("--n", type=int, required=True, help="observations")
@click.option("--p", type=int, required=True, help="predictors (base predictors if hierarchical)")
@click.option("--n-active", type=int, required=True, help="active coefficients or groups")
@click.option("--group-size", type=int, default=5, show_default=True)
@click.option("--aux", type=float, default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def cmd_simulate(family, structure, n, p, n_active, group_size, aux, seed, out):
    """Draw a synthetic dataset; write data.csv, truth.json and groups.csv."""
    try:
        try:
            spec = SynthSpec(family=family, structure=structure, n=n, p=p,
                             n_active=n_active, group_size=group_size, seed=seed, aux=aux)
        except ValueError as exc:
            raise ConfigError(str(exc))
        dataset, beta, groups = generate(spec)
        outdir = Path(out)
        outdir.mkdir(parents=True, exist_ok=True)
        header = [f"x{i}" for i in range(dataset.X.shape[1])] + ["y"]
        _write_csv(outdir / "data.csv", header, np.column_stack([dataset.X, dataset.y]))
        _write_json(outdir / "truth.json", {
            "family": family,
            "structure": structure,
            "seed": seed,
            "n": n,
            "p": p,
            "n_active": n_active,
            "true_beta": [float(b) for b in beta],
            "active_indices": [int(i) for i in np.nonzero(beta)[0]],
            "n_model_columns": int(beta.size),
        })
        if groups is not None:
            write_group_file(outdir / "groups.csv", groups)
        click.echo(f"wrote {outdir / 'data.csv'} ({n} rows)")
    except ConfigError as exc:
        _fail(1, exc)


@main.command("gradcheck")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--n", type=int, default=40, show_default=True)
@click.option("--p", type=int, default=6, show_default=True)
@click.option("--out", type=click.Path(), default=None, help="optional CSV output")
def cmd_gradcheck(seed, n, p, out):
    """Finite-difference gradient report for every likelihood and prior."""
    from .priors import GroupStructure

    rng = np.random.default_rng(seed)
    rows = []
    for kind in FAMILIES:
        fam = LikelihoodFamily(kind, aux=2.0 if kind == "negbin_log" else None,
                               fit_aux=(kind == "negbin_log"))
        spec = SynthSpec(family=kind, n=n, p=p, n_active=max(1, p // 2),
                         seed=seed, aux=fam.aux)
        dataset, beta, _ = generate(spec)
        err = finite_diff_check(fam, dataset.model_data(), 0.3 * rng.standard_normal(p))
        rows.append((f"likelihood:{kind}", err))
    for kind in PRIOR_KINDS:
        if kind == "independent_half_cauchy":
            spec = PriorSpec()
            lam, gamma = np.abs(rng.standard_normal(8)) + 0.2, None
        else:
            ids = np.arange(8) % 3
            groups = (GroupStructure.from_group_ids(ids) if kind == "sparse_group"
                      else GroupStructure([[i % 3, (i + 1) % 3] for i in range(8)], n_groups=3))
            spec = PriorSpec(kind, groups=groups).resolve(200, 8)
            lam = np.abs(rng.standard_normal(8)) + 0.2
            gamma = np.abs(rng.standard_normal(3)) + 0.3
        rows.append((f"prior:{kind}", finite_diff_check_prior(spec, lam, gamma)))
    width = max(len(r[0]) for r in rows)
    ok = True
    for name, err in rows:
        status = "ok" if err < 1e-5 else "FAIL"
        ok &= err < 1e-5
        click.echo(f"{name:<{width}}  max_rel_err={err:.3e}  {status}")
    if out:
        with open(out, "w") as fh:
            fh.write("target,max_rel_err\n")
            for name, err in rows:
                fh.write(f"{name},{err:.6e}\n")
    sys.exit(0 if ok else 1)


@main.command("prox-table")
@click.option("--b", type=float, required=True, help="step product s_beta*s_lam")
@click.option("--a", type=float, default=0.0, show_default=True,
              help="log-barrier coefficient (0 uses the barrier-free operator)")
@click.option("--lam0-max", type=float, default=2.0, show_default=True)
@click.option("--aa-max", type=float, default=2.0, show_default=True,
              help="maximum coefficient pull |beta0|/s_beta")
@click.option("--step", type=float, default=0.02, show_default=True, help="grid step")
@click.option("--out", type=click.Path(), required=True)
@click.option("--plots/--no-plots", "render_plots", default=True, show_default=True)
def cmd_prox_table(b, a, lam0_max, aa_max, step, out, render_plots):
    """Tabulate the weight map over a (lam0, |beta0|/s_beta) grid at fixed b.

    Steps are realized as s_beta = s_lam = sqrt(b); with a > 0 the
    log-barrier operator is tabulated instead of the barrier-free one.
    """
    try:
        if b <= 0 or (a == 0.0 and b >= 1):
            raise ConfigError("need 0 < b < 1 for the barrier-free table, b > 0 otherwise")
        s = np.sqrt(b)
        lam0 = np.arange(0.0, lam0_max + step / 2, step)
        aa = np.arange(0.0, aa_max + step / 2, step)
        L, A = np.meshgrid(lam0, aa, indexing="ij")
        beta0 = A * s  # |beta0| = aa * s_beta
        if a > 0:
            res = prox_vp_log(beta0, L, s, s, a)
        else:
            res = prox_vp(beta0, L, s, s)
        outdir = Path(out)
        outdir.mkdir(parents=True, exist_ok=True)
        with open(outdir / "prox_table.csv", "w") as fh:
            fh.write("lam0,abs_beta0_over_s,lam_star,beta_star\n")
            for i in range(lam0.size):
                for j in range(aa.size):
                    row = (lam0[i], aa[j], res.lam[i, j], res.beta[i, j])
                    fh.write(",".join(repr(float(v)) for v in row) + "\n")
        if render_plots:
            plots.save_figure(plots.prox_surface_figure(lam0, aa, res.lam, b, a),
                              outdir / "prox_surface.png")
        click.echo(f"wrote {outdir / 'prox_table.csv'} ({lam0.size * aa.size} rows)")
    except ConfigError as exc:
        _fail(1, exc)


@main.command("penalty-profile")
@click.option("--tau", type=float, default=1.0, show_default=True)
@click.option("--prior", default="half_cauchy", show_default=True,
              type=click.Choice(["half_cauchy", "exponential"]))
@click.option("--rate", type=float, default=1.0, show_default=True,
              help="rate of the exponential prior")
@click.option("--beta-max", type=float, default=5.0, show_default=True)
@click.option("--step", type=float, default=1e-2, show_default=True)
@click.option("--out", type=click.Path(), required=True)
@click.option("--plots/--no-plots", "render_plots", default=True, show_default=True)
def cmd_penalty_profile(tau, prior, rate, beta_max, step, out, render_plots):
    """Tabulate the profiled penalty (|beta|, value, derivative) as CSV."""
    try:
        if tau <= 0 or step <= 0 or beta_max <= 0:
            raise ConfigError("tau, step and beta-max must be positive")
        pp = half_cauchy_rho(tau) if prior == "half_cauchy" else exponential_rho(rate, tau)
        grid = np.arange(0.0, beta_max + step / 2, step)
        table = np.empty((grid.size, 3))
        for i, ab in enumerate(grid):
            g, gp, _ = penalty_value_grad(pp, float(ab))
            table[i] = (ab, g, gp)
        outdir = Path(out)
        outdir.mkdir(parents=True, exist_ok=True)
        _write_csv(outdir / "penalty_profile.csv", ["abs_beta", "penalty", "derivative"], table)
        if render_plots:
            plots.save_figure(plots.penalty_profile_figure(table, tau),
                              outdir / "penalty_profile.png")
        click.echo(f"wrote {outdir / 'penalty_profile.csv'} ({grid.size} rows)")
    except ConfigError as exc:
        _fail(1, exc)


if __name__ == "__main__":
    main()
