"""Warm-started regularization paths over a grid of penalty strengths.

Fits are chained along the grid: each one starts from the previous
(beta, lam), while the group scales gamma are reset to 1 by default
because carrying them over disrupts warm starting.  Selection uses the
raw held-out NLL on a dedicated selection split; the rolling-median
smoothing of coefficient trajectories is presentation-layer only and
never feeds back into selection.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .design import Dataset
from .errors import ConfigError, DivergedError
from .likelihoods import LikelihoodFamily, nll
from .objective import PenaltyConfig
from .optimizer import FitResult, OptimizerConfig, ParamState, fit
from .priors import PriorSpec

__all__ = ["PathConfig", "PathResult", "default_tau_grid", "run_path", "rolling_median"]


def default_tau_grid(n_obs: int, num: int = 30) -> np.ndarray:
    """30 log-spaced strengths from 1e-3*N to N, decreasing.

    Brackets the c*N operating regime reported for synthetic studies with
    margin on both sides.
    """
    return np.logspace(0.0, -3.0, num) * n_obs


@dataclass(frozen=True)
class PathConfig:
    """Grid and postprocessing controls for a regularization path."""

    tau_grid: np.ndarray
    warm_start: bool = True
    reset_gamma: bool = True
    median_window: int = 5
    holdout_fraction: float = 0.5

    def __post_init__(self):
        grid = np.asarray(self.tau_grid, dtype=float)
        object.__setattr__(self, "tau_grid", grid)
        if grid.ndim != 1 or grid.size < 1 or np.any(grid <= 0):
            raise ConfigError("tau_grid must be a 1-d array of positive strengths")
        d = np.diff(grid)
        if grid.size > 1 and not (np.all(d > 0) or np.all(d < 0)):
            raise ConfigError("tau_grid must be strictly monotone")
        if self.median_window < 1 or self.median_window % 2 == 0:
            raise ConfigError("median_window must be odd and positive")
        if not 0.0 < self.holdout_fraction < 1.0:
            raise ConfigError("holdout_fraction must lie in (0, 1)")


@dataclass
class PathResult:
    """Per-strength fits, coefficient trajectories and the selected strength."""

    taus: np.ndarray
    fits: list
    coefficients: np.ndarray  # (n_tau, P) raw
    smoothed: np.ndarray  # (n_tau, P) rolling-median smoothed
    nonzero_counts: np.ndarray
    heldout_nll: np.ndarray
    selected_index: int
    selection_idx: np.ndarray = field(default=None, repr=False)
    failed: list = field(default_factory=list)

    @property
    def selected_tau(self) -> float:
        return float(self.taus[self.selected_index])


def rolling_median(traj, window: int):
    """Centered rolling median with symmetric shrinking windows at edges.

    At index i the window radius is min(window//2, i, T-1-i), so windows
    stay odd and the endpoints pass through unchanged.  Columns of a 2-d
    input are smoothed independently.
    """
    traj = np.asarray(traj, dtype=float)
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be odd and positive")
    t = traj.shape[0]
    if window > t:
        raise ValueError("window exceeds sequence length")
    half = window // 2
    out = np.empty_like(traj)
    for i in range(t):
        r = min(half, i, t - 1 - i)
        out[i] = np.median(traj[i - r : i + r + 1], axis=0)
    return out


def run_path(dataset: Dataset, fam: LikelihoodFamily | None = None,
             spec: PriorSpec | None = None, opt: OptimizerConfig | None = None,
             pcfg: PathConfig | None = None, barrier_a: float | None = None) -> PathResult:
    """Fit the model along pcfg.tau_grid with warm starts and score each
    strength on a selection holdout.

    A fit that diverges at some strength is recorded as a gap; the next
    strength falls back to a cold start.
    """
    fam = fam if fam is not None else dataset.family
    if fam is None:
        raise ConfigError("no likelihood family given")
    spec = spec if spec is not None else PriorSpec()
    opt = opt if opt is not None else OptimizerConfig()
    if pcfg is None:
        pcfg = PathConfig(tau_grid=default_tau_grid(dataset.n_obs))

    rng = np.random.default_rng(opt.seed)
    n = dataset.n_obs
    n_sel = int(round(pcfg.holdout_fraction * n))
    if not 0 < n_sel < n:
        raise ConfigError("holdout_fraction leaves no selection or fit rows")
    perm = rng.permutation(n)
    sel_idx = np.sort(perm[:n_sel])
    fit_idx = np.sort(perm[n_sel:])
    fit_ds = replace_rows(dataset, fit_idx)
    sel_data = dataset.model_data(sel_idx)

    p = dataset.n_model_columns
    taus = pcfg.tau_grid
    coefs = np.zeros((taus.size, p))
    nnz = np.zeros(taus.size, dtype=int)
    held = np.full(taus.size, np.inf)
    fits: list[FitResult | None] = []
    failed = []
    init: ParamState | None = None
    for k, tau in enumerate(taus):
        cfg = PenaltyConfig(tau=float(tau), barrier_a=barrier_a)
        try:
            res = fit(fit_ds, fam, spec, cfg, opt, init=init)
        except DivergedError:
            fits.append(None)
            failed.append(k)
            init = None
            continue
        fits.append(res)
        coefs[k] = res.state.beta
        nnz[k] = res.state.nonzero_count
        held[k] = nll(fam, sel_data, res.state.beta, aux=res.state.aux)
        if pcfg.warm_start:
            init = res.state.copy()
            if pcfg.reset_gamma and init.gamma is not None:
                init.gamma = np.ones_like(init.gamma)
        else:
            init = None
    if np.all(np.isinf(held)):
        raise DivergedError("every strength on the grid diverged")
    window = min(pcfg.median_window, taus.size)
    if window % 2 == 0:
        window -= 1
    smoothed = rolling_median(coefs, window)
    return PathResult(
        taus=np.asarray(taus, dtype=float),
        fits=fits,
        coefficients=coefs,
        smoothed=smoothed,
        nonzero_counts=nnz,
        heldout_nll=held,
        selected_index=int(np.argmin(held)),
        selection_idx=sel_idx,
        failed=failed,
    )


def replace_rows(dataset: Dataset, idx: np.ndarray) -> Dataset:
    """A Dataset restricted to the given rows (metadata preserved)."""
    return Dataset(
        X=dataset.X[idx],
        y=dataset.y[idx],
        family=dataset.family,
        weights=None if dataset.weights is None else dataset.weights[idx],
        expansion=dataset.expansion,
        intercept=dataset.intercept,
        feature_names=dataset.feature_names,
        center=dataset.center,
        scale=dataset.scale,
    )
