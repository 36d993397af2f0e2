"""Negative log-likelihoods and analytic gradients for the supported families.

Every family is a smooth function of the linear predictor eta = X @ beta.
Values are averaged over observations (not summed); callers that need the
total multiply by N themselves.  All functions are pure.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import digamma, expit, gammaln

__all__ = [
    "FAMILIES",
    "LikelihoodFamily",
    "LinearModelData",
    "nll",
    "grad_nll",
    "grad_nll_logaux",
    "finite_diff_check",
]

FAMILIES = ("gaussian", "bernoulli_logit", "poisson_log", "negbin_log", "cauchy")

_DEFAULT_AUX = {"gaussian": 1.0, "negbin_log": 1.0, "cauchy": 1.0}


@dataclass(frozen=True)
class LikelihoodFamily:
    """A response distribution with canonical link.

    kind: one of ``FAMILIES``.
    aux: family-specific positive scale -- the Gaussian noise sd, the
        negative-binomial overdispersion (variance mu + mu^2/aux), or the
        Cauchy scale.  Ignored by bernoulli/poisson.
    fit_aux: jointly optimize aux on the log scale (negbin only).
    """

    kind: str
    aux: float | None = None
    fit_aux: bool = False

    def __post_init__(self):
        if self.kind not in FAMILIES:
            raise ValueError(f"unknown likelihood family {self.kind!r}")
        if self.aux is None and self.kind in _DEFAULT_AUX:
            object.__setattr__(self, "aux", _DEFAULT_AUX[self.kind])
        if self.aux is not None and self.aux <= 0:
            raise ValueError("aux must be > 0")
        if self.fit_aux and self.kind != "negbin_log":
            raise ValueError("fit_aux is only supported for negbin_log")

    def with_aux(self, aux: float | None) -> "LikelihoodFamily":
        return self if aux is None else replace(self, aux=float(aux))

    def validate_response(self, y: np.ndarray) -> None:
        if self.kind == "bernoulli_logit":
            if not np.isin(y, (0.0, 1.0)).all():
                raise ValueError("bernoulli responses must lie in {0, 1}")
        elif self.kind in ("poisson_log", "negbin_log"):
            if np.any(y < 0) or np.any(y != np.floor(y)):
                raise ValueError(f"{self.kind} responses must be nonnegative integers")


@dataclass
class LinearModelData:
    """A design matrix, response vector and optional observation weights."""

    X: np.ndarray
    y: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.X.ndim != 2 or self.X.shape[0] < 1 or self.X.shape[1] < 1:
            raise ValueError("X must be a nonempty 2-d array")
        if self.y.shape != (self.X.shape[0],):
            raise ValueError("y length must match the number of rows of X")
        if not np.all(np.isfinite(self.X)) or not np.all(np.isfinite(self.y)):
            raise ValueError("X and y must be finite")
        if self.weights is not None:
            self.weights = np.asarray(self.weights, dtype=float)
            if self.weights.shape != self.y.shape or np.any(self.weights < 0):
                raise ValueError("weights must be nonnegative, one per observation")

    @property
    def n_obs(self) -> int:
        return self.X.shape[0]


def _per_obs_nll(kind: str, y: np.ndarray, eta: np.ndarray, aux: float) -> np.ndarray:
    if kind == "gaussian":
        return 0.5 * np.log(2.0 * np.pi * aux**2) + 0.5 * ((y - eta) / aux) ** 2
    if kind == "bernoulli_logit":
        # log(1 + e^eta) - y*eta, overflow-safe softplus
        return np.logaddexp(0.0, eta) - y * eta
    if kind == "poisson_log":
        return np.exp(eta) - y * eta + gammaln(y + 1.0)
    if kind == "negbin_log":
        mu = np.exp(eta)
        r = aux
        return -(
            gammaln(y + r)
            - gammaln(r)
            - gammaln(y + 1.0)
            + r * np.log(r)
            + y * eta
            - (y + r) * np.log(r + mu)
        )
    if kind == "cauchy":
        z = (y - eta) / aux
        return np.log(np.pi * aux) + np.log1p(z * z)
    raise ValueError(f"unknown likelihood family {kind!r}")


def _per_obs_dnll_deta(kind, y, eta, aux):
    if kind == "gaussian":
        return (eta - y) / aux**2
    if kind == "bernoulli_logit":
        return expit(eta) - y
    if kind == "poisson_log":
        return np.exp(eta) - y
    if kind == "negbin_log":
        mu = np.exp(eta)
        return mu * (y + aux) / (aux + mu) - y
    if kind == "cauchy":
        z = (y - eta) / aux
        return -2.0 * z / (aux * (1.0 + z * z))
    raise ValueError(f"unknown likelihood family {kind!r}")


def _mean(values: np.ndarray, weights: np.ndarray | None) -> float:
    if weights is None:
        return float(np.mean(values))
    return float(np.sum(weights * values) / values.shape[0])


def nll(fam: LikelihoodFamily, data: LinearModelData, beta: np.ndarray, *, aux=None) -> float:
    """Mean negative log-likelihood at coefficients beta.

    aux overrides fam.aux (used when the scale is itself being optimized).
    Normalizing constants (log-gamma terms and such) are included so values
    are comparable across models.
    """
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (data.X.shape[1],):
        raise ValueError("beta length must match the number of columns of X")
    if not np.all(np.isfinite(beta)):
        raise ValueError("beta must be finite")
    fam.validate_response(data.y)
    eta = data.X @ beta
    vals = _per_obs_nll(fam.kind, data.y, eta, aux if aux is not None else fam.aux)
    return _mean(vals, data.weights)


def grad_nll(fam: LikelihoodFamily, data: LinearModelData, beta: np.ndarray, *, aux=None) -> np.ndarray:
    """Gradient of the mean negative log-likelihood with respect to beta."""
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (data.X.shape[1],):
        raise ValueError("beta length must match the number of columns of X")
    fam.validate_response(data.y)
    eta = data.X @ beta
    d = _per_obs_dnll_deta(fam.kind, data.y, eta, aux if aux is not None else fam.aux)
    if data.weights is not None:
        d = d * data.weights
    return data.X.T @ d / data.n_obs


def grad_nll_logaux(fam: LikelihoodFamily, data: LinearModelData, beta: np.ndarray, *, aux=None) -> float:
    """d(mean NLL)/d(log aux) for families with an optimizable scale.

    Only the negative binomial supports joint aux optimization; its
    overdispersion enters smoothly through log-gamma terms.
    """
    if fam.kind != "negbin_log":
        raise ValueError("log-aux gradient is only defined for negbin_log")
    r = aux if aux is not None else fam.aux
    eta = data.X @ np.asarray(beta, dtype=float)
    mu = np.exp(eta)
    y = data.y
    dr = -(
        digamma(y + r)
        - digamma(r)
        + np.log(r)
        + 1.0
        - np.log(r + mu)
        - (y + r) / (r + mu)
    )
    return _mean(dr, data.weights) * r


def finite_diff_check(fam: LikelihoodFamily, data: LinearModelData, beta: np.ndarray, h: float = 1e-6) -> float:
    """Worst relative error of the analytic gradient versus central differences.

    Includes the log-aux coordinate when fam.fit_aux is set.
    """
    if h <= 0:
        raise ValueError("h must be > 0")
    beta = np.asarray(beta, dtype=float)
    grad = grad_nll(fam, data, beta)
    worst = 0.0
    for i in range(beta.size):
        bp, bm = beta.copy(), beta.copy()
        bp[i] += h
        bm[i] -= h
        fd = (nll(fam, data, bp) - nll(fam, data, bm)) / (2.0 * h)
        worst = max(worst, abs(grad[i] - fd) / max(1.0, abs(fd)))
    if fam.fit_aux:
        la = np.log(fam.aux)
        fd = (
            nll(fam, data, beta, aux=np.exp(la + h))
            - nll(fam, data, beta, aux=np.exp(la - h))
        ) / (2.0 * h)
        ga = grad_nll_logaux(fam, data, beta)
        worst = max(worst, abs(ga - fd) / max(1.0, abs(fd)))
    return worst
