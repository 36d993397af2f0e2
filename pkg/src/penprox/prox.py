"""Closed-form proximal operators for the variable-penalty l1 function.

All operators act elementwise and accept scalars or same-shaped arrays.
The two-variable operators treat each (coefficient, weight) pair as an
independent block, so batched and scalar calls agree exactly.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

__all__ = ["ProxResult", "sto", "prox_vp", "prox_vp_log", "reduced_prox", "prox_cost"]


class ProxResult(NamedTuple):
    """Minimizer of a proximal problem together with its proximal cost."""

    beta: np.ndarray | float
    lam: np.ndarray | float
    cost: np.ndarray | float


def _check_steps(s_beta, s_lam=None):
    if np.any(np.asarray(s_beta) <= 0):
        raise ValueError("invalid step: s_beta must be > 0")
    if s_lam is not None and np.any(np.asarray(s_lam) <= 0):
        raise ValueError("invalid step: s_lam must be > 0")


def sto(x, s, lam):
    """Soft thresholding: (|x| - s*lam)^+ * sgn(x).

    Proximal operator of lam*|x| with step s > 0 and fixed weight lam >= 0.
    """
    _check_steps(s)
    if np.any(np.asarray(lam) < 0):
        raise ValueError("invalid weight: lam must be >= 0")
    x = np.asarray(x, dtype=float)
    out = np.maximum(np.abs(x) - np.asarray(s) * np.asarray(lam), 0.0) * np.sign(x)
    return out if out.ndim else float(out)


def prox_cost(beta, lam, beta0, lam0, s_beta, s_lam, a=0.0):
    """Proximal cost lam*|beta| - a*log(lam) + quadratic distance terms.

    The barrier term is omitted when a == 0, so lam == 0 is a valid point
    in that regime.
    """
    beta = np.asarray(beta, dtype=float)
    lam = np.asarray(lam, dtype=float)
    cost = (
        lam * np.abs(beta)
        + (beta - beta0) ** 2 / (2.0 * np.asarray(s_beta))
        + (lam - lam0) ** 2 / (2.0 * np.asarray(s_lam))
    )
    a = np.asarray(a, dtype=float)
    if np.any(a > 0):
        with np.errstate(divide="ignore", invalid="ignore"):
            barrier = np.where(a > 0, -a * np.log(np.where(lam > 0, lam, 1.0)), 0.0)
        barrier = np.where((a > 0) & (lam <= 0), np.inf, barrier)
        cost = cost + barrier
    return cost if cost.ndim else float(cost)


def prox_vp(beta0, lam0, s_beta, s_lam):
    """Joint proximal operator of lam*|beta| over beta in R, lam >= 0.

    In the convex step regime s_beta*s_lam < 1 the optimal weight is
    lam0 when lam0 >= |beta0|/s_beta and (lam0 - s_lam*|beta0|)^+ /
    (1 - s_beta*s_lam) otherwise.  When s_beta*s_lam >= 1 the problem is
    nonconvex and the optimum sits at lam0 or 0, picked by comparing
    lam0/sqrt(s_lam) against |beta0|/sqrt(s_beta); ties go to lam0 (the
    coefficient-sparse branch) for a deterministic output.  Either way the
    coefficient is soft-thresholded at the returned weight.  A returned
    lam of exactly 0 is the dual-sparsity regime: the coefficient escapes
    shrinkage entirely.
    """
    _check_steps(s_beta, s_lam)
    beta0 = np.asarray(beta0, dtype=float)
    lam0 = np.asarray(lam0, dtype=float)
    s_beta = np.asarray(s_beta, dtype=float)
    s_lam = np.asarray(s_lam, dtype=float)
    scalar = all(x.ndim == 0 for x in (beta0, lam0, s_beta, s_lam))

    b = s_beta * s_lam
    absb0 = np.abs(beta0)

    # s_beta*s_lam < 1: piecewise-linear map of Theorem-2 form.
    lam_convex = np.where(
        lam0 >= absb0 / s_beta,
        lam0,
        np.maximum(lam0 - s_lam * absb0, 0.0) / np.where(b < 1, 1.0 - b, 1.0),
    )
    # s_beta*s_lam >= 1: indicator form, beta-sparse branch on ties.
    keep = lam0 / np.sqrt(s_lam) >= absb0 / np.sqrt(s_beta)
    lam_nonconvex = np.where(keep, lam0, 0.0)

    lam_star = np.where(b < 1, lam_convex, lam_nonconvex)
    lam_star = np.maximum(lam_star, 0.0)
    beta_star = np.maximum(absb0 - s_beta * lam_star, 0.0) * np.sign(beta0)
    cost = prox_cost(beta_star, lam_star, beta0, lam0, s_beta, s_lam)
    if scalar:
        return ProxResult(float(beta_star), float(lam_star), float(cost))
    return ProxResult(beta_star, lam_star, np.asarray(cost))


def _positive_root_beta_zero(lam0, s_lam, a):
    """Positive root of lam^2 - lam0*lam - a*s_lam = 0, cancellation-free."""
    disc = np.sqrt(lam0 * lam0 + 4.0 * s_lam * a)
    # (lam0 + disc)/2 loses precision when lam0 << 0; use the conjugate form.
    pos = lam0 > 0
    denom = np.where(pos, 1.0, disc - lam0)
    return np.where(pos, 0.5 * (lam0 + disc), 2.0 * s_lam * a / denom)


def prox_vp_log(beta0, lam0, s_beta, s_lam, a):
    """Joint proximal operator of lam*|beta| - a*log(lam), a > 0.

    Minimizes over beta in R and lam > 0.  Candidates are assembled from
    the stationarity system: (i) beta = 0 with lam the positive root of
    lam^2 - lam0*lam - a*s_lam = 0, which always exists; (ii) the two
    roots of (1 - s_beta*s_lam)*lam^2 + (s_lam*|beta0| - lam0)*lam -
    a*s_lam = 0, each kept only when lam > 0 and |beta0| - s_beta*lam > 0
    so the implied nonzero coefficient is sign-consistent.  The candidate
    with least proximal cost wins; no threshold shortcut is used, which
    keeps the nonconvex regime s_beta*s_lam >= 1 correct.  The returned
    lam is strictly positive for every input, including lam0 < 0, so a
    plain gradient step on lam composed with this operator preserves
    positivity.
    """
    _check_steps(s_beta, s_lam)
    if np.any(np.asarray(a) <= 0):
        raise ValueError("a must be > 0; use prox_vp for the barrier-free problem")
    beta0 = np.asarray(beta0, dtype=float)
    lam0 = np.asarray(lam0, dtype=float)
    s_beta = np.asarray(s_beta, dtype=float)
    s_lam = np.asarray(s_lam, dtype=float)
    a = np.asarray(a, dtype=float)
    scalar = all(x.ndim == 0 for x in (beta0, lam0, s_beta, s_lam, a))

    beta0, lam0, s_beta, s_lam, a = np.broadcast_arrays(
        np.atleast_1d(beta0), lam0, s_beta, s_lam, a
    )
    absb0 = np.abs(beta0)
    sgn = np.sign(beta0)

    lam_zero = _positive_root_beta_zero(lam0, s_lam, a)
    best_lam = lam_zero
    best_beta = np.zeros_like(beta0)
    best_cost = prox_cost(best_beta, lam_zero, beta0, lam0, s_beta, s_lam, a)

    # Nonzero-coefficient branch: stable quadratic solve via the q-trick.
    qa = 1.0 - s_beta * s_lam
    qb = s_lam * absb0 - lam0
    qc = -a * s_lam
    disc = qb * qb - 4.0 * qa * qc
    has_roots = disc >= 0.0
    sq = np.sqrt(np.where(has_roots, disc, 0.0))
    sign_b = np.where(qb >= 0, 1.0, -1.0)
    q = -0.5 * (qb + sign_b * sq)
    with np.errstate(divide="ignore", invalid="ignore"):
        root1 = np.where(qa != 0, q / np.where(qa != 0, qa, 1.0), np.inf)
        root2 = np.where(q != 0, qc / np.where(q != 0, q, 1.0), np.inf)
    # Degenerate linear case s_beta*s_lam == 1: one root -qc/qb when qb != 0.
    lin = np.where(qb != 0, -qc / np.where(qb != 0, qb, 1.0), -np.inf)
    root1 = np.where(qa == 0, lin, root1)
    root2 = np.where(qa == 0, -np.inf, root2)

    for root in (root1, root2):
        ok = has_roots & np.isfinite(root) & (root > 0) & (absb0 - s_beta * root > 0)
        lam_c = np.where(ok, root, 1.0)
        beta_c = np.where(ok, (absb0 - s_beta * lam_c) * sgn, 0.0)
        cost_c = np.where(
            ok, prox_cost(beta_c, lam_c, beta0, lam0, s_beta, s_lam, a), np.inf
        )
        better = cost_c < best_cost
        best_cost = np.where(better, cost_c, best_cost)
        best_lam = np.where(better, lam_c, best_lam)
        best_beta = np.where(better, beta_c, best_beta)

    if scalar:
        return ProxResult(float(best_beta[0]), float(best_lam[0]), float(best_cost[0]))
    return ProxResult(best_beta, best_lam, best_cost)


def reduced_prox(lam0, aa, b):
    """Weight map lam(lam0, aa, b) of the barrier-free operator, b in (0, 1).

    aa stands in for |beta0|/s_beta and b for the step product
    s_beta*s_lam; the map returns lam0 when lam0 >= aa and
    (lam0 - aa*b)^+ / (1 - b) otherwise.  It tends to the identity in
    lam0 as b -> 0.
    """
    b_arr = np.asarray(b, dtype=float)
    if np.any(b_arr <= 0) or np.any(b_arr >= 1):
        raise ValueError("regime error: b must lie in (0, 1); use prox_vp directly")
    if np.any(np.asarray(aa) < 0):
        raise ValueError("aa must be >= 0")
    lam0 = np.asarray(lam0, dtype=float)
    aa = np.asarray(aa, dtype=float)
    out = np.where(lam0 >= aa, lam0, np.maximum(lam0 - aa * b_arr, 0.0) / (1.0 - b_arr))
    return out if out.ndim else float(out)
