"""Seeded synthetic generators for the sparse-regression test families.

The design matrix has iid standard-normal entries; nonzero coefficients
are iid standard normal; responses are drawn from the chosen family at the
true linear predictor through its canonical link.  Structures:

* ``independent`` -- n_active individually nonzero coefficients;
* ``group`` -- n_active consecutive groups of group_size jointly nonzero;
* ``hierarchical`` -- a second-order model over p base predictors where
  n_active whole pair-groups (both mains, both quadratics and the
  interaction) are jointly nonzero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .design import Dataset, expand_second_order, hierarchical_groups, second_order_map
from .likelihoods import LikelihoodFamily
from .priors import GroupStructure

__all__ = ["SynthSpec", "generate"]

STRUCTURES = ("independent", "group", "hierarchical")


@dataclass(frozen=True)
class SynthSpec:
    """Shape of a synthetic problem.

    For the hierarchical structure p counts base predictors (the model has
    2p + C(p,2) columns) and n_active counts pair-groups; group_size is
    ignored there (pair groups always have five members).
    """

    family: str = "gaussian"
    structure: str = "independent"
    n: int = 1000
    p: int = 50
    n_active: int = 5
    group_size: int = 5
    seed: int = 0
    aux: float | None = None

    def __post_init__(self):
        if self.structure not in STRUCTURES:
            raise ValueError(f"structure must be one of {STRUCTURES}")
        if self.n < 1 or self.p < 1 or self.n_active < 0:
            raise ValueError("n, p must be positive and n_active nonnegative")
        if self.structure == "independent" and self.n_active > self.p:
            raise ValueError("n_active exceeds p")
        if self.structure == "group":
            if self.group_size < 1:
                raise ValueError("group_size must be >= 1")
            if self.n_active * self.group_size > self.p:
                raise ValueError("n_active * group_size exceeds p")
        if self.structure == "hierarchical":
            if self.p < 2:
                raise ValueError("hierarchical structure needs p >= 2")
            n_pairs = self.p * (self.p - 1) // 2
            if self.n_active > n_pairs:
                raise ValueError("n_active exceeds the number of pairs")


def _draw_response(rng, kind, eta, aux):
    if kind == "gaussian":
        return eta + (aux or 1.0) * rng.standard_normal(eta.size)
    if kind == "bernoulli_logit":
        return (rng.random(eta.size) < 1.0 / (1.0 + np.exp(-eta))).astype(float)
    if kind == "poisson_log":
        return rng.poisson(np.exp(eta)).astype(float)
    if kind == "negbin_log":
        alpha = aux or 1.0
        mu = np.exp(eta)
        # NB as a gamma-Poisson mixture with shape alpha
        return rng.poisson(rng.gamma(alpha, mu / alpha)).astype(float)
    if kind == "cauchy":
        return eta + (aux or 1.0) * rng.standard_cauchy(eta.size)
    raise ValueError(f"unknown family {kind!r}")


def generate(spec: SynthSpec):
    """Draw (dataset, true_beta, groups); groups is None when independent.

    Regenerating with the same spec is bit-identical.  true_beta lives in
    model-column space (expanded columns for the hierarchical structure).
    """
    rng = np.random.default_rng(spec.seed)
    fam = LikelihoodFamily(spec.family, aux=spec.aux)

    groups: GroupStructure | None = None
    if spec.structure == "hierarchical":
        emap = second_order_map(spec.p)
        X = rng.standard_normal((spec.n, spec.p))
        n_model = emap.n_expanded
        beta = np.zeros(n_model)
        groups = hierarchical_groups(spec.p)
        active_pairs = np.sort(rng.choice(len(emap.pairs), size=spec.n_active, replace=False))
        for g in active_pairs:
            members = groups.members(int(g))
            beta[members] = rng.standard_normal(members.size)
        eta = expand_second_order(X, emap) @ beta
        dataset = Dataset(X=X, y=_draw_response(rng, spec.family, eta, fam.aux),
                          family=fam, expansion=emap)
        return dataset, beta, groups

    X = rng.standard_normal((spec.n, spec.p))
    beta = np.zeros(spec.p)
    if spec.structure == "independent":
        active = np.sort(rng.choice(spec.p, size=spec.n_active, replace=False))
        beta[active] = rng.standard_normal(spec.n_active)
    else:
        n_groups = -(-spec.p // spec.group_size)
        ids = np.minimum(np.arange(spec.p) // spec.group_size, n_groups - 1)
        groups = GroupStructure.from_group_ids(ids)
        active_groups = np.sort(rng.choice(n_groups, size=spec.n_active, replace=False))
        for g in active_groups:
            members = groups.members(int(g))
            beta[members] = rng.standard_normal(members.size)
    eta = X @ beta
    dataset = Dataset(X=X, y=_draw_response(rng, spec.family, eta, fam.aux), family=fam)
    return dataset, beta, groups
