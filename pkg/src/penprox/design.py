"""Data ingestion, standardization and on-the-fly second-order expansion.

A :class:`Dataset` stores the base design matrix; when a second-order
expansion is attached, model rows (mains, squares, pairwise products) are
built per row block on demand so the full expanded matrix need never be
materialized.  The intercept column, when requested, is appended after
standardization and expansion as the last, unpenalized column.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import DataError
from .likelihoods import LikelihoodFamily, LinearModelData
from .priors import GroupStructure

__all__ = [
    "DesignSpec",
    "ExpansionMap",
    "Dataset",
    "load_csv",
    "standardize_columns",
    "second_order_map",
    "expand_second_order",
    "hierarchical_groups",
]


@dataclass(frozen=True)
class DesignSpec:
    """How to turn a tabular file into a Dataset."""

    source: str
    response_column: str
    standardize: bool = True
    intercept: bool = True
    second_order: bool = False


@dataclass(frozen=True)
class ExpansionMap:
    """Fixed column order for the second-order model of P base predictors.

    Columns are the P mains, then the P squares, then the C(P,2) pairwise
    products in lexicographic (i, j) order, 2P + P(P-1)/2 in total.
    """

    base_p: int
    pairs: tuple = field(repr=False, default=())

    def __post_init__(self):
        if self.base_p < 1:
            raise ValueError("base_p must be >= 1")
        if not self.pairs:
            object.__setattr__(
                self, "pairs", tuple(itertools.combinations(range(self.base_p), 2))
            )

    @property
    def n_expanded(self) -> int:
        return 2 * self.base_p + self.base_p * (self.base_p - 1) // 2

    def column_kinds(self):
        """(kind, parents) per expanded column, kind in {main, quadratic, interaction}."""
        out = [("main", (i,)) for i in range(self.base_p)]
        out += [("quadratic", (i,)) for i in range(self.base_p)]
        out += [("interaction", pair) for pair in self.pairs]
        return out

    def column_names(self, base_names=None):
        names = base_names or [f"x{i}" for i in range(self.base_p)]
        out = list(names)
        out += [f"{n}^2" for n in names]
        out += [f"{names[i]}*{names[j]}" for i, j in self.pairs]
        return out


def second_order_map(p: int) -> ExpansionMap:
    return ExpansionMap(base_p=p)


def expand_second_order(xrow: np.ndarray, emap: ExpansionMap) -> np.ndarray:
    """Expand one row (length P) to mains, squares and products.

    Accepts a 2-d block of rows as well; expansion is row-wise and order
    stable, so per-minibatch use composes exactly with full materialization.
    """
    x = np.asarray(xrow, dtype=float)
    one = x.ndim == 1
    if one:
        x = x[None, :]
    if x.shape[1] != emap.base_p:
        raise ValueError(f"row length {x.shape[1]} != base_p {emap.base_p}")
    cols = [x, x * x]
    if emap.pairs:
        idx_i = np.fromiter((i for i, _ in emap.pairs), dtype=int)
        idx_j = np.fromiter((j for _, j in emap.pairs), dtype=int)
        cols.append(x[:, idx_i] * x[:, idx_j])
    out = np.concatenate(cols, axis=1)
    return out[0] if one else out


def hierarchical_groups(p: int) -> GroupStructure:
    """One overlapping group per unordered pair of base predictors.

    Group (i, j) contains the two mains, the two quadratics and the (i, j)
    interaction of the second-order model, so each main and quadratic sits
    in p - 1 groups and each interaction in exactly one.
    """
    if p < 2:
        raise ValueError("hierarchical groups need at least 2 base predictors")
    emap = second_order_map(p)
    pair_index = {pair: g for g, pair in enumerate(emap.pairs)}
    memberships = []
    for i in range(p):  # mains
        memberships.append([pair_index[tuple(sorted((i, j)))] for j in range(p) if j != i])
    for i in range(p):  # quadratics
        memberships.append([pair_index[tuple(sorted((i, j)))] for j in range(p) if j != i])
    for pair in emap.pairs:  # interactions
        memberships.append([pair_index[pair]])
    return GroupStructure(memberships, n_groups=len(emap.pairs))


@dataclass
class Dataset:
    """Design matrix, response and model-column metadata.

    X holds the base predictors (standardized when built by load_csv);
    model columns are the expanded columns when an expansion is attached,
    plus a trailing intercept column when ``intercept`` is set.  Penalized
    columns always form a prefix of the model columns.
    """

    X: np.ndarray
    y: np.ndarray
    family: LikelihoodFamily | None = None
    weights: np.ndarray | None = None
    expansion: ExpansionMap | None = None
    intercept: bool = False
    feature_names: list | None = None
    center: np.ndarray | None = None
    scale: np.ndarray | None = None
    holdout: np.ndarray | None = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.X.ndim != 2:
            raise DataError("X must be 2-d")
        if self.y.shape != (self.X.shape[0],):
            raise DataError("y length must match X rows")
        if not np.all(np.isfinite(self.X)) or not np.all(np.isfinite(self.y)):
            raise DataError("non-finite entries in X or y")
        if self.expansion is not None and self.expansion.base_p != self.X.shape[1]:
            raise DataError("expansion base_p must match X columns")

    @property
    def n_obs(self) -> int:
        return self.X.shape[0]

    @property
    def n_penalized(self) -> int:
        base = self.expansion.n_expanded if self.expansion else self.X.shape[1]
        return base

    @property
    def n_model_columns(self) -> int:
        return self.n_penalized + (1 if self.intercept else 0)

    def model_column_names(self) -> list:
        names = self.feature_names or [f"x{i}" for i in range(self.X.shape[1])]
        cols = self.expansion.column_names(list(names)) if self.expansion else list(names)
        if self.intercept:
            cols.append("(intercept)")
        return cols

    def model_rows(self, idx=None) -> np.ndarray:
        """Model-matrix rows (expanded, intercept appended) for given rows."""
        rows = self.X if idx is None else self.X[idx]
        if self.expansion is not None:
            rows = expand_second_order(rows, self.expansion)
        if self.intercept:
            rows = np.column_stack([rows, np.ones(rows.shape[0])])
        return rows

    def model_data(self, idx=None) -> LinearModelData:
        y = self.y if idx is None else self.y[idx]
        w = None
        if self.weights is not None:
            w = self.weights if idx is None else self.weights[idx]
        return LinearModelData(self.model_rows(idx), y, w)

    def original_scale_coefficients(self, beta: np.ndarray):
        """Map standardized-basis coefficients back to the source columns.

        Only defined without an expansion (expanded columns are built from
        standardized mains); returns (coefs, intercept).
        """
        if self.expansion is not None:
            return None
        beta = np.asarray(beta, dtype=float)
        p = self.X.shape[1]
        scale = self.scale if self.scale is not None else np.ones(p)
        center = self.center if self.center is not None else np.zeros(p)
        coefs = beta[:p] / scale
        icept = float(beta[p]) if self.intercept else 0.0
        icept -= float(np.sum(coefs * center))
        return coefs, icept


def standardize_columns(X: np.ndarray):
    """Center to mean 0 and scale to sd 1; constant columns center only.

    Returns (X_std, center, scale, constant_mask); constant columns keep
    scale 1 and are flagged.
    """
    X = np.asarray(X, dtype=float)
    center = X.mean(axis=0)
    sd = X.std(axis=0)
    constant = sd < 1e-12
    scale = np.where(constant, 1.0, sd)
    return (X - center) / scale, center, scale, constant


def load_csv(spec: DesignSpec, family: LikelihoodFamily | None = None) -> Dataset:
    """Read a header CSV into a Dataset per the design spec."""
    try:
        frame = pd.read_csv(spec.source)
    except FileNotFoundError as exc:
        raise DataError(f"cannot read {spec.source}: {exc}") from exc
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as exc:
        raise DataError(f"malformed CSV {spec.source}: {exc}") from exc
    if frame.shape[0] == 0:
        raise DataError(f"{spec.source}: no data rows")
    if spec.response_column not in frame.columns:
        raise DataError(f"{spec.source}: missing response column {spec.response_column!r}")
    y = pd.to_numeric(frame[spec.response_column], errors="coerce").to_numpy(dtype=float)
    feats = frame.drop(columns=[spec.response_column])
    if feats.shape[1] == 0:
        raise DataError(f"{spec.source}: no feature columns")
    X = feats.apply(lambda c: pd.to_numeric(c, errors="coerce")).to_numpy(dtype=float)
    if np.isnan(y).any() or np.isnan(X).any():
        raise DataError(f"{spec.source}: non-numeric or missing cells")

    center = scale = None
    if spec.standardize:
        X, center, scale, _ = standardize_columns(X)
    if family is not None:
        family.validate_response(y)
    return Dataset(
        X=X,
        y=y,
        family=family,
        expansion=second_order_map(X.shape[1]) if spec.second_order else None,
        intercept=spec.intercept,
        feature_names=list(feats.columns),
        center=center,
        scale=scale,
    )
