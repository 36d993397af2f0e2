import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from penprox import LikelihoodFamily, LinearModelData


def random_instance(kind, rng, n=20, p=5, aux=None):
    """A small random data/coefficient instance with valid responses."""
    X = rng.standard_normal((n, p))
    beta = 0.5 * rng.standard_normal(p)
    eta = X @ beta
    if kind == "gaussian":
        y = eta + rng.standard_normal(n)
    elif kind == "bernoulli_logit":
        y = (rng.random(n) < 1.0 / (1.0 + np.exp(-eta))).astype(float)
    elif kind in ("poisson_log", "negbin_log"):
        y = rng.poisson(np.exp(np.clip(eta, -10, 3))).astype(float)
    elif kind == "cauchy":
        y = eta + rng.standard_cauchy(n)
    else:
        raise ValueError(kind)
    fam = LikelihoodFamily(kind, aux=aux, fit_aux=(kind == "negbin_log"))
    return fam, LinearModelData(X, y), 0.3 * rng.standard_normal(p)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
