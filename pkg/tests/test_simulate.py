import numpy as np
import pytest

from penprox import SynthSpec, generate


def test_reproducible_bit_identical():
    spec = SynthSpec(n=100, p=20, n_active=4, seed=5)
    a = generate(spec)
    b = generate(spec)
    assert np.array_equal(a[0].X, b[0].X)
    assert np.array_equal(a[0].y, b[0].y)
    assert np.array_equal(a[1], b[1])


def test_independent_structure_counts():
    ds, beta, groups = generate(SynthSpec(n=50, p=30, n_active=7, seed=1))
    assert groups is None
    assert np.count_nonzero(beta) == 7
    assert ds.X.shape == (50, 30)


def test_column_moments_near_standard():
    n = 2000
    ds, beta, _ = generate(SynthSpec(n=n, p=200, n_active=10, seed=3))
    tol = 3.0 / np.sqrt(n)
    assert np.all(np.abs(ds.X.mean(axis=0)) < tol)
    assert np.all(np.abs(ds.X.std(axis=0) - 1.0) < tol)


def test_group_structure_jointly_nonzero():
    ds, beta, groups = generate(
        SynthSpec(structure="group", n=100, p=40, n_active=3, group_size=5, seed=2)
    )
    assert groups is not None and groups.is_partition
    ids = groups.group_ids()
    active_groups = np.unique(ids[beta != 0])
    assert active_groups.size == 3
    for g in active_groups:
        assert np.all(beta[groups.members(int(g))] != 0)
    for g in range(groups.n_groups):
        if g not in active_groups:
            assert np.all(beta[groups.members(int(g))] == 0)


def test_hierarchical_structure_whole_pair_groups():
    ds, beta, groups = generate(
        SynthSpec(structure="hierarchical", n=60, p=6, n_active=2, seed=4)
    )
    assert ds.expansion is not None
    assert beta.size == 2 * 6 + 15
    active_groups = [g for g in range(groups.n_groups)
                     if np.all(beta[groups.members(g)] != 0)]
    assert len(active_groups) == 2
    # nonzeros are exactly the union of the two whole pair groups
    active_members = np.unique(np.concatenate([groups.members(g) for g in active_groups]))
    assert np.array_equal(np.nonzero(beta)[0], active_members)


def test_hierarchical_expanded_count_p45():
    ds, beta, groups = generate(
        SynthSpec(structure="hierarchical", n=10, p=45, n_active=10, seed=0)
    )
    assert beta.size == 45 * 2 + 45 * 44 // 2 == 1080
    assert groups.n_groups == 990


def test_oracle_least_squares_recovers_truth():
    errs = []
    for n in (500, 2000, 8000):
        ds, beta, _ = generate(SynthSpec(n=n, p=20, n_active=5, seed=11))
        support = np.nonzero(beta)[0]
        bhat = np.linalg.lstsq(ds.X[:, support], ds.y, rcond=None)[0]
        errs.append(np.max(np.abs(bhat - beta[support])))
    # error shrinks like 1/sqrt(n)
    assert errs[0] < 0.2
    assert errs[2] < errs[0]


@pytest.mark.parametrize("family", ["bernoulli_logit", "poisson_log", "negbin_log", "cauchy"])
def test_families_draw_valid_responses(family):
    ds, beta, _ = generate(SynthSpec(family=family, n=200, p=10, n_active=3, seed=8))
    ds.family.validate_response(ds.y)


def test_inconsistent_specs_rejected():
    with pytest.raises(ValueError):
        SynthSpec(structure="group", n=10, p=10, n_active=3, group_size=5)
    with pytest.raises(ValueError):
        SynthSpec(n=10, p=5, n_active=6)
    with pytest.raises(ValueError):
        SynthSpec(structure="hierarchical", p=1)
    with pytest.raises(ValueError):
        SynthSpec(structure="tree")
