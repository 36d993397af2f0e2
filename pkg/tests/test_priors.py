import numpy as np
import pytest
from scipy import stats

from penprox import (
    GroupStructure,
    PriorSpec,
    finite_diff_check_prior,
    grad_log_prior,
    hierarchical_groups,
    log_prior,
    read_group_file,
    smooth_min,
    write_group_file,
)


def _random_grouped(rng, kind, p=12, n_groups=4, n_obs=400):
    if kind == "sparse_group":
        ids = rng.integers(0, n_groups, size=p)
        ids[:n_groups] = np.arange(n_groups)  # every group nonempty
        groups = GroupStructure.from_group_ids(ids)
    else:
        memberships = [rng.choice(n_groups, size=rng.integers(1, 4), replace=False) for _ in range(p)]
        for g in range(n_groups):
            memberships[g % p] = np.union1d(memberships[g % p], [g])
        groups = GroupStructure(memberships, n_groups=n_groups)
    spec = PriorSpec(kind, groups=groups).resolve(n_obs, p)
    lam = np.abs(rng.standard_normal(p)) + 0.2
    gamma = np.abs(rng.standard_normal(groups.n_groups)) + 0.3
    return spec, lam, gamma


def test_independent_values():
    spec = PriorSpec()
    assert log_prior(spec, np.array([1.0])) == pytest.approx(np.log(1.0 / np.pi))
    # density mode at the origin, approached from above
    assert log_prior(spec, np.array([1e-12])) == pytest.approx(np.log(2.0 / np.pi), abs=1e-9)


def test_independent_gradient_values():
    spec = PriorSpec()
    dlam, dgam = grad_log_prior(spec, np.array([1.0]))
    assert dlam[0] == pytest.approx(-1.0)
    assert dgam is None
    dlam, _ = grad_log_prior(spec, np.array([1e-14]))
    assert dlam[0] == pytest.approx(0.0, abs=1e-12)


def test_independent_log_derivative_bounded():
    lam = np.geomspace(1e-6, 1e6, 500)
    dlam, _ = grad_log_prior(PriorSpec(), lam)
    assert np.all(np.abs(dlam) <= 1.0 + 1e-12)


def test_sparse_group_matches_reference_truncnorm():
    groups = GroupStructure.from_group_ids([0])
    spec = PriorSpec("sparse_group", groups=groups).resolve(100, 1)
    s = 1.0 / np.sqrt(100)
    lam, gamma = np.array([1.0]), np.array([1.0])
    ref = stats.truncnorm.logpdf(lam[0], a=-gamma[0] / s, b=np.inf, loc=gamma[0], scale=s)
    ref += np.log(2.0 / (np.pi * (1.0 + gamma[0] ** 2)))
    assert log_prior(spec, lam, gamma) == pytest.approx(ref, rel=1e-10)


def test_smooth_min_basics(rng):
    assert smooth_min([3.7], 10.0) == pytest.approx(3.7)
    assert smooth_min([1.0, 1.0], 0.3) == pytest.approx(1.0)
    v = smooth_min([0.1, 10.0], np.sqrt(2.0))
    assert 0.1 < v < 10.0
    assert v < 0.5 * (0.1 + 10.0)


def test_smooth_min_bounds_and_permutation_invariance(rng):
    for _ in range(100):
        g = np.abs(rng.standard_normal(rng.integers(1, 8))) + 0.01
        t = rng.uniform(0.1, 5.0)
        v = smooth_min(g, t)
        assert g.min() - 1e-12 <= v <= g.max() + 1e-12
        assert smooth_min(rng.permutation(g), t) == pytest.approx(v, rel=1e-12)


def test_smooth_min_empty_errors():
    with pytest.raises(ValueError):
        smooth_min([], 1.0)


@pytest.mark.parametrize("kind", ["independent_half_cauchy", "sparse_group", "overlapping_group"])
def test_gradients_match_finite_differences(kind):
    rng = np.random.default_rng(11)
    for _ in range(100):
        if kind == "independent_half_cauchy":
            spec = PriorSpec()
            lam = np.abs(rng.standard_normal(8)) + 0.2
            gamma = None
        else:
            spec, lam, gamma = _random_grouped(rng, kind)
        assert finite_diff_check_prior(spec, lam, gamma) < 1e-5


def test_domain_errors():
    spec = PriorSpec()
    with pytest.raises(ValueError):
        log_prior(spec, np.array([0.0]))
    with pytest.raises(ValueError):
        log_prior(spec, np.array([-1.0]))
    groups = GroupStructure.from_group_ids([0, 0, 1])
    gspec = PriorSpec("sparse_group", groups=groups).resolve(50, 3)
    with pytest.raises(ValueError):
        log_prior(gspec, np.array([1.0, 1.0, 1.0]), np.array([1.0, -2.0]))


def test_group_structure_validation():
    with pytest.raises(ValueError):
        GroupStructure([[0], [2]])  # group index 1 empty
    with pytest.raises(ValueError):
        GroupStructure([[0], []])
    gs = GroupStructure([[0, 1], [1], [0]])
    assert gs.n_groups == 2
    assert not gs.is_partition
    with pytest.raises(ValueError):
        PriorSpec("sparse_group", groups=gs)
    with pytest.raises(ValueError):
        PriorSpec("sparse_group")


def test_prior_requires_resolution():
    groups = GroupStructure.from_group_ids([0, 1])
    spec = PriorSpec("sparse_group", groups=groups)
    with pytest.raises(ValueError):
        log_prior(spec, np.array([1.0, 1.0]), np.array([1.0, 1.0]))


def test_group_file_round_trip(tmp_path):
    gs = hierarchical_groups(4)
    path = tmp_path / "groups.csv"
    write_group_file(path, gs)
    back = read_group_file(path)
    assert back.n_groups == gs.n_groups
    for a, b in zip(gs.memberships, back.memberships):
        assert np.array_equal(a, b)


def test_group_file_overlap_rows(tmp_path):
    path = tmp_path / "g.csv"
    path.write_text("0,0\n0,1\n1,1\n2,0\n")
    gs = read_group_file(path)
    assert gs.n_predictors == 3
    assert np.array_equal(gs.memberships[0], [0, 1])
    assert gs.memberships[1].tolist() == [1]


def test_group_file_errors(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("0,0,9\n")
    with pytest.raises(ValueError):
        read_group_file(path)
    path.write_text("")
    with pytest.raises(ValueError):
        read_group_file(path)
