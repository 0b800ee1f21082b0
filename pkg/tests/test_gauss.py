import numpy as np
import pytest
from scipy import stats

from extremepy.core.exceptions import InvalidParameterError, NumericalFailure
from extremepy.core.sites import SiteSet
from extremepy.core.specs import Anisotropy, CovarianceSpec
from extremepy.gauss.covariance import (
    correlation,
    correlation_matrix,
    mahalanobis_distance,
    robust_cholesky,
    transform_sites,
)
from extremepy.gauss.qmc import bvn_cdf, mvn_cdf, mvn_cdf_batch, mvt_cdf, sobol_points
from extremepy.gauss.simulation import gp_condition_zero, gp_simulate


def equicorrelation(d: int, rho: float) -> np.ndarray:
    return np.full((d, d), rho) + (1 - rho) * np.eye(d)


def test_correlation_values():
    spec = CovarianceSpec(phi=1.0, nu=1.0, aniso=Anisotropy(psi=0.7, L=1.0))
    assert correlation(spec, (0.3, 0.4), (0.3, 0.4)) == 1.0
    # With L=1 the rotation leaves distances unchanged
    assert correlation(spec, (0.0, 0.0), (1.0, 0.0)) == pytest.approx(np.exp(-1))


def test_transform_sites_identity():
    sites = SiteSet(np.array([[1.0, 2.0], [-3.0, 0.5]]))
    assert transform_sites(sites, 0.0, 1.0).coords == pytest.approx(sites.coords)


def test_transform_sites_rotation_and_stretch():
    sites = SiteSet(np.array([[1.0, 0.0]]))
    coords = transform_sites(sites, -1.08, 0.53).coords[0]
    assert coords == pytest.approx([0.4713, 0.4674], abs=1e-4)


def test_transform_sites_is_not_a_group_when_stretched():
    sites = SiteSet(np.array([[1.0, 0.0], [0.0, 1.0]]))
    psi = np.pi / 4 - 0.01
    twice = transform_sites(transform_sites(sites, psi, 0.5), psi, 0.5)
    once = transform_sites(sites, 2 * psi, 0.5)
    assert not np.allclose(twice.coords, once.coords)


def test_transformed_distance_matches_mahalanobis(rng):
    coords = rng.uniform(-5, 5, size=(6, 2))
    aniso = Anisotropy(psi=0.4, L=0.3)
    transformed = transform_sites(SiteSet(coords), aniso.psi, aniso.L)
    dist = transformed.distance_matrix()
    for i, j in [(0, 1), (2, 5), (3, 4)]:
        assert dist[i, j] == pytest.approx(mahalanobis_distance(coords[i], coords[j], aniso), abs=1e-12)


def test_correlation_matrix_has_unit_diagonal(grid_sites):
    corr = correlation_matrix(grid_sites, CovarianceSpec(phi=2.0, nu=1.5))
    assert np.diag(corr) == pytest.approx(np.ones(9))
    assert np.allclose(corr, corr.T)


def test_robust_cholesky_singular_matrix():
    C = np.ones((3, 3))
    L = robust_cholesky(C)
    assert L @ L.T == pytest.approx(C, abs=1e-5)


def test_robust_cholesky_gives_up_on_indefinite_matrix():
    with pytest.raises(NumericalFailure):
        robust_cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_gp_simulate_unit_variance():
    sites = SiteSet(np.array([[0.0, 0.0]]))
    obs = gp_simulate(sites, CovarianceSpec(phi=1.0, nu=1.0), n=20_000, seed=1)
    assert obs.scale == "normal"
    assert obs.to_numpy().var() == pytest.approx(1.0, abs=0.05)


def test_gp_simulate_pair_correlation():
    h = -np.log(0.8)
    sites = SiteSet(np.array([[0.0, 0.0], [h, 0.0]]))
    draws = gp_simulate(sites, CovarianceSpec(phi=1.0, nu=1.0), n=100_000, seed=2).to_numpy()
    assert np.corrcoef(draws.T)[0, 1] == pytest.approx(0.8, abs=0.01)


def test_gp_simulate_reproducible(line_sites):
    spec = CovarianceSpec(phi=2.0, nu=1.0)
    a = gp_simulate(line_sites, spec, n=50, seed=9).to_numpy()
    b = gp_simulate(line_sites, spec, n=50, seed=9).to_numpy()
    assert np.array_equal(a, b)


def test_gp_condition_zero():
    h = np.log(2.0)
    sites = SiteSet(np.array([[0.0, 0.0], [h, 0.0], [1e3, 0.0]]))
    law = gp_condition_zero(sites, 0, CovarianceSpec(phi=1.0, nu=1.0))
    cov = law["cov"]
    assert cov[0, 0] == 0.0
    assert cov[1, 1] == pytest.approx(1 - 0.25)
    assert cov[2, 2] == pytest.approx(1.0)
    assert law["mean"] == pytest.approx(np.zeros(3))


def test_gp_condition_zero_index_out_of_range(pair_sites):
    with pytest.raises(IndexError):
        gp_condition_zero(pair_sites, 2, CovarianceSpec(phi=1.0, nu=1.0))


def test_sobol_points_balanced_and_scrambled():
    pts = sobol_points(1_000, 3, np.random.default_rng(0))
    assert pts.shape == (1_024, 3)
    # Each coordinate puts exactly one point in every cell of width 1/1024
    for j in range(3):
        cells = np.floor(pts[:, j] * 1_024).astype(int)
        assert np.array_equal(np.sort(cells), np.arange(1_024))
    assert np.array_equal(pts, sobol_points(1_000, 3, np.random.default_rng(0)))
    assert not np.array_equal(pts, sobol_points(1_000, 3, np.random.default_rng(1)))


@pytest.mark.parametrize(
    "upper, corr, expected",
    [
        ([0.0], [[1.0]], 0.5),
        ([0.0, 0.0], np.eye(2), 0.25),
        ([0.0, 0.0], equicorrelation(2, 0.5), 1 / 3),
        ([0.0, 0.0, np.inf], equicorrelation(3, 0.5), 1 / 3),
        ([0.0, 0.0, 0.0], np.eye(3), 0.125),
    ],
)
def test_mvn_cdf_exact_values(upper, corr, expected):
    assert mvn_cdf(upper, corr)["prob"] == pytest.approx(expected, abs=1e-8)


def test_mvn_cdf_trivariate_orthant():
    # 1/8 + 3·asin(ρ)/(4π)
    result = mvn_cdf([0.0, 0.0, 0.0], equicorrelation(3, 0.5), seed=4)
    assert result["prob"] == pytest.approx(0.25, abs=2e-3)
    assert result["error_estimate"] < 5e-3


def test_mvn_cdf_negative_infinite_limit():
    assert mvn_cdf([-np.inf, 1.0, 2.0], equicorrelation(3, 0.2))["prob"] == 0.0


def test_mvn_cdf_monotone_in_limits():
    corr = equicorrelation(2, 0.3)
    probs = [mvn_cdf([a, a + 0.5], corr)["prob"] for a in np.linspace(-2, 2, 9)]
    assert np.all(np.diff(probs) > 0)


def test_mvn_cdf_rejects_invalid_correlation():
    with pytest.raises(InvalidParameterError):
        mvn_cdf([0.0, 0.0, 0.0], np.array([[1, 0.9, -0.9], [0.9, 1, 0.9], [-0.9, 0.9, 1]]))
    with pytest.raises(InvalidParameterError):
        mvn_cdf([0.0, 0.0], np.eye(3))


@pytest.mark.parametrize(
    "h, k, rho",
    [(0.3, -0.5, 0.4), (1.2, 0.7, -0.6), (-1.0, -2.0, 0.9), (2.0, 0.1, 0.0)],
)
def test_bvn_cdf_against_scipy(h, k, rho):
    expected = stats.multivariate_normal(mean=[0, 0], cov=[[1, rho], [rho, 1]]).cdf([h, k])
    assert bvn_cdf(h, k, rho) == pytest.approx(expected, abs=2e-5)


def test_bvn_cdf_perfect_dependence():
    assert bvn_cdf(0.5, 1.0, 1.0) == pytest.approx(stats.norm.cdf(0.5))
    assert bvn_cdf(0.5, 1.0, -1.0) == pytest.approx(stats.norm.cdf(0.5) + stats.norm.cdf(1.0) - 1)


def test_mvn_cdf_batch_matches_single_evaluations():
    corr = equicorrelation(3, 0.4)
    uppers = np.array([[0.0, 0.5, -0.3], [1.0, 1.0, 1.0]])
    batch = mvn_cdf_batch(uppers, corr, n_points=4_000, seed=1)
    for row, value in zip(uppers, batch):
        assert value == pytest.approx(mvn_cdf(row, corr)["prob"], abs=1e-2)


@pytest.mark.parametrize(
    "upper, dof, corr, expected",
    [
        ([0.0], 3.0, [[1.0]], 0.5),
        ([0.0, 0.0], 1.0, np.eye(2), 0.25),
        ([0.0, 0.0], 1e6, equicorrelation(2, 0.5), 1 / 3),
    ],
)
def test_mvt_cdf_values(upper, dof, corr, expected):
    assert mvt_cdf(upper, corr, dof)["prob"] == pytest.approx(expected, abs=1e-4)


def test_mvt_cdf_univariate_matches_student_t():
    assert mvt_cdf([1.3], [[1.0]], 4.0)["prob"] == pytest.approx(stats.t.cdf(1.3, 4.0))


def test_mvt_cdf_approaches_normal_for_large_dof():
    corr = equicorrelation(3, 0.3)
    upper = [0.5, 1.0, 0.2]
    assert mvt_cdf(upper, corr, 1e6, seed=2)["prob"] == pytest.approx(
        mvn_cdf(upper, corr, seed=2)["prob"], abs=3e-3
    )


def test_mvt_cdf_rejects_non_positive_dof():
    with pytest.raises(InvalidParameterError):
        mvt_cdf([0.0, 0.0], np.eye(2), 0.0)
