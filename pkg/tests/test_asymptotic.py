import numpy as np
import pytest
from scipy import special, stats

from extremepy.core.exceptions import InvalidParameterError, UnsupportedModelError
from extremepy.core.observations import ObservationMatrix
from extremepy.core.sites import SiteSet
from extremepy.core.specs import (
    BrownResnickSpec,
    CovarianceSpec,
    ExtremalTSpec,
    RiskFunctional,
    RParetoSpec,
)
from extremepy.asymptotic.exponent import (
    exponent_measure_partial,
    exponent_v,
    exponent_v_partials,
    extremal_coefficient,
    maxstable_density,
    v_pair,
    v_pair_partials,
)
from extremepy.asymptotic.maxstable import (
    fit_maxstable_pairwise,
    maxstable_simulate,
    pairwise_loglik_maxstable,
)
from extremepy.asymptotic.rpareto import (
    angular_profiles,
    censored_loglik_rpareto,
    exceedance_rows,
    fit_rpareto,
    rpareto_simulate,
)
from extremepy.asymptotic.spectral import extremal_t_constant, risk_eval, spectral_profiles
from extremepy.margins.transforms import to_uniform
from extremepy.optimization.hessian import mixed_partial
from .helpers import central_difference, mixed_difference


BR = BrownResnickSpec(phi=1.0, nu=1.0)
ET = ExtremalTSpec(dof=3.0, cov=CovarianceSpec(phi=1.0, nu=1.0))
SPECS = [BR, ET]


def triangle_distances() -> np.ndarray:
    return SiteSet(np.array([[0.0, 0.0], [1.0, 0.0], [0.3, 0.8]])).distance_matrix()


@pytest.mark.parametrize("spec", SPECS, ids=["br", "et"])
def test_exponent_v_univariate(spec):
    dist = triangle_distances()
    assert exponent_v(spec, [2.0, 3.0, 4.0], dist, subset=[1]) == pytest.approx(1 / 3)


def test_brown_resnick_extremal_coefficient():
    h = 1.7
    assert extremal_coefficient(BR, h) == pytest.approx(2 * special.ndtr(np.sqrt(h / 2)))


def test_brown_resnick_independence_limit():
    spec = BR
    z1, z2 = 1.5, 0.7
    assert v_pair(spec, z1, z2, 1e6) == pytest.approx(1 / z1 + 1 / z2, rel=1e-6)
    p = v_pair_partials(spec, z1, z2, 1e6)
    assert p.V1 == pytest.approx(-1 / z1**2, rel=1e-6)
    assert p.V12 == pytest.approx(0.0, abs=1e-8)


@pytest.mark.parametrize("spec", SPECS, ids=["br", "et"])
def test_v_pair_bounds(spec):
    z1, z2 = 1.2, 2.5
    value = v_pair(spec, z1, z2, 0.8)
    assert max(1 / z1, 1 / z2) <= value <= 1 / z1 + 1 / z2


@pytest.mark.parametrize("spec", SPECS, ids=["br", "et"])
def test_v_pair_partials_match_finite_differences(spec):
    z1, z2, h = 1.0, 2.0, 1.0
    v1 = central_difference(lambda x: v_pair(spec, x, z2, h), z1)
    v2 = central_difference(lambda x: v_pair(spec, z1, x, h), z2)
    v12 = mixed_difference(lambda x, y: v_pair(spec, x, y, h), z1, z2)
    assert exponent_v_partials(spec, [z1, z2], h, "1") == pytest.approx(v1, rel=1e-6)
    assert exponent_v_partials(spec, [z1, z2], h, 2) == pytest.approx(v2, rel=1e-6)
    assert exponent_v_partials(spec, [z1, z2], h, "12") == pytest.approx(v12, rel=1e-4)


@pytest.mark.parametrize("spec", SPECS, ids=["br", "et"])
def test_v_pair_partials_homogeneity(spec):
    t = 3.0
    base = v_pair_partials(spec, 1.3, 0.6, 0.9)
    scaled = v_pair_partials(spec, t * 1.3, t * 0.6, 0.9)
    assert scaled.V == pytest.approx(base.V / t)
    assert scaled.V1 == pytest.approx(base.V1 / t**2)
    assert scaled.V12 == pytest.approx(base.V12 / t**3)


def test_exponent_v_partials_rejects_invalid_input():
    with pytest.raises(InvalidParameterError):
        exponent_v_partials(BR, [1.0, 2.0, 3.0], 1.0, "1")
    with pytest.raises(InvalidParameterError):
        exponent_v_partials(BR, [1.0, 2.0], 1.0, "21")
    with pytest.raises(InvalidParameterError):
        v_pair(BR, 0.0, 1.0, 1.0)


@pytest.mark.parametrize("spec", SPECS, ids=["br", "et"])
def test_measure_partial_matches_bivariate_closed_form(spec):
    z = [1.0, 2.0]
    dist = np.array([[0.0, 1.0], [1.0, 0.0]])
    p = v_pair_partials(spec, z[0], z[1], 1.0)
    assert exponent_measure_partial(spec, z, [0], dist) == pytest.approx(-p.V1, rel=1e-8)
    assert exponent_measure_partial(spec, z, [1], dist) == pytest.approx(-p.V2, rel=1e-8)
    assert exponent_measure_partial(spec, z, [0, 1], dist) == pytest.approx(-p.V12, rel=1e-8)


def test_brown_resnick_trivariate_v():
    dist = triangle_distances()
    z = np.array([1.0, 2.0, 1.5])
    value = exponent_v(BR, z, dist)
    assert np.max(1 / z) <= value <= np.sum(1 / z)
    # Homogeneity of order −1
    assert exponent_v(BR, 2.5 * z, dist) == pytest.approx(value / 2.5, rel=1e-9)


def test_trivariate_v_with_independent_site():
    coords = np.array([[0.0, 0.0], [1.0, 0.0], [1e6, 0.0]])
    dist = SiteSet(coords).distance_matrix()
    z = [1.0, 2.0, 1.5]
    expected = v_pair(BR, 1.0, 2.0, 1.0) + 1 / 1.5
    assert exponent_v(BR, z, dist) == pytest.approx(expected, rel=1e-6)


def test_trivariate_measure_partial_matches_mixed_difference():
    dist = triangle_distances()
    z = np.array([1.0, 2.0, 1.5])
    analytic = exponent_measure_partial(BR, z, [0, 1], dist)
    numeric = -mixed_partial(lambda x: exponent_v(BR, x, dist), z, (0, 1), rel_step=1e-3)
    assert analytic == pytest.approx(numeric, rel=1e-3)


def test_exponent_measure_partial_rejects_bad_index_set():
    dist = triangle_distances()
    with pytest.raises(InvalidParameterError):
        exponent_measure_partial(BR, [1.0, 1.0, 1.0], [], dist)
    with pytest.raises(InvalidParameterError):
        exponent_measure_partial(BR, [1.0, 1.0, 1.0], [0, 3], dist)


def test_maxstable_density_univariate():
    z = 1.7
    assert maxstable_density(BR, [z], np.zeros((1, 1))) == pytest.approx(z**-2 * np.exp(-1 / z))


@pytest.mark.parametrize("spec", SPECS, ids=["br", "et"])
def test_maxstable_density_bivariate(spec):
    z1, z2, h = 1.0, 2.0, 1.0
    dist = np.array([[0.0, h], [h, 0.0]])
    density = maxstable_density(spec, [z1, z2], dist)
    assert np.log(density) == pytest.approx(v_pair_partials(spec, z1, z2, h).log_density, rel=1e-8)
    cdf = lambda x, y: np.exp(-v_pair(spec, x, y, h))
    assert density == pytest.approx(mixed_difference(cdf, z1, z2), rel=1e-5)


def test_maxstable_density_dimension_limit():
    sites = SiteSet(np.column_stack([np.arange(7.0), np.zeros(7)]))
    with pytest.raises(UnsupportedModelError):
        maxstable_density(BR, np.ones(7), sites.distance_matrix())


def test_extremal_t_constant_normalizes_profiles(rng):
    # ν=1: E[max(0, ε)] = 1/√(2π)
    assert extremal_t_constant(1.0) == pytest.approx(np.sqrt(2 * np.pi))
    W = spectral_profiles(ET, triangle_distances(), 200_000, rng)
    assert W.mean(axis=0) == pytest.approx(np.ones(3), abs=0.05)


@pytest.mark.parametrize("spec", SPECS, ids=["br", "et"])
def test_normalized_profiles_are_bounded(spec, rng):
    W = spectral_profiles(spec, triangle_distances(), 10_000, rng, normalized=True)
    assert W.sum(axis=1) == pytest.approx(np.full(10_000, 3.0))
    assert np.all(W <= 3.0 + 1e-12)
    assert W.mean(axis=0) == pytest.approx(np.ones(3), abs=0.05)


def test_risk_eval():
    x = np.array([1.0, 3.0, 2.0])
    assert risk_eval(RiskFunctional(tag="max"), x) == 3.0
    assert risk_eval(RiskFunctional(tag="min"), x) == 1.0
    assert risk_eval(RiskFunctional(tag="mean"), x) == 2.0
    assert risk_eval(RiskFunctional(tag="site", site=2), x) == 2.0
    with pytest.raises(InvalidParameterError):
        risk_eval(RiskFunctional(tag="site", site=3), x)


@pytest.mark.parametrize("tag", ["max", "min", "mean", "site"])
def test_risk_eval_homogeneous(tag):
    functional = RiskFunctional(tag=tag, site=1 if tag == "site" else None)
    x = np.array([[1.0, 3.0, 2.0], [0.5, 0.1, 4.0]])
    assert risk_eval(functional, 2.5 * x) == pytest.approx(2.5 * risk_eval(functional, x))


def test_site_functional_needs_index():
    with pytest.raises(ValueError):
        RiskFunctional(tag="site")


def test_maxstable_simulate_univariate_is_frechet():
    sites = SiteSet(np.array([[0.0, 0.0]]))
    obs = maxstable_simulate(BR, sites, n=10_000, seed=3)
    assert obs.scale == "frechet"
    assert stats.kstest(obs.to_numpy()[:, 0], "invweibull", args=(1.0,)).pvalue > 1e-3


def test_maxstable_simulate_reproducible(line_sites):
    a = maxstable_simulate(BR, line_sites, n=20, seed=11).to_numpy()
    b = maxstable_simulate(BR, line_sites, n=20, seed=11).to_numpy()
    assert np.array_equal(a, b)


def test_maxstable_simulate_rejects_bad_accuracy(pair_sites):
    with pytest.raises(InvalidParameterError):
        maxstable_simulate(BR, pair_sites, n=5, seed=0, accuracy=0.0)


@pytest.mark.parametrize("spec", SPECS, ids=["br", "et"])
def test_simulated_extremal_coefficient(spec, pair_sites):
    Z = maxstable_simulate(spec, pair_sites, n=20_000, seed=5).to_numpy()
    # 1/max(Z1, Z2) is exponential with rate θ
    theta_hat = 1.0 / np.mean(1.0 / Z.max(axis=1))
    assert theta_hat == pytest.approx(extremal_coefficient(spec, 1.0), abs=0.05)


def test_simulated_fields_are_max_stable(pair_sites):
    k, n = 4, 5_000
    Z = maxstable_simulate(BR, pair_sites, n=k * n, seed=8).to_numpy()
    pooled = Z.reshape(n, k, 2).max(axis=1) / k
    single = maxstable_simulate(BR, pair_sites, n=n, seed=9).to_numpy()
    assert stats.ks_2samp(pooled.max(axis=1), single.max(axis=1)).pvalue > 1e-3


def test_simulated_chi_u_matches_model(pair_sites):
    u = 0.99
    U = to_uniform(maxstable_simulate(BR, pair_sites, n=50_000, seed=13)).to_numpy()
    empirical = np.mean((U[:, 0] > u) & (U[:, 1] > u)) / np.mean(U[:, 0] > u)
    theta = extremal_coefficient(BR, 1.0)
    assert empirical == pytest.approx((1 - 2 * u + u**theta) / (1 - u), abs=0.1)


def test_pairwise_loglik_bivariate_matches_density(pair_sites):
    Z = maxstable_simulate(BR, pair_sites, n=5, seed=2).to_numpy()
    expected = sum(np.log(maxstable_density(BR, row, pair_sites.distance_matrix())) for row in Z)
    assert pairwise_loglik_maxstable(BR, Z, pair_sites) == pytest.approx(expected, rel=1e-8)


def test_pairwise_loglik_weights(line_sites):
    Z = maxstable_simulate(BR, line_sites, n=30, seed=4).to_numpy()
    assert pairwise_loglik_maxstable(BR, Z, line_sites, weights=np.zeros((5, 5))) == 0.0

    weights = np.zeros((5, 5))
    weights[1, 3] = 1.0
    single = pairwise_loglik_maxstable(BR, Z[:, [1, 3]], line_sites.subset([1, 3]))
    assert pairwise_loglik_maxstable(BR, Z, line_sites, weights=weights) == pytest.approx(single)

    # Only pairs at distance 1 are kept
    nearest = pairwise_loglik_maxstable(BR, Z, line_sites, max_distance=1.0)
    neighbours = sum(
        pairwise_loglik_maxstable(BR, Z[:, [i, i + 1]], line_sites.subset([i, i + 1])) for i in range(4)
    )
    assert nearest == pytest.approx(neighbours)


def test_pairwise_loglik_accepts_uniform_data(pair_sites):
    obs = maxstable_simulate(BR, pair_sites, n=50, seed=6)
    assert pairwise_loglik_maxstable(BR, to_uniform(obs), pair_sites) == pytest.approx(
        pairwise_loglik_maxstable(BR, obs, pair_sites), rel=1e-9
    )


def test_fit_maxstable_with_fixed_smoothness(line_sites):
    truth = BrownResnickSpec(phi=2.0, nu=1.0)
    data = maxstable_simulate(truth, line_sites, n=300, seed=21)
    result = fit_maxstable_pairwise(
        data, line_sites, "brown_resnick", init={"phi": 1.0, "nu": 1.0}, fixed=["nu"], compute_se=False
    )
    assert result.k == 1
    assert result.estimates["nu"] == 1.0
    assert 1.0 < result.estimates["phi"] < 4.0
    assert np.isfinite(result.bic)


@pytest.mark.slow
def test_fit_maxstable_recovers_parameters(grid_sites):
    truth = BrownResnickSpec(phi=2.0, nu=1.2)
    data = maxstable_simulate(truth, grid_sites, n=2_000, seed=22)
    result = fit_maxstable_pairwise(data, grid_sites, "brown_resnick")
    assert result.estimates["phi"] == pytest.approx(2.0, rel=0.2)
    assert result.estimates["nu"] == pytest.approx(1.2, abs=0.15)


def rpareto_spec(tag: str, site: int | None = None) -> RParetoSpec:
    return RParetoSpec(base=BrownResnickSpec(phi=2.0, nu=1.0), functional=RiskFunctional(tag=tag, site=site))


@pytest.mark.parametrize("tag, site", [("max", None), ("mean", None), ("site", 2)])
def test_angular_profiles_have_unit_risk(tag, site, line_sites, rng):
    spec = rpareto_spec(tag, site)
    W = angular_profiles(spec, line_sites, 500, rng)
    assert W.shape == (500, 5)
    assert risk_eval(spec.functional, W) == pytest.approx(np.ones(500), abs=1e-12)


def test_rpareto_exceedance_probability(line_sites):
    spec = rpareto_spec("max")
    X = rpareto_simulate(spec, line_sites, n=100_000, seed=7).to_numpy()
    assert np.mean(X.max(axis=1) > 2.0) == pytest.approx(0.5, abs=0.006)


@pytest.mark.parametrize("tag, site", [("mean", None), ("site", 0)])
def test_rpareto_threshold_stability(tag, site, line_sites):
    spec = rpareto_spec(tag, site)
    X = rpareto_simulate(spec, line_sites, n=20_000, seed=10).to_numpy()
    r = risk_eval(spec.functional, X)
    rescaled = r[r > 2.0] / 2.0
    assert stats.kstest(rescaled, "pareto", args=(1.0,)).pvalue > 1e-3


def test_rpareto_site_index_out_of_range(line_sites, rng):
    with pytest.raises(InvalidParameterError):
        angular_profiles(rpareto_spec("site", 7), line_sites, 10, rng)


def test_exceedance_rows():
    data = np.array([[1.0, 3.0], [1.5, 1.2], [np.nan, 5.0]])
    functional = RiskFunctional(tag="max")
    assert list(exceedance_rows(functional, data, 2.0)) == [0, 2]


def test_censored_loglik_univariate():
    spec = RParetoSpec(base=BR, functional=RiskFunctional(tag="max"))
    sites = SiteSet(np.array([[0.0, 0.0]]))
    y = np.array([[3.0], [5.0], [1.5]])
    expected = np.log(2 / 9) + np.log(2 / 25)
    assert censored_loglik_rpareto(spec, y, sites, 2.0) == pytest.approx(expected)
    with pytest.raises(InvalidParameterError):
        censored_loglik_rpareto(spec, y, sites, 2.0, only_rows_with_exceedance=False)


def test_censored_loglik_is_finite_on_simulated_data(line_sites):
    spec = rpareto_spec("max")
    X = rpareto_simulate(spec, line_sites, n=200, seed=12)
    value = censored_loglik_rpareto(spec, X, line_sites, 2.0)
    assert np.isfinite(value)


def test_fit_rpareto_rejects_min_functional(line_sites):
    data = rpareto_simulate(rpareto_spec("max"), line_sites, n=100, seed=0)
    with pytest.raises(UnsupportedModelError):
        fit_rpareto(to_uniform(data), line_sites, 0.9, RiskFunctional(tag="min"))


@pytest.mark.slow
def test_fit_rpareto_recovers_parameters(line_sites):
    truth = rpareto_spec("max")
    X = rpareto_simulate(truth, line_sites, n=3_000, seed=31).to_numpy()
    data = ObservationMatrix.from_array(X, "pareto")
    result = fit_rpareto(data, line_sites, 0.5, RiskFunctional(tag="max"))
    assert result.estimates["phi"] == pytest.approx(2.0, rel=0.25)
    assert result.estimates["nu"] == pytest.approx(1.0, abs=0.2)
