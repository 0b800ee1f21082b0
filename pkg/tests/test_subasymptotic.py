import numpy as np
import pytest
from scipy import special, stats

from extremepy.core.exceptions import InsufficientDataError, InvalidParameterError
from extremepy.core.observations import ObservationMatrix
from extremepy.core.sites import SiteSet
from extremepy.core.specs import (
    BrownResnickSpec,
    CovarianceSpec,
    GaussianCopulaSpec,
    HotSpec,
    HwSpec,
    ImsSpec,
    LocationMixtureSpec,
    MaxMixSpec,
)
from extremepy.asymptotic.exponent import extremal_coefficient, v_pair
from extremepy.subasymptotic import (
    censored_loglik_mixture,
    fit_mixture,
    fit_pairwise_sub,
    hot_fr,
    hw_marginal,
    ims_bivariate,
    ims_simulate,
    marginal_eval,
    maxmix_bivariate_cdf,
    maxmix_partials,
    maxmix_simulate,
    mixture_cdf,
    mixture_simulate,
    mixture_to_uniform,
    pairwise_loglik_sub,
)
from extremepy.subasymptotic.mixtures import marginal_quantile, mixture_kernel
from extremepy.subasymptotic.simulation import location_radius
from extremepy.types import MarginScales
from .helpers import central_difference, mixed_difference


COV = CovarianceSpec(phi=1.0, nu=1.0)
BR = BrownResnickSpec(phi=1.0, nu=1.0)


# ------------
# Radial law
# ------------
@pytest.mark.parametrize(
    "beta, gamma, r, expected",
    [
        (1.0, 1.0, 1.0, 0.0),
        (0.0, 1.0, 2.0, 0.5),
        (2.0, 2.0, 2.0, 1 - np.exp(-3.0)),
        (1.0, 0.5, 0.5, 0.0),
    ],
)
def test_hot_radial_cdf(beta, gamma, r, expected):
    assert hot_fr(r, HotSpec(beta=beta, gamma=gamma, cov=COV)) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("beta", [0.0, 0.5, 2.0])
def test_hot_radial_quantile_inverts_cdf(beta):
    spec = HotSpec(beta=beta, gamma=1.5, cov=COV)
    p = np.array([0.01, 0.3, 0.9, 0.999])
    assert hot_fr(hot_fr(p, spec, "quantile"), spec) == pytest.approx(p, abs=1e-12)


def test_hot_radial_pdf_is_derivative():
    spec = HotSpec(beta=0.7, gamma=1.2, cov=COV)
    for r in (1.5, 3.0):
        assert hot_fr(r, spec, "pdf") == pytest.approx(central_difference(lambda x: hot_fr(x, spec), r), rel=1e-6)


def test_hot_radial_quantile_rejects_boundary():
    with pytest.raises(InvalidParameterError):
        hot_fr(1.0, HotSpec(beta=1.0, gamma=1.0, cov=COV), "quantile")


# -------
# Margins
# -------
def test_hw_marginal_half_delta():
    assert hw_marginal(np.e, 0.5, "survival") == pytest.approx(3 * np.exp(-2.0))
    assert hw_marginal(1.0, 0.5, "cdf") == 0.0
    assert hw_marginal(0.5, 0.5, "survival") == 1.0


def test_hw_marginal_general_delta():
    x = 2.5
    expected = 1.5 * x ** (-4 / 3) - 0.5 * x**-4
    assert hw_marginal(x, 0.25, "survival") == pytest.approx(expected)


def test_hw_marginal_continuous_at_half():
    assert hw_marginal(3.0, 0.5 + 1e-4, "cdf") == pytest.approx(hw_marginal(3.0, 0.5, "cdf"), abs=1e-4)


@pytest.mark.parametrize("delta", [0.3, 0.5, 0.8])
def test_hw_marginal_pdf_is_derivative(delta):
    f = lambda x: hw_marginal(x, delta, "cdf")  # noqa: E731
    assert hw_marginal(2.0, delta, "pdf") == pytest.approx(central_difference(f, 2.0), rel=1e-6)


@pytest.mark.parametrize("delta", [0.3, 0.7])
def test_hw_marginal_quantile_inverts_cdf(delta):
    p = np.array([0.2, 0.9, 0.999])
    x = hw_marginal(p, delta, "quantile")
    assert hw_marginal(x, delta, "cdf") == pytest.approx(p, abs=1e-8)


def test_hw_marginal_rejects_delta_outside_unit_interval():
    with pytest.raises(InvalidParameterError):
        hw_marginal(2.0, 1.0)


def test_gaussian_marginal_is_standard_normal():
    model = GaussianCopulaSpec(cov=COV)
    assert marginal_eval(model, 1.0) == pytest.approx(special.ndtr(1.0))
    assert marginal_eval(model, 0.975, "quantile") == pytest.approx(stats.norm.ppf(0.975))


def test_hot_marginal_symmetric_about_zero():
    model = HotSpec(beta=0.5, gamma=1.0, cov=COV)
    assert marginal_eval(model, 0.0) == pytest.approx(0.5, abs=1e-10)
    lower, upper = marginal_eval(model, np.array([-1.3, 1.3]))
    assert lower + upper == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("p", [0.2, 0.9, 0.99])
def test_hot_marginal_quantile_inverts_cdf(p):
    kernel = mixture_kernel(HotSpec(beta=1.0, gamma=2.0, cov=COV))
    x = marginal_quantile(kernel, p)
    assert float(kernel.marginal(x, "cdf")[0]) == pytest.approx(p, abs=1e-7)


def test_hot_marginal_matches_simulation(pair_sites):
    model = HotSpec(beta=1.0, gamma=1.0, cov=COV)
    draws = mixture_simulate(model, pair_sites, n=200_000, seed=3).to_numpy()[:, 0]
    for x in (0.5, 2.0):
        assert np.mean(draws <= x) == pytest.approx(float(marginal_eval(model, x)[0]), abs=5e-3)


def test_marginal_quantile_rejects_boundary():
    with pytest.raises(InvalidParameterError):
        marginal_quantile(mixture_kernel(HwSpec(delta=0.5, cov=COV)), 1.0)


# -------------------
# Joint distribution
# -------------------
def test_mixture_cdf_orthant_with_independent_gaussians():
    # F_W(0/r) does not depend on r
    for model in (GaussianCopulaSpec(cov=COV), HotSpec(beta=0.5, gamma=1.0, cov=COV)):
        assert mixture_cdf(model, [0.0, 0.0], corr=np.eye(2)) == pytest.approx(0.25, abs=1e-8)


def test_mixture_cdf_univariate_matches_hw_margin():
    model = HwSpec(delta=0.4, cov=COV)
    for x in (1.5, 4.0):
        assert mixture_cdf(model, [x]) == pytest.approx(hw_marginal(x, 0.4), abs=1e-5)


def test_mixture_cdf_uses_site_correlation(pair_sites):
    model = GaussianCopulaSpec(cov=COV)
    rho = np.exp(-1.0)
    expected = stats.multivariate_normal(mean=[0, 0], cov=[[1, rho], [rho, 1]]).cdf([0.3, -0.2])
    assert mixture_cdf(model, [0.3, -0.2], sites=pair_sites) == pytest.approx(expected, abs=5e-5)


def test_mixture_cdf_rejects_mismatched_correlation():
    with pytest.raises(InvalidParameterError):
        mixture_cdf(GaussianCopulaSpec(cov=COV), [0.0, 0.0], corr=np.eye(3))


# ----------
# Simulation
# ----------
def test_mixture_simulate_scales(pair_sites):
    gaussian = mixture_simulate(GaussianCopulaSpec(cov=COV), pair_sites, n=10, seed=0)
    assert gaussian.scale == MarginScales.NORMAL
    hw = mixture_simulate(HwSpec(delta=0.6, cov=COV), pair_sites, n=1_000, seed=0)
    assert hw.scale == MarginScales.RAW
    assert hw.to_numpy().min() >= 1.0


def test_mixture_to_uniform_gives_uniform_margins(pair_sites):
    model = HwSpec(delta=0.6, cov=COV)
    uniform = mixture_to_uniform(model, mixture_simulate(model, pair_sites, n=20_000, seed=1))
    assert uniform.scale == MarginScales.UNIFORM
    values = uniform.to_numpy()
    assert np.all((values > 0) & (values < 1))
    assert values.mean(axis=0) == pytest.approx([0.5, 0.5], abs=0.01)


def test_mixture_to_uniform_needs_raw_scale(pair_sites):
    model = GaussianCopulaSpec(cov=COV)
    with pytest.raises(InvalidParameterError):
        mixture_to_uniform(model, mixture_simulate(model, pair_sites, n=5, seed=0))


def test_location_radius_tails(rng):
    cov = COV
    exponential = location_radius(LocationMixtureSpec(tail="exponential", theta=2.0, cov=cov), 100_000, rng)
    assert exponential.mean() == pytest.approx(0.5, abs=0.01)
    pareto = location_radius(LocationMixtureSpec(tail="pareto", gamma=3.0, cov=cov), 1_000, rng)
    assert pareto.min() >= 1.0
    weibull = location_radius(LocationMixtureSpec(tail="weibull", theta=1.0, beta=2.0, cov=cov), 100_000, rng)
    assert np.mean(weibull > 1.0) == pytest.approx(np.exp(-1.0), abs=0.01)


def test_location_mixture_simulation_is_raw(line_sites):
    model = LocationMixtureSpec(tail="exponential", cov=COV)
    obs = mixture_simulate(model, line_sites, n=50, seed=4)
    assert obs.scale == MarginScales.RAW
    assert obs.to_numpy().shape == (50, 5)


def test_ims_simulate_exponential_margins(pair_sites):
    obs = ims_simulate(ImsSpec(ms=BR), pair_sites, n=20_000, seed=2)
    assert obs.scale == MarginScales.EXPONENTIAL
    assert obs.to_numpy().mean(axis=0) == pytest.approx([1.0, 1.0], abs=0.05)


def test_maxmix_simulate_frechet_margins(pair_sites):
    spec = MaxMixSpec(a=0.4, ms=BR, ims=ImsSpec(ms=BR))
    obs = maxmix_simulate(spec, pair_sites, n=20_000, seed=2)
    assert obs.scale == MarginScales.FRECHET
    assert np.mean(obs.to_numpy() <= 1 / np.log(2.0), axis=0) == pytest.approx([0.5, 0.5], abs=0.02)


# ----------------------------
# Inverted max-stable mixtures
# ----------------------------
def test_ims_survival_on_diagonal():
    spec = ImsSpec(ms=BR)
    theta = extremal_coefficient(BR, 0.8)
    assert ims_bivariate(spec, (0.7, 0.7), 0.8) == pytest.approx(np.exp(-0.7 * theta))


def test_ims_density_is_mixed_derivative_of_survival():
    spec = ImsSpec(ms=BR)
    survival = lambda a, b: ims_bivariate(spec, (a, b), 1.2)  # noqa: E731
    assert ims_bivariate(spec, (0.6, 1.1), 1.2, "density") == pytest.approx(
        mixed_difference(survival, 0.6, 1.1), rel=1e-3
    )


def test_maxmix_with_full_weight_is_max_stable():
    spec = MaxMixSpec(a=1.0, ms=BR, ims=ImsSpec(ms=BR))
    assert maxmix_bivariate_cdf(spec, (1.3, 0.8), 0.9) == pytest.approx(np.exp(-v_pair(BR, 1.3, 0.8, 0.9)))


def test_maxmix_with_zero_weight_is_inverted():
    ims = ImsSpec(ms=BR)
    spec = MaxMixSpec(a=0.0, ms=BrownResnickSpec(phi=5.0, nu=0.5), ims=ims)
    a, b = maxmix_partials(spec, 1.3, 0.8, 0.9), maxmix_partials(ims, 1.3, 0.8, 0.9)
    assert a.F == pytest.approx(b.F)
    assert a.F12 == pytest.approx(b.F12)


def test_maxmix_has_unit_frechet_margins():
    spec = MaxMixSpec(a=0.3, ms=BR, ims=ImsSpec(ms=BR))
    assert maxmix_bivariate_cdf(spec, (1.5, 1e9), 0.5) == pytest.approx(np.exp(-1 / 1.5), abs=1e-7)


def test_maxmix_partials_match_finite_differences():
    spec = MaxMixSpec(a=0.5, ms=BR, ims=ImsSpec(ms=BrownResnickSpec(phi=2.0, nu=1.0)))
    F = lambda a, b: float(maxmix_partials(spec, a, b, 0.7).F)  # noqa: E731
    p = maxmix_partials(spec, 1.2, 0.9, 0.7)
    assert p.F1 == pytest.approx(central_difference(lambda a: F(a, 0.9), 1.2), rel=1e-5)
    assert p.F2 == pytest.approx(central_difference(lambda b: F(1.2, b), 0.9), rel=1e-5)
    assert p.F12 == pytest.approx(mixed_difference(F, 1.2, 0.9), rel=1e-3)


def test_maxmix_partials_reject_non_positive_values():
    with pytest.raises(InvalidParameterError):
        maxmix_partials(ImsSpec(ms=BR), 0.0, 1.0, 1.0)


def test_pairwise_loglik_sub_finite(line_sites):
    spec = MaxMixSpec(a=0.5, ms=BR, ims=ImsSpec(ms=BR))
    obs = maxmix_simulate(spec, line_sites, n=200, seed=7)
    uniform = np.exp(-1.0 / obs.to_numpy())
    value = pairwise_loglik_sub(spec, uniform, line_sites, 0.8)
    assert np.isfinite(value)
    assert pairwise_loglik_sub(spec, obs, line_sites, 0.8) == pytest.approx(value)
    assert np.isfinite(pairwise_loglik_sub(ImsSpec(ms=BR), uniform, line_sites, 0.8, censored=False))


def test_pairwise_loglik_sub_weights(line_sites):
    spec = ImsSpec(ms=BR)
    uniform = np.exp(-1.0 / maxmix_simulate(MaxMixSpec(a=0.0, ms=BR, ims=spec), line_sites, 100, 1).to_numpy())
    assert pairwise_loglik_sub(spec, uniform, line_sites, 0.8, weights=np.zeros((5, 5))) == 0.0
    with pytest.raises(InvalidParameterError):
        pairwise_loglik_sub(spec, uniform, line_sites, 0.8, weights=np.ones(3))
    with pytest.raises(InvalidParameterError):
        pairwise_loglik_sub(spec, uniform, line_sites, 1.0)


def test_fit_pairwise_sub_rejects_invalid_input(pair_sites):
    obs = ObservationMatrix.from_array(np.full((10, 1), 0.5), "uniform")
    with pytest.raises(InvalidParameterError):
        fit_pairwise_sub(obs, pair_sites, "hot", 0.9)
    with pytest.raises(InsufficientDataError):
        fit_pairwise_sub(obs, SiteSet(np.zeros((1, 2))), "ims", 0.9)


@pytest.mark.slow
def test_fit_pairwise_ims_recovers_range(line_sites):
    truth = ImsSpec(ms=BrownResnickSpec(phi=2.0, nu=1.0))
    obs = ims_simulate(truth, line_sites, n=2_000, seed=11)
    uniform = ObservationMatrix.from_array(-np.expm1(-obs.to_numpy()), "uniform")
    result = fit_pairwise_sub(uniform, line_sites, "ims", 0.9, fixed=["nu"], init={"nu": 1.0}, compute_se=False)
    assert result.k == 1
    assert result.estimates["phi"] == pytest.approx(2.0, rel=0.3)


# --------------------------
# Censored mixture likelihood
# --------------------------
def test_censored_loglik_gaussian_without_censoring(rng, pair_sites):
    model = GaussianCopulaSpec(cov=COV)
    U = rng.uniform(0.01, 0.99, size=(30, 2))
    Z = stats.norm.ppf(U)
    rho = np.exp(-1.0)
    joint = stats.multivariate_normal(mean=[0, 0], cov=[[1, rho], [rho, 1]]).logpdf(Z).sum()
    expected = joint - stats.norm.logpdf(Z).sum()
    assert censored_loglik_mixture(model, U, pair_sites, 1e-3) == pytest.approx(expected, rel=1e-8)


def test_censored_loglik_fully_censored_site():
    # Each row contributes F(u) = u
    sites = SiteSet(np.zeros((1, 2)))
    U = np.full((10, 1), 0.3)
    for model in (GaussianCopulaSpec(cov=COV), HwSpec(delta=0.6, cov=COV)):
        assert censored_loglik_mixture(model, U, sites, 0.8) == pytest.approx(10 * np.log(0.8), rel=1e-5)


def test_censored_loglik_hot_finite(line_sites):
    model = HotSpec(beta=0.5, gamma=1.0, cov=CovarianceSpec(phi=2.0, nu=1.0))
    obs = mixture_to_uniform(model, mixture_simulate(model, line_sites, n=20, seed=5))
    assert np.isfinite(censored_loglik_mixture(model, obs, line_sites, 0.7))


def test_censored_loglik_ignores_missing_sites(rng, pair_sites):
    model = GaussianCopulaSpec(cov=COV)
    U = rng.uniform(0.01, 0.99, size=(20, 2))
    U[:, 1] = np.nan
    single = SiteSet(np.zeros((1, 2)))
    assert censored_loglik_mixture(model, U, pair_sites, 0.5) == pytest.approx(
        censored_loglik_mixture(model, U[:, :1], single, 0.5)
    )


def test_censored_loglik_rejects_invalid_level(pair_sites):
    with pytest.raises(InvalidParameterError):
        censored_loglik_mixture(GaussianCopulaSpec(cov=COV), np.full((3, 2), 0.5), pair_sites, 0.0)


def test_fit_mixture_with_fixed_smoothness(line_sites):
    model = GaussianCopulaSpec(cov=CovarianceSpec(phi=2.0, nu=1.0))
    obs = mixture_simulate(model, line_sites, n=300, seed=8)
    uniform = obs.with_values(special.ndtr(obs.to_numpy()), MarginScales.UNIFORM)
    result = fit_mixture(uniform, line_sites, "gaussian", 0.5, fixed=["nu"], compute_se=False)
    assert result.family == "gaussian"
    assert result.k == 1
    assert result.estimates["nu"] == 1.0
    assert result.censor_level == 0.5
    assert np.isfinite(result.loglik)


def test_fit_mixture_rejects_unknown_family(pair_sites):
    with pytest.raises(InvalidParameterError):
        fit_mixture(np.full((10, 2), 0.5), pair_sites, "ims", 0.9)
