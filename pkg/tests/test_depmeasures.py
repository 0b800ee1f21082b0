import numpy as np
import pytest
from scipy import special, stats

from extremepy.core.exceptions import InsufficientDataError, InvalidParameterError
from extremepy.core.observations import ObservationMatrix
from extremepy.core.specs import (
    BrownResnickSpec,
    CovarianceSpec,
    GaussianCopulaSpec,
    HotSpec,
    HwSpec,
    ImsSpec,
)
from extremepy.depmeasures import (
    DependenceCurve,
    chi_theoretical,
    chi_u_empirical,
    chi_u_theoretical,
    dependence_curve,
    eta_theoretical,
    eta_u_empirical,
    eta_u_theoretical,
    extremogram,
    hw_chi_monte_carlo,
)
from extremepy.asymptotic.exponent import extremal_coefficient
from .helpers import uniform_pairs


# exp(−h) = 1/2 at this distance
HALF_CORRELATION = np.log(2.0)

COV = CovarianceSpec(phi=1.0, nu=1.0)


def test_chi_u_identical_columns(rng):
    u = rng.uniform(size=1_000)
    data = np.column_stack([u, u])
    assert chi_u_empirical(data, (0, 1), 0.9) == 1.0
    assert eta_u_empirical(data, (0, 1), 0.9) == pytest.approx(1.0, abs=0.05)


def test_chi_u_independent_columns(rng):
    data = rng.uniform(size=(1_000_000, 2))
    assert chi_u_empirical(data, (0, 1), 0.9) == pytest.approx(0.1, abs=0.003)
    assert eta_u_empirical(data, (0, 1), 0.9) == pytest.approx(0.5, abs=0.01)


def test_chi_u_hand_count():
    data = np.array([[0.2, 0.2], [0.4, 0.9], [0.8, 0.8], [0.9, 0.4]])
    assert chi_u_empirical(data, (0, 1), 0.75) == 0.5


def test_chi_u_uses_strict_inequality():
    data = np.array([[0.75, 0.9], [0.9, 0.9], [0.1, 0.2], [0.3, 0.4]])
    assert chi_u_empirical(data, (0, 1), 0.75) == 1.0


def test_chi_u_accepts_observation_matrix(rng):
    u = rng.uniform(size=(200, 2))
    obs = ObservationMatrix.from_array(-1.0 / np.log(u), "frechet")
    assert chi_u_empirical(obs, (0, 1), 0.9) == pytest.approx(chi_u_empirical(u, (0, 1), 0.9))


def test_empirical_measures_need_enough_data(rng):
    data = rng.uniform(size=(50, 2))
    with pytest.raises(InsufficientDataError):
        chi_u_empirical(data, (0, 1), 0.99)
    with pytest.raises(InvalidParameterError):
        chi_u_empirical(data, (0, 1), 1.0)


def test_eta_u_without_joint_exceedances():
    data = np.array([[0.95, 0.1], [0.1, 0.95]] * 20)
    assert np.isnan(eta_u_empirical(data, (0, 1), 0.9))


def test_chi_u_without_marginal_exceedances():
    data = np.full((20, 2), 0.5)
    assert np.isnan(chi_u_empirical(data, (0, 1), 0.9))


def test_chi_u_drops_incomplete_rows(rng):
    data = rng.uniform(size=(100, 2))
    with_missing = np.vstack([data, [[0.99, np.nan]] * 5])
    assert chi_u_empirical(with_missing, (0, 1), 0.9) == chi_u_empirical(data, (0, 1), 0.9)


def test_extremogram_persistent_exceedances(rng):
    # Once the sorted series exceeds u it stays above it
    series = np.sort(rng.uniform(size=400))
    values, bound = extremogram(series, 0.9, max_lag=5, n_permutations=50)
    assert values == pytest.approx(np.ones(5))
    assert np.all(bound < 1)


def test_extremogram_ar1_exceeds_bound(rng):
    n, phi = 5_000, 0.9
    x = np.empty(n)
    x[0] = rng.normal()
    for t in range(1, n):
        x[t] = phi * x[t - 1] + np.sqrt(1 - phi**2) * rng.normal()
    values, bound = extremogram(stats.norm.cdf(x), 0.95, max_lag=3, n_permutations=100)
    assert values[0] > bound[0]


def test_extremogram_iid_mostly_within_bound(rng):
    values, bound = extremogram(rng.uniform(size=3_000), 0.95, max_lag=20, n_permutations=200)
    assert np.sum(values > bound) <= 5


def test_extremogram_rejects_zero_lag(rng):
    with pytest.raises(InvalidParameterError):
        extremogram(rng.uniform(size=100), 0.9, max_lag=0)


def test_dependence_curve_levels(rng):
    obs = ObservationMatrix.from_array(rng.uniform(size=(100, 2)), "uniform", labels=["a", "b"])
    curve = dependence_curve(obs, (0, 1), [0.5, 0.9, 0.999], "chi", distance=3.0)
    assert np.isfinite(curve.values[:2]).all()
    assert np.isnan(curve.values[2])
    frame = curve.to_frame()
    assert list(frame.columns) == ["kind", "source", "u", "site_i", "site_j", "distance", "value"]
    assert set(frame["site_i"]) == {"a"}


def test_dependence_curve_validation():
    with pytest.raises(InvalidParameterError):
        DependenceCurve(pair=(0, 1), levels=[0.9], values=[1.5], kind="chi")
    with pytest.raises(InvalidParameterError):
        DependenceCurve(pair=(0, 1), levels=[0.9, 0.8], values=[0.2, 0.3], kind="chi")
    with pytest.raises(InvalidParameterError):
        DependenceCurve(pair=(0, 1), levels=[0.9], values=[0.0], kind="eta")


def test_extremogram_curve_frame():
    curve = DependenceCurve(
        pair=(0, 0), levels=[1, 2], values=[0.4, 0.2], kind="extremogram", bound=np.array([0.1, 0.1])
    )
    frame = curve.to_frame()
    assert "lag" in frame.columns
    assert "bound" in frame.columns


def test_gaussian_limits():
    model = GaussianCopulaSpec(cov=COV)
    assert chi_theoretical(model, 1.0) == 0.0
    assert eta_theoretical(model, HALF_CORRELATION) == pytest.approx(0.75)


def test_hot_limits():
    pareto_limit = HotSpec(beta=0.0, gamma=1.0, cov=COV)
    arg = np.sqrt(2.0) * 0.5 / np.sqrt(0.75)
    assert chi_theoretical(pareto_limit, HALF_CORRELATION) == pytest.approx(2 - 2 * stats.t.cdf(arg, 2))
    assert eta_theoretical(pareto_limit, HALF_CORRELATION) == 1.0

    weibull = HotSpec(beta=2.0, gamma=1.0, cov=COV)
    assert chi_theoretical(weibull, 1.0) == 0.0
    assert eta_theoretical(weibull, 1e3) == pytest.approx(np.sqrt(0.5), abs=1e-6)


@pytest.mark.parametrize("delta, expected", [(0.25, 0.75), (0.45, 0.45 / 0.55), (0.7, 1.0)])
def test_hw_eta(delta, expected):
    model = HwSpec(delta=delta, cov=COV)
    assert eta_theoretical(model, HALF_CORRELATION) == pytest.approx(expected)


def test_hw_chi():
    assert chi_theoretical(HwSpec(delta=0.44, cov=COV), 1.0) == 0.0
    assert hw_chi_monte_carlo(1.0, 0.5, 1_000, 0) == (1.0, 0.0)
    value, stderr = hw_chi_monte_carlo(0.8, 0.5, 20_000, 0)
    assert 0 < value < 1
    assert stderr > 0
    with pytest.raises(InvalidParameterError):
        hw_chi_monte_carlo(0.4, 0.5, 1_000, 0)


def test_maxstable_chi_and_eta():
    spec = BrownResnickSpec(phi=2.0, nu=1.5)
    h = 1.3
    expected = 2 - 2 * special.ndtr(np.sqrt((h / 2.0) ** 1.5 / 2))
    assert chi_theoretical(spec, h) == pytest.approx(expected)
    assert eta_theoretical(spec, h) == 1.0


def test_ims_eta_is_inverse_extremal_coefficient():
    spec = ImsSpec(ms=BrownResnickSpec(phi=1.0, nu=1.0))
    theta = extremal_coefficient(spec.ms, 0.8)
    assert chi_theoretical(spec, 0.8) == 0.0
    assert eta_theoretical(spec, 0.8) == pytest.approx(1 / theta)
    assert eta_u_theoretical(spec, 0.8, 0.95) == pytest.approx(1 / theta)


def test_gaussian_chi_u_decreases_with_level():
    model = GaussianCopulaSpec(cov=COV)
    values = [chi_u_theoretical(model, HALF_CORRELATION, u) for u in (0.9, 0.95, 0.99)]
    assert np.all(np.diff(values) < 0)
    assert all(0 < v < 1 for v in values)


def test_maxstable_chi_u_approaches_limit():
    spec = BrownResnickSpec(phi=1.0, nu=1.0)
    assert chi_u_theoretical(spec, 1.0, 0.9999) == pytest.approx(chi_theoretical(spec, 1.0), abs=1e-3)


def test_gaussian_chi_u_matches_simulation():
    u = 0.95
    data = uniform_pairs(200_000, 0.5, seed=5)
    model = GaussianCopulaSpec(cov=COV)
    assert chi_u_empirical(data, (0, 1), u) == pytest.approx(
        chi_u_theoretical(model, HALF_CORRELATION, u), abs=0.02
    )


@pytest.mark.slow
def test_gaussian_eta_at_high_level():
    data = uniform_pairs(10_000_000, 0.5, seed=6)
    assert eta_u_empirical(data, (0, 1), 0.9999) == pytest.approx(0.75, abs=0.02)
