import numpy as np
from scipy import special

from extremepy.core.exceptions import InvalidParameterError
from extremepy.core.observations import ObservationMatrix
from extremepy.core.sites import SiteSet
from extremepy.core.specs import GaussianCopulaSpec, HotSpec, HwSpec, LocationMixtureSpec
from extremepy.gauss.covariance import correlation_matrix
from extremepy.gauss.simulation import gaussian_draws
from extremepy.subasymptotic.mixtures import marginal_eval
from extremepy.subasymptotic.radial import hot_fr
from extremepy.types import MarginScales


def location_radius(spec: LocationMixtureSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """
    位置混合中的 R̃: 指数(速率θ), Weibull(生存函数 exp(−θ r^β)) 或 Pareto(形状γ)
    """
    e = rng.standard_exponential(n)
    match spec.tail:
        case "exponential":
            return e / spec.theta
        case "weibull":
            return (e / spec.theta) ** (1.0 / spec.beta)
        case "pareto":
            return np.exp(e / spec.gamma)
    raise InvalidParameterError(f"未知的尾部类型: {spec.tail}")


def mixture_simulate(
    model: GaussianCopulaSpec | HotSpec | HwSpec | LocationMixtureSpec,
    sites: SiteSet,
    n: int,
    seed: int,
) -> ObservationMatrix:
    """
    模型原生尺度上的模拟

    高斯 copula 为正态尺度; HOT 为 R·W, R ~ F_R; HW 为 R^δ W^{1−δ}, R 标准 Pareto 且
    W 为单位 Pareto 边缘的高斯 copula; 位置混合为 R̃ + W. 后三者标记为原始尺度.
    """
    rng = np.random.default_rng(seed)
    G = gaussian_draws(correlation_matrix(sites, model.cov), n, rng)

    match model:
        case GaussianCopulaSpec():
            return ObservationMatrix.from_array(G, MarginScales.NORMAL, sites.labels)
        case HotSpec():
            R = hot_fr(np.clip(rng.random(n), 1e-300, None), model, "quantile")
            X = np.atleast_1d(R)[:, None] * G
        case HwSpec():
            R = 1.0 / (1.0 - rng.random(n))
            # Unit Pareto margins through the normal survival function
            W = 1.0 / special.ndtr(-G)
            X = R[:, None] ** model.delta * W ** (1.0 - model.delta)
        case LocationMixtureSpec():
            X = location_radius(model, n, rng)[:, None] + G
        case _:
            raise InvalidParameterError(f"mixture_simulate 不支持 {type(model).__name__}")

    return ObservationMatrix.from_array(X, MarginScales.RAW, sites.labels)


def mixture_to_uniform(model: GaussianCopulaSpec | HotSpec | HwSpec, obs: ObservationMatrix) -> ObservationMatrix:
    """
    用模型的边缘分布把原生尺度模拟变换到均匀尺度
    """
    if obs.scale != MarginScales.RAW:
        raise InvalidParameterError(f"需要原生尺度的模拟值, 实际为 {obs.scale}")
    values = obs.to_numpy()
    out = np.asarray(marginal_eval(model, values.ravel(), "cdf"), dtype=float).reshape(values.shape)
    return obs.with_values(out, MarginScales.UNIFORM)
