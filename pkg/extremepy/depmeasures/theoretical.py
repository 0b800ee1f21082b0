"""
模型蕴含的 χ, η 极限以及有限水平 u 上的 χ_u, η_u
"""
from functools import cache

import numpy as np
from scipy import special, stats

import extremepy
from extremepy.constants import BETA_ZERO_TOL
from extremepy.core.exceptions import InvalidParameterError, UnsupportedModelError
from extremepy.core.sites import SiteSet
from extremepy.core.specs import (
    BrownResnickSpec,
    ExtremalTSpec,
    GaussianCopulaSpec,
    HotSpec,
    HwSpec,
    ImsSpec,
    LocationMixtureSpec,
    MaxMixSpec,
    RParetoSpec,
    SceSpec,
)
from extremepy.asymptotic.exponent import extremal_coefficient
from extremepy.conditional.simulation import sce_conditional_exceedance
from extremepy.gauss.qmc import bvn_cdf
from extremepy.gauss.simulation import gaussian_draws
from extremepy.subasymptotic.inverted import maxmix_bivariate_cdf
from extremepy.subasymptotic.mixtures import marginal_eval, mixture_cdf


def _rho(model, h) -> float:
    return float(model.cov.correlation_at(float(h)))


@cache
def hw_chi_monte_carlo(delta: float, rho: float, n_draws: int, seed: int) -> tuple[float, float]:
    """
    χ = (2δ−1)/δ · E[min{W₁, W₂}^{(1−δ)/δ}], W 为单位 Pareto 边缘的高斯 copula

    :return: (估计值, 标准误)
    """
    if not 0.5 < delta <= 1:
        raise InvalidParameterError("HW 模型的 χ 蒙特卡洛估计只在 δ ∈ (1/2, 1] 上有定义")
    if delta == 1:
        return 1.0, 0.0

    rng = np.random.default_rng(seed)
    G = gaussian_draws(np.array([[1.0, rho], [rho, 1.0]]), n_draws, rng)
    W_min = 1.0 / special.ndtr(-np.min(G, axis=1))
    samples = W_min ** ((1.0 - delta) / delta)
    factor = (2.0 * delta - 1.0) / delta
    return float(factor * samples.mean()), float(factor * samples.std(ddof=1) / np.sqrt(n_draws))


def chi_theoretical(model, h: float, seed: int = 0) -> float:
    """
    距离为 h 的两站点的 χ 极限
    """
    match model:
        case GaussianCopulaSpec():
            return 1.0 if _rho(model, h) >= 1 else 0.0
        case HotSpec():
            if model.beta > BETA_ZERO_TOL:
                return 0.0
            rho, g = _rho(model, h), model.gamma
            arg = np.sqrt(1.0 + g) * (1.0 - rho) / np.sqrt(max(1.0 - rho**2, 1e-300))
            return float(2.0 - 2.0 * stats.t.cdf(arg, df=g + 1.0))
        case HwSpec():
            if model.delta <= 0.5:
                return 0.0
            n_draws = extremepy.config.numerics.hw_chi_draws
            return hw_chi_monte_carlo(model.delta, _rho(model, h), n_draws, seed)[0]
        case LocationMixtureSpec():
            match model.tail:
                case "pareto":
                    return 1.0
                case "weibull" if model.beta < 1:
                    return 1.0
                case "weibull" if model.beta > 1:
                    return 0.0
            rho = _rho(model, h)
            return float(2.0 - 2.0 * special.ndtr(model.theta * np.sqrt((1.0 - rho) / 2.0)))
        case BrownResnickSpec() | ExtremalTSpec():
            return float(2.0 - extremal_coefficient(model, h))
        case RParetoSpec():
            return float(2.0 - extremal_coefficient(model.base, h))
        case ImsSpec():
            return 0.0
        case MaxMixSpec():
            return float(model.a * (2.0 - extremal_coefficient(model.ms, h)))
    raise UnsupportedModelError(f"{type(model).__name__} 没有实现 χ 极限")


def eta_theoretical(model, h: float) -> float:
    """
    距离为 h 的两站点的尾部相依系数 η
    """
    match model:
        case GaussianCopulaSpec():
            return (1.0 + _rho(model, h)) / 2.0
        case HotSpec():
            if model.beta <= BETA_ZERO_TOL:
                return 1.0
            return ((1.0 + _rho(model, h)) / 2.0) ** (model.beta / (model.beta + 2.0))
        case HwSpec():
            delta = model.delta
            eta_w = (1.0 + _rho(model, h)) / 2.0
            if delta >= 0.5:
                return 1.0
            if eta_w / (1.0 + eta_w) < delta:
                return delta / (1.0 - delta)
            return eta_w
        case LocationMixtureSpec():
            if model.tail == "weibull" and model.beta > 1:
                raise UnsupportedModelError("Weibull 尾部 β>1 的位置混合模型没有实现 η")
            return 1.0
        case BrownResnickSpec() | ExtremalTSpec() | RParetoSpec():
            return 1.0
        case ImsSpec():
            return float(1.0 / extremal_coefficient(model.ms, h))
        case MaxMixSpec():
            if model.a > 0:
                return 1.0
            return float(1.0 / extremal_coefficient(model.ims.ms, h))
    raise UnsupportedModelError(f"{type(model).__name__} 没有实现 η")


def _isotropic(spec: SceSpec) -> SceSpec:
    return spec.model_copy(update={"cov": spec.cov.model_copy(update={"aniso": None})})


def joint_survival(model, h: float, u: float, nsim: int = 10_000, seed: int = 0) -> float:
    """
    Pr{U₁ > u, U₂ > u}, 两站点相距 h
    """
    if not 0 < u < 1:
        raise InvalidParameterError("水平 u 必须在 (0, 1) 之内")

    match model:
        case GaussianCopulaSpec():
            q = special.ndtri(u)
            C = float(bvn_cdf(q, q, _rho(model, h)))
        case HotSpec() | HwSpec():
            q = float(marginal_eval(model, u, "quantile"))
            rho = _rho(model, h)
            C = mixture_cdf(model, [q, q], corr=np.array([[1.0, rho], [rho, 1.0]]), seed=seed)
        case BrownResnickSpec() | ExtremalTSpec():
            C = u ** extremal_coefficient(model, h)
        case RParetoSpec():
            return (1.0 - u) * float(2.0 - extremal_coefficient(model.base, h))
        case ImsSpec():
            return (1.0 - u) ** float(extremal_coefficient(model.ms, h))
        case MaxMixSpec():
            z = -1.0 / np.log(u)
            C = maxmix_bivariate_cdf(model, (z, z), h)
        case SceSpec():
            sites = SiteSet(np.array([[0.0, 0.0], [float(h), 0.0]]), ("s0", "s1"))
            chi = sce_conditional_exceedance(_isotropic(model), sites, 0, u, nsim, seed)[1]
            return (1.0 - u) * float(chi)
        case _:
            raise UnsupportedModelError(f"{type(model).__name__} 没有实现有限水平的联合生存函数")
    return min(max(1.0 - 2.0 * u + float(C), 0.0), 1.0 - u)


def chi_u_theoretical(model, h: float, u: float, nsim: int = 10_000, seed: int = 0) -> float:
    return joint_survival(model, h, u, nsim, seed) / (1.0 - u)


def eta_u_theoretical(model, h: float, u: float, nsim: int = 10_000, seed: int = 0) -> float:
    p = joint_survival(model, h, u, nsim, seed)
    if p <= 0:
        return np.nan
    if p >= 1:
        return 1.0
    return float(np.log1p(-u) / np.log(p))
