"""
GEV 与 GP 分布的取值, 形状参数接近0时使用指数/Gumbel分支
"""
import numpy as np

from extremepy.constants import XI_ZERO_TOL
from extremepy.core.exceptions import InvalidParameterError
from extremepy.core.specs import GevParams, GpParams
from extremepy.types import DistKind


def _check_probabilities(p: np.ndarray):
    if np.any((p <= 0) | (p >= 1)):
        raise InvalidParameterError("分位数函数的输入必须在 (0, 1) 之内")


def _scalar_or_array(value: np.ndarray, like):
    return float(value) if np.ndim(like) == 0 else value


def gev_eval(z, p: GevParams, kind: DistKind = "cdf"):
    """
    GEV 分布函数、密度、生存函数或分位数

    支撑之外密度为0, 分布函数取边界值0或1
    """
    z = np.asarray(z, dtype=float)
    mu, sigma, xi = p.mu, p.sigma, p.xi

    if kind == "quantile":
        _check_probabilities(z)
        y = -np.log(z)
        if abs(xi) > XI_ZERO_TOL:
            out = mu + sigma * (y ** (-xi) - 1.0) / xi
        else:
            out = mu - sigma * np.log(y)
        return _scalar_or_array(out, z)

    s = (z - mu) / sigma
    if abs(xi) > XI_ZERO_TOL:
        t = 1.0 + xi * s
        inside = t > 0
        tt = np.where(inside, t, 1.0)
        power = tt ** (-1.0 / xi)
        cdf = np.where(inside, np.exp(-power), 0.0 if xi > 0 else 1.0)
        pdf = np.where(inside, power ** (1.0 + xi) * np.exp(-power) / sigma, 0.0)
    else:
        e = np.exp(-s)
        cdf = np.exp(-e)
        pdf = e * cdf / sigma

    match kind:
        case "cdf":
            out = cdf
        case "survival":
            out = 1.0 - cdf
        case "pdf":
            out = pdf
        case _:
            raise InvalidParameterError(f"未知的取值类型: {kind}")
    return _scalar_or_array(out, z)


def gev_max_stability_constants(p: GevParams, t: float) -> tuple[float, float]:
    """
    返回 (α_t, β_t) 使 G^t(α_t z + β_t) = G(z)
    """
    if t <= 0:
        raise InvalidParameterError("t 必须为正")
    if abs(p.xi) > XI_ZERO_TOL:
        a = t**p.xi
        return a, p.mu * (1.0 - a) + p.sigma * (a - 1.0) / p.xi
    return 1.0, p.sigma * np.log(t)


def gp_eval(y, p: GpParams, kind: DistKind = "cdf"):
    """
    GP 分布, 生存函数为 (1+ξy/τ)_+^{−1/ξ}, ξ=0 时为 exp(−y/τ)
    """
    y = np.asarray(y, dtype=float)
    tau, xi = p.tau, p.xi

    if kind == "quantile":
        _check_probabilities(y)
        if abs(xi) > XI_ZERO_TOL:
            out = tau * ((1.0 - y) ** (-xi) - 1.0) / xi
        else:
            out = -tau * np.log1p(-y)
        return _scalar_or_array(out, y)

    positive = y >= 0
    yy = np.where(positive, y, 0.0)
    if abs(xi) > XI_ZERO_TOL:
        t = 1.0 + xi * yy / tau
        inside = t > 0
        tt = np.where(inside, t, 1.0)
        survival = np.where(inside, tt ** (-1.0 / xi), 0.0)
        pdf = np.where(inside, tt ** (-1.0 / xi - 1.0) / tau, 0.0)
    else:
        survival = np.exp(-yy / tau)
        pdf = survival / tau

    survival = np.where(positive, survival, 1.0)
    pdf = np.where(positive, pdf, 0.0)

    match kind:
        case "cdf":
            out = 1.0 - survival
        case "survival":
            out = survival
        case "pdf":
            out = pdf
        case _:
            raise InvalidParameterError(f"未知的取值类型: {kind}")
    return _scalar_or_array(out, y)


def gp_shift(p: GpParams, v_minus_u: float) -> GpParams:
    """
    更高阈值 v 上的超出量仍服从GP, 尺度变为 τ+ξ(v−u)
    """
    if v_minus_u < 0:
        raise InvalidParameterError("阈值平移量不能为负")
    if 1.0 + p.xi * v_minus_u / p.tau <= 0:
        raise InvalidParameterError(f"新阈值超出了GP分布的上端点 {p.upper_endpoint:.6g}")
    return GpParams(tau=p.tau + p.xi * v_minus_u, xi=p.xi)


def gp_from_gev(g: GevParams, u_star: float) -> GpParams:
    tau = g.sigma + g.xi * (u_star - g.mu)
    if tau <= 0:
        raise InvalidParameterError(f"阈值 {u_star} 不在GEV支撑内, 得到的尺度 {tau:.6g} 非正")
    return GpParams(tau=tau, xi=g.xi)


def gev_loglik(data, p: GevParams) -> float:
    dens = gev_eval(np.asarray(data, dtype=float), p, "pdf")
    with np.errstate(divide="ignore"):
        return float(np.sum(np.log(dens)))


def gp_loglik(exceedances, p: GpParams) -> float:
    y = np.asarray(exceedances, dtype=float)
    if np.any(y < 0):
        return -np.inf
    dens = gp_eval(y, p, "pdf")
    with np.errstate(divide="ignore"):
        return float(np.sum(np.log(dens)))
