"""
delta-Laplace (指数幂) 分布, 密度 δ/(2σΓ(1/δ))·exp{−|(z−μ)/σ|^δ}

δ=1 为 Laplace 分布, δ=2 为标准差 σ/√2 的正态分布
"""
import numpy as np
from scipy import special

from extremepy.core.exceptions import InvalidParameterError
from extremepy.core.specs import DeltaLaplaceParams


def _params(p: DeltaLaplaceParams | None, mu, sigma, delta):
    if p is not None:
        return p.mu, p.sigma, p.delta
    return mu, sigma, delta


def dlaplace_eval(z, p: DeltaLaplaceParams | None = None, kind: str = "pdf", *, mu=0.0, sigma=1.0, delta=1.0):
    """
    pdf/logpdf/cdf/survival/quantile; 参数可以用 ``p`` 给出, 也可以按站点以数组给出
    """
    mu, sigma, delta = _params(p, mu, sigma, delta)
    z = np.asarray(z, dtype=float)
    mu, sigma, delta = (np.asarray(v, dtype=float) for v in (mu, sigma, delta))
    if np.any(sigma <= 0) or np.any(delta <= 0):
        raise InvalidParameterError("delta-Laplace 的 σ 和 δ 必须为正")

    shape = 1.0 / delta
    match kind:
        case "pdf" | "logpdf":
            y = np.abs((z - mu) / sigma)
            log_pdf = np.log(delta) - np.log(2.0 * sigma) - special.gammaln(shape) - y**delta
            out = log_pdf if kind == "logpdf" else np.exp(log_pdf)
        case "cdf" | "survival":
            y = (z - mu) / sigma
            tail = 0.5 * special.gammaincc(shape, np.abs(y) ** delta)
            lower = np.where(y < 0, tail, 1.0 - tail)
            out = lower if kind == "cdf" else np.where(y < 0, 1.0 - tail, tail)
        case "quantile":
            if np.any((z <= 0) | (z >= 1)):
                raise InvalidParameterError("分位数的概率必须在 (0, 1) 之内")
            tail = np.minimum(z, 1.0 - z)
            y = special.gammainccinv(shape, 2.0 * tail) ** (1.0 / delta)
            out = mu + sigma * np.where(z < 0.5, -y, y)
        case _:
            raise InvalidParameterError(f"未知的分布函数类型: {kind}")
    return float(out) if np.ndim(out) == 0 else out


def dlaplace_to_normal(z, mu, sigma, delta) -> np.ndarray:
    """
    概率积分变换到标准正态 g = Φ^{−1}(F(z)), 两侧尾部分别计算以保持精度
    """
    y = (np.asarray(z, dtype=float) - mu) / sigma
    tail = 0.5 * special.gammaincc(1.0 / delta, np.abs(y) ** delta)
    return -np.sign(y) * special.ndtri(tail)


def normal_to_dlaplace(g, mu, sigma, delta) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    tail = special.ndtr(-np.abs(g))
    y = special.gammainccinv(1.0 / delta, 2.0 * tail) ** (1.0 / delta)
    return mu + sigma * np.sign(g) * y


def moment_matched_scale(sd, delta):
    """
    方差为 sd² 的 delta-Laplace 尺度参数: Var = σ²Γ(3/δ)/Γ(1/δ)
    """
    delta = np.asarray(delta, dtype=float)
    return np.asarray(sd, dtype=float) * np.exp(
        0.5 * (special.gammaln(1.0 / delta) - special.gammaln(3.0 / delta))
    )
