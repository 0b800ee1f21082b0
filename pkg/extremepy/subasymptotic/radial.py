import numpy as np

from extremepy.constants import BETA_ZERO_TOL
from extremepy.core.exceptions import InvalidParameterError
from extremepy.core.specs import HotSpec
from extremepy.types import DistKind


def hot_fr(r, spec: HotSpec, kind: DistKind = "cdf"):
    """
    HOT 模型的半径分布 F_R(r) = 1 − exp{−γ(r^β − 1)/β}, r ≥ 1

    β 趋于0时为 Pareto 分布 1 − r^{−γ}
    """
    beta, gamma = spec.beta, spec.gamma
    pareto = abs(beta) < BETA_ZERO_TOL
    x = np.asarray(r, dtype=float)

    if kind == "quantile":
        if np.any((x <= 0) | (x >= 1)):
            raise InvalidParameterError("分位数的概率必须在 (0, 1) 之内")
        log_s = np.log1p(-x)
        out = np.exp(-log_s / gamma) if pareto else (1.0 - beta * log_s / gamma) ** (1.0 / beta)
        return float(out) if out.ndim == 0 else out

    inside = x >= 1
    safe = np.where(inside, x, 1.0)
    if pareto:
        log_s = -gamma * np.log(safe)
    else:
        log_s = -gamma * np.expm1(beta * np.log(safe)) / beta

    match kind:
        case "cdf":
            out = np.where(inside, -np.expm1(log_s), 0.0)
        case "survival":
            out = np.where(inside, np.exp(log_s), 1.0)
        case "pdf":
            hazard = gamma * safe ** (beta - 1.0)
            out = np.where(inside, hazard * np.exp(log_s), 0.0)
        case _:
            raise InvalidParameterError(f"未知的分布函数类型: {kind}")
    return float(out) if out.ndim == 0 else out
