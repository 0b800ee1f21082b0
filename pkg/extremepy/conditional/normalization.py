import numpy as np

from extremepy.core.exceptions import InvalidParameterError
from extremepy.core.sites import SiteSet
from extremepy.core.specs import SceSpec


def alpha_fn(h, spec: SceSpec):
    """
    α(h) = 1 (h ≤ Δ), exp{−(h−Δ)^κ/λ} (h > Δ)
    """
    h = np.asarray(h, dtype=float)
    if np.any(h < 0):
        raise InvalidParameterError("距离不能为负")
    out = spec.alpha(h)
    return float(out) if out.ndim == 0 else out


def norm_ab(x, h, spec: SceSpec):
    """
    位置与尺度归一化 a = α(h)·x, b = 1 + a^β 或 x^β

    :param x: 条件站点的 Laplace 尺度取值
    """
    x = np.asarray(x, dtype=float)
    a = np.asarray(alpha_fn(h, spec)) * x

    match spec.b_form:
        case "one_plus_a_pow_beta":
            if np.any(a < 0):
                raise InvalidParameterError("1 + a^β 形式要求 a ≥ 0")
            b = 1.0 + a**spec.beta
        case "x_pow_beta":
            if np.any(x <= 0):
                raise InvalidParameterError("x^β 形式要求条件值为正")
            b = x**spec.beta * np.ones_like(a)
        case _:
            raise InvalidParameterError(f"未知的 b 函数形式: {spec.b_form}")
    if a.ndim == 0:
        return float(a), float(b)
    return a, b


def gaussian_normalization(x, rho):
    """
    高斯过程的极限归一化 a = ρ²x, b = 1 + a^{1/2}
    """
    a = np.asarray(rho, dtype=float) ** 2 * np.asarray(x, dtype=float)
    return a, 1.0 + np.sqrt(a)


def farthest_point_subset(sites: SiteSet, size: int, start: int = 0) -> list[int]:
    """
    最远点遍历选出空间上均匀分布的条件站点子集, 结果只依赖于起点
    """
    D = len(sites)
    if size < 1:
        raise InvalidParameterError("子集大小至少为 1")
    if not 0 <= start < D:
        raise InvalidParameterError(f"起始站点序号 {start} 越界")
    if size >= D:
        return list(range(D))

    dist = sites.distance_matrix()
    chosen = [start]
    nearest = dist[start].copy()
    while len(chosen) < size:
        idx = int(np.argmax(nearest))
        chosen.append(idx)
        nearest = np.minimum(nearest, dist[idx])
    return chosen
