import itertools
from typing import Callable, Sequence

import numpy as np

from extremepy.logging import LOG


def _steps(x: np.ndarray, rel_step: float) -> np.ndarray:
    return rel_step * np.maximum(np.abs(x), 1.0)


def _nested_difference(
    f: Callable[[np.ndarray], float], x: np.ndarray, idx: Sequence[int], h: np.ndarray
) -> float:
    total = 0.0
    for signs in itertools.product((1.0, -1.0), repeat=len(idx)):
        point = x.copy()
        for sign, i in zip(signs, idx):
            point[i] += sign * h[i]
        total += np.prod(signs) * f(point)
    return total / np.prod([2.0 * h[i] for i in idx])


def mixed_partial(
    f: Callable[[np.ndarray], float],
    x: Sequence[float],
    idx: Sequence[int],
    rel_step: float = 1e-4,
) -> float:
    """
    ∂^m f / ∂x_{i1}…∂x_{im}, 嵌套中心差分并做一次Richardson外推

    :param idx: 求导坐标, 可重复
    :param rel_step: 相对步长, |坐标| < 1 时按绝对步长
    """
    x = np.asarray(x, dtype=float)
    if not idx:
        return float(f(x))

    h = _steps(x, rel_step)
    coarse = _nested_difference(f, x, idx, h)
    fine = _nested_difference(f, x, idx, h / 2)
    return float((4.0 * fine - coarse) / 3.0)


def hessian(
    f: Callable[[np.ndarray], float], x: Sequence[float], rel_step: float = 1e-4
) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    k = len(x)
    out = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            out[i, j] = out[j, i] = mixed_partial(f, x, (i, j), rel_step)
    return out


def observed_info_se(
    f: Callable[[np.ndarray], float],
    theta: Sequence[float],
    names: Sequence[str],
    jacobian: Sequence[float] | None = None,
    rel_step: float = 1e-4,
) -> tuple[dict[str, float | None], list[str]]:
    """
    由观测信息矩阵计算标准误

    :param f: 无约束空间内的对数似然
    :param theta: 无约束空间内的估计值
    :param jacobian: 自然参数对无约束参数的导数, 用于delta方法
    :return: (标准误, 标记), 无法计算的参数标准误为 None 并加入标记
    """
    theta = np.asarray(theta, dtype=float)
    names = list(names)
    if len(theta) == 0:
        return dict(), []

    jac = np.ones(len(theta)) if jacobian is None else np.asarray(jacobian, dtype=float)
    flags: list[str] = []
    stderrs: dict[str, float | None] = {name: None for name in names}

    H = hessian(f, theta, rel_step)
    if not np.isfinite(H).all():
        LOG.warn("观测信息矩阵含非有限值, 无法计算标准误")
        return stderrs, [f"se_unavailable:{name}" for name in names]

    try:
        np.linalg.cholesky(-H)
        cov = np.linalg.inv(-H)
    except np.linalg.LinAlgError:
        LOG.warn("观测信息矩阵非正定, 部分参数标准误不可用")
        cov = np.linalg.pinv(-H)
        eigvals = np.linalg.eigvalsh(-H)
        if eigvals.min() <= 0:
            flags.append("hessian_not_positive_definite")

    variances = np.diag(cov)
    for i, name in enumerate(names):
        if not np.isfinite(variances[i]) or variances[i] <= 0 or "hessian_not_positive_definite" in flags:
            flags.append(f"se_unavailable:{name}")
            continue
        stderrs[name] = float(abs(jac[i]) * np.sqrt(variances[i]))

    return stderrs, flags
