"""
χ_u, η_u 与极值图的经验估计, 均为严格不等式 (>) 下的计数比
"""
from typing import Sequence

import numba as nb
import numpy as np

from extremepy.constants import EXTREMOGRAM_LEVEL, EXTREMOGRAM_PERMUTATIONS
from extremepy.core.exceptions import InsufficientDataError, InvalidParameterError
from extremepy.core.observations import ObservationMatrix
from extremepy.depmeasures.types import DependenceCurve
from extremepy.logging import LOG
from extremepy.margins.transforms import to_uniform
from extremepy.types import CurveKind, MarginScales


def _uniform_pair(u_matrix: ObservationMatrix | np.ndarray, pair: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(u_matrix, ObservationMatrix):
        if u_matrix.scale != MarginScales.UNIFORM:
            u_matrix = to_uniform(u_matrix)
        U = u_matrix.to_numpy()
    else:
        U = np.atleast_2d(np.asarray(u_matrix, dtype=float))
    i, j = pair
    x, y = U[:, i], U[:, j]
    both = np.isfinite(x) & np.isfinite(y)
    return x[both], y[both]


def _check_level(u: float, n: int):
    if not 0 < u < 1:
        raise InvalidParameterError("水平 u 必须在 (0, 1) 之内")
    if n < 1.0 / (1.0 - u):
        raise InsufficientDataError(f"联合非缺失样本 {n} 少于 1/(1−u) = {1.0 / (1.0 - u):.0f}")


def chi_u_empirical(u_matrix: ObservationMatrix | np.ndarray, pair: tuple[int, int], u: float) -> float:
    """
    χ_u = #{U_i > u, U_j > u} / #{U_i > u}, 分母为零时返回 NaN
    """
    x, y = _uniform_pair(u_matrix, pair)
    _check_level(u, len(x))
    marginal = np.count_nonzero(x > u)
    if marginal == 0:
        LOG.warn(f"站点对 {pair} 在 u={u} 处没有超阈值观测, χ_u 无定义")
        return np.nan
    return np.count_nonzero((x > u) & (y > u)) / marginal


def eta_u_empirical(u_matrix: ObservationMatrix | np.ndarray, pair: tuple[int, int], u: float) -> float:
    """
    η_u = log(1−u) / log Pr{U_i > u, U_j > u}, 没有联合超阈值时返回 NaN
    """
    x, y = _uniform_pair(u_matrix, pair)
    _check_level(u, len(x))
    joint = np.count_nonzero((x > u) & (y > u))
    if joint == 0:
        LOG.warn(f"站点对 {pair} 在 u={u} 处没有联合超阈值观测, η_u 无定义")
        return np.nan
    p = joint / len(x)
    if p >= 1:
        return 1.0
    # Rank ties can push the joint frequency slightly above 1 − u
    return min(np.log1p(-u) / np.log(p), 1.0)


@nb.njit(cache=True)
def _lag_counts(exceed: np.ndarray, valid: np.ndarray, max_lag: int):
    joint = np.zeros(max_lag, dtype=np.int64)
    base = np.zeros(max_lag, dtype=np.int64)
    n = len(exceed)
    for h in range(1, max_lag + 1):
        for t in range(n - h):
            if valid[t] and valid[t + h] and exceed[t]:
                base[h - 1] += 1
                if exceed[t + h]:
                    joint[h - 1] += 1
    return joint, base


def extremogram(
    series: np.ndarray,
    u: float,
    max_lag: int,
    seed: int = 0,
    n_permutations: int = EXTREMOGRAM_PERMUTATIONS,
) -> tuple[np.ndarray, np.ndarray]:
    """
    滞后 h=1..max_lag 的 P̂{U_{t+h} > u | U_t > u} 及独立性置信上界

    上界为序列随机置换后极值图的逐点 95% 分位数

    :param series: 均匀尺度序列, NaN 为缺失
    :return: (极值图, 置信上界)
    """
    series = np.asarray(series, dtype=float)
    if max_lag < 1:
        raise InvalidParameterError("最大滞后至少为 1")
    valid = np.isfinite(series)
    _check_level(u, int(valid.sum()))

    exceed = valid & (series > u)
    joint, base = _lag_counts(exceed, valid, max_lag)
    with np.errstate(invalid="ignore", divide="ignore"):
        values = np.where(base > 0, joint / np.maximum(base, 1), np.nan)
    for h in np.flatnonzero(base == 0):
        LOG.warn(f"极值图滞后 {h + 1} 没有可用的超阈值对")

    rng = np.random.default_rng(seed)
    permuted = np.empty((n_permutations, max_lag))
    for k in range(n_permutations):
        order = rng.permutation(len(series))
        pj, pb = _lag_counts(exceed[order], valid[order], max_lag)
        permuted[k] = np.where(pb > 0, pj / np.maximum(pb, 1), np.nan)
    bound = np.nanquantile(permuted, EXTREMOGRAM_LEVEL, axis=0)
    return values, bound


def dependence_curve(
    u_matrix: ObservationMatrix,
    pair: tuple[int, int],
    levels: Sequence[float],
    kind: CurveKind,
    distance: float = np.nan,
) -> DependenceCurve:
    """
    在一组水平上计算经验 χ_u 或 η_u 曲线, 样本不足的水平记为 NaN
    """
    estimator = {"chi": chi_u_empirical, "eta": eta_u_empirical}.get(kind)
    if estimator is None:
        raise InvalidParameterError(f"dependence_curve 不支持 {kind}")

    values = []
    for u in levels:
        try:
            values.append(estimator(u_matrix, pair, u))
        except InsufficientDataError as exc:
            LOG.warn(f"站点对 {pair} 在 u={u} 处跳过: {exc}")
            values.append(np.nan)

    labels = None
    if isinstance(u_matrix, ObservationMatrix):
        labels = (u_matrix.labels[pair[0]], u_matrix.labels[pair[1]])
    return DependenceCurve(
        pair=pair, levels=np.asarray(levels), values=np.asarray(values), kind=kind,
        distance=distance, labels=labels,
    )
