import numpy as np
from scipy import stats

from extremepy.core.exceptions import InsufficientDataError, InvalidParameterError
from extremepy.core.observations import ObservationMatrix
from extremepy.types import MarginScales, MarginScaleType


def empirical_uniform(obs: ObservationMatrix, seed: int = 0) -> ObservationMatrix:
    """
    每个站点按非缺失值的秩变换到 rank/(n_site+1), 并列值的顺序由种子随机决定
    """
    rng = np.random.default_rng(seed)
    data = obs.to_numpy()
    out = np.full_like(data, np.nan)

    for j in range(data.shape[1]):
        column = data[:, j]
        mask = np.isfinite(column)
        values = column[mask]
        n_site = len(values)
        if n_site < 2:
            raise InsufficientDataError(f"站点 {obs.labels[j]} 的非缺失观测少于2个")

        # Sort by value, ties by a random permutation
        order = np.lexsort((rng.permutation(n_site), values))
        ranks = np.empty(n_site)
        ranks[order] = np.arange(1, n_site + 1)
        out[mask, j] = ranks / (n_site + 1)

    return obs.with_values(out, MarginScales.UNIFORM)


def uniform_to_scale(u, target: MarginScaleType) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    finite = u[np.isfinite(u)]
    if np.any((finite <= 0) | (finite >= 1)):
        raise InvalidParameterError("均匀尺度数据必须严格位于 (0, 1) 之内")

    with np.errstate(invalid="ignore", divide="ignore"):
        match target:
            case "uniform":
                return u.copy()
            case "normal":
                return stats.norm.ppf(u)
            case "frechet":
                return -1.0 / np.log(u)
            case "pareto":
                return 1.0 / (1.0 - u)
            case "exponential":
                return -np.log1p(-u)
            case "laplace":
                return np.where(u < 0.5, np.log(2.0 * u), -np.log(2.0 * (1.0 - u)))
    raise InvalidParameterError(f"无法变换到边缘尺度: {target}")


def scale_to_uniform(x, source: MarginScaleType) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        match source:
            case "uniform":
                return x.copy()
            case "normal":
                return stats.norm.cdf(x)
            case "frechet":
                return np.exp(-1.0 / x)
            case "pareto":
                return 1.0 - 1.0 / x
            case "exponential":
                return -np.expm1(-x)
            case "laplace":
                return np.where(x < 0, 0.5 * np.exp(x), 1.0 - 0.5 * np.exp(-x))
    raise InvalidParameterError(f"无法从边缘尺度 {source} 变换到均匀尺度")


def rescale(u_matrix: ObservationMatrix, target: MarginScaleType) -> ObservationMatrix:
    """
    均匀尺度数据变换到 Fréchet/Pareto/指数/Laplace/正态 尺度
    """
    if u_matrix.scale != MarginScales.UNIFORM:
        raise InvalidParameterError(f"rescale 需要均匀尺度输入, 实际为 {u_matrix.scale}")
    return u_matrix.with_values(uniform_to_scale(u_matrix.to_numpy(), target), target)


def to_uniform(obs: ObservationMatrix) -> ObservationMatrix:
    if obs.scale == MarginScales.RAW:
        raise InvalidParameterError("原始尺度数据需先用 empirical_uniform 变换")
    return obs.with_values(scale_to_uniform(obs.to_numpy(), obs.scale), MarginScales.UNIFORM)


def convert_scale(obs: ObservationMatrix, target: MarginScaleType) -> ObservationMatrix:
    """
    任意已知尺度之间的变换, 经由均匀尺度
    """
    if obs.scale == target:
        return obs
    return rescale(to_uniform(obs), target)
