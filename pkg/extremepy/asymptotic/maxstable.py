from typing import Sequence

import numpy as np

from extremepy.constants import MAX_POISSON_POINTS
from extremepy.core.exceptions import InsufficientDataError, InvalidParameterError
from extremepy.core.observations import ObservationMatrix
from extremepy.core.sites import SiteSet
from extremepy.core.specs import build_spec
from extremepy.asymptotic.exponent import v_pair_partials
from extremepy.asymptotic.spectral import MaxStable, TiltedProfileSampler, maxstable_distances
from extremepy.logging import LOG
from extremepy.margins.transforms import convert_scale
from extremepy.optimization.maximize import maximize
from extremepy.optimization.parameter import model_transform
from extremepy.optimization.result import FitResult
from extremepy.types import MarginScales, MaxStableFamily
from extremepy.utils import pair_indices


def maxstable_simulate(
    spec: MaxStable,
    sites: SiteSet,
    n: int,
    seed: int,
    accuracy: float = 1.0,
) -> ObservationMatrix:
    """
    谱表示 Z(s) = max_i ζ_i W_i(s) 的模拟, 输出为单位 Fréchet 尺度

    ζ_i 为强度 ζ⁻²dζ 的泊松点按降序生成, W_i 为和归一化谱函数 (上界为D).
    当 ζ·D·accuracy 低于当前最大值的最小值时停止; accuracy=1 时截断误差为零.

    :param accuracy: (0, 1] 之间的截断因子
    """
    if not 0 < accuracy <= 1:
        raise InvalidParameterError("accuracy 必须在 (0, 1] 之内")

    rng = np.random.default_rng(seed)
    sampler = TiltedProfileSampler(spec, maxstable_distances(spec, sites))
    D = len(sites)
    Z = np.zeros((n, D))
    arrivals = np.zeros(n)
    active = np.arange(n)

    for _ in range(MAX_POISSON_POINTS):
        if len(active) == 0:
            break
        arrivals[active] += rng.standard_exponential(len(active))
        zeta = 1.0 / arrivals[active]
        W = sampler.draw_normalized(len(active), rng)
        Z[active] = np.maximum(Z[active], zeta[:, None] * W)
        done = zeta * D * accuracy < Z[active].min(axis=1)
        active = active[~done]

    if len(active):
        LOG.warn(f"{len(active)} 次模拟用完了 {MAX_POISSON_POINTS} 个泊松点, 截断误差未达到要求")

    return ObservationMatrix.from_array(Z, MarginScales.FRECHET, sites.labels)


def _as_frechet(data: ObservationMatrix | np.ndarray) -> np.ndarray:
    if isinstance(data, ObservationMatrix):
        return convert_scale(data, MarginScales.FRECHET).to_numpy()
    return np.atleast_2d(np.asarray(data, dtype=float))


def _pair_weights(weights, D: int, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    if weights is None:
        return np.ones(len(rows))
    weights = np.asarray(weights, dtype=float)
    if weights.shape == (D, D):
        return weights[rows, cols]
    if weights.shape == (len(rows),):
        return weights
    raise InvalidParameterError(f"权重形状 {weights.shape} 与站点对数 {len(rows)} 不一致")


def pairwise_loglik_maxstable(
    spec: MaxStable,
    data: ObservationMatrix | np.ndarray,
    sites: SiteSet,
    weights=None,
    max_distance: float | None = None,
) -> float:
    """
    成对复合对数似然 Σ_pairs Σ_t w_ij·log[exp{−V}(V₁V₂ − V₁₂)]

    :param data: 单位 Fréchet 尺度数据, 缺失值所在的站点对跳过
    :param weights: D×D 矩阵或按上三角顺序排列的站点对权重
    :param max_distance: 距离超过该值的站点对权重为0
    """
    Z = _as_frechet(data)
    D = Z.shape[1]
    rows, cols = pair_indices(D)
    if len(rows) == 0:
        return 0.0

    dist = maxstable_distances(spec, sites)[rows, cols]
    w = _pair_weights(weights, D, rows, cols)
    if max_distance is not None:
        w = np.where(dist <= max_distance, w, 0.0)
    keep = w != 0
    if not keep.any():
        return 0.0
    rows, cols, dist, w = rows[keep], cols[keep], dist[keep], w[keep]

    z1, z2 = Z[:, rows], Z[:, cols]
    valid = np.isfinite(z1) & np.isfinite(z2)
    h = np.broadcast_to(dist, z1.shape)
    contrib = np.zeros(z1.shape)
    contrib[valid] = v_pair_partials(spec, z1[valid], z2[valid], h[valid]).log_density

    per_pair = (contrib * w).sum(axis=0)
    bad = ~np.isfinite(per_pair)
    if bad.any():
        i, j = rows[bad][0], cols[bad][0]
        LOG.warn(f"站点对 ({sites.labels[i]}, {sites.labels[j]}) 的成对似然贡献不是有限值")
        return -np.inf
    return float(per_pair.sum())


def default_maxstable_init(family: MaxStableFamily, sites: SiteSet) -> dict[str, float]:
    dist = sites.distance_matrix()
    h = float(np.median(dist[np.triu_indices(len(sites), k=1)])) if len(sites) > 1 else 1.0
    init = {"phi": max(h, 1e-3), "nu": 1.0}
    if family == "extremal_t":
        init["dof"] = 2.0
    return init


def fit_maxstable_pairwise(
    data: ObservationMatrix,
    sites: SiteSet,
    family: MaxStableFamily,
    init: dict[str, float] | None = None,
    fixed: Sequence[str] = (),
    weights=None,
    max_distance: float | None = None,
    seed: int = 0,
    threads: int = 1,
    compute_se: bool = True,
) -> FitResult:
    """
    最大稳定模型的成对似然拟合, 数据先变换到单位 Fréchet 尺度
    """
    Z = _as_frechet(data)
    if Z.shape[1] < 2:
        raise InsufficientDataError("成对似然至少需要两个站点")
    if Z.shape[0] < 2:
        raise InsufficientDataError("成对似然至少需要两个重复观测")

    values = dict(default_maxstable_init(family, sites), **(init or {}))
    transform = model_transform(family, values, fixed)

    def objective(params: dict[str, float]) -> float:
        return pairwise_loglik_maxstable(
            build_spec(family, params), Z, sites, weights=weights, max_distance=max_distance
        )

    return maximize(
        objective,
        transform,
        family=family,
        n_effective=Z.shape[0],
        seed=seed,
        threads=threads,
        compute_se=compute_se,
    )
