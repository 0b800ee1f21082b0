from collections import defaultdict
from typing import Sequence

import numpy as np

from extremepy.core.exceptions import InsufficientDataError, InvalidParameterError
from extremepy.core.observations import ObservationMatrix
from extremepy.core.sites import SiteSet
from extremepy.core.specs import build_spec
from extremepy.gauss.covariance import correlation_matrix
from extremepy.logging import LOG
from extremepy.margins.transforms import convert_scale
from extremepy.optimization.maximize import maximize
from extremepy.optimization.parameter import model_transform
from extremepy.optimization.result import FitResult
from extremepy.subasymptotic.mixtures import (
    GaussianBlock,
    MixtureModel,
    marginal_quantile,
    mixture_kernel,
    radial_integral,
)
from extremepy.types import MarginScales


MIXTURE_FAMILIES = ("gaussian", "hot", "hw")


def _as_uniform(data: ObservationMatrix | np.ndarray) -> np.ndarray:
    if isinstance(data, ObservationMatrix):
        return convert_scale(data, MarginScales.UNIFORM).to_numpy()
    return np.atleast_2d(np.asarray(data, dtype=float))


def censored_loglik_mixture(
    model: MixtureModel,
    data: ObservationMatrix | np.ndarray,
    sites: SiteSet,
    u: float,
) -> float:
    """
    删失 copula 似然

    每行中超过 u 的站点贡献密度坐标, 其余站点在阈值处贡献分布函数; 数据先按模型边缘
    分位数变换到模型尺度, 并除以边缘密度. 完全删失的行贡献阈值处的联合分布函数.
    缺失站点直接边缘化掉.

    :param data: 均匀尺度数据
    :param u: 删失概率水平
    """
    if not 0 < u < 1:
        raise InvalidParameterError("删失水平 u 必须在 (0, 1) 之内")

    U = _as_uniform(data)
    kernel = mixture_kernel(model)
    corr = correlation_matrix(sites, model.cov)

    observed = np.isfinite(U)
    exceed = observed & (U > u)
    X = np.full(U.shape, float(marginal_quantile(kernel, u)))
    if exceed.any():
        x_exc = np.atleast_1d(marginal_quantile(kernel, U[exceed]))
        X[exceed] = x_exc
        with np.errstate(divide="ignore"):
            log_marginal = np.log(np.asarray(kernel.marginal(x_exc, "pdf"), dtype=float))
        if not np.all(np.isfinite(log_marginal)):
            LOG.warn("边缘密度在部分超阈值观测处不是有限值")
            return -np.inf
        total = -float(log_marginal.sum())
    else:
        total = 0.0

    groups: dict[tuple[bytes, bytes], list[int]] = defaultdict(list)
    for i in range(len(U)):
        if observed[i].any():
            groups[(observed[i].tobytes(), exceed[i].tobytes())].append(i)

    for _, rows in sorted(groups.items()):
        rows = np.asarray(rows)
        obs_sites = np.flatnonzero(observed[rows[0]])
        mask = exceed[rows[0], obs_sites]
        block = GaussianBlock(
            corr[np.ix_(obs_sites, obs_sites)],
            list(np.flatnonzero(mask)),
            list(np.flatnonzero(~mask)),
        )
        values = radial_integral(kernel, X[np.ix_(rows, obs_sites)], block)
        with np.errstate(divide="ignore"):
            contrib = np.log(np.maximum(values, 0.0))
        bad = ~np.isfinite(contrib)
        if bad.any():
            LOG.warn(f"{model.family} 模型删失似然第 {int(rows[bad][0])} 行的贡献不是有限值")
            return -np.inf
        total += float(contrib.sum())

    return total


def default_mixture_init(family: str, sites: SiteSet) -> dict[str, float]:
    dist = sites.distance_matrix()
    h = float(np.median(dist[np.triu_indices(len(sites), k=1)])) if len(sites) > 1 else 1.0
    init = {"phi": max(h, 1e-3), "nu": 1.0}
    match family:
        case "hot":
            init.update(beta=0.5, gamma=1.0)
        case "hw":
            init.update(delta=0.5)
    return init


def fit_mixture(
    data: ObservationMatrix,
    sites: SiteSet,
    family: str,
    u: float,
    init: dict[str, float] | None = None,
    fixed: Sequence[str] = (),
    seed: int = 0,
    threads: int = 1,
    compute_se: bool = True,
) -> FitResult:
    """
    高斯 copula, HOT 或 HW 模型的删失似然拟合

    HOT 的 β↓0 模型即把 ``beta`` 固定为 0
    """
    if family not in MIXTURE_FAMILIES:
        raise InvalidParameterError(f"fit_mixture 不支持 {family} 模型")
    U = _as_uniform(data)
    if len(U) < 2:
        raise InsufficientDataError("删失似然至少需要两个重复观测")

    values = dict(default_mixture_init(family, sites), **(init or {}))
    transform = model_transform(family, values, fixed)

    def objective(params: dict[str, float]) -> float:
        return censored_loglik_mixture(build_spec(family, params), U, sites, u)

    return maximize(
        objective,
        transform,
        family=family,
        n_effective=len(U),
        censor_level=u,
        seed=seed,
        threads=threads,
        compute_se=compute_se,
    )
