"""
r-Pareto 过程: X = R·W, R 为标准 Pareto, W = Q/r(Q) 满足 r(W) = 1
"""
from collections import defaultdict
from typing import Sequence

import numpy as np
from scipy import special

from extremepy.core.exceptions import (
    InsufficientDataError,
    InvalidParameterError,
    NumericalFailure,
    UnsupportedModelError,
)
from extremepy.core.observations import ObservationMatrix
from extremepy.core.sites import SiteSet
from extremepy.core.specs import RiskFunctional, RParetoSpec, build_spec
from extremepy.asymptotic.exponent import log_exponent_measure_partial_batch
from extremepy.asymptotic.maxstable import default_maxstable_init
from extremepy.asymptotic.spectral import TiltedProfileSampler, maxstable_distances, risk_eval
from extremepy.logging import LOG
from extremepy.margins.transforms import convert_scale
from extremepy.optimization.maximize import maximize
from extremepy.optimization.parameter import model_transform
from extremepy.optimization.result import FitResult
from extremepy.types import MarginScales, MaxStableFamily


MAX_REJECTION_ROUNDS = 1_000

MIN_EXCEEDANCE_ROWS = 10


def _check_functional(functional: RiskFunctional, D: int):
    if functional.tag == "site" and functional.site >= D:
        raise InvalidParameterError(f"site 泛函的站点序号 {functional.site} 越界 (共 {D} 个站点)")


def angular_profiles(spec: RParetoSpec, sites: SiteSet, n: int, rng: np.random.Generator) -> np.ndarray:
    """
    r-Pareto 角度分量 W, 每行 r(W) = 1

    site 泛函直接取以该站点为参考的倾斜谱函数; 其余泛函先按参考站点均匀混合抽样
    (即按 ΣQ 加权), 再以概率 r(Q)/ΣQ 接受, 得到按 r(Q) 加权的谱函数.
    """
    D = len(sites)
    functional = spec.functional
    _check_functional(functional, D)
    sampler = TiltedProfileSampler(spec.base, maxstable_distances(spec.base, sites))

    if functional.tag == "site":
        Q = sampler.draw(functional.site, n, rng)
        return Q / risk_eval(functional, Q)[:, None]

    accepted, total = [], 0
    for _ in range(MAX_REJECTION_ROUNDS):
        if total >= n:
            break
        js = rng.integers(0, D, size=max(n - total, 16))
        Q = sampler.draw_mixture(js, rng)
        r = np.atleast_1d(risk_eval(functional, Q))
        keep = rng.random(len(r)) * Q.sum(axis=1) < r
        if functional.tag == "mean":
            keep[:] = True
        keep &= r > 0
        accepted.append(Q[keep] / r[keep, None])
        total += int(keep.sum())
    else:
        if total < n:
            raise NumericalFailure(
                f"{functional.tag} 泛函的拒绝抽样在 {MAX_REJECTION_ROUNDS} 轮后只接受了 {total}/{n} 个谱函数"
            )

    return np.concatenate(accepted)[:n]


def rpareto_simulate(spec: RParetoSpec, sites: SiteSet, n: int, seed: int) -> ObservationMatrix:
    """
    模拟 r-Pareto 过程, 输出为标准 Pareto 尺度且每行 r(X) = R ≥ 1
    """
    rng = np.random.default_rng(seed)
    W = angular_profiles(spec, sites, n, rng)
    R = 1.0 / (1.0 - rng.random(n))
    return ObservationMatrix.from_array(R[:, None] * W, MarginScales.PARETO, sites.labels)


def _as_pareto(data: ObservationMatrix | np.ndarray) -> np.ndarray:
    if isinstance(data, ObservationMatrix):
        return convert_scale(data, MarginScales.PARETO).to_numpy()
    return np.atleast_2d(np.asarray(data, dtype=float))


def _row_risk(functional: RiskFunctional, Y: np.ndarray) -> np.ndarray:
    match functional.tag:
        case "max":
            return np.nanmax(np.where(np.isfinite(Y), Y, -np.inf), axis=1)
        case "mean":
            return np.nanmean(Y, axis=1)
    raise UnsupportedModelError(f"删失似然不支持 {functional.tag} 泛函的归一化常数")


def exceedance_rows(functional: RiskFunctional, data, u: float) -> np.ndarray:
    """
    r(行) > u 的行序号, r 只在非缺失站点上计算
    """
    Y = _as_pareto(data)
    with np.errstate(invalid="ignore"):
        risk = _row_risk(functional, Y)
    return np.flatnonzero(np.isfinite(risk) & (risk > u))


def censored_loglik_rpareto(
    spec: RParetoSpec,
    data: ObservationMatrix | np.ndarray,
    sites: SiteSet,
    u: float,
    only_rows_with_exceedance: bool = True,
    n_points: int | None = None,
) -> float:
    """
    删失 Pareto 过程似然 Σ_i log[−V_{I_i}{max(y_i, u)} / K_r(u)]

    I_i 为超过阈值 u 的站点; max 泛函的 K_r(u) = V(u,…,u), mean 泛函的 K_r(u) 与参数无关而省略.
    缺失站点直接边缘化掉.

    :param u: 标准 Pareto 尺度上的阈值
    :param only_rows_with_exceedance: 为真时只使用 r(行) > u 的行, 否则遇到 r(行) ≤ u 的行报错
    """
    if u <= 0:
        raise InvalidParameterError("阈值必须为正")

    Y = _as_pareto(data)
    risk = _row_risk(spec.functional, Y)
    selected = np.isfinite(risk) & (risk > u)
    if not only_rows_with_exceedance and not selected.all():
        raise InvalidParameterError(f"有 {int((~selected).sum())} 行的风险泛函不超过阈值 u={u}")
    Y = Y[selected]
    if len(Y) == 0:
        return 0.0

    dist = maxstable_distances(spec.base, sites)
    observed = np.isfinite(Y)
    exceed = observed & (Y > u)

    groups: dict[tuple[bytes, bytes], list[int]] = defaultdict(list)
    for i in range(len(Y)):
        groups[(observed[i].tobytes(), exceed[i].tobytes())].append(i)

    log_norm: dict[bytes, float] = dict()
    total = 0.0
    for (obs_key, _), rows in sorted(groups.items()):
        rows = np.asarray(rows)
        obs_sites = np.flatnonzero(observed[rows[0]])
        exc_local = np.flatnonzero(exceed[rows[0], obs_sites])
        sub_dist = dist[np.ix_(obs_sites, obs_sites)]

        Z = np.maximum(Y[np.ix_(rows, obs_sites)], u)
        contrib = log_exponent_measure_partial_batch(
            spec.base, Z, exc_local, sub_dist, n_points=n_points
        )

        if spec.functional.tag == "max":
            if obs_key not in log_norm:
                ones = np.ones((1, len(obs_sites)))
                # Euler: V(1,…,1) = Σ_j −V_j(1,…,1)
                log_terms = [
                    log_exponent_measure_partial_batch(spec.base, ones, [j], sub_dist, n_points=n_points)[0]
                    for j in range(len(obs_sites))
                ]
                log_norm[obs_key] = float(special.logsumexp(log_terms)) - np.log(u)
            contrib = contrib - log_norm[obs_key]

        bad = ~np.isfinite(contrib)
        if bad.any():
            LOG.warn(f"r-Pareto 似然第 {int(np.flatnonzero(selected)[rows[bad][0]])} 行的贡献不是有限值")
            return -np.inf
        total += float(contrib.sum())

    return total


def fit_rpareto(
    data: ObservationMatrix,
    sites: SiteSet,
    u: float,
    functional: RiskFunctional,
    base_family: MaxStableFamily = "brown_resnick",
    init: dict[str, float] | None = None,
    fixed: Sequence[str] = (),
    seed: int = 0,
    threads: int = 1,
    compute_se: bool = True,
) -> FitResult:
    """
    r-Pareto 删失似然拟合

    :param u: 边缘概率水平, 在 Pareto 尺度上对应阈值 1/(1−u)
    """
    if not 0 < u < 1:
        raise InvalidParameterError("删失水平 u 必须在 (0, 1) 之内")
    if functional.tag not in ("max", "mean"):
        raise UnsupportedModelError(f"删失似然不支持 {functional.tag} 泛函的归一化常数")

    Y = _as_pareto(data)
    threshold = 1.0 / (1.0 - u)
    rows = exceedance_rows(functional, Y, threshold)
    if len(rows) < MIN_EXCEEDANCE_ROWS:
        raise InsufficientDataError(f"超过阈值的行只有 {len(rows)} 个, 至少需要 {MIN_EXCEEDANCE_ROWS} 个")
    Y_exc = Y[rows]
    LOG.info(f"r-Pareto 拟合使用 {len(rows)}/{len(Y)} 个超阈值行")

    values = dict(default_maxstable_init(base_family, sites), **(init or {}))
    transform = model_transform(base_family, values, fixed)

    def objective(params: dict[str, float]) -> float:
        spec = build_spec("rpareto", params, base_family=base_family, functional=functional)
        return censored_loglik_rpareto(spec, Y_exc, sites, threshold)

    options = {"base_family": base_family, "functional": functional.tag}
    if functional.site is not None:
        options["functional_site"] = str(functional.site)
    return maximize(
        objective,
        transform,
        family="rpareto",
        n_effective=len(Y),
        censor_level=u,
        seed=seed,
        threads=threads,
        compute_se=compute_se,
        options=options,
    )
