"""
逆最大稳定过程 (IMS) 与 max-mixture

IMS 在单位指数尺度上定义为 1/Z, 其二元生存函数为 exp{−V(1/z₁, 1/z₂)}.
max-mixture 为 max{a·Z_ms, (1−a)·Z_ims}, 两部分均为单位 Fréchet 边缘, 其分布函数为两者之积.
"""
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from extremepy.core.exceptions import InsufficientDataError, InvalidParameterError
from extremepy.core.observations import ObservationMatrix
from extremepy.core.sites import SiteSet
from extremepy.core.specs import ImsSpec, MaxMixSpec, build_spec
from extremepy.asymptotic.exponent import v_pair_partials
from extremepy.asymptotic.maxstable import default_maxstable_init, maxstable_simulate
from extremepy.asymptotic.spectral import maxstable_distances
from extremepy.logging import LOG
from extremepy.margins.transforms import convert_scale
from extremepy.optimization.maximize import maximize
from extremepy.optimization.parameter import model_transform
from extremepy.optimization.result import FitResult
from extremepy.types import MarginScales, MaxStableFamily
from extremepy.utils import derive_seeds, pair_indices


def _positive(*arrays):
    for a in arrays:
        if np.any(np.asarray(a) <= 0):
            raise InvalidParameterError("参数必须为正")


def ims_bivariate(spec: ImsSpec, z: Sequence[float], h: float, kind: str = "survival") -> float:
    """
    单位指数尺度上的 IMS 二元生存函数或密度

    density = exp{−V}(V₁V₂ − V₁₂)/(z₁z₂)², V 及其偏导在 (1/z₁, 1/z₂) 处取值
    """
    z1, z2 = float(z[0]), float(z[1])
    _positive(z1, z2)
    p = v_pair_partials(spec.ms, 1.0 / z1, 1.0 / z2, h)
    match kind:
        case "survival":
            return float(np.exp(-p.V))
        case "density":
            return float(np.exp(-p.V) * (p.V1 * p.V2 - p.V12) / (z1 * z2) ** 2)
    raise InvalidParameterError(f"未知的类型: {kind}")


def as_maxmix(model: ImsSpec | MaxMixSpec) -> MaxMixSpec:
    """
    IMS 即 a=0 的 max-mixture
    """
    if isinstance(model, ImsSpec):
        return MaxMixSpec(a=0.0, ms=model.ms, ims=model)
    return model


@dataclass
class MixPartials:
    """
    单位 Fréchet 尺度上的二元分布函数及其偏导
    """

    F: np.ndarray
    F1: np.ndarray
    F2: np.ndarray
    F12: np.ndarray


def _ims_frechet_partials(spec: ImsSpec, y1, y2, h):
    """
    单位 Fréchet 边缘的 IMS 分布函数 B(y) 及偏导

    B = e^{−1/y₁} + e^{−1/y₂} − 1 + S(e₁, e₂), e = −log(1 − e^{−1/y}) 为对应的指数尺度值
    """
    p1, p2 = np.exp(-1.0 / y1), np.exp(-1.0 / y2)
    e1, e2 = -np.log(-np.expm1(-1.0 / y1)), -np.log(-np.expm1(-1.0 / y2))
    de1 = p1 / (y1**2 * -np.expm1(-1.0 / y1))
    de2 = p2 / (y2**2 * -np.expm1(-1.0 / y2))

    q = v_pair_partials(spec.ms, 1.0 / e1, 1.0 / e2, h)
    S = np.exp(-q.V)
    S1 = S * q.V1 / e1**2
    S2 = S * q.V2 / e2**2
    S12 = S * (q.V1 * q.V2 - q.V12) / (e1 * e2) ** 2

    B = p1 + p2 - 1.0 + S
    B1 = p1 / y1**2 + S1 * de1
    B2 = p2 / y2**2 + S2 * de2
    B12 = S12 * de1 * de2
    return B, B1, B2, B12


def maxmix_partials(spec: ImsSpec | MaxMixSpec, z1, z2, h, h_ims=None) -> MixPartials:
    """
    max-mixture 分布函数 F = A·B 的偏导, A = exp{−a V_ms(z)}, B = F_ims(z/(1−a))

    :param h_ims: IMS 部分的站点距离, 各向异性不同时与 h 不同
    """
    spec = as_maxmix(spec)
    h_ims = h if h_ims is None else h_ims
    z1, z2, h, h_ims = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (z1, z2, h, h_ims)))
    _positive(z1, z2)
    a = spec.a

    if a > 0:
        p = v_pair_partials(spec.ms, z1, z2, h)
        A = np.exp(-a * p.V)
        A1, A2 = -a * p.V1 * A, -a * p.V2 * A
        A12 = A * (a**2 * p.V1 * p.V2 - a * p.V12)
    else:
        A, A1, A2, A12 = np.ones_like(z1), np.zeros_like(z1), np.zeros_like(z1), np.zeros_like(z1)

    if a < 1:
        c = 1.0 - a
        B, B1, B2, B12 = _ims_frechet_partials(spec.ims, z1 / c, z2 / c, h_ims)
        B1, B2, B12 = B1 / c, B2 / c, B12 / c**2
    else:
        B, B1, B2, B12 = np.ones_like(z1), np.zeros_like(z1), np.zeros_like(z1), np.zeros_like(z1)

    return MixPartials(
        F=A * B,
        F1=A1 * B + A * B1,
        F2=A2 * B + A * B2,
        F12=A12 * B + A1 * B2 + A2 * B1 + A * B12,
    )


def maxmix_bivariate_cdf(spec: ImsSpec | MaxMixSpec, z: Sequence[float], h: float) -> float:
    """
    单位 Fréchet 尺度上的 max-mixture 二元分布函数
    """
    return float(maxmix_partials(spec, z[0], z[1], h).F)


def _frechet_log_pdf(z):
    return -2.0 * np.log(z) - 1.0 / z


def pairwise_loglik_sub(
    model: ImsSpec | MaxMixSpec,
    data: ObservationMatrix | np.ndarray,
    sites: SiteSet,
    u: float,
    censored: bool = True,
    weights=None,
) -> float:
    """
    IMS/max-mixture 的删失成对 copula 似然

    两站点都超过 u 时取密度, 一个超过时取对该站点的偏导, 都不超过时取阈值处的分布函数.

    :param data: 均匀尺度数据
    :param censored: 为假时所有观测都按密度处理
    """
    if censored and not 0 < u < 1:
        raise InvalidParameterError("删失水平 u 必须在 (0, 1) 之内")
    spec = as_maxmix(model)
    if isinstance(data, ObservationMatrix):
        Z = convert_scale(data, MarginScales.FRECHET).to_numpy()
    else:
        with np.errstate(divide="ignore"):
            Z = -1.0 / np.log(np.atleast_2d(np.asarray(data, dtype=float)))
    D = Z.shape[1]
    rows, cols = pair_indices(D)
    if len(rows) == 0:
        return 0.0

    w = np.ones(len(rows)) if weights is None else np.asarray(weights, dtype=float)
    if w.shape == (D, D):
        w = w[rows, cols]
    if w.shape != (len(rows),):
        raise InvalidParameterError(f"权重形状 {w.shape} 与站点对数 {len(rows)} 不一致")

    z_u = -1.0 / np.log(u) if censored else 0.0
    dist = maxstable_distances(spec.ms, sites)[rows, cols]
    dist_ims = maxstable_distances(spec.ims.ms, sites)[rows, cols]
    total = 0.0
    for k in np.flatnonzero(w != 0):
        z1, z2 = Z[:, rows[k]], Z[:, cols[k]]
        valid = np.isfinite(z1) & np.isfinite(z2)
        z1, z2 = z1[valid], z2[valid]
        x1, x2 = z1 > z_u, z2 > z_u
        p = maxmix_partials(spec, np.where(x1, z1, z_u), np.where(x2, z2, z_u), dist[k], dist_ims[k])

        with np.errstate(divide="ignore", invalid="ignore"):
            contrib = np.select(
                [x1 & x2, x1 & ~x2, ~x1 & x2],
                [
                    np.log(p.F12) - _frechet_log_pdf(z1) - _frechet_log_pdf(z2),
                    np.log(p.F1) - _frechet_log_pdf(z1),
                    np.log(p.F2) - _frechet_log_pdf(z2),
                ],
                default=np.log(p.F),
            )
        value = float(contrib.sum())
        if not np.isfinite(value):
            LOG.warn(f"站点对 ({sites.labels[rows[k]]}, {sites.labels[cols[k]]}) 的成对似然贡献不是有限值")
            return -np.inf
        total += w[k] * value

    return total


def ims_simulate(spec: ImsSpec, sites: SiteSet, n: int, seed: int) -> ObservationMatrix:
    """
    IMS 模拟, 单位指数尺度 E = 1/Z
    """
    Z = maxstable_simulate(spec.ms, sites, n, seed).to_numpy()
    return ObservationMatrix.from_array(1.0 / Z, MarginScales.EXPONENTIAL, sites.labels)


def maxmix_simulate(spec: MaxMixSpec, sites: SiteSet, n: int, seed: int) -> ObservationMatrix:
    """
    max{a·Z_ms, (1−a)·Z_ims}, 单位 Fréchet 尺度
    """
    seed_ms, seed_ims = derive_seeds(seed, 2)
    Z_ms = maxstable_simulate(spec.ms, sites, n, seed_ms).to_numpy()
    E = ims_simulate(spec.ims, sites, n, seed_ims).to_numpy()
    Z_ims = -1.0 / np.log(-np.expm1(-E))
    Z = np.maximum(spec.a * Z_ms, (1.0 - spec.a) * Z_ims)
    return ObservationMatrix.from_array(Z, MarginScales.FRECHET, sites.labels)


def default_sub_init(family: str, base_family: MaxStableFamily, sites: SiteSet) -> dict[str, float]:
    base = default_maxstable_init(base_family, sites)
    if family == "ims":
        return base
    return {"a": 0.5, **base, **{f"ims_{k}": v for k, v in base.items()}}


def fit_pairwise_sub(
    data: ObservationMatrix,
    sites: SiteSet,
    family: str,
    u: float,
    base_family: MaxStableFamily = "brown_resnick",
    init: dict[str, float] | None = None,
    fixed: Sequence[str] = (),
    censored: bool = True,
    seed: int = 0,
    threads: int = 1,
    compute_se: bool = True,
) -> FitResult:
    """
    IMS 或 max-mixture 的删失成对似然拟合
    """
    if family not in ("ims", "maxmix"):
        raise InvalidParameterError(f"fit_pairwise_sub 不支持 {family} 模型")
    U = convert_scale(data, MarginScales.UNIFORM).to_numpy()
    if U.shape[1] < 2:
        raise InsufficientDataError("成对似然至少需要两个站点")

    values = dict(default_sub_init(family, base_family, sites), **(init or {}))
    transform = model_transform(family, values, fixed)

    def objective(params: dict[str, float]) -> float:
        spec = build_spec(family, params, base_family=base_family)
        return pairwise_loglik_sub(spec, U, sites, u, censored=censored)

    return maximize(
        objective,
        transform,
        family=family,
        n_effective=len(U),
        censor_level=u,
        seed=seed,
        threads=threads,
        compute_se=compute_se,
        options={"base_family": base_family},
    )
