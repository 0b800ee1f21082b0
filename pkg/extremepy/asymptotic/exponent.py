"""
指数函数 V 及其偏导数

二元情形为 Hüsler-Reiss 与 extremal-t 的闭式; 任意指标集 I 的 −V_I 为
观测坐标上的密度项乘以删失坐标上的条件正态/t分布函数.
"""
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special, stats

import extremepy
from extremepy.core.exceptions import InvalidParameterError, UnsupportedModelError
from extremepy.core.specs import BrownResnickSpec, ExtremalTSpec
from extremepy.asymptotic.spectral import (
    MaxStable,
    extremal_t_constant,
    extremal_t_correlation,
    semivariogram,
)
from extremepy.gauss.qmc import QmcAccuracy, mvn_cdf, mvn_cdf_batch, mvt_cdf, mvt_cdf_batch
from extremepy.utils import set_partitions


# Smallest Hüsler-Reiss dependence parameter a, avoids division by zero for coincident sites
MIN_HR_A = 1e-10


def _check_positive(*arrays):
    for a in arrays:
        if np.any(np.asarray(a) <= 0):
            raise InvalidParameterError("指数函数的参数必须为正")


# ---------
# Bivariate
# ---------
def _hr_terms(spec: BrownResnickSpec, z1, z2, h):
    a = np.maximum(np.sqrt(2.0 * semivariogram(spec, h)), MIN_HR_A)
    log_ratio = np.log(z2 / z1)
    w = a / 2.0 + log_ratio / a
    v = a / 2.0 - log_ratio / a
    return a, w, v


def _et_terms(spec: ExtremalTSpec, z1, z2, h):
    dof = spec.dof
    rho = np.minimum(extremal_t_correlation(spec, h), 1.0 - 1e-12)
    c = np.sqrt((dof + 1.0) / (1.0 - rho**2))
    r21 = (z2 / z1) ** (1.0 / dof)
    r12 = (z1 / z2) ** (1.0 / dof)
    x1 = c * (r21 - rho)
    x2 = c * (r12 - rho)
    return dof, c, r21, r12, x1, x2


def v_pair(spec: MaxStable, z1, z2, h):
    """
    二元指数函数 V(z1, z2), 对重复观测与站点对向量化
    """
    z1, z2, h = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (z1, z2, h)))
    _check_positive(z1, z2)
    if isinstance(spec, BrownResnickSpec):
        _, w, v = _hr_terms(spec, z1, z2, h)
        out = special.ndtr(w) / z1 + special.ndtr(v) / z2
    else:
        dof, _, _, _, x1, x2 = _et_terms(spec, z1, z2, h)
        out = stats.t.cdf(x1, dof + 1.0) / z1 + stats.t.cdf(x2, dof + 1.0) / z2
    return float(out) if out.ndim == 0 else out


@dataclass
class PairPartials:
    V: np.ndarray
    V1: np.ndarray
    V2: np.ndarray
    V12: np.ndarray

    @property
    def log_density(self) -> np.ndarray:
        """
        log[exp{−V}(V₁V₂ − V₁₂)]
        """
        with np.errstate(divide="ignore", invalid="ignore"):
            return -self.V + np.log(self.V1 * self.V2 - self.V12)


def v_pair_partials(spec: MaxStable, z1, z2, h) -> PairPartials:
    z1, z2, h = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (z1, z2, h)))
    _check_positive(z1, z2)
    if isinstance(spec, BrownResnickSpec):
        a, w, v = _hr_terms(spec, z1, z2, h)
        Phi_w, Phi_v = special.ndtr(w), special.ndtr(v)
        V = Phi_w / z1 + Phi_v / z2
        V1 = -Phi_w / z1**2
        V2 = -Phi_v / z2**2
        V12 = -stats.norm.pdf(w) / (a * z1**2 * z2)
    else:
        dof, c, r21, _, x1, x2 = _et_terms(spec, z1, z2, h)
        T1, T2 = stats.t.cdf(x1, dof + 1.0), stats.t.cdf(x2, dof + 1.0)
        V = T1 / z1 + T2 / z2
        V1 = -T1 / z1**2
        V2 = -T2 / z2**2
        V12 = -stats.t.pdf(x1, dof + 1.0) * c * r21 / (dof * z2 * z1**2)
    return PairPartials(V, V1, V2, V12)


def exponent_v_partials(spec: MaxStable, z: Sequence[float], h: float, order: str | int):
    """
    二元偏导数 V₁, V₂ 或 V₁₂
    """
    if len(z) != 2:
        raise InvalidParameterError("偏导数只支持二元情形")
    p = v_pair_partials(spec, z[0], z[1], h)
    match str(order):
        case "1":
            return float(p.V1)
        case "2":
            return float(p.V2)
        case "12":
            return float(p.V12)
    raise InvalidParameterError(f"未知的偏导阶: {order}")


# ---------------
# Arbitrary order
# ---------------
@dataclass
class PartialTerms:
    """
    −V_I = exp(log_factor) × P(删失坐标 ≤ upper), 条件分布由 corr 和 dof 给出
    """

    log_factor: np.ndarray
    upper: np.ndarray
    corr: np.ndarray
    dof: float | None


def _partial_terms(spec: MaxStable, Z: np.ndarray, index_set: Sequence[int], dist: np.ndarray) -> PartialTerms:
    m, D = Z.shape
    I = list(index_set)
    C = [k for k in range(D) if k not in I]
    logZ = np.log(Z)

    if isinstance(spec, BrownResnickSpec):
        g = semivariogram(spec, dist)
        r, o = I[0], I[1:]
        rest = o + C
        # Increments relative to the reference site
        y = logZ[:, rest] - logZ[:, [r]] + g[rest, r][None, :]
        S = g[rest, r][:, None] + g[rest, r][None, :] - g[np.ix_(rest, rest)]
        no = len(o)
        log_factor = -2.0 * logZ[:, r] - logZ[:, o].sum(axis=1)
        y_o, y_c = y[:, :no], y[:, no:]
        S_oo, S_co, S_cc = S[:no, :no], S[no:, :no], S[no:, no:]
        if no:
            log_factor = log_factor + stats.multivariate_normal(
                mean=np.zeros(no), cov=S_oo, allow_singular=True
            ).logpdf(y_o).reshape(m)
            gain = np.linalg.solve(S_oo, S_co.T).T
            mean_c = y_o @ gain.T
            cov_c = S_cc - gain @ S_co.T
        else:
            mean_c, cov_c = np.zeros_like(y_c), S_cc
        dof = None
        shift = y_c - mean_c
    else:
        nu = spec.dof
        k = len(I)
        R = extremal_t_correlation(spec, dist)
        x = (Z / extremal_t_constant(nu)) ** (1.0 / nu)
        x_I = x[:, I]
        R_II = R[np.ix_(I, I)]
        R_inv_xI = np.linalg.solve(R_II, x_I.T).T
        Q = np.sum(x_I * R_inv_xI, axis=1)
        _, logdet = np.linalg.slogdet(R_II)
        log_factor = (
            (1 - k) * np.log(nu)
            - (k / nu) * np.log(extremal_t_constant(nu))
            + (1.0 / nu - 1.0) * logZ[:, I].sum(axis=1)
            - 0.5 * k * np.log(2.0 * np.pi)
            - 0.5 * logdet
            + ((k + nu) / 2.0 - 1.0) * np.log(2.0)
            - ((k + nu) / 2.0) * np.log(Q)
            + special.gammaln((k + nu) / 2.0)
        )
        R_CI = R[np.ix_(C, I)]
        mean_c = R_inv_xI @ R_CI.T
        cov_c = R[np.ix_(C, C)] - R_CI @ np.linalg.solve(R_II, R_CI.T)
        dof = nu + k
        shift = (x[:, C] - mean_c) * np.sqrt((nu + k) / Q)[:, None]

    if C:
        sd = np.sqrt(np.maximum(np.diag(cov_c), 1e-300))
        upper = shift / sd
        corr = cov_c / np.outer(sd, sd)
        np.fill_diagonal(corr, 1.0)
    else:
        upper, corr = np.empty((m, 0)), np.empty((0, 0))
    return PartialTerms(log_factor, upper, corr, dof)


def _check_index_set(index_set: Sequence[int], D: int):
    if len(index_set) == 0 or len(set(index_set)) != len(index_set):
        raise InvalidParameterError("指标集必须非空且无重复")
    if min(index_set) < 0 or max(index_set) >= D:
        raise InvalidParameterError(f"指标集 {list(index_set)} 越界")


def exponent_measure_partial(
    spec: MaxStable,
    z: Sequence[float],
    index_set: Sequence[int],
    dist: np.ndarray,
    accuracy: QmcAccuracy | None = None,
    seed: int = 0,
) -> float:
    """
    −V_I(z) = −∂^{|I|}V/∂z_I, I 之外的坐标通过条件分布函数积分掉
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    _check_positive(z)
    _check_index_set(index_set, len(z))
    terms = _partial_terms(spec, z[None, :], index_set, np.atleast_2d(dist))

    if terms.upper.shape[1] == 0:
        prob = 1.0
    elif terms.dof is None:
        prob = mvn_cdf(terms.upper[0], terms.corr, accuracy, seed)["prob"]
    else:
        prob = mvt_cdf(terms.upper[0], terms.corr, terms.dof, accuracy, seed)["prob"]
    return float(np.exp(terms.log_factor[0]) * prob)


def log_exponent_measure_partial_batch(
    spec: MaxStable,
    Z: np.ndarray,
    index_set: Sequence[int],
    dist: np.ndarray,
    n_points: int | None = None,
    seed: int = 0,
) -> np.ndarray:
    """
    多行 z 的 log(−V_I), 同一指标集共用条件相关矩阵与拟蒙特卡洛点集
    """
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    _check_index_set(index_set, Z.shape[1])
    terms = _partial_terms(spec, Z, index_set, np.atleast_2d(dist))
    if terms.upper.shape[1] == 0:
        return terms.log_factor
    if terms.dof is None:
        prob = mvn_cdf_batch(terms.upper, terms.corr, n_points, seed)
    else:
        prob = mvt_cdf_batch(terms.upper, terms.corr, terms.dof, n_points, seed)
    with np.errstate(divide="ignore"):
        return terms.log_factor + np.log(prob)


def exponent_v(
    spec: MaxStable,
    z: Sequence[float],
    dist: np.ndarray,
    subset: Sequence[int] | None = None,
    accuracy: QmcAccuracy | None = None,
    seed: int = 0,
) -> float:
    """
    限制在 ``subset`` 上的指数函数 V, 三维及以上由欧拉关系 V = Σ_j z_j·(−V_j) 计算
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    dist = np.atleast_2d(np.asarray(dist, dtype=float))
    subset = list(range(len(z))) if subset is None else list(subset)
    _check_index_set(subset, len(z))
    z, dist = z[subset], dist[np.ix_(subset, subset)]
    _check_positive(z)

    D = len(z)
    if D > extremepy.config.numerics.max_exponent_dim:
        raise UnsupportedModelError(
            f"多元指数函数最多支持 {extremepy.config.numerics.max_exponent_dim} 维, 当前 {D} 维"
        )
    if D == 1:
        return float(1.0 / z[0])
    if D == 2:
        return v_pair(spec, z[0], z[1], dist[0, 1])

    return float(
        sum(z[j] * exponent_measure_partial(spec, z, [j], dist, accuracy, seed) for j in range(D))
    )


def maxstable_density(
    spec: MaxStable,
    z: Sequence[float],
    dist: np.ndarray,
    accuracy: QmcAccuracy | None = None,
    seed: int = 0,
) -> float:
    """
    完整的最大稳定密度 exp{−V}·Σ_π Π_k (−V_{π_k}), 对所有集合划分求和
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    _check_positive(z)
    D = len(z)
    max_dim = extremepy.config.numerics.max_density_dim
    if D > max_dim:
        raise UnsupportedModelError(
            f"完整密度最多支持 {max_dim} 维 (当前 {D} 维), 请改用成对似然 pairwise_loglik_maxstable"
        )

    cache: dict[tuple[int, ...], float] = dict()

    def block_term(block: list[int]) -> float:
        key = tuple(sorted(block))
        if key not in cache:
            cache[key] = exponent_measure_partial(spec, z, key, dist, accuracy, seed)
        return cache[key]

    total = sum(
        np.prod([block_term(block) for block in partition])
        for partition in set_partitions(range(D))
    )
    return float(np.exp(-exponent_v(spec, z, dist, accuracy=accuracy, seed=seed)) * total)


def extremal_coefficient(spec: MaxStable, h) -> np.ndarray | float:
    """
    二元极值系数 V(1,1)
    """
    return v_pair(spec, 1.0, 1.0, h)
