"""
条件极值模型的残差过程 Z⁰

Z⁰ 由均值 μ, 标准差 σ 的高斯过程在 Z(s0)=0 条件下得到, 再把每个站点的正态边缘按矩匹配
映射到形状为 δ(h) 的 delta-Laplace 边缘, 相依结构保持为条件高斯 copula.
"""
from dataclasses import dataclass

import numpy as np
from scipy import linalg, special

from extremepy.core.exceptions import InvalidParameterError
from extremepy.core.sites import SiteSet
from extremepy.core.specs import SceSpec
from extremepy.conditional.delta_laplace import (
    dlaplace_eval,
    dlaplace_to_normal,
    moment_matched_scale,
    normal_to_dlaplace,
)
from extremepy.gauss.covariance import correlation_matrix, robust_cholesky, site_distances
from extremepy.gauss.simulation import gp_condition_zero


LOG_2PI = np.log(2.0 * np.pi)


@dataclass
class ResidualLaw:
    """
    :param s0_index: 条件站点序号
    :param dist: 各站点到条件站点的 (各向异性) 距离
    :param others: 除条件站点外的站点序号
    :param mean: others 上正态边缘的均值
    :param sd: others 上正态边缘的标准差
    :param corr: others 上的条件相关矩阵
    :param dl_scale: 矩匹配得到的 delta-Laplace 尺度参数
    :param dl_shape: δ(h)
    """

    s0_index: int
    dist: np.ndarray
    others: np.ndarray
    mean: np.ndarray
    sd: np.ndarray
    corr: np.ndarray
    dl_scale: np.ndarray
    dl_shape: np.ndarray

    @property
    def n_sites(self) -> int:
        return len(self.dist)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """
        n×D 的 Z⁰ 样本, 条件站点一列恒为 0
        """
        out = np.zeros((n, self.n_sites))
        if len(self.others) == 0:
            return out
        L = robust_cholesky(self.corr)
        g = rng.standard_normal((n, len(self.others))) @ L.T
        out[:, self.others] = normal_to_dlaplace(g, self.mean, self.dl_scale, self.dl_shape)
        return out

    def log_density(self, Z: np.ndarray, columns: np.ndarray | None = None) -> np.ndarray:
        """
        others (或其子集 ``columns``, 为 others 内的位置) 上 Z⁰ 的联合对数密度, 每行一个值

        缺失站点的边缘化即取相关矩阵的子块
        """
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        cols = np.arange(len(self.others)) if columns is None else np.asarray(columns)
        if Z.shape[1] != len(cols):
            raise InvalidParameterError(f"残差维数 {Z.shape[1]} 与站点数 {len(cols)} 不一致")
        if len(cols) == 0:
            return np.zeros(len(Z))

        mu, scale, shape = self.mean[cols], self.dl_scale[cols], self.dl_shape[cols]
        g = dlaplace_to_normal(Z, mu, scale, shape)
        L = robust_cholesky(self.corr[np.ix_(cols, cols)])
        w = linalg.solve_triangular(L, g.T, lower=True)
        log_det = 2.0 * np.log(np.diag(L)).sum()

        # Gaussian copula density times the delta-Laplace margins
        log_copula = -0.5 * (w**2).sum(axis=0) - 0.5 * log_det + 0.5 * (g**2).sum(axis=1)
        log_margins = dlaplace_eval(Z, kind="logpdf", mu=mu, sigma=scale, delta=shape)
        return log_copula + np.atleast_2d(log_margins).sum(axis=1)


def residual_law(sites: SiteSet, s0_index: int, spec: SceSpec) -> ResidualLaw:
    if not 0 <= s0_index < len(sites):
        raise InvalidParameterError(f"条件站点序号 {s0_index} 越界")

    dist = site_distances(sites, spec.cov.aniso)[s0_index]
    law = gp_condition_zero(sites, s0_index, spec.cov)
    rho = correlation_matrix(sites, spec.cov)[s0_index]
    others = np.delete(np.arange(len(sites)), s0_index)

    cov = law["cov"][np.ix_(others, others)]
    var = np.clip(np.diag(cov), 1e-12, None)
    sd = np.sqrt(var)
    corr = cov / np.outer(sd, sd)
    np.fill_diagonal(corr, 1.0)

    shape = np.asarray(spec.delta(dist[others]), dtype=float)
    mean = spec.mu * (1.0 - rho[others])
    return ResidualLaw(
        s0_index=s0_index,
        dist=dist,
        others=others,
        mean=mean,
        sd=spec.sigma * sd,
        corr=corr,
        dl_scale=moment_matched_scale(spec.sigma * sd, shape),
        dl_shape=shape,
    )


def residual_moments(law: ResidualLaw) -> tuple[np.ndarray, np.ndarray]:
    """
    others 上 Z⁰ 的边缘均值与方差, 与矩匹配前的条件高斯一致
    """
    var = law.dl_scale**2 * np.exp(special.gammaln(3.0 / law.dl_shape) - special.gammaln(1.0 / law.dl_shape))
    return law.mean, var
