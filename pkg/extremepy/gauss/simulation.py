import numpy as np

from extremepy.core.observations import ObservationMatrix
from extremepy.core.sites import SiteSet
from extremepy.core.specs import CovarianceSpec
from extremepy.gauss.covariance import correlation_matrix, robust_cholesky
from extremepy.logging import LOG
from extremepy.types import GaussianLaw, MarginScales


def gaussian_draws(cov: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """
    n×D 零均值高斯样本, 协方差经带扰动的Cholesky分解
    """
    L = robust_cholesky(cov)
    return rng.standard_normal((n, len(cov))) @ L.T


def gp_simulate(sites: SiteSet, spec: CovarianceSpec, n: int, seed: int) -> ObservationMatrix:
    """
    零均值单位方差的高斯过程模拟, 输出为正态尺度
    """
    if spec.gaussian_shape:
        LOG.warn("ν=2 的高斯形相关函数可能导致协方差矩阵接近奇异")

    rng = np.random.default_rng(seed)
    draws = gaussian_draws(correlation_matrix(sites, spec), n, rng)
    return ObservationMatrix.from_array(draws, MarginScales.NORMAL, sites.labels)


def gp_condition_zero(sites: SiteSet, s0_index: int, spec: CovarianceSpec) -> GaussianLaw:
    """
    零均值高斯向量在 Z(s0)=0 条件下的分布: 均值0, 协方差 C − c₀c₀ᵀ/C₀₀
    """
    if not 0 <= s0_index < len(sites):
        raise IndexError(f"条件站点序号 {s0_index} 越界")

    C = correlation_matrix(sites, spec)
    c0 = C[:, s0_index]
    cov = C - np.outer(c0, c0) / C[s0_index, s0_index]
    cov[s0_index, :] = 0.0
    cov[:, s0_index] = 0.0
    return GaussianLaw(mean=np.zeros(len(sites)), cov=cov)
