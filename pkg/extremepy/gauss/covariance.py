import numpy as np
from scipy import linalg

import extremepy
from extremepy.core.conf import NumericsConf
from extremepy.core.exceptions import NumericalFailure
from extremepy.core.sites import SiteSet, anisotropy_matrix
from extremepy.core.specs import Anisotropy, CovarianceSpec
from extremepy.logging import LOG


def mahalanobis_distance(s1, s2, aniso: Anisotropy | None = None) -> float:
    """
    d_Ω(s1, s2) = ||A(s1−s2)||, Ω = AᵀA, A = diag(1, L)·Rotation(ψ)
    """
    diff = np.asarray(s1, dtype=float) - np.asarray(s2, dtype=float)
    if aniso is not None:
        diff = anisotropy_matrix(aniso.psi, aniso.L) @ diff
    return float(np.sqrt(diff @ diff))


def correlation(spec: CovarianceSpec, s1, s2) -> float:
    return float(spec.correlation_at(mahalanobis_distance(s1, s2, spec.aniso)))


def transform_sites(sites: SiteSet, psi: float, L: float) -> SiteSet:
    """
    将站点坐标映射为 diag(1, L)·Rotation(ψ)·s, 变换后的欧氏距离即原坐标下的马氏距离
    """
    A = anisotropy_matrix(psi, L)
    return SiteSet(sites.coords @ A.T, sites.labels)


def site_distances(sites: SiteSet, aniso: Anisotropy | None = None) -> np.ndarray:
    if aniso is None:
        return sites.distance_matrix()
    return sites.distance_matrix(aniso.psi, aniso.L)


def correlation_matrix(sites: SiteSet, spec: CovarianceSpec) -> np.ndarray:
    corr = spec.correlation_at(site_distances(sites, spec.aniso))
    np.fill_diagonal(corr, 1.0)
    return corr


def robust_cholesky(C: np.ndarray, numerics: NumericsConf | None = None) -> np.ndarray:
    """
    下三角Cholesky因子. 分解失败时在对角线上加扰动, 从 jitter_start 起每次放大10倍直到 jitter_max
    """
    numerics = numerics or extremepy.config.numerics
    C = np.asarray(C, dtype=float)
    try:
        return linalg.cholesky(C, lower=True)
    except linalg.LinAlgError:
        pass

    jitter = numerics.jitter_start
    eye = np.eye(len(C))
    while jitter <= numerics.jitter_max * (1 + 1e-9):
        LOG.warn(f"协方差矩阵分解失败, 对角线扰动增加到 {jitter:.0e}")
        try:
            return linalg.cholesky(C + jitter * eye, lower=True)
        except linalg.LinAlgError:
            jitter *= 10

    raise NumericalFailure(f"对角线扰动达到 {numerics.jitter_max:.0e} 后协方差矩阵仍无法分解")
