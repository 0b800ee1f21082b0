"""
Brown-Resnick 与 extremal-t 的谱函数抽样

对参考站点 j 的倾斜测度 (Q_j ≡ 1):
    Brown-Resnick: Q_k = exp{G_k − γ(s_k−s_j)}, G 为 G_j=0 且变差函数为 2γ 的高斯向量
    extremal-t:    Q_k = (ε_k⁺/ε_j)^ν, ε_j = √χ²_{ν+1}, ε_k | ε_j ~ N(ρ_kj ε_j, R_kl − ρ_kj ρ_lj)
"""
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from extremepy.core.exceptions import InvalidParameterError
from extremepy.core.sites import SiteSet
from extremepy.core.specs import BrownResnickSpec, ExtremalTSpec, RiskFunctional
from extremepy.gauss.covariance import robust_cholesky, site_distances


MaxStable = BrownResnickSpec | ExtremalTSpec


def maxstable_distances(spec: MaxStable, sites: SiteSet) -> np.ndarray:
    return site_distances(sites, spec.aniso)


def semivariogram(spec: BrownResnickSpec, dist) -> np.ndarray:
    return spec.semivariogram(dist)


def extremal_t_correlation(spec: ExtremalTSpec, dist) -> np.ndarray:
    corr = spec.cov.correlation_at(dist)
    if corr.ndim == 2:
        np.fill_diagonal(corr, 1.0)
    return corr


def extremal_t_constant(dof: float) -> float:
    """
    c_ν 使 c_ν·E[max(0, ε)^ν] = 1, ε 为标准正态
    """
    return float(np.sqrt(np.pi) * 2.0 ** (1.0 - dof / 2.0) / special.gamma((dof + 1.0) / 2.0))


def risk_eval(functional: RiskFunctional, x) -> np.ndarray | float:
    """
    风险泛函 r(x), 沿最后一维计算 max/min/mean 或单站点取值
    """
    x = np.asarray(x, dtype=float)
    match functional.tag:
        case "max":
            out = x.max(axis=-1)
        case "min":
            out = x.min(axis=-1)
        case "mean":
            out = x.mean(axis=-1)
        case "site":
            if functional.site >= x.shape[-1]:
                raise InvalidParameterError(f"站点序号 {functional.site} 越界")
            out = x[..., functional.site]
    return float(out) if np.ndim(out) == 0 else out


@dataclass
class TiltedProfileSampler:
    spec: MaxStable
    dist: np.ndarray
    _factors: dict[int, np.ndarray] = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        self.dist = np.atleast_2d(np.asarray(self.dist, dtype=float))
        self.n_sites = self.dist.shape[0]
        if isinstance(self.spec, BrownResnickSpec):
            self._gamma = semivariogram(self.spec, self.dist)
        else:
            self._corr = extremal_t_correlation(self.spec, self.dist)

    def _others(self, j: int) -> np.ndarray:
        return np.delete(np.arange(self.n_sites), j)

    def _factor(self, j: int) -> np.ndarray:
        if j not in self._factors:
            k = self._others(j)
            if isinstance(self.spec, BrownResnickSpec):
                g = self._gamma
                cov = g[k, j][:, None] + g[k, j][None, :] - g[np.ix_(k, k)]
            else:
                R = self._corr
                cov = R[np.ix_(k, k)] - np.outer(R[k, j], R[k, j])
            self._factors[j] = robust_cholesky(cov)
        return self._factors[j]

    def draw(self, j: int, n: int, rng: np.random.Generator) -> np.ndarray:
        """
        参考站点 j 的倾斜测度下的 n 个谱函数
        """
        Q = np.ones((n, self.n_sites))
        if self.n_sites == 1:
            return Q

        k = self._others(j)
        G = rng.standard_normal((n, len(k))) @ self._factor(j).T
        if isinstance(self.spec, BrownResnickSpec):
            Q[:, k] = np.exp(G - self._gamma[k, j])
        else:
            dof = self.spec.dof
            eps_j = np.sqrt(rng.chisquare(dof + 1.0, size=n))
            eps_k = self._corr[k, j][None, :] * eps_j[:, None] + G
            Q[:, k] = (np.maximum(eps_k, 0.0) / eps_j[:, None]) ** dof
        return Q

    def draw_mixture(self, js: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """
        逐行按给定参考站点抽样, 按站点序号分组以保证抽样顺序固定
        """
        js = np.asarray(js, dtype=int)
        Q = np.empty((len(js), self.n_sites))
        for j in np.unique(js):
            rows = np.flatnonzero(js == j)
            Q[rows] = self.draw(int(j), len(rows), rng)
        return Q

    def draw_normalized(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """
        和归一化的谱函数 W = D·Q/ΣQ, 参考站点均匀抽取; 均值为1且上界为D
        """
        js = rng.integers(0, self.n_sites, size=n)
        Q = self.draw_mixture(js, rng)
        return self.n_sites * Q / Q.sum(axis=1, keepdims=True)


def spectral_profiles(
    spec: MaxStable,
    dist: np.ndarray,
    n: int,
    rng: np.random.Generator,
    normalized: bool = False,
) -> np.ndarray:
    """
    均值为1的谱函数 W

    :param normalized: 为真时返回和归一化的有界谱函数, 否则返回各族的原始构造
    """
    sampler = TiltedProfileSampler(spec, dist)
    if normalized:
        return sampler.draw_normalized(n, rng)

    if isinstance(spec, BrownResnickSpec):
        # exp{ε − γ(s − s₀)} with the first site as origin
        return sampler.draw(0, n, rng)

    R = extremal_t_correlation(spec, sampler.dist)
    eps = rng.standard_normal((n, sampler.n_sites)) @ robust_cholesky(R).T
    return extremal_t_constant(spec.dof) * np.maximum(eps, 0.0) ** spec.dof


def tilted_profiles(
    spec: MaxStable, dist: np.ndarray, j: int, n: int, rng: np.random.Generator
) -> np.ndarray:
    return TiltedProfileSampler(spec, dist).draw(j, n, rng)
