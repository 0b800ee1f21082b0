"""
多元正态/t分布函数的随机化拟蒙特卡洛计算

点集为Owen打乱的Sobol序列, 多次独立打乱的估计给出误差;
被积函数采用 Genz 变量分离, 按条件概率由小到大重排变量.
"""
from dataclasses import dataclass
from functools import cache

import numpy as np
from scipy import special, stats
from scipy.stats import qmc

import extremepy
from extremepy.constants import BVN_QUAD_ORDER
from extremepy.core.exceptions import InvalidParameterError, NumericalFailure
from extremepy.gauss.covariance import robust_cholesky
from extremepy.types import ProbabilityEstimate


TINY = 1e-300

# Bounds beyond which Φ is exactly 0 or 1 in double precision
NORMAL_CLIP = 38.0

BATCH_CELLS = 4_000_000


@dataclass(frozen=True)
class QmcAccuracy:
    """
    :param samples: 每次打乱的点数, 向上取到2的幂
    :param shifts: 独立打乱次数, 不少于8
    :param tolerance: 误差目标, 设定时点数加倍直到误差估计低于该值
    """

    samples: int | None = None
    shifts: int | None = None
    tolerance: float | None = None
    max_doublings: int = 6

    def resolve(self) -> tuple[int, int]:
        numerics = extremepy.config.numerics
        samples = self.samples or numerics.qmc_points
        shifts = max(self.shifts or numerics.qmc_shifts, 8)
        return samples, shifts


def sobol_points(n: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    """
    Owen打乱的Sobol点, 点数向上取到2的幂以保持平衡性

    每次调用独立打乱, 不同调用的估计相互独立且各自无偏
    """
    m = max(1, int(np.ceil(np.log2(max(n, 2)))))
    return qmc.Sobol(dim, scramble=True, seed=rng).random_base2(m)


@cache
def _gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(order)


def bvn_cdf(h, k, rho):
    """
    二元标准正态分布函数 Φ₂(h, k; ρ), 由Plackett恒等式的反正弦形式做Gauss-Legendre积分
    """
    h = np.clip(np.asarray(h, dtype=float), -NORMAL_CLIP, NORMAL_CLIP)
    k = np.clip(np.asarray(k, dtype=float), -NORMAL_CLIP, NORMAL_CLIP)
    rho = np.clip(np.asarray(rho, dtype=float), -1.0, 1.0)
    h, k, rho = np.broadcast_arrays(h, k, rho)

    base = special.ndtr(h) * special.ndtr(k)
    upper = np.arcsin(rho)
    nodes, weights = _gauss_legendre(BVN_QUAD_ORDER)

    # Map nodes from [-1, 1] to [0, asin ρ]
    theta = 0.5 * upper[..., None] * (nodes + 1.0)
    sin_t, cos2_t = np.sin(theta), np.cos(theta) ** 2
    hh, kk = h[..., None], k[..., None]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        expo = -(hh**2 + kk**2 - 2.0 * hh * kk * sin_t) / (2.0 * cos2_t)
        integrand = np.where(cos2_t > 0, np.exp(expo), 0.0)
    integral = 0.5 * upper * np.sum(weights * integrand, axis=-1) / (2.0 * np.pi)
    out = base + integral

    # Perfect (anti-)dependence in closed form
    out = np.where(rho >= 1.0, special.ndtr(np.minimum(h, k)), out)
    out = np.where(rho <= -1.0, np.maximum(special.ndtr(h) + special.ndtr(k) - 1.0, 0.0), out)
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def _validate(upper: np.ndarray, corr: np.ndarray):
    if corr.ndim != 2 or corr.shape[0] != corr.shape[1] or corr.shape[0] != upper.shape[-1]:
        raise InvalidParameterError(f"相关矩阵维数 {corr.shape} 与上限维数 {upper.shape} 不一致")
    if not np.allclose(corr, corr.T, atol=1e-12):
        raise InvalidParameterError("相关矩阵不对称")
    if corr.shape[0] and np.linalg.eigvalsh(corr).min() < -1e-8:
        raise InvalidParameterError("相关矩阵非正定")


def _reordered_factor(b: np.ndarray, C: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    带变量重排的Cholesky分解: 每一步选取条件概率最小的变量

    :return: (L, b), 两者都已按新的顺序排列
    """
    d = len(b)
    C, b = C.copy(), b.copy()
    L = np.zeros((d, d))
    y = np.zeros(d)
    for k in range(d):
        s2 = np.diag(C)[k:] - np.sum(L[k:, :k] ** 2, axis=1)
        s = np.sqrt(np.maximum(s2, TINY))
        bt = (b[k:] - L[k:, :k] @ y[:k]) / s
        m = k + int(np.argmin(special.ndtr(bt)))
        if m != k:
            C[[k, m], :] = C[[m, k], :]
            C[:, [k, m]] = C[:, [m, k]]
            b[[k, m]] = b[[m, k]]
            L[[k, m], :] = L[[m, k], :]

        L[k, k] = np.sqrt(max(C[k, k] - L[k, :k] @ L[k, :k], TINY))
        for i in range(k + 1, d):
            L[i, k] = (C[i, k] - L[i, :k] @ L[k, :k]) / L[k, k]

        # Expected value of the truncated standard normal below the scaled limit
        bk = (b[k] - L[k, :k] @ y[:k]) / L[k, k]
        y[k] = -stats.norm.pdf(bk) / max(special.ndtr(bk), TINY)
    return L, b


def _genz_integrand(b: np.ndarray, L: np.ndarray, w: np.ndarray) -> np.ndarray:
    """
    变量分离后的被积函数

    :param b: 上限, 形状 (..., d), 与点的前导维数可广播
    :param w: 单位超立方体内的点, 形状 (N, d−1)
    """
    d = L.shape[0]
    e = special.ndtr(b[..., 0] / L[0, 0])
    f = np.broadcast_to(e, np.broadcast_shapes(e.shape, w.shape[:1])).copy()
    e = f.copy()
    ys = []
    for i in range(1, d):
        p = np.clip(w[:, i - 1] * e, TINY, 1.0 - 1e-16)
        ys.append(special.ndtri(p))
        mean = sum(L[i, j] * ys[j] for j in range(i))
        e = special.ndtr((b[..., i] - mean) / L[i, i])
        f = f * e
    return f


def _effective_corr(corr: np.ndarray) -> np.ndarray:
    L = robust_cholesky(corr)
    return L @ L.T


def _split_infinite(upper: np.ndarray, corr: np.ndarray):
    keep = ~np.isposinf(upper)
    return upper[keep], corr[np.ix_(keep, keep)]


def _randomized_estimate(integrand, dim: int, accuracy: QmcAccuracy, seed: int) -> ProbabilityEstimate:
    samples, shifts = accuracy.resolve()
    rng = np.random.default_rng(seed)

    for _ in range(accuracy.max_doublings + 1):
        estimates = np.array(
            [
                integrand(sobol_points(samples, dim, rng)).mean()
                for _ in range(shifts)
            ]
        )
        prob = float(estimates.mean())
        error = float(3.0 * estimates.std(ddof=1) / np.sqrt(shifts))
        if accuracy.tolerance is None or error <= accuracy.tolerance:
            break
        samples *= 2

    if not np.isfinite(prob):
        raise NumericalFailure("拟蒙特卡洛积分得到非有限值")
    return ProbabilityEstimate(prob=min(max(prob, 0.0), 1.0), error_estimate=error)


def mvn_cdf(
    upper,
    corr,
    accuracy: QmcAccuracy | None = None,
    seed: int = 0,
) -> ProbabilityEstimate:
    """
    P(X ≤ upper), X 为以 corr 为相关矩阵的标准多元正态

    一维直接用 Φ, 二维用精确的二元正态分布函数, 误差估计为0
    """
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    corr = np.atleast_2d(np.asarray(corr, dtype=float))
    _validate(upper, corr)
    accuracy = accuracy or QmcAccuracy()

    if np.any(np.isneginf(upper)):
        return ProbabilityEstimate(prob=0.0, error_estimate=0.0)
    upper, corr = _split_infinite(upper, corr)
    d = len(upper)

    if d == 0:
        return ProbabilityEstimate(prob=1.0, error_estimate=0.0)
    if d == 1:
        return ProbabilityEstimate(prob=float(special.ndtr(upper[0])), error_estimate=0.0)
    if d == 2:
        prob = bvn_cdf(upper[0], upper[1], corr[0, 1])
        return ProbabilityEstimate(prob=prob, error_estimate=0.0)

    L, b = _reordered_factor(upper, _effective_corr(corr))
    return _randomized_estimate(lambda w: _genz_integrand(b, L, w), d - 1, accuracy, seed)


def mvt_cdf(
    upper,
    corr,
    dof: float,
    accuracy: QmcAccuracy | None = None,
    seed: int = 0,
) -> ProbabilityEstimate:
    """
    中心多元t分布函数, χ²混合变量占用额外的一个Sobol坐标
    """
    if dof <= 0:
        raise InvalidParameterError("自由度必须为正")

    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    corr = np.atleast_2d(np.asarray(corr, dtype=float))
    _validate(upper, corr)
    accuracy = accuracy or QmcAccuracy()

    if np.any(np.isneginf(upper)):
        return ProbabilityEstimate(prob=0.0, error_estimate=0.0)
    upper, corr = _split_infinite(upper, corr)
    d = len(upper)

    if d == 0:
        return ProbabilityEstimate(prob=1.0, error_estimate=0.0)
    if d == 1:
        return ProbabilityEstimate(prob=float(stats.t.cdf(upper[0], dof)), error_estimate=0.0)

    def radial(w0: np.ndarray) -> np.ndarray:
        w0 = np.clip(w0, 1e-16, 1.0 - 1e-16)
        return np.sqrt(stats.chi2.ppf(w0, dof) / dof)

    if d == 2:
        rho = corr[0, 1]

        def integrand_2d(w: np.ndarray) -> np.ndarray:
            s = radial(w[:, 0])
            return bvn_cdf(upper[0] * s, upper[1] * s, rho)

        return _randomized_estimate(integrand_2d, 1, accuracy, seed)

    L, b = _reordered_factor(upper, _effective_corr(corr))

    def integrand(w: np.ndarray) -> np.ndarray:
        s = radial(w[:, 0])
        return _genz_integrand(b[None, :] * s[:, None], L, w[:, 1:])

    return _randomized_estimate(integrand, d, accuracy, seed)


def _batch_points(n_points: int, dim: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return sobol_points(n_points, dim, rng)


def mvn_cdf_batch(uppers, corr, n_points: int | None = None, seed: int = 0) -> np.ndarray:
    """
    同一相关矩阵下多组上限的正态概率, 所有行共用同一组Sobol点且不做变量重排

    固定种子时结果对上限连续, 适合放在似然函数内部
    """
    uppers = np.atleast_2d(np.asarray(uppers, dtype=float))
    corr = np.atleast_2d(np.asarray(corr, dtype=float))
    m, d = uppers.shape
    if d == 0:
        return np.ones(m)
    if d == 1:
        return special.ndtr(uppers[:, 0])
    if d == 2:
        return bvn_cdf(uppers[:, 0], uppers[:, 1], corr[0, 1])

    n_points = n_points or extremepy.config.numerics.likelihood_qmc_points
    L = robust_cholesky(corr)
    w = _batch_points(n_points, d - 1, seed)
    b = np.clip(uppers, -NORMAL_CLIP, NORMAL_CLIP)[:, None, :]
    rows_per_chunk = max(1, BATCH_CELLS // len(w))
    return np.concatenate(
        [
            _genz_integrand(b[start : start + rows_per_chunk], L, w).mean(axis=-1)
            for start in range(0, m, rows_per_chunk)
        ]
    )


def mvt_cdf_batch(uppers, corr, dof: float, n_points: int | None = None, seed: int = 0) -> np.ndarray:
    uppers = np.atleast_2d(np.asarray(uppers, dtype=float))
    corr = np.atleast_2d(np.asarray(corr, dtype=float))
    m, d = uppers.shape
    if d == 0:
        return np.ones(m)
    if d == 1:
        return stats.t.cdf(uppers[:, 0], dof)

    n_points = n_points or extremepy.config.numerics.likelihood_qmc_points
    w = _batch_points(n_points, d, seed)
    s = np.sqrt(stats.chi2.ppf(np.clip(w[:, 0], 1e-16, 1.0 - 1e-16), dof) / dof)
    L = robust_cholesky(corr) if d > 2 else None

    # Row chunks keep the (rows, points, quadrature nodes) arrays small
    out = np.empty(m)
    rows_per_chunk = max(1, BATCH_CELLS // (len(w) * BVN_QUAD_ORDER))
    for start in range(0, m, rows_per_chunk):
        stop = min(start + rows_per_chunk, m)
        b = np.clip(uppers[start:stop, None, :] * s[None, :, None], -NORMAL_CLIP, NORMAL_CLIP)
        if d == 2:
            out[start:stop] = bvn_cdf(b[..., 0], b[..., 1], corr[0, 1]).mean(axis=-1)
        else:
            out[start:stop] = _genz_integrand(b, L, w[:, 1:]).mean(axis=-1)
    return out
