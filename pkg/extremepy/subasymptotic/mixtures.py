"""
随机尺度混合 X = R·W 的分布函数

F_X(x) = ∫ F_W(x/r) dF_R(r), 换元 t = F_R(r) 后在 (0, 1) 上做自适应 Gauss-Kronrod 积分.
删失似然需要的偏导数 ∂^k F / ∂x_I 在积分号内对高斯坐标求导, 与 F 共用同一积分.
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate, special, stats

import extremepy
from extremepy.constants import PROB_EPS
from extremepy.core.exceptions import InvalidParameterError, NumericalFailure
from extremepy.core.sites import SiteSet
from extremepy.core.specs import GaussianCopulaSpec, HotSpec, HwSpec
from extremepy.gauss.covariance import correlation_matrix, robust_cholesky
from extremepy.gauss.qmc import NORMAL_CLIP, mvn_cdf_batch
from extremepy.logging import LOG
from extremepy.subasymptotic.radial import hot_fr
from extremepy.types import DistKind


MixtureModel = GaussianCopulaSpec | HotSpec | HwSpec

# Points of the coarse rule that sets the per-row integrand scale
SCALE_RULE_POINTS = 16

# Tolerance below which δ is treated as 1/2 in the closed-form HW margin
HALF_DELTA_TOL = 1e-6

MAX_BRACKET_DOUBLINGS = 200


# -----------------
# Gaussian kernels
# -----------------
@dataclass
class GaussianBlock:
    """
    φ_I(z_I; Σ_II)·Φ_{C|I}(z_C | z_I), 指标集固定, 对多行 z 向量化
    """

    corr: np.ndarray
    I: list[int]
    C: list[int]
    seed: int = 0
    _chol: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        S, I, C = self.corr, self.I, self.C
        self._log_norm = 0.0
        if I:
            S_II = S[np.ix_(I, I)]
            self._chol = robust_cholesky(S_II)
            self._log_norm = -0.5 * len(I) * np.log(2 * np.pi) - np.log(np.diag(self._chol)).sum()
            self._gain = np.linalg.solve(S_II, S[np.ix_(I, C)]).T if C else np.empty((0, len(I)))
            cond = S[np.ix_(C, C)] - self._gain @ S[np.ix_(I, C)] if C else np.empty((0, 0))
        else:
            self._gain = np.empty((len(C), 0))
            cond = S[np.ix_(C, C)]
        self._sd = np.sqrt(np.maximum(np.diag(cond), 1e-300))
        self._cond_corr = cond / np.outer(self._sd, self._sd) if C else cond
        if C:
            np.fill_diagonal(self._cond_corr, 1.0)

    def log_value(self, Z: np.ndarray) -> np.ndarray:
        Z = np.clip(Z, -NORMAL_CLIP, NORMAL_CLIP)
        out = np.zeros(len(Z))
        z_I = Z[:, self.I]
        if self.I:
            solved = np.linalg.solve(self._chol, z_I.T).T
            out += self._log_norm - 0.5 * np.sum(solved**2, axis=1)
        if self.C:
            upper = (Z[:, self.C] - z_I @ self._gain.T) / self._sd
            with np.errstate(divide="ignore"):
                out += np.log(mvn_cdf_batch(upper, self._cond_corr, seed=self.seed))
        return out


# ---------------
# Mixture kernels
# ---------------
class MixtureKernel(ABC):
    """
    径向变量 R 与高斯坐标之间的映射
    """

    radial: bool = True

    def t_max(self, X: np.ndarray) -> np.ndarray:
        return np.ones(len(X))

    @abstractmethod
    def radius(self, t: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def gaussian_coords(self, X: np.ndarray, r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """
        返回高斯坐标 Z 及 log|dZ/dX|
        """

    @abstractmethod
    def marginal(self, x, kind: DistKind) -> np.ndarray:
        ...

    @abstractmethod
    def lower_bracket(self, p: np.ndarray) -> np.ndarray:
        ...


class GaussianKernel(MixtureKernel):
    radial = False

    def radius(self, t):
        return np.ones_like(t)

    def gaussian_coords(self, X, r):
        return X, np.zeros_like(X)

    def marginal(self, x, kind: DistKind):
        match kind:
            case "cdf":
                return special.ndtr(x)
            case "pdf":
                return stats.norm.pdf(x)
            case "quantile":
                return special.ndtri(x)
        raise InvalidParameterError(f"未知的分布函数类型: {kind}")

    def lower_bracket(self, p):
        return special.ndtri(p)


@dataclass
class HotKernel(MixtureKernel):
    spec: HotSpec

    def radius(self, t):
        return hot_fr(np.clip(t, 1e-16, 1 - 1e-16), self.spec, "quantile")

    def gaussian_coords(self, X, r):
        return X / r, np.broadcast_to(-np.log(r), X.shape)

    def marginal(self, x, kind: DistKind):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        match kind:
            case "cdf":
                return radial_integral(self, x[:, None], GaussianBlock(np.ones((1, 1)), [], [0]))
            case "pdf":
                return radial_integral(self, x[:, None], GaussianBlock(np.ones((1, 1)), [0], []))
            case "quantile":
                return marginal_quantile(self, x)
        raise InvalidParameterError(f"未知的分布函数类型: {kind}")

    def lower_bracket(self, p):
        # F(x) ≤ Φ(x) for x > 0 since R ≥ 1
        return special.ndtri(p)


@dataclass
class HwKernel(MixtureKernel):
    spec: HwSpec

    def t_max(self, X):
        # W ≥ 1 on the Pareto scale, so R^δ ≤ min_j x_j
        x_min = np.maximum(np.min(X, axis=1), 1.0)
        return -np.expm1(-np.log(x_min) / self.spec.delta)

    def radius(self, t):
        return 1.0 / (1.0 - np.clip(t, 0.0, 1 - 1e-16))

    def gaussian_coords(self, X, r):
        delta = self.spec.delta
        log_g = (np.log(X) - delta * np.log(r)) / (1.0 - delta)
        log_g = np.maximum(log_g, 1e-12)
        Z = np.clip(-special.ndtri(np.exp(-log_g)), -NORMAL_CLIP, NORMAL_CLIP)
        log_jac = -log_g - stats.norm.logpdf(Z) - np.log(1.0 - delta) - np.log(X)
        return Z, log_jac

    def marginal(self, x, kind: DistKind):
        return hw_marginal(x, self.spec.delta, kind)

    def lower_bracket(self, p):
        return np.ones_like(p)


def mixture_kernel(model: MixtureModel) -> MixtureKernel:
    match model:
        case GaussianCopulaSpec():
            return GaussianKernel()
        case HotSpec():
            return HotKernel(model)
        case HwSpec():
            return HwKernel(model)
    raise InvalidParameterError(f"不是尺度混合模型: {type(model).__name__}")


# -----------
# Integration
# -----------
def _fixed_rule(integrand, n_points: int) -> np.ndarray:
    nodes, weights = np.polynomial.legendre.leggauss(n_points)
    nodes, weights = 0.5 * (nodes + 1.0), 0.5 * weights
    return sum(w * integrand(s) for s, w in zip(nodes, weights))


def radial_integral(kernel: MixtureKernel, X: np.ndarray, block: GaussianBlock) -> np.ndarray:
    """
    ∫ ∂^k F_W(x/r)/∂x_I dF_R(r), 逐行计算

    积分变量 s ∈ (0, 1) 对应 t = s·t_max, 每行先用粗规则估计量级再做相对精度的自适应积分
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    I = block.I

    if not kernel.radial:
        Z, log_jac = kernel.gaussian_coords(X, None)
        return np.exp(block.log_value(Z) + log_jac[:, I].sum(axis=1))

    t_max = kernel.t_max(X)

    def integrand(s: float) -> np.ndarray:
        t = s * t_max
        Z, log_jac = kernel.gaussian_coords(X, kernel.radius(t)[:, None])
        return t_max * np.exp(block.log_value(Z) + log_jac[:, I].sum(axis=1))

    numerics = extremepy.config.numerics
    scale = np.abs(_fixed_rule(integrand, SCALE_RULE_POINTS))
    scale = np.where(np.isfinite(scale) & (scale > PROB_EPS), scale, 1.0)

    result, error, info = integrate.quad_vec(
        lambda s: integrand(s) / scale, 0.0, 1.0, epsabs=numerics.quad_tolerance, full_output=True
    )
    if info.success and np.all(np.isfinite(result)):
        return result * scale

    LOG.warn(
        f"自适应积分未收敛 (误差估计 {float(np.max(error)):.2e}), "
        f"退回 {numerics.fixed_rule_points} 点固定规则"
    )
    result = _fixed_rule(integrand, numerics.fixed_rule_points)
    if not np.all(np.isfinite(result)):
        raise NumericalFailure("径向积分的固定规则结果不是有限值")
    return result


# -------
# Margins
# -------
def hw_marginal(x, delta: float, kind: DistKind = "cdf"):
    """
    HW 模型的边缘分布: log X 为速率 1/δ 与 1/(1−δ) 的两个独立指数变量之和

        S(x) = {δ x^{−1/δ} − (1−δ) x^{−1/(1−δ)}} / (2δ−1),  x ≥ 1
        S(x) = x^{−2}(1 + 2 log x),                         δ = 1/2
    """
    if not 0 < delta < 1:
        raise InvalidParameterError("δ 必须在 (0, 1) 之内")
    if kind == "quantile":
        return marginal_quantile(HwKernel(HwSpec(delta=delta, cov={"phi": 1.0, "nu": 1.0})), x)

    x = np.asarray(x, dtype=float)
    inside = x >= 1
    log_x = np.log(np.where(inside, x, 1.0))
    a, b = 1.0 / delta, 1.0 / (1.0 - delta)

    if abs(2 * delta - 1) < HALF_DELTA_TOL:
        survival = np.exp(-2.0 * log_x) * (1.0 + 2.0 * log_x)
        pdf = 4.0 * np.exp(-3.0 * log_x) * log_x
    else:
        k = 2 * delta - 1
        survival = (delta * np.exp(-a * log_x) - (1 - delta) * np.exp(-b * log_x)) / k
        pdf = (np.exp(-(a + 1) * log_x) - np.exp(-(b + 1) * log_x)) / k

    match kind:
        case "cdf":
            out = np.where(inside, 1.0 - survival, 0.0)
        case "survival":
            out = np.where(inside, survival, 1.0)
        case "pdf":
            out = np.where(inside, pdf, 0.0)
        case _:
            raise InvalidParameterError(f"未知的分布函数类型: {kind}")
    return float(out) if out.ndim == 0 else out


def marginal_quantile(kernel: MixtureKernel, p) -> np.ndarray:
    """
    单调二分求边缘分位数, 相对容差为 bisection_tolerance

    对称的 HOT 边缘先把 p < 1/2 翻折到上半部分
    """
    p = np.asarray(p, dtype=float)
    scalar = p.ndim == 0
    p = np.atleast_1d(p)
    if np.any((p <= 0) | (p >= 1)):
        raise InvalidParameterError("分位数的概率必须在 (0, 1) 之内")
    if isinstance(kernel, GaussianKernel):
        out = special.ndtri(p)
        return float(out[0]) if scalar else out

    symmetric = isinstance(kernel, HotKernel)
    flip = symmetric & (p < 0.5)
    target = np.where(flip, 1.0 - p, p)

    cdf = lambda x: np.asarray(kernel.marginal(x, "cdf"), dtype=float)  # noqa: E731
    lo = np.asarray(kernel.lower_bracket(target), dtype=float)
    hi = 2.0 * np.maximum(lo, 1.0)
    for _ in range(MAX_BRACKET_DOUBLINGS):
        short = cdf(hi) < target
        if not short.any():
            break
        hi = np.where(short, 2.0 * hi, hi)

    tolerance = extremepy.config.numerics.bisection_tolerance
    while True:
        width = hi - lo
        open_ = width > tolerance * np.maximum(1.0, np.abs(hi))
        if not open_.any():
            break
        mid = 0.5 * (lo + hi)
        below = np.zeros_like(mid, dtype=bool)
        below[open_] = cdf(mid[open_]) < target[open_]
        lo = np.where(open_ & below, mid, lo)
        hi = np.where(open_ & ~below, mid, hi)

    out = 0.5 * (lo + hi)
    out = np.where(flip, -out, out)
    return float(out[0]) if scalar else out


def marginal_eval(model: MixtureModel, x, kind: DistKind = "cdf"):
    """
    模型尺度上的边缘分布: 高斯 copula 为标准正态, HOT 为 D=1 的积分, HW 为闭式
    """
    return mixture_kernel(model).marginal(x, kind)


def mixture_cdf(
    model: MixtureModel,
    x: Sequence[float],
    sites: SiteSet | None = None,
    corr: np.ndarray | None = None,
    seed: int = 0,
) -> float:
    """
    联合分布函数 F_X(x) = ∫ F_W(x/r) dF_R(r), 相关矩阵由 ``sites`` 和模型的协方差给出,
    也可直接传入 ``corr``
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    D = len(x)
    if corr is None:
        corr = correlation_matrix(sites, model.cov) if sites is not None else np.ones((1, 1))
    corr = np.atleast_2d(np.asarray(corr, dtype=float))
    if corr.shape != (D, D):
        raise InvalidParameterError(f"相关矩阵形状 {corr.shape} 与 x 的维数 {D} 不一致")

    block = GaussianBlock(corr, [], list(range(D)), seed=seed)
    return float(radial_integral(mixture_kernel(model), x[None, :], block)[0])
