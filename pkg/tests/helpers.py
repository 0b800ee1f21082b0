import numpy as np
from scipy import stats


def central_difference(f, x: float, step: float = 1e-5) -> float:
    return (f(x + step) - f(x - step)) / (2 * step)


def mixed_difference(f, x: float, y: float, step: float = 1e-4) -> float:
    """
    ∂²f/∂x∂y 的中心差分
    """
    return (
        f(x + step, y + step) - f(x + step, y - step) - f(x - step, y + step) + f(x - step, y - step)
    ) / (4 * step**2)


def uniform_pairs(n: int, rho: float, seed: int) -> np.ndarray:
    """
    相关系数为 rho 的二元高斯copula样本
    """
    rng = np.random.default_rng(seed)
    cov = np.array([[1.0, rho], [rho, 1.0]])
    return stats.norm.cdf(rng.multivariate_normal(np.zeros(2), cov, size=n))
