import numpy as np

from extremepy.core.exceptions import DegenerateDataError, InsufficientDataError
from extremepy.core.specs import GevParams, GpParams
from extremepy.logging import LOG
from extremepy.margins.distributions import gev_loglik, gp_loglik
from extremepy.optimization.maximize import maximize
from extremepy.optimization.parameter import Parameter, ParamTransform
from extremepy.optimization.result import FitResult


MIN_MARGINAL_SAMPLE = 20

EULER_GAMMA = 0.5772156649015329


def _clean(data) -> np.ndarray:
    data = np.asarray(data, dtype=float).ravel()
    return data[np.isfinite(data)]


def _flag_shape(result: FitResult) -> FitResult:
    if result.estimates["xi"] < -1:
        LOG.warn(f"形状参数估计 {result.estimates['xi']:.4f} < −1, 似然不正则")
        result.flags.append("xi_below_minus_one")
    return result


def fit_gev(block_maxima, seed: int = 0) -> FitResult:
    """
    区组最大值的GEV极大似然拟合, 在 (μ, log σ, ξ) 上无约束优化
    """
    data = _clean(block_maxima)
    if len(data) < MIN_MARGINAL_SAMPLE:
        raise InsufficientDataError(f"区组最大值只有 {len(data)} 个, 至少需要 {MIN_MARGINAL_SAMPLE} 个")
    if np.ptp(data) == 0:
        raise DegenerateDataError("区组最大值为常数, 无法拟合GEV")

    # Gumbel moment estimates as the starting point
    sigma0 = np.sqrt(6.0) * data.std() / np.pi
    mu0 = data.mean() - EULER_GAMMA * sigma0
    transform = ParamTransform(
        [
            Parameter("mu", float(mu0)),
            Parameter("sigma", float(sigma0), "log"),
            Parameter("xi", 0.05),
        ]
    )

    def objective(values: dict[str, float]) -> float:
        return gev_loglik(data, GevParams(**values))

    result = maximize(objective, transform, family="gev", n_effective=len(data), seed=seed)
    return _flag_shape(result)


def fit_gp(data, threshold: float, seed: int = 0) -> FitResult:
    """
    阈值超出量 data−threshold | data>threshold 的GP极大似然拟合
    """
    data = _clean(data)
    exceedances = data[data > threshold] - threshold
    if len(exceedances) < MIN_MARGINAL_SAMPLE:
        raise InsufficientDataError(
            f"阈值 {threshold} 以上只有 {len(exceedances)} 个超出量, 至少需要 {MIN_MARGINAL_SAMPLE} 个"
        )
    if np.ptp(exceedances) == 0:
        raise DegenerateDataError("超出量为常数, 无法拟合GP")

    transform = ParamTransform(
        [
            Parameter("tau", float(exceedances.mean()), "log"),
            Parameter("xi", 0.1),
        ]
    )

    def objective(values: dict[str, float]) -> float:
        return gp_loglik(exceedances, GpParams(**values))

    result = maximize(
        objective, transform, family="gp", n_effective=len(exceedances), seed=seed
    )
    return _flag_shape(result)
