import numpy as np

from extremepy.core.exceptions import InvalidParameterError, NumericalFailure
from extremepy.core.observations import ObservationMatrix
from extremepy.core.sites import SiteSet
from extremepy.core.specs import SceSpec
from extremepy.conditional.normalization import norm_ab
from extremepy.conditional.residuals import ResidualLaw, residual_law
from extremepy.margins.transforms import convert_scale, uniform_to_scale
from extremepy.types import ExceedanceEstimate, MarginScales
from extremepy.utils import derive_seeds


def _draw(law: ResidualLaw, spec: SceSpec, u: float, n: int, rng: np.random.Generator) -> np.ndarray:
    # Above u the Laplace upper tail is exactly exponential
    x0 = u + rng.standard_exponential(n)
    Z0 = law.sample(n, rng)
    a, b = norm_ab(x0[:, None], law.dist[None, :], spec)
    X = a + b * Z0
    X[:, law.s0_index] = x0
    return X


def sce_simulate(
    spec: SceSpec, sites: SiteSet, s0_index: int, u: float, n: int, seed: int
) -> ObservationMatrix:
    """
    给定 X(s0) > u 的条件模拟, Laplace 尺度

    :param u: Laplace 尺度阈值
    """
    if n < 0:
        raise InvalidParameterError("模拟次数不能为负")
    law = residual_law(sites, s0_index, spec)
    X = _draw(law, spec, u, n, np.random.default_rng(seed))
    return ObservationMatrix.from_array(X, MarginScales.LAPLACE, sites.labels)


def exceedance_prob_max(
    spec: SceSpec, sites: SiteSet, v: float, nsim: int, seed: int
) -> ExceedanceEstimate:
    """
    Pr{max_j X(s_j) > v} = (e^{−v}/2)·D·E_J[1/N]

    条件站点 J 均匀抽取, 在 X(s_J) > v 下模拟, N 为超过 v 的站点数. 估计值介于单站点概率
    与其 D 倍之间, 误差由 1/N 的样本标准差得到.
    """
    if nsim < 1:
        raise InvalidParameterError("模拟次数至少为 1")
    D = len(sites)
    p_single = 0.5 * np.exp(-v)
    if D == 1:
        return ExceedanceEstimate(prob=float(p_single), mc_error=0.0)

    seeds = derive_seeds(seed, D + 1)
    counts = np.bincount(np.random.default_rng(seeds[0]).integers(0, D, nsim), minlength=D)

    inv_n = []
    for j in np.flatnonzero(counts):
        law = residual_law(sites, int(j), spec)
        X = _draw(law, spec, v, int(counts[j]), np.random.default_rng(seeds[j + 1]))
        inv_n.append(1.0 / np.sum(X > v, axis=1))
    inv_n = np.concatenate(inv_n)

    mean = float(inv_n.mean())
    if not np.isfinite(mean) or mean <= 0:
        raise NumericalFailure(f"水平 v={v} 处条件超越概率的估计为零或不是有限值")
    error = p_single * D * float(inv_n.std(ddof=1)) / np.sqrt(nsim) if nsim > 1 else np.nan
    return ExceedanceEstimate(prob=float(p_single * D * mean), mc_error=float(error))


def empirical_exceedance_prob_max(data: ObservationMatrix | np.ndarray, v: float) -> float:
    """
    至少有一个观测站点的行中, 最大值超过 v 的比例

    :param data: Laplace 尺度数据
    """
    if isinstance(data, ObservationMatrix):
        X = convert_scale(data, MarginScales.LAPLACE).to_numpy()
    else:
        X = np.atleast_2d(np.asarray(data, dtype=float))
    rows = np.isfinite(X).any(axis=1)
    if not rows.any():
        return np.nan
    return float(np.mean(np.nanmax(X[rows], axis=1) > v))


def sce_conditional_exceedance(
    spec: SceSpec, sites: SiteSet, s0_index: int, u: float, nsim: int, seed: int
) -> np.ndarray:
    """
    模拟估计 Pr{X(s) > q_u | X(s0) > q_u}, q_u 为 Laplace 尺度上的 u 分位数, 每个站点一个值
    """
    q = float(uniform_to_scale(u, MarginScales.LAPLACE))
    X = sce_simulate(spec, sites, s0_index, q, nsim, seed).to_numpy()
    return np.mean(X > q, axis=0)
