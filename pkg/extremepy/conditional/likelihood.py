from collections import defaultdict
from typing import Sequence

import numpy as np

from extremepy.core.exceptions import InsufficientDataError, InvalidParameterError
from extremepy.core.observations import ObservationMatrix
from extremepy.core.sites import SiteSet
from extremepy.core.specs import SceSpec, build_spec
from extremepy.conditional.normalization import farthest_point_subset, norm_ab
from extremepy.conditional.residuals import residual_law
from extremepy.logging import LOG
from extremepy.margins.transforms import convert_scale, uniform_to_scale
from extremepy.optimization.maximize import maximize
from extremepy.optimization.parameter import model_transform
from extremepy.optimization.result import FitResult
from extremepy.types import BFormType, DeltaModeType, MarginScales
from extremepy.utils import parallel_map


def _as_laplace(data: ObservationMatrix | np.ndarray) -> np.ndarray:
    if isinstance(data, ObservationMatrix):
        return convert_scale(data, MarginScales.LAPLACE).to_numpy()
    return np.atleast_2d(np.asarray(data, dtype=float))


def sce_loglik(
    spec: SceSpec,
    data: ObservationMatrix | np.ndarray,
    sites: SiteSet,
    s0_index: int,
    u: float,
) -> float:
    """
    以 s0 为条件站点的似然, 只使用 X(s0) > u 的行, 不做删失

    每行残差 (X − a)/b 在 Z⁰ 下的对数密度减去 Σ log b. 缺失站点直接边缘化掉.

    :param data: Laplace 尺度数据
    :param u: Laplace 尺度阈值
    """
    X = _as_laplace(data)
    x0 = X[:, s0_index]
    rows = np.flatnonzero(np.isfinite(x0) & (x0 > u))
    if len(rows) == 0:
        return 0.0

    law = residual_law(sites, s0_index, spec)
    if len(law.others) == 0:
        return 0.0

    X = X[rows]
    a, b = norm_ab(X[:, [s0_index]], law.dist[law.others][None, :], spec)
    if np.any(b <= 0):
        raise InvalidParameterError("尺度归一化 b 必须为正")
    residual = (X[:, law.others] - a) / b
    observed = np.isfinite(residual)

    groups: dict[bytes, list[int]] = defaultdict(list)
    for i in range(len(rows)):
        groups[observed[i].tobytes()].append(i)

    total = 0.0
    for _, idx in sorted(groups.items()):
        idx = np.asarray(idx)
        cols = np.flatnonzero(observed[idx[0]])
        values = law.log_density(residual[np.ix_(idx, cols)], cols) - np.log(b[np.ix_(idx, cols)]).sum(axis=1)
        bad = ~np.isfinite(values)
        if bad.any():
            # Name the worst site of the first failing row
            row = idx[bad][0]
            site = law.others[cols[int(np.argmax(np.abs(residual[row, cols])))]]
            LOG.warn(
                f"条件站点 {sites.labels[s0_index]} 第 {int(rows[row])} 行的雅可比不是有限值, "
                f"站点 {sites.labels[site]}"
            )
            return -np.inf
        total += float(values.sum())

    return total


def sce_composite_loglik(
    spec: SceSpec,
    data: ObservationMatrix | np.ndarray,
    sites: SiteSet,
    subset: Sequence[int],
    u: float,
    threads: int = 1,
) -> float:
    """
    条件站点子集上 :func:`sce_loglik` 之和, 同一行可以在多个条件站点下重复出现
    """
    subset = list(subset)
    if not subset:
        raise InvalidParameterError("条件站点子集不能为空")
    X = _as_laplace(data)
    terms = parallel_map(lambda s0: sce_loglik(spec, X, sites, s0, u), subset, threads)
    return float(sum(terms))


def default_sce_init(sites: SiteSet, delta_mode: DeltaModeType = "profile") -> dict[str, float]:
    dist = sites.distance_matrix()
    h = float(np.median(dist[np.triu_indices(len(sites), k=1)])) if len(sites) > 1 else 1.0
    h = max(h, 1e-3)
    init = {
        "kappa": 1.0,
        "lam": h,
        "delta_lag": 0.0,
        "beta": 0.5,
        "mu": 0.0,
        "sigma": 1.0,
        "phi": h,
        "nu": 1.0,
    }
    if delta_mode == "profile":
        init.update(delta1=h, delta2=1.0)
    else:
        init.update(delta0=1.5)
    return init


def fit_sce(
    data: ObservationMatrix,
    sites: SiteSet,
    u: float,
    subset: Sequence[int] | None = None,
    subset_size: int = 30,
    b_form: BFormType = "x_pow_beta",
    delta_mode: DeltaModeType = "profile",
    init: dict[str, float] | None = None,
    fixed: Sequence[str] = (),
    seed: int = 0,
    threads: int = 1,
    compute_se: bool = True,
) -> FitResult:
    """
    条件极值模型的复合似然拟合

    :param u: 阈值的概率水平, 换算为 Laplace 分位数
    :param subset: 条件站点序号, 缺省时按最远点遍历选取 ``subset_size`` 个
    """
    if not 0 < u < 1:
        raise InvalidParameterError("阈值水平 u 必须在 (0, 1) 之内")
    X = _as_laplace(data)
    u_laplace = float(uniform_to_scale(u, MarginScales.LAPLACE))
    subset = list(subset) if subset is not None else farthest_point_subset(sites, subset_size)

    n_rows = int(sum(np.sum(X[:, s0] > u_laplace) for s0 in subset))
    if n_rows < 2:
        raise InsufficientDataError(f"条件站点子集上只有 {n_rows} 行超过阈值")

    values = dict(default_sce_init(sites, delta_mode), **(init or {}))
    fixed = set(fixed)
    if values.get("delta_lag", 0.0) == 0.0:
        fixed.add("delta_lag")
    unused = ("delta0",) if delta_mode == "profile" else ("delta1", "delta2")
    fixed.update(k for k in unused if k in values)

    transform = model_transform("sce", values, sorted(fixed))

    def objective(params: dict[str, float]) -> float:
        spec = build_spec("sce", params, b_form=b_form, delta_mode=delta_mode)
        return sce_composite_loglik(spec, X, sites, subset, u_laplace)

    LOG.info(f"条件极值模型拟合: {len(subset)} 个条件站点, {n_rows} 个条件行")
    return maximize(
        objective,
        transform,
        family="sce",
        n_effective=len(X),
        censor_level=u,
        seed=seed,
        threads=threads,
        compute_se=compute_se,
        options={"b_form": b_form, "delta_mode": delta_mode},
    )
