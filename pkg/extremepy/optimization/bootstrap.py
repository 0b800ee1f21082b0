from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import pandas as pd
from arch.bootstrap import StationaryBootstrap
from loguru import logger

from extremepy.constants import BOOTSTRAP_QUANTILES
from extremepy.core.exceptions import InsufficientDataError
from extremepy.core.observations import ObservationMatrix
from extremepy.optimization.result import FitResult


def stationary_bootstrap_indices(n: int, mean_block: int, rng: np.random.Generator) -> np.ndarray:
    """
    平稳自助法的行下标: 随机起点, 几何分布块长(均值 ``mean_block``), 越界时回绕
    """
    if n < 1 or mean_block < 1:
        raise ValueError("样本量与平均块长必须为正整数")

    bs = StationaryBootstrap(mean_block, np.arange(n), seed=rng)
    return np.asarray(bs.update_indices(), dtype=np.int64)


@dataclass
class BootstrapSummary:
    estimates: pd.DataFrame
    quantiles: pd.DataFrame
    n_failed: int
    errors: list[str] = field(default_factory=list)

    @property
    def n_succeeded(self) -> int:
        return len(self.estimates)


def stationary_bootstrap(
    data: ObservationMatrix,
    mean_block: int,
    replicates: int,
    fitter: Callable[[ObservationMatrix], FitResult],
    seed: int,
    quantiles: Sequence[float] = BOOTSTRAP_QUANTILES,
    threads: int = 1,
) -> BootstrapSummary:
    """
    平稳自助法: 对观测矩阵的整行重抽样后重新拟合

    :param fitter: 以观测矩阵为输入返回 :class:`FitResult` 的拟合函数
    :return: 各参数的分位数, 失败的重复次数单独统计
    """
    from extremepy.optimization.schedulers import BootstrapScheduler

    if data.n_replicates < 2 * mean_block:
        raise InsufficientDataError(
            f"样本量 {data.n_replicates} 小于平均块长的两倍 {2 * mean_block}"
        )

    outcomes = BootstrapScheduler(data, fitter, mean_block).run(replicates, seed, threads)
    succeeded = [o for o in outcomes if o["estimates"] is not None]
    errors = [f'{o["id"]}: {o["error"]}' for o in outcomes if o["estimates"] is None]
    if errors:
        logger.warning(f"自助法共 {len(errors)} 次重复拟合失败, 已排除")

    estimates = pd.DataFrame(
        [o["estimates"] for o in succeeded], index=[o["replicate"] for o in succeeded]
    )
    estimates.index.name = "replicate"
    if estimates.empty:
        table = pd.DataFrame(columns=list(quantiles))
    else:
        table = estimates.quantile(list(quantiles)).T
    table.index.name = "name"
    return BootstrapSummary(estimates, table, len(errors), errors)
