from typing import Callable

import numpy as np
from loguru import logger

from extremepy.core.observations import ObservationMatrix
from extremepy.decorators import timeit
from extremepy.optimization.bootstrap import stationary_bootstrap_indices
from extremepy.optimization.result import FitResult
from extremepy.optimization.types import BootstrapOutcome, BootstrapRequest


class BootstrapWorker:
    def __init__(
        self,
        data: ObservationMatrix,
        mean_block: int,
        fitter: Callable[[ObservationMatrix], FitResult],
    ) -> None:
        self.data = data
        self.mean_block = mean_block
        self.fitter = fitter

    def resample(self, request: BootstrapRequest) -> ObservationMatrix:
        rng = np.random.default_rng(request["seed"])
        rows = stationary_bootstrap_indices(self.data.n_replicates, self.mean_block, rng)
        return self.data.take(rows)

    def run(self, request: BootstrapRequest) -> BootstrapOutcome:
        logger.debug(f'开始自助法重复: {request["id"]}')

        with timeit() as timer:
            try:
                result = self.fitter(self.resample(request))
            except Exception as exc:
                logger.warning(f'自助法重复 {request["id"]} 拟合失败: {type(exc).__name__}: {exc}')
                return BootstrapOutcome(estimates=None, error=f"{type(exc).__name__}: {exc}", **request)

        logger.debug(f'自助法重复完成: {request["id"]}, 耗时: {timer["seconds"]}s')
        return BootstrapOutcome(estimates=dict(result.estimates), error=None, **request)
