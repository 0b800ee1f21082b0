from typing import Callable

from dask.distributed import Client as DaskClient
from loguru import logger

import extremepy
from extremepy.core.observations import ObservationMatrix
from extremepy.optimization.result import FitResult
from extremepy.optimization.types import BootstrapOutcome, BootstrapRequest
from extremepy.optimization.worker import BootstrapWorker
from extremepy.utils import derive_seeds


class BootstrapScheduler:
    """
    将每个自助法重复作为独立任务提交到dask, 每个任务的种子由主种子派生
    """

    def __init__(
        self,
        data: ObservationMatrix,
        fitter: Callable[[ObservationMatrix], FitResult],
        mean_block: int,
    ) -> None:
        self.worker = BootstrapWorker(data, mean_block, fitter)

    def make_task_requests(self, replicates: int, seed: int) -> list[BootstrapRequest]:
        return [
            BootstrapRequest(id=f"bootstrap-{idx}", replicate=idx, seed=child)
            for idx, child in enumerate(derive_seeds(seed, replicates))
        ]

    def _executor(self, request: BootstrapRequest) -> BootstrapOutcome:
        return self.worker.run(request)

    def submit_tasks(
        self, dask_client: DaskClient, requests: list[BootstrapRequest]
    ) -> list[BootstrapOutcome]:
        logger.info(f"提交{len(requests)}个自助法任务")
        futures = dask_client.map(self._executor, requests, pure=False)
        return dask_client.gather(futures)  # type: ignore

    def run(self, replicates: int, seed: int, threads: int = 1) -> list[BootstrapOutcome]:
        requests = self.make_task_requests(replicates, seed)
        if threads <= 1:
            return [self._executor(r) for r in requests]

        # In-process workers; the total thread count is capped by ``threads``
        n_workers = max(1, min(threads, extremepy.config.dask.n_workers))
        dask_client = DaskClient(
            n_workers=n_workers,
            threads_per_worker=max(1, threads // n_workers),
            processes=False,
            dashboard_address=None,
        )
        try:
            logger.info(f"启动Dask集群: {dask_client}")
            return self.submit_tasks(dask_client, requests)
        finally:
            dask_client.close()
            logger.info("关闭Dask集群")
