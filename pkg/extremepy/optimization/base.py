import abc
from dataclasses import dataclass
from typing import Callable

import numpy as np

from extremepy.optimization.types import OptimizeOutcome


@dataclass
class LikelihoodOptimizer:
    """
    在无约束空间内最小化目标函数(负对数似然)
    """

    xatol: float = 1e-6
    fatol: float = 1e-8
    max_evaluations: int = 20_000

    @abc.abstractmethod
    def minimize(self, func: Callable[[np.ndarray], float], x0: np.ndarray) -> OptimizeOutcome:
        raise NotImplementedError
