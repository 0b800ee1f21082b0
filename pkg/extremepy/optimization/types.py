from typing import Callable, TypedDict

import numpy as np


Number = float | int

Objective = Callable[[dict[str, float]], float]


class BootstrapRequest(TypedDict):
    id: str
    replicate: int
    seed: int


class BootstrapOutcome(BootstrapRequest):
    estimates: dict[str, float] | None
    error: str | None


class OptimizeOutcome(TypedDict):
    x: np.ndarray
    fun: float
    success: bool
    evaluations: int
