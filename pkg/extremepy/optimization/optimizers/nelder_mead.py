from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize

from extremepy.optimization.base import LikelihoodOptimizer
from extremepy.optimization.types import OptimizeOutcome


@dataclass
class NelderMeadOptimizer(LikelihoodOptimizer):
    adaptive: bool = True

    def minimize(self, func: Callable[[np.ndarray], float], x0: np.ndarray) -> OptimizeOutcome:
        x0 = np.atleast_1d(np.asarray(x0, dtype=float))
        res = optimize.minimize(
            func,
            x0,
            method="Nelder-Mead",
            options=dict(
                xatol=self.xatol,
                fatol=self.fatol,
                maxfev=self.max_evaluations,
                maxiter=self.max_evaluations,
                adaptive=self.adaptive and len(x0) > 2,
            ),
        )
        return OptimizeOutcome(
            x=np.atleast_1d(res.x),
            fun=float(res.fun),
            success=bool(res.success),
            evaluations=int(res.nfev),
        )
