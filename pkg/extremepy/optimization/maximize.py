import math

import numpy as np
from loguru import logger

import extremepy
from extremepy.core.conf import OptimizerConf
from extremepy.core.exceptions import NumericalFailure
from extremepy.decorators import timeit
from extremepy.optimization.base import LikelihoodOptimizer
from extremepy.optimization.hessian import observed_info_se
from extremepy.optimization.optimizers.nelder_mead import NelderMeadOptimizer
from extremepy.optimization.parameter import ParamTransform
from extremepy.optimization.result import FitResult
from extremepy.optimization.types import Objective, OptimizeOutcome
from extremepy.utils import parallel_map


# Penalty returned to the simplex for non-finite log-likelihoods
NON_FINITE_PENALTY = 1e300

# Relative distance to a bound below which an estimate is reported as a boundary estimate
BOUNDARY_TOLERANCE = 1e-3


def _boundary_flags(transform: ParamTransform, estimates: dict[str, float]) -> list[str]:
    flags = []
    for p in transform.parameters:
        if p.fixed or p.transform in ("identity", "log"):
            continue
        width = p.upper - p.lower
        value = estimates[p.name]
        if min(value - p.lower, p.upper - value) < BOUNDARY_TOLERANCE * width:
            logger.warning(f"参数 {p.name} 的估计值 {value:.6g} 位于边界附近")
            flags.append(f"boundary:{p.name}")
    return flags


def maximize(
    objective: Objective,
    transform: ParamTransform,
    *,
    family: str,
    n_effective: int,
    censor_level: float | None = None,
    settings: OptimizerConf | None = None,
    optimizer: LikelihoodOptimizer | None = None,
    seed: int = 0,
    compute_se: bool = True,
    threads: int = 1,
    options: dict[str, str] | None = None,
) -> FitResult:
    """
    在无约束变换空间内以Nelder-Mead最大化对数似然, 并做随机重启

    :param objective: 以自然尺度参数字典为输入的对数似然
    :param transform: 参数及其变换, 固定参数不参与优化
    :param n_effective: BIC使用的有效样本量
    :param seed: 重启初值扰动的随机种子
    """
    settings = settings or extremepy.config.optimizer
    optimizer = optimizer or NelderMeadOptimizer(
        xatol=settings.xatol, fatol=settings.fatol, max_evaluations=settings.max_evaluations
    )

    def loglik_free(theta: np.ndarray) -> float:
        try:
            value = objective(transform.to_natural(theta))
        except (ValueError, ArithmeticError, np.linalg.LinAlgError):
            return -math.inf
        return float(value) if np.isfinite(value) else -math.inf

    def negative(theta: np.ndarray) -> float:
        value = loglik_free(theta)
        return -value if math.isfinite(value) else NON_FINITE_PENALTY

    if transform.n_free == 0:
        estimates = transform.to_natural([])
        value = loglik_free(np.array([]))
        if not math.isfinite(value):
            raise NumericalFailure("固定参数处的对数似然不是有限值")
        return FitResult(
            family=family,
            estimates=estimates,
            loglik=value,
            k=0,
            n_effective=n_effective,
            converged=True,
            evaluations=1,
            censor_level=censor_level,
            options=dict(options or {}),
        )

    theta0 = transform.initial_free()
    if not math.isfinite(loglik_free(theta0)):
        logger.warning(f"{family} 模型在初值处的对数似然不是有限值, 依赖随机重启")

    rng = np.random.default_rng(seed)
    scale = settings.restart_jitter * np.maximum(np.abs(theta0), 1.0)
    starts = [theta0] + [
        theta0 + scale * rng.standard_normal(len(theta0)) for _ in range(settings.restarts)
    ]

    with timeit() as timer:
        outcomes: list[OptimizeOutcome] = parallel_map(
            lambda x0: optimizer.minimize(negative, x0), starts, threads
        )
        finite = [o for o in outcomes if o["fun"] < NON_FINITE_PENALTY]
        if not finite:
            raise NumericalFailure(
                f"{family} 模型所有 {len(starts)} 次优化的对数似然均不是有限值"
            )

        best = min(finite, key=lambda o: o["fun"])
        # Restart from the best vertex to confirm the simplex has collapsed
        polished = optimizer.minimize(negative, best["x"])
        if polished["fun"] <= best["fun"]:
            best = polished

    evaluations = sum(o["evaluations"] for o in outcomes) + polished["evaluations"]
    estimates = transform.to_natural(best["x"])
    logger.info(
        f"{family} 模型优化完成: 对数似然 {-best['fun']:.4f}, "
        f"评估 {evaluations} 次, 耗时 {timer['seconds']}s"
    )

    flags = _boundary_flags(transform, estimates)
    if not best["success"]:
        flags.append("not_converged")

    stderrs: dict[str, float | None] = {name: None for name in transform.free_names}
    if compute_se:
        stderrs, se_flags = observed_info_se(
            loglik_free,
            best["x"],
            transform.free_names,
            jacobian=transform.jacobian(best["x"]),
            rel_step=settings.hessian_step,
        )
        flags.extend(se_flags)

    return FitResult(
        family=family,
        estimates=estimates,
        loglik=-best["fun"],
        k=transform.n_free,
        n_effective=n_effective,
        converged=best["success"],
        evaluations=evaluations,
        stderrs=stderrs,
        censor_level=censor_level,
        flags=flags,
        options=dict(options or {}),
    )
