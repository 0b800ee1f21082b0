"""
模型族登记表: 族名 → 拟合函数与模拟函数
"""
from dataclasses import dataclass, field
from typing import Callable, Sequence

from extremepy.core.exceptions import InvalidParameterError, UnsupportedModelError
from extremepy.core.observations import ObservationMatrix
from extremepy.core.sites import SiteSet
from extremepy.core.specs import RiskFunctional, build_spec
from extremepy.asymptotic.maxstable import fit_maxstable_pairwise, maxstable_simulate
from extremepy.asymptotic.rpareto import fit_rpareto, rpareto_simulate
from extremepy.conditional.likelihood import fit_sce
from extremepy.conditional.simulation import sce_simulate
from extremepy.margins.transforms import uniform_to_scale
from extremepy.optimization.result import FitResult
from extremepy.subasymptotic.inverted import fit_pairwise_sub, ims_simulate, maxmix_simulate
from extremepy.subasymptotic.likelihood import fit_mixture
from extremepy.subasymptotic.simulation import mixture_simulate
from extremepy.types import BFormType, DeltaModeType, FamilyType, MarginScales, MaxStableFamily


@dataclass
class FitRequest:
    """
    一次拟合的全部输入, 数据为均匀尺度
    """

    data: ObservationMatrix
    sites: SiteSet
    censor_level: float | None = None
    init: dict[str, float] = field(default_factory=dict)
    fixed: Sequence[str] = ()
    base_family: MaxStableFamily | None = None
    functional: RiskFunctional | None = None
    b_form: BFormType = "x_pow_beta"
    delta_mode: DeltaModeType = "profile"
    subset_size: int = 30
    seed: int = 0
    threads: int = 1
    compute_se: bool = True

    def require_censor_level(self, family: str) -> float:
        if self.censor_level is None:
            raise InvalidParameterError(f"{family} 模型拟合必须指定删失水平")
        return self.censor_level


@dataclass
class SimulateRequest:
    sites: SiteSet
    n: int
    seed: int
    conditioning_site: int = 0
    threshold: float | None = None


@dataclass
class FamilyEntry:
    fit: Callable[[FitRequest], FitResult] | None
    simulate: Callable[..., ObservationMatrix] | None


def _fit_maxstable(family: MaxStableFamily):
    def fit(r: FitRequest) -> FitResult:
        return fit_maxstable_pairwise(
            r.data, r.sites, family, init=r.init, fixed=r.fixed,
            seed=r.seed, threads=r.threads, compute_se=r.compute_se,
        )

    return fit


def _fit_mixture(family: str):
    def fit(r: FitRequest) -> FitResult:
        return fit_mixture(
            r.data, r.sites, family, r.require_censor_level(family), init=r.init, fixed=r.fixed,
            seed=r.seed, threads=r.threads, compute_se=r.compute_se,
        )

    return fit


def _fit_sub(family: str):
    def fit(r: FitRequest) -> FitResult:
        return fit_pairwise_sub(
            r.data, r.sites, family, r.require_censor_level(family),
            base_family=r.base_family or "brown_resnick", init=r.init, fixed=r.fixed,
            seed=r.seed, threads=r.threads, compute_se=r.compute_se,
        )

    return fit


def _fit_rpareto(r: FitRequest) -> FitResult:
    if r.functional is None:
        raise InvalidParameterError("r-Pareto 模型拟合必须指定风险泛函")
    return fit_rpareto(
        r.data, r.sites, r.require_censor_level("rpareto"), r.functional,
        base_family=r.base_family or "brown_resnick", init=r.init, fixed=r.fixed,
        seed=r.seed, threads=r.threads, compute_se=r.compute_se,
    )


def _fit_sce(r: FitRequest) -> FitResult:
    return fit_sce(
        r.data, r.sites, r.require_censor_level("sce"), subset_size=r.subset_size,
        b_form=r.b_form, delta_mode=r.delta_mode, init=r.init, fixed=r.fixed,
        seed=r.seed, threads=r.threads, compute_se=r.compute_se,
    )


def _simulate_sce(spec, r: SimulateRequest) -> ObservationMatrix:
    threshold = r.threshold
    if threshold is None:
        threshold = float(uniform_to_scale(0.95, MarginScales.LAPLACE))
    return sce_simulate(spec, r.sites, r.conditioning_site, threshold, r.n, r.seed)


def _simulate_plain(func):
    return lambda spec, r: func(spec, r.sites, r.n, r.seed)


REGISTRY: dict[str, FamilyEntry] = {
    "gaussian": FamilyEntry(_fit_mixture("gaussian"), _simulate_plain(mixture_simulate)),
    "hot": FamilyEntry(_fit_mixture("hot"), _simulate_plain(mixture_simulate)),
    "hw": FamilyEntry(_fit_mixture("hw"), _simulate_plain(mixture_simulate)),
    "location_mixture": FamilyEntry(None, _simulate_plain(mixture_simulate)),
    "brown_resnick": FamilyEntry(_fit_maxstable("brown_resnick"), _simulate_plain(maxstable_simulate)),
    "extremal_t": FamilyEntry(_fit_maxstable("extremal_t"), _simulate_plain(maxstable_simulate)),
    "rpareto": FamilyEntry(_fit_rpareto, _simulate_plain(rpareto_simulate)),
    "ims": FamilyEntry(_fit_sub("ims"), _simulate_plain(ims_simulate)),
    "maxmix": FamilyEntry(_fit_sub("maxmix"), _simulate_plain(maxmix_simulate)),
    "sce": FamilyEntry(_fit_sce, _simulate_sce),
}


def get_entry(family: FamilyType) -> FamilyEntry:
    try:
        return REGISTRY[family]
    except KeyError:
        raise UnsupportedModelError(f"未登记的模型族: {family}")


def fit_family(family: FamilyType, request: FitRequest) -> FitResult:
    entry = get_entry(family)
    if entry.fit is None:
        raise UnsupportedModelError(f"{family} 模型没有实现拟合")
    return entry.fit(request)


def simulate_family(spec, request: SimulateRequest) -> ObservationMatrix:
    """
    按模型的原生尺度模拟
    """
    entry = get_entry(spec.family)
    if entry.simulate is None:
        raise UnsupportedModelError(f"{spec.family} 模型没有实现模拟")
    if request.n < 0:
        raise InvalidParameterError("模拟次数不能为负")
    return entry.simulate(spec, request)


def spec_from_result(result: FitResult):
    """
    由拟合结果重建模型
    """
    options = dict(result.options)
    functional = None
    if "functional" in options:
        site = options.pop("functional_site", None)
        functional = RiskFunctional(tag=options.pop("functional"), site=None if site is None else int(site))
    base_family = options.pop("base_family", None)
    return build_spec(
        result.family, result.estimates, base_family=base_family, functional=functional, **options
    )
