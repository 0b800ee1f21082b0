from extremepy.core.conf import RunConfig
from extremepy.core.exceptions import ConfigurationError
from extremepy.core.observations import ObservationMatrix
from extremepy.core.sites import SiteSet
from extremepy.core.specs import RiskFunctional
from extremepy.cli.io import (
    OutputSession,
    align_observations,
    read_observations,
    read_stations,
    write_fit_result,
)
from extremepy.decorators import log_failure
from extremepy.gauss.covariance import transform_sites
from extremepy.logging import LOG
from extremepy.margins.transforms import empirical_uniform
from extremepy.optimization.result import FitResult
from extremepy.registry import FitRequest, fit_family
from extremepy.subasymptotic.likelihood import default_mixture_init, fit_mixture


@log_failure("读取数据")
def load_data(config: RunConfig) -> tuple[ObservationMatrix, SiteSet]:
    sites = read_stations(config.data.stations, config.data.lonlat)
    obs = align_observations(read_observations(config.data.observations), sites)
    LOG.info(f"读取 {obs.n_replicates} 个重复观测, {obs.n_sites} 个站点")
    return obs, sites


@log_failure("边缘变换")
def to_uniform_margins(obs: ObservationMatrix, seed: int) -> ObservationMatrix:
    return empirical_uniform(obs, seed=seed)


@log_failure("各向异性预拟合")
def anisotropy_prefit(
    uniform: ObservationMatrix, sites: SiteSet, u: float, seed: int, threads: int
) -> tuple[SiteSet, FitResult]:
    """
    先用高斯 copula 删失似然估计 (ψ, L), 再把站点变换到各向同性坐标
    """
    init = dict(default_mixture_init("gaussian", sites), psi=0.0, L=1.0)
    result = fit_mixture(
        uniform, sites, "gaussian", u, init=init, seed=seed, threads=threads, compute_se=False
    )
    psi, L = result.estimates["psi"], result.estimates["L"]
    LOG.info(f"各向异性预拟合: ψ = {psi:.4f}, L = {L:.4f}")
    return transform_sites(sites, psi, L), result


def fit_request(config: RunConfig, uniform: ObservationMatrix, sites: SiteSet, compute_se: bool = True) -> FitRequest:
    model = config.model
    functional = None
    if model.functional is not None:
        functional = RiskFunctional(tag=model.functional.tag, site=model.functional.site)
    return FitRequest(
        data=uniform,
        sites=sites,
        censor_level=config.censor_level,
        init=dict(model.params),
        fixed=list(model.fixed),
        base_family=model.base_family,
        functional=functional,
        b_form=config.conditional.b_form,
        delta_mode=config.conditional.delta_mode,
        subset_size=config.conditional.subset_size,
        seed=config.seed,
        threads=config.threads,
        compute_se=compute_se,
    )


def prepare_sites(config: RunConfig, uniform: ObservationMatrix, sites: SiteSet) -> tuple[SiteSet, dict[str, str]]:
    """
    需要时做各向异性预拟合, 返回拟合所用的站点和需要记录的选项
    """
    if not config.anisotropy_prefit:
        return sites, dict()
    if config.censor_level is None:
        raise ConfigurationError("各向异性预拟合需要指定 censor_level")
    sites, prefit = anisotropy_prefit(uniform, sites, config.censor_level, config.seed, config.threads)
    return sites, {
        "prefit_psi": f"{prefit.estimates['psi']:.10g}",
        "prefit_L": f"{prefit.estimates['L']:.10g}",
    }


def cmd_fit(config: RunConfig, session: OutputSession) -> FitResult:
    obs, sites = load_data(config)
    uniform = to_uniform_margins(obs, config.seed)
    sites, extra = prepare_sites(config, uniform, sites)

    result = log_failure("模型拟合")(fit_family)(config.model.family, fit_request(config, uniform, sites))
    result.options.update(extra)
    LOG.log_fit(result)

    log_failure("写出结果")(write_fit_result)(result, session)
    return result
