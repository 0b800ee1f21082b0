from extremepy.core.conf import ModelConf, RunConfig
from extremepy.core.exceptions import UnsupportedModelError
from extremepy.core.observations import ObservationMatrix
from extremepy.core.specs import GaussianCopulaSpec, HotSpec, HwSpec, RiskFunctional, build_spec
from extremepy.cli.io import OutputSession, read_stations, write_matrix
from extremepy.decorators import log_failure
from extremepy.logging import LOG
from extremepy.margins.transforms import convert_scale
from extremepy.registry import SimulateRequest, simulate_family
from extremepy.subasymptotic.simulation import mixture_to_uniform
from extremepy.types import MarginScales, MarginScaleType


def spec_from_model_conf(model: ModelConf, **options):
    functional = None
    if model.functional is not None:
        functional = RiskFunctional(tag=model.functional.tag, site=model.functional.site)
    return build_spec(
        model.family, dict(model.params), base_family=model.base_family, functional=functional, **options
    )


def to_output_scale(spec, obs: ObservationMatrix, target: MarginScaleType) -> ObservationMatrix:
    """
    原生尺度的模拟值变换到输出尺度; ``raw`` 表示保持原生尺度
    """
    if target == MarginScales.RAW or obs.scale == target:
        return obs
    if obs.n_replicates == 0:
        return obs.with_values(obs.to_numpy(), target)
    if obs.scale == MarginScales.RAW:
        if not isinstance(spec, (GaussianCopulaSpec, HotSpec, HwSpec)):
            raise UnsupportedModelError(f"{spec.family} 模型的模拟值只能以原生尺度输出")
        obs = mixture_to_uniform(spec, obs)
    return convert_scale(obs, target)


def cmd_simulate(config: RunConfig, session: OutputSession) -> ObservationMatrix:
    conf = config.simulate
    sites = log_failure("读取数据")(read_stations)(config.data.stations, config.data.lonlat)
    options = dict()
    if config.model.family == "sce":
        options = dict(b_form=config.conditional.b_form, delta_mode=config.conditional.delta_mode)
    spec = log_failure("构建模型")(spec_from_model_conf)(config.model, **options)

    request = SimulateRequest(
        sites=sites,
        n=conf.n,
        seed=config.seed,
        conditioning_site=conf.conditioning_site,
        threshold=conf.threshold,
    )
    obs = log_failure("模拟")(simulate_family)(spec, request)
    obs = log_failure("尺度变换")(to_output_scale)(spec, obs, conf.scale)
    LOG.info(f"{spec.family} 模型模拟 {obs.n_replicates} 次, 输出尺度 {obs.scale}")

    write_matrix(obs, session.path("simulations.csv"))
    return obs
