from extremepy.core.conf import RunConfig
from extremepy.core.exceptions import ConfigurationError
from extremepy.core.sites import SiteSet
from extremepy.cli.io import OutputSession, read_fit_result, read_stations, write_frame
from extremepy.decorators import log_failure
from extremepy.gauss.covariance import transform_sites
from extremepy.logging import LOG


def anisotropy_parameters(config: RunConfig) -> tuple[float, float]:
    """
    (ψ, L) 取自拟合结果文件, 其次取自模型参数
    """
    if config.diagnose.fit_result is not None:
        result = read_fit_result(config.diagnose.fit_result)
        values = dict(result.estimates)
        for key in ("psi", "L"):
            if f"prefit_{key}" in result.options:
                values.setdefault(key, float(result.options[f"prefit_{key}"]))
    elif config.model is not None:
        values = dict(config.model.params)
    else:
        values = dict()

    if "psi" not in values or "L" not in values:
        raise ConfigurationError("坐标变换需要各向异性参数 psi 与 L")
    return float(values["psi"]), float(values["L"])


def cmd_transform_coords(config: RunConfig, session: OutputSession) -> SiteSet:
    sites = log_failure("读取数据")(read_stations)(config.data.stations, config.data.lonlat)
    psi, L = anisotropy_parameters(config)
    transformed = transform_sites(sites, psi, L)
    LOG.info(f"站点坐标按 ψ = {psi:.4f}, L = {L:.4f} 变换")
    write_frame(transformed.to_frame(), session.path("stations_transformed.csv"))
    return transformed
