import numpy as np
import pandas as pd

from extremepy.core.conf import RunConfig
from extremepy.core.observations import ObservationMatrix
from extremepy.core.sites import SiteSet
from extremepy.core.specs import SceSpec
from extremepy.cli.fit import load_data, to_uniform_margins
from extremepy.cli.io import OutputSession, read_fit_result, write_frame
from extremepy.conditional.simulation import empirical_exceedance_prob_max, exceedance_prob_max
from extremepy.decorators import log_failure
from extremepy.depmeasures.empirical import dependence_curve, extremogram
from extremepy.depmeasures.theoretical import chi_u_theoretical, eta_u_theoretical
from extremepy.depmeasures.types import DependenceCurve
from extremepy.gauss.covariance import site_distances
from extremepy.logging import LOG
from extremepy.margins.transforms import rescale
from extremepy.registry import spec_from_result
from extremepy.types import MarginScales
from extremepy.utils import pair_indices


CURVE_COLUMNS = ["kind", "source", "u", "site_i", "site_j", "distance", "value"]


def _model_aniso(model):
    if model is None:
        return None
    cov = getattr(model, "cov", None)
    if cov is not None:
        return cov.aniso
    return getattr(model, "aniso", None)


def _frame(curves: list[DependenceCurve]) -> pd.DataFrame:
    if not curves:
        return pd.DataFrame(columns=CURVE_COLUMNS)
    return pd.concat([c.to_frame() for c in curves], ignore_index=True)[CURVE_COLUMNS]


def dependence_curves(
    uniform: ObservationMatrix, sites: SiteSet, model, config: RunConfig
) -> dict[str, list[DependenceCurve]]:
    """
    所有站点对上的经验曲线, 以及给定模型时的模型曲线; 样本不足的站点对跳过
    """
    levels = config.diagnose.u_levels
    dist = site_distances(sites, _model_aniso(model))
    rows, cols = pair_indices(len(sites))
    labels = tuple(sites.labels)
    curves: dict[str, list[DependenceCurve]] = {"chi": [], "eta": []}

    for i, j in zip(rows.tolist(), cols.tolist()):
        h = float(dist[i, j])
        for kind, model_fn in (("chi", chi_u_theoretical), ("eta", eta_u_theoretical)):
            empirical = dependence_curve(uniform, (i, j), levels, kind, distance=h)
            if np.all(np.isnan(empirical.values)):
                LOG.warn(f"站点对 ({labels[i]}, {labels[j]}) 的 {kind} 曲线样本不足, 已跳过")
                continue
            curves[kind].append(empirical)
            if model is None:
                continue
            values = [model_fn(model, h, u, nsim=config.diagnose.nsim, seed=config.seed) for u in levels]
            curves[kind].append(
                DependenceCurve(
                    pair=(i, j), levels=np.asarray(levels), values=np.asarray(values), kind=kind,
                    source="model", distance=h, labels=(labels[i], labels[j]),
                )
            )
    return curves


def extremogram_curve(uniform: ObservationMatrix, config: RunConfig) -> DependenceCurve:
    conf = config.diagnose
    site = conf.extremogram_site
    values, bound = extremogram(
        uniform.to_numpy()[:, site], conf.extremogram_level, conf.extremogram_max_lag, seed=config.seed
    )
    label = uniform.labels[site]
    return DependenceCurve(
        pair=(site, site),
        levels=np.arange(1, conf.extremogram_max_lag + 1),
        values=values,
        kind="extremogram",
        distance=0.0,
        labels=(label, label),
        bound=bound,
    )


def exceedance_curve(uniform: ObservationMatrix, sites: SiteSet, model, config: RunConfig) -> pd.DataFrame:
    laplace = rescale(uniform, MarginScales.LAPLACE)
    rows = []
    for v in config.diagnose.v_grid:
        if isinstance(model, SceSpec):
            estimate = exceedance_prob_max(model, sites, v, config.diagnose.nsim, config.seed)
            prob, error = estimate["prob"], estimate["mc_error"]
        else:
            prob, error = np.nan, np.nan
        rows.append(
            {
                "v": v,
                "model_prob": prob,
                "model_error": error,
                "empirical_prob": empirical_exceedance_prob_max(laplace, v),
            }
        )
    return pd.DataFrame(rows, columns=["v", "model_prob", "model_error", "empirical_prob"])


def cmd_diagnose(config: RunConfig, session: OutputSession):
    obs, sites = load_data(config)
    uniform = to_uniform_margins(obs, config.seed)

    model = None
    if config.diagnose.fit_result is not None:
        model = log_failure("读取拟合结果")(lambda p: spec_from_result(read_fit_result(p)))(
            config.diagnose.fit_result
        )

    curves = log_failure("相依性曲线")(dependence_curves)(uniform, sites, model, config)
    write_frame(_frame(curves["chi"]), session.path("chi_curves.csv"))
    write_frame(_frame(curves["eta"]), session.path("eta_curves.csv"))

    gram = log_failure("极值图")(extremogram_curve)(uniform, config)
    LOG.log_curves([gram])
    write_frame(gram.to_frame(), session.path("extremogram.csv"))

    if config.diagnose.v_grid:
        table = log_failure("超越概率曲线")(exceedance_curve)(uniform, sites, model, config)
        write_frame(table, session.path("exceedance_curve.csv"))
