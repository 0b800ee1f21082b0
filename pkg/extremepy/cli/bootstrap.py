from extremepy.core.conf import RunConfig
from extremepy.core.observations import ObservationMatrix
from extremepy.cli.fit import fit_request, load_data, prepare_sites, to_uniform_margins
from extremepy.cli.io import OutputSession, write_frame
from extremepy.decorators import log_failure
from extremepy.logging import LOG
from extremepy.margins.transforms import empirical_uniform
from extremepy.optimization.bootstrap import BootstrapSummary, stationary_bootstrap
from extremepy.registry import fit_family


def cmd_bootstrap(config: RunConfig, session: OutputSession) -> BootstrapSummary:
    obs, sites = load_data(config)
    uniform = to_uniform_margins(obs, config.seed)
    sites, _ = prepare_sites(config, uniform, sites)
    family = config.model.family

    def fitter(resampled: ObservationMatrix):
        # Margins are re-estimated on every replicate
        request = fit_request(config, empirical_uniform(resampled, seed=config.seed), sites, compute_se=False)
        request.threads = 1
        return fit_family(family, request)

    conf = config.bootstrap
    summary = log_failure("自助法")(stationary_bootstrap)(
        obs,
        conf.mean_block,
        conf.replicates,
        fitter,
        seed=config.seed,
        quantiles=conf.quantiles,
        threads=config.threads,
    )
    LOG.info(f"自助法完成: 成功 {summary.n_succeeded} 次, 失败 {summary.n_failed} 次")

    table = summary.quantiles.reset_index()
    table.columns = ["name"] + [f"q{q:g}" for q in conf.quantiles]
    write_frame(table, session.path("bootstrap_quantiles.csv"))

    lines = [
        f"family = {family}",
        f"replicates = {conf.replicates}",
        f"mean_block = {conf.mean_block}",
        f"succeeded = {summary.n_succeeded}",
        f"failed = {summary.n_failed}",
    ]
    lines += [f"error = {e}" for e in summary.errors]
    session.path("bootstrap_summary.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return summary
