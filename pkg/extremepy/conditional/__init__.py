# flake8: noqa
from .normalization import alpha_fn, farthest_point_subset, gaussian_normalization, norm_ab
from .delta_laplace import dlaplace_eval, dlaplace_to_normal, normal_to_dlaplace
from .residuals import ResidualLaw, residual_law
from .likelihood import fit_sce, sce_composite_loglik, sce_loglik
from .simulation import (
    empirical_exceedance_prob_max,
    exceedance_prob_max,
    sce_conditional_exceedance,
    sce_simulate,
)
