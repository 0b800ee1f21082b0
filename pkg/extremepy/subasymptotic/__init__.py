# flake8: noqa
from .radial import hot_fr
from .mixtures import hw_marginal, marginal_eval, marginal_quantile, mixture_cdf
from .likelihood import censored_loglik_mixture, fit_mixture
from .simulation import mixture_simulate, mixture_to_uniform
from .inverted import (
    fit_pairwise_sub,
    ims_bivariate,
    ims_simulate,
    maxmix_bivariate_cdf,
    maxmix_partials,
    maxmix_simulate,
    pairwise_loglik_sub,
)
