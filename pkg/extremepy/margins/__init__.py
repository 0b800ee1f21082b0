# flake8: noqa
from .distributions import gev_eval, gev_loglik, gp_eval, gp_from_gev, gp_loglik, gp_shift
from .fitting import fit_gev, fit_gp
from .transforms import empirical_uniform, rescale, to_uniform
