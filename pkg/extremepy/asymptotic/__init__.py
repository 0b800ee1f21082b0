# flake8: noqa
from .spectral import risk_eval, spectral_profiles, tilted_profiles
from .exponent import (
    exponent_measure_partial,
    exponent_v,
    exponent_v_partials,
    extremal_coefficient,
    maxstable_density,
    v_pair,
    v_pair_partials,
)
from .maxstable import fit_maxstable_pairwise, maxstable_simulate, pairwise_loglik_maxstable
from .rpareto import censored_loglik_rpareto, fit_rpareto, rpareto_simulate
