# flake8: noqa
from .covariance import (
    correlation,
    correlation_matrix,
    mahalanobis_distance,
    robust_cholesky,
    transform_sites,
)
from .simulation import gp_condition_zero, gp_simulate
from .qmc import QmcAccuracy, bvn_cdf, mvn_cdf, mvn_cdf_batch, mvt_cdf, mvt_cdf_batch
