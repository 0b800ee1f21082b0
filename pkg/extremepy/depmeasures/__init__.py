# flake8: noqa
from .types import DependenceCurve
from .empirical import chi_u_empirical, dependence_curve, eta_u_empirical, extremogram
from .theoretical import (
    chi_theoretical,
    chi_u_theoretical,
    eta_theoretical,
    eta_u_theoretical,
    hw_chi_monte_carlo,
    joint_survival,
)
