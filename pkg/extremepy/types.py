from typing import Literal, TypedDict

import numpy as np


MarginScaleType = Literal[
    "raw",
    "uniform",
    "normal",
    "frechet",
    "pareto",
    "laplace",
    "exponential",
]


class MarginScales:
    RAW = "raw"
    UNIFORM = "uniform"
    NORMAL = "normal"
    FRECHET = "frechet"
    PARETO = "pareto"
    LAPLACE = "laplace"
    EXPONENTIAL = "exponential"


DistKind = Literal["cdf", "pdf", "quantile", "survival"]

MaxStableFamily = Literal["brown_resnick", "extremal_t"]

FamilyType = Literal[
    "gaussian",
    "hot",
    "hw",
    "location_mixture",
    "brown_resnick",
    "extremal_t",
    "rpareto",
    "ims",
    "maxmix",
    "sce",
]

RiskTag = Literal["max", "min", "mean", "site"]

CurveKind = Literal["chi", "eta", "extremogram"]

BFormType = Literal["one_plus_a_pow_beta", "x_pow_beta"]

DeltaModeType = Literal["profile", "constant"]

RadialTailType = Literal["exponential", "weibull", "pareto"]

CommandType = Literal["fit", "simulate", "diagnose", "transform-coords", "bootstrap"]


class ProbabilityEstimate(TypedDict):
    prob: float
    error_estimate: float


class ExceedanceEstimate(TypedDict):
    prob: float
    mc_error: float


class GaussianLaw(TypedDict):
    mean: np.ndarray
    cov: np.ndarray
