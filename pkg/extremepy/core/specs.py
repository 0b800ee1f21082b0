"""
模型参数与依赖模型的定义, 各模型以 ``family`` 字段区分
"""
import math
from typing import Annotated, Any, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from extremepy.core.exceptions import InvalidParameterError, UnsupportedModelError
from extremepy.types import (
    BFormType,
    DeltaModeType,
    FamilyType,
    MaxStableFamily,
    RadialTailType,
    RiskTag,
)


class SpecBase(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


# -------
# Margins
# -------
class GevParams(SpecBase):
    mu: float = Field(..., description="位置参数")
    sigma: float = Field(..., gt=0, description="尺度参数")
    xi: float = Field(..., description="形状参数")

    @property
    def upper_endpoint(self) -> float:
        return self.mu - self.sigma / self.xi if self.xi < 0 else math.inf

    @property
    def lower_endpoint(self) -> float:
        return self.mu - self.sigma / self.xi if self.xi > 0 else -math.inf


class GpParams(SpecBase):
    tau: float = Field(..., gt=0, description="尺度参数")
    xi: float = Field(..., description="形状参数")

    @property
    def upper_endpoint(self) -> float:
        return -self.tau / self.xi if self.xi < 0 else math.inf


class DeltaLaplaceParams(SpecBase):
    mu: float = Field(0.0, description="位置参数")
    sigma: float = Field(1.0, gt=0, description="尺度参数")
    delta: float = Field(1.0, gt=0, description="形状参数, 1为Laplace, 2为高斯形状")


# ----------
# Covariance
# ----------
class Anisotropy(SpecBase):
    psi: float = Field(..., gt=-math.pi / 2, lt=math.pi / 2, description="旋转角")
    L: float = Field(..., gt=0, description="拉伸系数")


class CovarianceSpec(SpecBase):
    phi: float = Field(..., gt=0, description="相关长度")
    nu: float = Field(..., gt=0, le=2, description="光滑参数")
    aniso: Anisotropy | None = Field(None, description="几何各向异性")

    @property
    def gaussian_shape(self) -> bool:
        return self.nu == 2

    def correlation_at(self, h):
        """
        各向同性幂指数相关函数 exp{−(h/φ)^ν}
        """
        h = np.asarray(h, dtype=float)
        return np.exp(-((h / self.phi) ** self.nu))


# ----------
# Asymptotic
# ----------
class BrownResnickSpec(SpecBase):
    family: Literal["brown_resnick"] = "brown_resnick"
    phi: float = Field(..., gt=0, description="变差函数尺度")
    nu: float = Field(..., gt=0, le=2, description="变差函数指数")
    aniso: Anisotropy | None = Field(None, description="几何各向异性")

    def semivariogram(self, h):
        h = np.asarray(h, dtype=float)
        return (h / self.phi) ** self.nu


class ExtremalTSpec(SpecBase):
    family: Literal["extremal_t"] = "extremal_t"
    dof: float = Field(..., gt=0, description="自由度")
    cov: CovarianceSpec

    @property
    def aniso(self) -> Anisotropy | None:
        return self.cov.aniso


MaxStableSpec = Annotated[
    Union[BrownResnickSpec, ExtremalTSpec], Field(discriminator="family")
]


class RiskFunctional(SpecBase):
    tag: RiskTag = Field(..., description="风险泛函类型")
    site: int | None = Field(None, ge=0, description="site 泛函的站点序号")

    @model_validator(mode="after")
    def check_site(self):
        if self.tag == "site" and self.site is None:
            raise ValueError("site 泛函必须指定站点序号")
        return self


class RParetoSpec(SpecBase):
    family: Literal["rpareto"] = "rpareto"
    base: MaxStableSpec
    functional: RiskFunctional


# -------------
# Subasymptotic
# -------------
class GaussianCopulaSpec(SpecBase):
    family: Literal["gaussian"] = "gaussian"
    cov: CovarianceSpec


class HotSpec(SpecBase):
    family: Literal["hot"] = "hot"
    beta: float = Field(..., ge=0, description="Weibull指数, 0为Pareto极限")
    gamma: float = Field(..., gt=0, description="尾部参数")
    cov: CovarianceSpec


class HwSpec(SpecBase):
    family: Literal["hw"] = "hw"
    delta: float = Field(..., gt=0, lt=1, description="混合指数")
    cov: CovarianceSpec


class LocationMixtureSpec(SpecBase):
    family: Literal["location_mixture"] = "location_mixture"
    tail: RadialTailType = Field(..., description="R̃ 的尾部类型")
    theta: float = Field(1.0, gt=0, description="指数/Weibull 尾部的速率")
    beta: float = Field(1.0, gt=0, description="Weibull 尾部指数")
    gamma: float = Field(1.0, gt=0, description="Pareto 尾部形状")
    cov: CovarianceSpec


class ImsSpec(SpecBase):
    family: Literal["ims"] = "ims"
    ms: MaxStableSpec


class MaxMixSpec(SpecBase):
    family: Literal["maxmix"] = "maxmix"
    a: float = Field(..., ge=0, le=1, description="混合权重")
    ms: MaxStableSpec
    ims: ImsSpec


# -----------
# Conditional
# -----------
class SceSpec(SpecBase):
    family: Literal["sce"] = "sce"
    kappa: float = Field(..., gt=0, description="α 形状")
    lam: float = Field(..., gt=0, description="α 尺度 λ")
    delta_lag: float = Field(0.0, ge=0, description="完全渐近相依的距离 Δ")
    beta: float = Field(..., ge=0, le=1, description="b 函数指数")
    mu: float = Field(0.0, description="残差高斯过程均值")
    sigma: float = Field(1.0, gt=0, description="残差高斯过程标准差")
    cov: CovarianceSpec
    delta1: float = Field(1.0, gt=0, description="δ(h) 尺度")
    delta2: float = Field(1.0, gt=0, description="δ(h) 指数")
    delta0: float = Field(1.0, gt=0, description="常数形式下的 δ")
    b_form: BFormType = Field("x_pow_beta", description="b 函数形式")
    delta_mode: DeltaModeType = Field("profile", description="δ(h) 形式")

    @classmethod
    def asymptotic_dependence_preset(cls, cov: CovarianceSpec, **kwargs) -> "SceSpec":
        """
        α≡1, b≡1: 增量形式 X(s) = X(s0) + Z0(s)
        """
        settings: dict[str, Any] = dict(
            kappa=1.0, lam=1.0, delta_lag=math.inf, beta=0.0, b_form="x_pow_beta"
        )
        settings.update(kwargs)
        return cls(cov=cov, **settings)

    def alpha(self, h):
        h = np.asarray(h, dtype=float)
        with np.errstate(invalid="ignore"):
            excess = np.clip(h - self.delta_lag, 0, None)
            value = np.exp(-(excess**self.kappa) / self.lam)
        return np.where(h <= self.delta_lag, 1.0, value)

    def delta(self, h):
        h = np.asarray(h, dtype=float)
        if self.delta_mode == "constant":
            return np.full_like(h, self.delta0)
        return 1.0 + np.exp(-((h / self.delta1) ** self.delta2))


ModelSpec = Annotated[
    Union[
        GaussianCopulaSpec,
        HotSpec,
        HwSpec,
        LocationMixtureSpec,
        BrownResnickSpec,
        ExtremalTSpec,
        RParetoSpec,
        ImsSpec,
        MaxMixSpec,
        SceSpec,
    ],
    Field(discriminator="family"),
]


# -------------------
# Flat parameter maps
# -------------------
def _aniso_from(params: dict[str, float], prefix: str = "") -> Anisotropy | None:
    psi, L = params.get(f"{prefix}psi"), params.get(f"{prefix}L")
    if psi is None and L is None:
        return None
    return Anisotropy(psi=psi if psi is not None else 0.0, L=L if L is not None else 1.0)


def _cov_from(params: dict[str, float], prefix: str = "") -> CovarianceSpec:
    return CovarianceSpec(
        phi=params[f"{prefix}phi"],
        nu=params[f"{prefix}nu"],
        aniso=_aniso_from(params, prefix),
    )


def _maxstable_from(
    family: MaxStableFamily, params: dict[str, float], prefix: str = ""
) -> BrownResnickSpec | ExtremalTSpec:
    if family == "brown_resnick":
        return BrownResnickSpec(
            phi=params[f"{prefix}phi"],
            nu=params[f"{prefix}nu"],
            aniso=_aniso_from(params, prefix),
        )
    return ExtremalTSpec(dof=params[f"{prefix}dof"], cov=_cov_from(params, prefix))


def build_spec(
    family: FamilyType,
    params: dict[str, float],
    *,
    base_family: MaxStableFamily | None = None,
    functional: RiskFunctional | None = None,
    **options: Any,
):
    """
    由扁平参数字典构建模型, 参数名与 :func:`spec_to_params` 的输出一致

    :param options: 非数值选项, 如 ``tail``, ``b_form``, ``delta_mode``
    """
    try:
        match family:
            case "gaussian":
                return GaussianCopulaSpec(cov=_cov_from(params))
            case "hot":
                return HotSpec(beta=params["beta"], gamma=params["gamma"], cov=_cov_from(params))
            case "hw":
                return HwSpec(delta=params["delta"], cov=_cov_from(params))
            case "location_mixture":
                extra = {k: params[k] for k in ("theta", "beta", "gamma") if k in params}
                return LocationMixtureSpec(
                    tail=options.get("tail", "exponential"), cov=_cov_from(params), **extra
                )
            case "brown_resnick" | "extremal_t":
                return _maxstable_from(family, params)
            case "rpareto":
                if base_family is None or functional is None:
                    raise UnsupportedModelError("r-Pareto 模型需要 base_family 与 functional")
                return RParetoSpec(
                    base=_maxstable_from(base_family, params), functional=functional
                )
            case "ims":
                if base_family is None:
                    raise UnsupportedModelError("IMS 模型需要 base_family")
                return ImsSpec(ms=_maxstable_from(base_family, params))
            case "maxmix":
                if base_family is None:
                    raise UnsupportedModelError("max-mixture 模型需要 base_family")
                return MaxMixSpec(
                    a=params["a"],
                    ms=_maxstable_from(base_family, params),
                    ims=ImsSpec(ms=_maxstable_from(base_family, params, prefix="ims_")),
                )
            case "sce":
                keys = (
                    "kappa", "lam", "delta_lag", "beta", "mu", "sigma",
                    "delta1", "delta2", "delta0",
                )
                values = {k: params[k] for k in keys if k in params}
                extra = {k: options[k] for k in ("b_form", "delta_mode") if k in options}
                return SceSpec(cov=_cov_from(params), **values, **extra)
    except KeyError as exc:
        raise InvalidParameterError(f"{family} 模型缺少参数: {exc.args[0]}") from exc
    except ValidationError as exc:
        raise InvalidParameterError(f"{family} 模型参数不合法: {exc}") from exc

    raise UnsupportedModelError(f"未知的模型族: {family}")


def _cov_params(cov: CovarianceSpec, prefix: str = "") -> dict[str, float]:
    out = {f"{prefix}phi": cov.phi, f"{prefix}nu": cov.nu}
    if cov.aniso is not None:
        out.update({f"{prefix}psi": cov.aniso.psi, f"{prefix}L": cov.aniso.L})
    return out


def _maxstable_params(spec: BrownResnickSpec | ExtremalTSpec, prefix: str = "") -> dict[str, float]:
    if isinstance(spec, BrownResnickSpec):
        cov = CovarianceSpec(phi=spec.phi, nu=spec.nu, aniso=spec.aniso)
        return _cov_params(cov, prefix)
    return {f"{prefix}dof": spec.dof, **_cov_params(spec.cov, prefix)}


def spec_to_params(spec) -> dict[str, float]:
    match spec:
        case GaussianCopulaSpec():
            return _cov_params(spec.cov)
        case HotSpec():
            return {"beta": spec.beta, "gamma": spec.gamma, **_cov_params(spec.cov)}
        case HwSpec():
            return {"delta": spec.delta, **_cov_params(spec.cov)}
        case LocationMixtureSpec():
            return {
                "theta": spec.theta,
                "beta": spec.beta,
                "gamma": spec.gamma,
                **_cov_params(spec.cov),
            }
        case BrownResnickSpec() | ExtremalTSpec():
            return _maxstable_params(spec)
        case RParetoSpec():
            return _maxstable_params(spec.base)
        case ImsSpec():
            return _maxstable_params(spec.ms)
        case MaxMixSpec():
            return {
                "a": spec.a,
                **_maxstable_params(spec.ms),
                **_maxstable_params(spec.ims.ms, prefix="ims_"),
            }
        case SceSpec():
            keys = (
                "kappa", "lam", "delta_lag", "beta", "mu", "sigma",
                "delta1", "delta2", "delta0",
            )
            return {**{k: getattr(spec, k) for k in keys}, **_cov_params(spec.cov)}
    raise UnsupportedModelError(f"未知的模型: {type(spec).__name__}")


def spec_options(spec) -> dict[str, Any]:
    """
    与 :func:`build_spec` 对应的非数值选项
    """
    match spec:
        case RParetoSpec():
            return dict(base_family=spec.base.family, functional=spec.functional)
        case ImsSpec():
            return dict(base_family=spec.ms.family)
        case MaxMixSpec():
            return dict(base_family=spec.ms.family)
        case LocationMixtureSpec():
            return dict(tail=spec.tail)
        case SceSpec():
            return dict(b_form=spec.b_form, delta_mode=spec.delta_mode)
    return dict()
