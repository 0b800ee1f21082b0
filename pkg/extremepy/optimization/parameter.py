import math
from dataclasses import dataclass, field
from typing import Iterable, Literal

import numpy as np

from extremepy.constants import HW_DELTA_MAX, HW_DELTA_MIN
from extremepy.core.exceptions import InvalidParameterError


TransformTag = Literal["identity", "log", "logit", "angle"]


@dataclass
class Parameter:
    """
    单个模型参数及其到无约束空间的变换

    ``log`` 映射 (lower, ∞), ``logit`` 映射 (lower, upper), ``angle`` 映射 (−π/2, π/2)
    """

    name: str
    init: float
    transform: TransformTag = "identity"
    lower: float | None = None
    upper: float | None = None
    fixed: bool = False

    def __post_init__(self):
        match self.transform:
            case "log":
                if self.lower is None:
                    self.lower = 0.0
            case "logit":
                if self.lower is None or self.upper is None or self.lower >= self.upper:
                    raise InvalidParameterError(f"参数 {self.name} 的 logit 变换需要有效的上下界")
            case "angle":
                self.lower, self.upper = -math.pi / 2, math.pi / 2

        if not self.fixed and not self.contains(self.init):
            raise InvalidParameterError(f"参数 {self.name} 的初值 {self.init} 不在取值范围内")

    def contains(self, value: float) -> bool:
        if self.transform == "identity":
            return math.isfinite(value)
        if self.transform == "log":
            return value > self.lower
        return self.lower < value < self.upper

    def to_free(self, value: float) -> float:
        match self.transform:
            case "identity":
                return value
            case "log":
                return math.log(value - self.lower)
            case _:
                p = (value - self.lower) / (self.upper - self.lower)
                return math.log(p / (1 - p))

    def to_natural(self, theta: float) -> float:
        match self.transform:
            case "identity":
                return theta
            case "log":
                return self.lower + math.exp(min(theta, 700.0))
            case _:
                return self.lower + (self.upper - self.lower) * _expit(theta)

    def jacobian(self, theta: float) -> float:
        """
        d(natural)/d(free)
        """
        match self.transform:
            case "identity":
                return 1.0
            case "log":
                return math.exp(min(theta, 700.0))
            case _:
                p = _expit(theta)
                return (self.upper - self.lower) * p * (1 - p)


def _expit(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


@dataclass
class ParamTransform:
    parameters: list[Parameter]
    _free: list[Parameter] = field(init=False, repr=False)

    def __post_init__(self):
        names = [p.name for p in self.parameters]
        if len(set(names)) != len(names):
            raise InvalidParameterError(f"参数名重复: {names}")
        self._free = [p for p in self.parameters if not p.fixed]

    @property
    def names(self) -> list[str]:
        return [p.name for p in self.parameters]

    @property
    def free_names(self) -> list[str]:
        return [p.name for p in self._free]

    @property
    def n_free(self) -> int:
        return len(self._free)

    def __getitem__(self, name: str) -> Parameter:
        for p in self.parameters:
            if p.name == name:
                return p
        raise KeyError(name)

    def initial_free(self) -> np.ndarray:
        return np.array([p.to_free(p.init) for p in self._free], dtype=float)

    def to_free(self, values: dict[str, float]) -> np.ndarray:
        return np.array([p.to_free(values[p.name]) for p in self._free], dtype=float)

    def to_natural(self, theta: Iterable[float]) -> dict[str, float]:
        theta = list(theta)
        values = {p.name: p.init for p in self.parameters}
        for p, t in zip(self._free, theta):
            values[p.name] = p.to_natural(float(t))
        return values

    def jacobian(self, theta: Iterable[float]) -> np.ndarray:
        return np.array([p.jacobian(float(t)) for p, t in zip(self._free, theta)])

    def with_init(self, values: dict[str, float]) -> "ParamTransform":
        """
        以新的初值复制, 固定参数保持原值
        """
        return ParamTransform(
            [
                Parameter(
                    p.name,
                    p.init if p.fixed else values.get(p.name, p.init),
                    p.transform,
                    p.lower,
                    p.upper,
                    p.fixed,
                )
                for p in self.parameters
            ]
        )


# Transform and bounds per flat parameter name, see ``extremepy.core.specs.build_spec``
PARAMETER_CATALOG: dict[str, tuple[TransformTag, float | None, float | None]] = {
    "phi": ("log", 0.0, None),
    "nu": ("logit", 0.0, 2.0),
    "psi": ("angle", None, None),
    "L": ("log", 0.0, None),
    "dof": ("log", 0.0, None),
    "beta": ("log", 0.0, None),
    "gamma": ("log", 0.0, None),
    "delta": ("logit", HW_DELTA_MIN, HW_DELTA_MAX),
    "theta": ("log", 0.0, None),
    "a": ("logit", 0.0, 1.0),
    "kappa": ("log", 0.0, None),
    "lam": ("log", 0.0, None),
    "delta_lag": ("log", 0.0, None),
    "mu": ("identity", None, None),
    "sigma": ("log", 0.0, None),
    "delta1": ("log", 0.0, None),
    "delta2": ("log", 0.0, None),
    "delta0": ("log", 0.0, None),
}

# Family-specific overrides of the catalog
FAMILY_OVERRIDES: dict[str, dict[str, tuple[TransformTag, float | None, float | None]]] = {
    "sce": {"beta": ("logit", 0.0, 1.0)},
}


def model_transform(
    family: str, values: dict[str, float], fixed: Iterable[str] = ()
) -> ParamTransform:
    """
    按参数名查表构建变换, ``ims_`` 前缀的参数与无前缀同名参数共用变换

    :param values: 参数初值, 固定参数取其中的值
    :param fixed: 固定不动的参数名
    """
    fixed = set(fixed)
    unknown = fixed - set(values)
    if unknown:
        raise InvalidParameterError(f"固定参数没有给定取值: {sorted(unknown)}")

    overrides = FAMILY_OVERRIDES.get(family, dict())
    parameters = []
    for name, init in values.items():
        base = name.removeprefix("ims_")
        if base not in PARAMETER_CATALOG:
            raise InvalidParameterError(f"未知的参数名: {name}")
        tag, lower, upper = overrides.get(base, PARAMETER_CATALOG[base])
        parameters.append(Parameter(name, float(init), tag, lower, upper, fixed=name in fixed))
    return ParamTransform(parameters)
