from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from extremepy.core.exceptions import InvalidParameterError
from extremepy.types import CurveKind


# Slack for rounding in the range checks
RANGE_TOL = 1e-9


@dataclass
class DependenceCurve:
    """
    一对站点上的 χ_u, η_u 或极值图曲线

    :param levels: χ/η 为分位数水平 u, 极值图为滞后阶数
    :param values: 与 levels 对应的取值, NaN 表示无法估计
    :param bound: 极值图的独立性置信上界
    """

    pair: tuple[int, int]
    levels: np.ndarray
    values: np.ndarray
    kind: CurveKind
    source: str = "empirical"
    distance: float = np.nan
    labels: tuple[str, str] | None = None
    bound: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.levels = np.asarray(self.levels, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.levels.shape != self.values.shape or self.levels.ndim != 1:
            raise InvalidParameterError("水平与取值的长度必须一致")
        if np.any(np.diff(self.levels) <= 0):
            raise InvalidParameterError("水平必须严格递增")

        finite = self.values[np.isfinite(self.values)]
        match self.kind:
            case "chi" | "extremogram":
                if np.any((finite < -RANGE_TOL) | (finite > 1 + RANGE_TOL)):
                    raise InvalidParameterError(f"{self.kind} 的取值必须在 [0, 1] 之内")
            case "eta":
                if np.any((finite <= 0) | (finite > 1 + RANGE_TOL)):
                    raise InvalidParameterError("η 的取值必须在 (0, 1] 之内")
            case _:
                raise InvalidParameterError(f"未知的曲线类型: {self.kind}")
        if self.kind != "extremogram" and np.any((self.levels <= 0) | (self.levels >= 1)):
            raise InvalidParameterError("分位数水平必须在 (0, 1) 之内")

    def __str__(self) -> str:
        name_i, name_j = self.labels or self.pair
        points = ", ".join(f"{u:g}:{v:.4f}" for u, v in zip(self.levels, self.values))
        return f"{self.kind}[{self.source}] ({name_i}, {name_j}) h={self.distance:.4g}: {points}"

    def to_frame(self) -> pd.DataFrame:
        name_i, name_j = self.labels or tuple(str(p) for p in self.pair)
        level_col = "lag" if self.kind == "extremogram" else "u"
        df = pd.DataFrame(
            {
                "kind": self.kind,
                "source": self.source,
                level_col: self.levels,
                "site_i": name_i,
                "site_j": name_j,
                "distance": self.distance,
                "value": self.values,
            }
        )
        if self.bound is not None:
            df["bound"] = self.bound
        return df
