from dataclasses import dataclass
from typing import Sequence, get_args

import numpy as np
import pandas as pd

from extremepy.types import MarginScaleType


@dataclass
class ObservationMatrix:
    """
    n×D 观测矩阵, 行为重复观测(日期), 列为站点, NaN 表示缺失

    :param values: 观测值, 列名为站点标签
    :param scale: 边缘尺度标签
    """

    values: pd.DataFrame
    scale: MarginScaleType

    def __post_init__(self):
        if self.scale not in get_args(MarginScaleType):
            raise ValueError(f"未知的边缘尺度: {self.scale}")
        self.values = self.values.astype(float)
        self.values.columns = [str(c) for c in self.values.columns]

    @classmethod
    def from_array(
        cls,
        data: np.ndarray,
        scale: MarginScaleType,
        labels: Sequence[str] | None = None,
        index: Sequence | None = None,
    ) -> "ObservationMatrix":
        data = np.asarray(data, dtype=float)
        if data.ndim == 1:
            data = data[:, None]
        if labels is None:
            labels = [f"s{idx}" for idx in range(data.shape[1])]
        df = pd.DataFrame(data, columns=list(labels), index=index)
        if index is None:
            df.index.name = "replicate"
        return cls(df, scale)

    @property
    def n_replicates(self) -> int:
        return self.values.shape[0]

    @property
    def n_sites(self) -> int:
        return self.values.shape[1]

    @property
    def labels(self) -> list[str]:
        return list(self.values.columns)

    def to_numpy(self) -> np.ndarray:
        return self.values.to_numpy(dtype=float, copy=True)

    def with_values(self, data: np.ndarray, scale: MarginScaleType) -> "ObservationMatrix":
        df = pd.DataFrame(data, index=self.values.index, columns=self.values.columns)
        return ObservationMatrix(df, scale)

    def take(self, rows: Sequence[int] | np.ndarray) -> "ObservationMatrix":
        return ObservationMatrix(self.values.iloc[np.asarray(rows)], self.scale)

    def select_sites(self, columns: Sequence[int]) -> "ObservationMatrix":
        return ObservationMatrix(self.values.iloc[:, list(columns)], self.scale)
