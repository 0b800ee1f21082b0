from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import pandas as pd
from scipy.spatial import distance


def anisotropy_matrix(psi: float, L: float) -> np.ndarray:
    """
    坐标变换矩阵 diag(1, L)·[[cosψ, sinψ], [−sinψ, cosψ]]
    """
    c, s = np.cos(psi), np.sin(psi)
    rotation = np.array([[c, s], [-s, c]])
    return np.diag([1.0, L]) @ rotation


@dataclass(frozen=True, eq=False)
class SiteSet:
    coords: np.ndarray
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        coords = np.array(self.coords, dtype=float, ndmin=2)
        if coords.ndim != 2 or coords.shape[1] != 2:
            raise ValueError(f"站点坐标必须是 D×2 矩阵, 实际为 {coords.shape}")
        if coords.shape[0] < 1:
            raise ValueError("至少需要一个站点")
        if not np.isfinite(coords).all():
            raise ValueError("站点坐标必须为有限值")

        labels = tuple(str(lbl) for lbl in self.labels) or tuple(
            f"s{idx}" for idx in range(coords.shape[0])
        )
        if len(labels) != coords.shape[0]:
            raise ValueError("站点标签数量与坐标数量不一致")

        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.coords.shape[0]

    @property
    def n_sites(self) -> int:
        return len(self)

    def distance_matrix(self, psi: float | None = None, L: float | None = None) -> np.ndarray:
        coords = self.coords
        if psi is not None and L is not None:
            coords = coords @ anisotropy_matrix(psi, L).T
        return distance.squareform(distance.pdist(coords)) if len(self) > 1 else np.zeros((1, 1))

    def subset(self, indices: Sequence[int]) -> "SiteSet":
        indices = list(indices)
        return SiteSet(self.coords[indices], tuple(self.labels[i] for i in indices))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {"id": list(self.labels), "x": self.coords[:, 0], "y": self.coords[:, 1]}
        )

    @classmethod
    def from_frame(cls, df: pd.DataFrame) -> "SiteSet":
        missing = {"id", "x", "y"} - set(df.columns)
        if missing:
            raise ValueError(f"站点表缺少列: {sorted(missing)}")
        return cls(df[["x", "y"]].to_numpy(dtype=float), tuple(df["id"].astype(str)))
