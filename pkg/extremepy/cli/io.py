from pathlib import Path

import numpy as np
import pandas as pd

from extremepy.conversion import lonlat_to_km
from extremepy.core.exceptions import ConfigurationError
from extremepy.core.observations import ObservationMatrix
from extremepy.core.sites import SiteSet
from extremepy.logging import LOG
from extremepy.optimization.result import FitResult
from extremepy.types import MarginScales


FLOAT_FORMAT = "%.10g"


class OutputSession:
    """
    记录一次命令写出的文件, 命令失败时删除
    """

    def __init__(self, out_dir: Path) -> None:
        self.out_dir = Path(out_dir)
        self.written: list[Path] = []
        self._created_dir = not self.out_dir.exists()

    def path(self, name: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        p = self.out_dir / name
        self.written.append(p)
        return p

    def cleanup(self):
        for p in self.written:
            if p.exists():
                p.unlink()
                LOG.info(f"已删除不完整的输出: {p}")
        self.written.clear()
        # Only a directory this session created, and only when nothing else lives in it
        if self._created_dir and self.out_dir.is_dir() and not any(self.out_dir.iterdir()):
            self.out_dir.rmdir()


def read_observations(path: Path) -> ObservationMatrix:
    """
    第一列为重复编号或日期, 其余列为站点, 空单元格为缺失
    """
    try:
        df = pd.read_csv(path, index_col=0)
        if df.shape[1] == 0:
            raise ConfigurationError(f"观测文件 {path} 没有站点列")
        df = df.apply(pd.to_numeric)
    except ValueError as exc:
        # EmptyDataError, ParserError and non-numeric cells are all ValueErrors
        raise ConfigurationError(f"观测文件 {path} 无法解析: {exc}") from exc
    return ObservationMatrix(df, MarginScales.RAW)


def read_stations(path: Path, lonlat: bool = False) -> SiteSet:
    try:
        df = pd.read_csv(path, dtype={"id": str})
        sites = SiteSet.from_frame(df)
    except ValueError as exc:
        raise ConfigurationError(f"站点文件 {path} 不合法: {exc}") from exc
    if lonlat:
        sites = SiteSet(lonlat_to_km(sites.coords[:, 0], sites.coords[:, 1]), sites.labels)
    return sites


def align_observations(obs: ObservationMatrix, sites: SiteSet) -> ObservationMatrix:
    """
    按站点文件的顺序排列观测列
    """
    missing = [label for label in sites.labels if label not in obs.labels]
    if missing:
        raise ConfigurationError(f"观测文件缺少站点列: {missing}")
    return ObservationMatrix(obs.values[list(sites.labels)], obs.scale)


def write_matrix(obs: ObservationMatrix, path: Path):
    df = obs.values.copy()
    df.index.name = "replicate"
    df.to_csv(path, float_format=FLOAT_FORMAT, lineterminator="\n")


def write_frame(df: pd.DataFrame, path: Path):
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def _format_value(value) -> str:
    if isinstance(value, float):
        return "nan" if not np.isfinite(value) else FLOAT_FORMAT % value
    return str(value)


def write_fit_result(result: FitResult, session: OutputSession):
    lines = [f"{key} = {_format_value(value)}" for key, value in result.to_flat_dict().items()]
    session.path("fit_result.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    write_frame(result.to_table(), session.path("fit_estimates.csv"))


def read_fit_result(path: Path) -> FitResult:
    data = dict()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        key, sep, value = line.partition(" = ")
        if not sep:
            raise ConfigurationError(f"拟合结果文件格式错误: {line}")
        data[key.strip()] = value.strip()
    return FitResult.from_flat_dict(data)
