import os
import yaml
import psutil
from pathlib import Path
from contextlib import suppress
from typing import Any
from pydantic import BaseModel, ConfigDict, Field, model_validator, field_validator
from dotenv import load_dotenv

from extremepy.types import (
    BFormType,
    CommandType,
    DeltaModeType,
    FamilyType,
    MarginScaleType,
    MaxStableFamily,
    RiskTag,
)


load_dotenv()


# ----
# Base
# ----
class ConfBase(BaseModel):
    model_config = ConfigDict(validate_assignment=True)

    @classmethod
    def from_dict(cls, data: dict[str, Any]):
        def process_value(key: str, value: Any):
            if isinstance(value, str) and value.startswith("$"):
                # Substitute environment variables
                return os.path.expandvars(value)
            elif isinstance(value, dict) and key in cls.model_fields:
                field_type = cls.model_fields[key].annotation

                with suppress(TypeError):
                    if issubclass(field_type, ConfBase):
                        # Recursively process nested configuration sections
                        return field_type.from_dict(value)

                # Optional sections are annotated as `X | None`
                for arg in getattr(field_type, "__args__", ()):
                    with suppress(TypeError):
                        if issubclass(arg, ConfBase):
                            return arg.from_dict(value)

            return value

        return cls(**{k: process_value(k, v) for k, v in data.items()})

    @classmethod
    def from_file(cls, file_path: str | Path):
        if isinstance(file_path, str):
            file_path = Path(file_path)

        if not file_path.exists():
            raise FileNotFoundError(f"配置文件不存在: {file_path}")

        with file_path.open("r", encoding="utf-8") as f:
            config = yaml.safe_load(f) or dict()
            return cls.from_dict(config)


# --------
# Numerics
# --------
class NumericsConf(ConfBase):
    qmc_points: int = Field(10_000, description="每次独立打乱的Sobol点数, 向上取到2的幂")
    qmc_shifts: int = Field(8, description="Sobol点集的独立打乱次数, 不少于8")
    likelihood_qmc_points: int = Field(2_000, description="似然函数内部多元正态概率所用的Sobol点数")
    jitter_start: float = Field(1e-10, description="Cholesky分解失败时加到对角线上的初始扰动")
    jitter_max: float = Field(1e-6, description="对角线扰动上限, 超过则报错")
    hw_chi_draws: int = Field(1_000_000, description="HW模型χ蒙特卡洛抽样数")
    quad_tolerance: float = Field(1e-8, description="自适应Gauss-Kronrod积分的绝对误差目标")
    fixed_rule_points: int = Field(201, description="积分失败时退回的固定节点数")
    bisection_tolerance: float = Field(1e-10, description="边缘分位数二分求解的容差")
    max_exponent_dim: int = Field(10, description="多元指数函数V支持的最大维数")
    max_density_dim: int = Field(6, description="完整最大稳定密度支持的最大维数")

    @model_validator(mode="after")
    def check_settings(self):
        if self.qmc_shifts < 8:
            raise ValueError("qmc_shifts 不能少于 8")

        if self.jitter_start > self.jitter_max:
            raise ValueError("jitter_start 应该小于 jitter_max")

        return self


class OptimizerConf(ConfBase):
    restarts: int = Field(2, description="Nelder-Mead随机重启次数")
    restart_jitter: float = Field(0.1, description="重启时在变换空间内对初值的相对扰动")
    xatol: float = Field(1e-6, description="单纯形直径收敛阈值")
    fatol: float = Field(1e-8, description="单纯形函数值差收敛阈值")
    max_evaluations: int = Field(20_000, description="每次优化的最大函数评估次数")
    hessian_step: float = Field(1e-4, description="数值Hessian的相对步长")


class DaskConf(ConfBase):
    n_workers: int = max(1, (psutil.cpu_count(logical=False) or 1) * 3 // 4)
    threads_per_worker: int = 1


class ExtremePyConf(ConfBase):
    numerics: NumericsConf = Field(default_factory=NumericsConf, description="数值计算配置")
    optimizer: OptimizerConf = Field(default_factory=OptimizerConf, description="优化器配置")
    dask: DaskConf = Field(default_factory=DaskConf, description="并行计算配置")

    @classmethod
    def load_from_config_file(cls) -> "ExtremePyConf":
        if config_file_path := os.environ.get("EXTREMEPY_CONFIG_FILE"):
            config_file_path = Path(config_file_path)
        else:
            default_path = os.path.expanduser("~/.extremepy/config.yaml")
            config_file_path = Path(default_path)

        return cls.from_file(config_file_path)


# ---
# CLI
# ---
def _ensure_file_exists(value):
    if value is None:
        return value
    p = Path(value)
    if not p.exists():
        raise ValueError(f"文件不存在: {p}")
    return p


class DataConf(ConfBase):
    observations: Path | None = Field(
        None, description="观测数据CSV, 第一列为重复编号或日期, 其余列为站点, 空单元格为缺失"
    )
    stations: Path = Field(..., description="站点CSV, 列为 id, x, y")
    lonlat: bool = Field(False, description="站点坐标是否为经纬度, 是则先按等距矩形投影换算为公里")
    season_days: int = Field(92, description="每年季节内的天数, 用于重现期换算")

    @field_validator("observations", "stations", mode="before")
    def check_paths(cls, value):
        return _ensure_file_exists(value)


class FunctionalConf(ConfBase):
    tag: RiskTag = Field(..., description="风险泛函: max, min, mean, site")
    site: int | None = Field(None, description="site泛函对应的站点序号")

    @model_validator(mode="after")
    def check_site(self):
        if self.tag == "site" and self.site is None:
            raise ValueError("site 泛函必须指定站点序号")
        return self


class ModelConf(ConfBase):
    family: FamilyType = Field(..., description="依赖模型族")
    base_family: MaxStableFamily | None = Field(
        None, description="r-Pareto/IMS/max-mixture 所基于的最大稳定模型族"
    )
    params: dict[str, float] = Field(
        default_factory=dict, description="参数值, 拟合时作为初值, 模拟时作为真值"
    )
    fixed: list[str] = Field(default_factory=list, description="拟合时固定不动的参数名")
    functional: FunctionalConf | None = Field(None, description="r-Pareto 风险泛函")

    @model_validator(mode="after")
    def check_family(self):
        if self.family in ("rpareto", "ims", "maxmix") and self.base_family is None:
            raise ValueError(f"{self.family} 模型必须指定 base_family")

        if self.family == "rpareto" and self.functional is None:
            raise ValueError("r-Pareto 模型必须指定风险泛函 functional")

        return self


class SimulateConf(ConfBase):
    n: int = Field(..., description="模拟次数")
    scale: MarginScaleType = Field("uniform", description="输出的边缘尺度")
    conditioning_site: int = Field(0, description="条件极值模型的条件站点序号")
    threshold: float | None = Field(None, description="条件极值模型的Laplace尺度阈值")

    @field_validator("n")
    def check_n(cls, value):
        if value < 0:
            raise ValueError("模拟次数不能为负")
        return value


class DiagnoseConf(ConfBase):
    u_levels: list[float] = Field([0.95, 0.99], description="计算χ_u/η_u的分位数水平")
    fit_result: Path | None = Field(None, description="已拟合模型的结果文件 fit_result.txt")
    extremogram_site: int = Field(0, description="计算极值图的站点序号")
    extremogram_max_lag: int = Field(10, description="极值图最大滞后")
    extremogram_level: float = Field(0.95, description="极值图阈值水平")
    v_grid: list[float] = Field(
        default_factory=list, description="Pr{max>v} 曲线的Laplace尺度水平, 仅条件极值模型"
    )
    nsim: int = Field(10_000, description="Pr{max>v} 模拟次数")

    @field_validator("u_levels")
    def check_levels(cls, value):
        if any(not 0 < u < 1 for u in value):
            raise ValueError("u_levels 必须在 (0, 1) 之内")
        if list(value) != sorted(set(value)):
            raise ValueError("u_levels 必须严格递增")
        return value

    @field_validator("fit_result", mode="before")
    def check_fit_result(cls, value):
        return _ensure_file_exists(value)


class BootstrapConf(ConfBase):
    mean_block: int = Field(10, description="平稳自助法的平均块长")
    replicates: int = Field(100, description="自助法重复次数")
    quantiles: list[float] = Field([0.05, 0.95], description="输出的分位数")


class ConditionalConf(ConfBase):
    subset_size: int = Field(30, description="复合似然的条件站点子集大小")
    b_form: BFormType = Field("x_pow_beta", description="b 函数形式")
    delta_mode: DeltaModeType = Field("profile", description="δ(h) 形式: profile 或 constant")


class RunConfig(ConfBase):
    command: CommandType = Field(..., description="子命令")
    data: DataConf = Field(..., description="数据文件配置")
    model: ModelConf | None = Field(None, description="模型配置")
    censor_level: float | None = Field(None, description="删失概率水平 u")
    anisotropy_prefit: bool = Field(False, description="是否先用高斯copula拟合各向异性参数")
    simulate: SimulateConf | None = Field(None, description="模拟配置")
    diagnose: DiagnoseConf = Field(default_factory=DiagnoseConf, description="诊断配置")
    bootstrap: BootstrapConf = Field(default_factory=BootstrapConf, description="自助法配置")
    conditional: ConditionalConf = Field(
        default_factory=ConditionalConf, description="条件极值模型配置"
    )
    seed: int = Field(0, description="随机种子")
    threads: int = Field(1, description="最大并行线程数")
    out_dir: Path = Field(default_factory=lambda: Path.cwd() / "out", description="输出目录")

    @field_validator("censor_level")
    def check_censor_level(cls, value):
        if value is not None and not 0 < value < 1:
            raise ValueError("censor_level 必须在 (0, 1) 之内")
        return value

    @field_validator("threads")
    def check_threads(cls, value):
        if value < 1:
            raise ValueError("threads 至少为 1")
        return value

    @model_validator(mode="after")
    def check_command(self):
        needs_data = self.command in ("fit", "diagnose", "bootstrap")
        needs_model = self.command in ("fit", "simulate", "bootstrap")

        if needs_data and self.data.observations is None:
            raise ValueError(f"{self.command} 命令必须提供观测数据 data.observations")

        if needs_model and self.model is None:
            raise ValueError(f"{self.command} 命令必须提供模型配置 model")

        if self.command == "simulate" and self.simulate is None:
            raise ValueError("simulate 命令必须提供 simulate 配置")

        uncensored = ("brown_resnick", "extremal_t")
        if (
            self.command in ("fit", "bootstrap")
            and self.model is not None
            and self.model.family not in uncensored
            and self.censor_level is None
        ):
            raise ValueError(f"{self.model.family} 模型拟合必须指定 censor_level")

        return self
