import math
from dataclasses import dataclass, field
from typing import Any

import pandas as pd


def bic(loglik: float, k: int, n: int) -> float:
    """
    贝叶斯信息准则 −2·loglik + k·log n
    """
    if n < 1:
        raise ValueError("样本量必须至少为 1")
    return -2.0 * loglik + k * math.log(n)


@dataclass
class FitResult:
    family: str
    estimates: dict[str, float]
    loglik: float
    k: int
    n_effective: int
    converged: bool
    evaluations: int = 0
    stderrs: dict[str, float | None] = field(default_factory=dict)
    censor_level: float | None = None
    flags: list[str] = field(default_factory=list)
    options: dict[str, str] = field(default_factory=dict)

    @property
    def bic(self) -> float:
        return bic(self.loglik, self.k, self.n_effective)

    def to_flat_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "family": self.family,
            "loglik": self.loglik,
            "bic": self.bic,
            "k": self.k,
            "n_effective": self.n_effective,
            "converged": self.converged,
            "evaluations": self.evaluations,
            "censor_level": self.censor_level,
            "flags": ",".join(self.flags),
        }
        for name, value in self.options.items():
            out[f"option.{name}"] = value
        for name, value in self.estimates.items():
            out[f"estimate.{name}"] = value
        for name, value in self.stderrs.items():
            out[f"stderr.{name}"] = value
        return out

    def to_table(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {"name": name, "estimate": value, "stderr": self.stderrs.get(name)}
                for name, value in self.estimates.items()
            ],
            columns=["name", "estimate", "stderr"],
        )

    @classmethod
    def from_flat_dict(cls, data: dict[str, str]) -> "FitResult":
        def _float(value: str | None) -> float | None:
            if value is None or value in ("", "None", "nan"):
                return None
            return float(value)

        estimates, stderrs, options = dict(), dict(), dict()
        for key, value in data.items():
            if key.startswith("estimate."):
                estimates[key.removeprefix("estimate.")] = float(value)
            elif key.startswith("stderr."):
                stderrs[key.removeprefix("stderr.")] = _float(value)
            elif key.startswith("option."):
                options[key.removeprefix("option.")] = value

        flags = data.get("flags", "")
        return cls(
            family=data["family"],
            estimates=estimates,
            loglik=float(data["loglik"]),
            k=int(data["k"]),
            n_effective=int(data["n_effective"]),
            converged=str(data["converged"]).lower() == "true",
            evaluations=int(data.get("evaluations", 0)),
            stderrs=stderrs,
            censor_level=_float(data.get("censor_level")),
            flags=[f for f in flags.split(",") if f],
            options=options,
        )
