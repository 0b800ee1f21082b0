import numpy as np


EARTH_RADIUS_KM = 6371.0


def lonlat_to_km(lon: np.ndarray, lat: np.ndarray) -> np.ndarray:
    """
    等距矩形投影, 以站点的平均纬度为参考纬度, 返回 (x, y) 公里坐标
    """
    lon = np.radians(np.asarray(lon, dtype=float))
    lat = np.radians(np.asarray(lat, dtype=float))
    ref_lat = lat.mean()
    x = EARTH_RADIUS_KM * (lon - lon.mean()) * np.cos(ref_lat)
    y = EARTH_RADIUS_KM * (lat - lat.mean())
    return np.column_stack([x, y])


def return_period_probability(years: float, season_days: int = 92) -> float:
    """
    每季节 ``season_days`` 天的记录中, ``years`` 年一遇对应的单日超越概率
    """
    if years <= 0 or season_days <= 0:
        raise ValueError("重现期与季节天数必须为正")
    return 1.0 / (season_days * years)


def return_period_years(prob: float, season_days: int = 92) -> float:
    if not 0 < prob < 1:
        raise ValueError("超越概率必须在 (0, 1) 之内")
    return 1.0 / (season_days * prob)


def quantile_level_for_return_period(years: float, season_days: int = 92) -> float:
    return 1.0 - return_period_probability(years, season_days)
