import numpy as np
import pytest

from extremepy.conversion import (
    lonlat_to_km,
    quantile_level_for_return_period,
    return_period_probability,
    return_period_years,
)
from extremepy.utils import derive_seeds, pair_indices, parallel_map, set_partitions


@pytest.mark.parametrize("n, bell", [(1, 1), (2, 2), (3, 5), (4, 15)])
def test_set_partitions_counts(n, bell):
    partitions = list(set_partitions(range(n)))
    assert len(partitions) == bell
    for part in partitions:
        assert sorted(x for block in part for x in block) == list(range(n))


def test_set_partitions_empty():
    assert list(set_partitions([])) == [[]]


def test_pair_indices():
    rows, cols = pair_indices(4)
    assert len(rows) == 6
    assert np.all(rows < cols)


def test_derive_seeds_reproducible():
    assert derive_seeds(42, 5) == derive_seeds(42, 5)
    assert len(set(derive_seeds(42, 5))) == 5
    assert derive_seeds(42, 5) != derive_seeds(43, 5)


@pytest.mark.parametrize("threads", [1, 4])
def test_parallel_map_keeps_order(threads):
    assert parallel_map(lambda x: x * x, range(10), threads=threads) == [x * x for x in range(10)]


def test_return_period_bookkeeping():
    p = return_period_probability(100)
    assert p == pytest.approx(1 / 9200)
    assert return_period_years(p) == pytest.approx(100)
    assert quantile_level_for_return_period(100) == pytest.approx(1 - 1 / 9200)
    # The 0.99998 quantile of a 92-day season is roughly a 543-year level
    assert return_period_years(1 - 0.99998) == pytest.approx(543.48, abs=0.01)


def test_return_period_rejects_invalid_input():
    with pytest.raises(ValueError):
        return_period_probability(0)
    with pytest.raises(ValueError):
        return_period_years(1.5)


def test_lonlat_to_km():
    xy = lonlat_to_km(np.array([0.0, 1.0]), np.array([0.0, 0.0]))
    assert xy[1, 0] - xy[0, 0] == pytest.approx(6371.0 * np.pi / 180)
    assert xy[:, 1] == pytest.approx([0.0, 0.0])
