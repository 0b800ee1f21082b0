from typing import Callable, Iterable, Iterator, Sequence, TypeVar

import dask
import numpy as np


T = TypeVar("T")
R = TypeVar("R")


def derive_seeds(seed: int | None, n: int) -> list[int]:
    """
    由主种子派生n个互相独立的子种子, 与并行线程数无关
    """
    children = np.random.SeedSequence(seed).spawn(n)
    return [int(child.generate_state(1)[0]) for child in children]


def pair_indices(n_sites: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n_sites, k=1)


def set_partitions(items: Sequence[T]) -> Iterator[list[list[T]]]:
    items = list(items)
    if not items:
        yield []
        return

    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for idx in range(len(part)):
            yield part[:idx] + [[first] + part[idx]] + part[idx + 1 :]


def parallel_map(func: Callable[[T], R], items: Iterable[T], threads: int = 1) -> list[R]:
    """
    并行执行相互独立的任务, 返回值顺序与输入一致

    :param threads: 最大线程数, 为1时直接串行执行
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]

    tasks = [dask.delayed(func, pure=False)(item) for item in items]
    return list(dask.compute(*tasks, scheduler="threads", num_workers=threads))
