"""Prime-counting tables and integer grid datasets.

The table is a flat Eratosthenes sieve with a prefix-sum pass, so pi(n)
lookups are O(1) array reads. Non-integer arguments are counted as
pi(floor(t)). Grid datasets exclude 0 and 1 by default since pi is
degenerate there.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import _kernels
from .errors import RangeLimitError, ResourceLimitError

DEFAULT_MAX_LIMIT = 2**31
ROSSER_SCHOENFELD_MIN_X = 17
ROSSER_SCHOENFELD_MIN_ALPHA = 1.25506


@dataclass(frozen=True)
class PrimePiTable:
    """pi(n) for every 0 <= n <= limit."""

    limit: int
    pi: np.ndarray

    def count(self, value) -> int:
        """pi at a single (possibly non-integer) argument."""
        return int(self.lookup(np.asarray([value]))[0])

    def lookup(self, values: np.ndarray) -> np.ndarray:
        """Vectorised pi lookup with floor semantics and range checking."""
        idx = np.floor(np.asarray(values)).astype(np.int64)
        if idx.size:
            top = int(idx.max())
            if top > self.limit:
                raise RangeLimitError(
                    f"argument {top} exceeds the table limit {self.limit}"
                )
            if int(idx.min()) < 0:
                raise RangeLimitError("pi is undefined for negative arguments")
        return self.pi[idx]


def build_pi_table(limit: int, max_limit: int = DEFAULT_MAX_LIMIT) -> PrimePiTable:
    """Sieve primes up to limit and materialise the counting table."""
    if limit < 2:
        raise ValueError("table limit must be at least 2")
    if limit > max_limit:
        raise ResourceLimitError(
            f"table limit {limit} exceeds the configured cap {max_limit}"
        )
    flags = _kernels.sieve_flags(limit)
    pi = np.cumsum(flags, dtype=np.int64)
    pi.flags.writeable = False
    return PrimePiTable(limit, pi)


def rosser_schoenfeld_check(table: PrimePiTable, x: int, alpha: float = 1.26) -> bool:
    """x/ln x < pi(x) < alpha*x/ln x, valid for x >= 17, alpha >= 1.25506."""
    if x < ROSSER_SCHOENFELD_MIN_X:
        raise ValueError(f"the sandwich bound is asserted only for x >= {ROSSER_SCHOENFELD_MIN_X}")
    if alpha < ROSSER_SCHOENFELD_MIN_ALPHA:
        raise ValueError(f"alpha must be at least {ROSSER_SCHOENFELD_MIN_ALPHA}")
    pix = table.count(x)
    base = x / np.log(x)
    return bool(base < pix < alpha * base)


def rosser_schoenfeld_all(
    table: PrimePiTable, lo: int, hi: int, alpha: float = 1.26
) -> bool:
    """Vectorised sandwich check over every integer in [lo, hi]."""
    if lo < ROSSER_SCHOENFELD_MIN_X:
        raise ValueError(f"the sandwich bound is asserted only for x >= {ROSSER_SCHOENFELD_MIN_X}")
    if alpha < ROSSER_SCHOENFELD_MIN_ALPHA:
        raise ValueError(f"alpha must be at least {ROSSER_SCHOENFELD_MIN_ALPHA}")
    x = np.arange(lo, hi + 1, dtype=np.int64)
    base = x / np.log(x)
    pix = table.lookup(x)
    return bool(np.all((base < pix) & (pix < alpha * base)))


def _checked_ranges(
    ranges: Sequence[tuple[int, int]], min_value: int
) -> list[tuple[int, int]]:
    if not 1 <= len(ranges) <= 4:
        raise ValueError("between 1 and 4 variables are supported")
    out = []
    for lo, hi in ranges:
        if lo > hi:
            raise ValueError(f"empty range {lo}..{hi}")
        if lo < min_value:
            raise ValueError(
                f"range starts at {lo}; values below {min_value} are excluded "
                "(pass min_value to override)"
            )
        out.append((int(lo), int(hi)))
    return out


def pi_grid(
    ranges: Sequence[tuple[int, int]],
    sample_count: int | None = None,
    seed: int = 0,
    min_value: int = 2,
) -> Iterator[tuple[int, ...]]:
    """Integer tuples over the given ranges, exhaustive or seeded-sampled.

    Exhaustive mode streams the full product in lexicographic order;
    sampled mode draws ``sample_count`` distinct tuples uniformly.
    """
    checked = _checked_ranges(ranges, min_value)
    if sample_count is None:
        yield from itertools.product(*(range(lo, hi + 1) for lo, hi in checked))
        return
    sizes = [hi - lo + 1 for lo, hi in checked]
    total = int(np.prod(sizes))
    rng = np.random.default_rng(seed)
    picks = np.sort(rng.choice(total, size=min(sample_count, total), replace=False))
    for flat in picks:
        point = []
        rem = int(flat)
        for (lo, _), size in zip(reversed(checked), reversed(sizes)):
            rem, off = divmod(rem, size)
            point.append(lo + off)
        yield tuple(reversed(point))


_VAR_NAMES = ("a", "b", "c", "d")


def grid_dataset(
    ranges: Sequence[tuple[int, int]],
    sample_count: int | None = None,
    seed: int = 0,
    min_value: int = 2,
):
    """Materialise a pi_grid stream as a Dataset of integer rows."""
    from .function_space import Dataset

    rows = np.array(
        list(pi_grid(ranges, sample_count=sample_count, seed=seed, min_value=min_value)),
        dtype=np.float64,
    )
    names = _VAR_NAMES[: len(ranges)]
    return Dataset(
        variables=tuple(names),
        rows=rows,
        integer_columns=tuple(True for _ in names),
        name="primes",
    )


def write_pi_table_csv(path, table: PrimePiTable) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("n,pi\n")
        for n, v in enumerate(table.pi):
            fh.write(f"{n},{int(v)}\n")


def write_feature_csv(path, dataset, basis) -> None:
    """Rows plus one column per basis entry, for offline inspection."""
    from .function_space import feature_matrix

    phi = feature_matrix(basis, dataset.rows)
    labels = [entry.label(basis.variables) for entry in basis.entries]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(list(dataset.variables) + labels) + "\n")
        for point, feats in zip(dataset.rows, phi):
            cells = [
                str(int(v)) if is_int else repr(float(v))
                for v, is_int in zip(point, dataset.integer_columns)
            ]
            cells += [repr(float(v)) for v in feats]
            fh.write(",".join(cells) + "\n")
