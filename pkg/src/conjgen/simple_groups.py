"""Permutation groups, closure BFS, and the curated simple-group catalog.

Degree is capped at 12 so a permutation packs into an int64 (4 bits per
point), which is what the BFS kernels operate on. The catalog covers the
non-abelian simple groups acting on at most 9 points: the alternating
groups A5..A9 plus PSL(3,2) on the Fano plane and PSL(2,8) on the
projective line over GF(8). Entries are validated at build time against
published orders; simplicity itself is asserted, not recomputed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import CatalogIntegrityError, ResourceLimitError

MAX_DEGREE = 12
DEFAULT_CLOSURE_CAP = 500_000


@dataclass(frozen=True)
class Permutation:
    """One-line notation on {0..n-1}."""

    images: tuple[int, ...]

    def __post_init__(self):
        n = len(self.images)
        if n == 0 or n > MAX_DEGREE:
            raise ValueError(f"degree must be between 1 and {MAX_DEGREE}")
        if sorted(self.images) != list(range(n)):
            raise ValueError(f"{self.images} is not a bijection on 0..{n - 1}")

    @property
    def degree(self) -> int:
        return len(self.images)

    @classmethod
    def identity(cls, degree: int) -> "Permutation":
        return cls(tuple(range(degree)))

    @classmethod
    def from_cycles(cls, degree: int, *cycles: Sequence[int]) -> "Permutation":
        images = list(range(degree))
        for cycle in cycles:
            for i, point in enumerate(cycle):
                images[point] = cycle[(i + 1) % len(cycle)]
        return cls(tuple(images))

    def __call__(self, point: int) -> int:
        return self.images[point]


def compose(p: Permutation, q: Permutation) -> Permutation:
    """(p o q)(i) = p(q(i))."""
    if p.degree != q.degree:
        raise ValueError(f"degree mismatch: {p.degree} vs {q.degree}")
    return Permutation(tuple(p.images[q.images[i]] for i in range(p.degree)))


def inverse(p: Permutation) -> Permutation:
    out = [0] * p.degree
    for i, v in enumerate(p.images):
        out[v] = i
    return Permutation(tuple(out))


def element_order(p: Permutation) -> int:
    """Least k >= 1 with p^k = id; the lcm of the cycle lengths."""
    seen = [False] * p.degree
    order = 1
    for start in range(p.degree):
        if not seen[start]:
            length = 0
            j = start
            while not seen[j]:
                seen[j] = True
                j = p.images[j]
                length += 1
            order = math.lcm(order, length)
    return order


def trace(p: Permutation) -> int:
    """Fixed-point count, i.e. the trace of the permutation matrix."""
    return sum(1 for i, v in enumerate(p.images) if i == v)


def encode(p: Permutation) -> int:
    code = 0
    for i, v in enumerate(p.images):
        code |= v << (4 * i)
    return code


def decode(code: int, degree: int) -> Permutation:
    return Permutation(tuple((code >> (4 * i)) & 15 for i in range(degree)))


def _gen_table(gens: Sequence[Permutation]) -> np.ndarray:
    if not gens:
        raise ValueError("at least one generator is required")
    degree = gens[0].degree
    if any(g.degree != degree for g in gens):
        raise ValueError("generators must share a common degree")
    return np.ascontiguousarray([g.images for g in gens], dtype=np.int64)


def closure_with_distances(
    gens: Sequence[Permutation], cap: int = DEFAULT_CLOSURE_CAP
) -> tuple[np.ndarray, np.ndarray]:
    """BFS over right-multiplication; returns (packed codes, word lengths)."""
    codes, dists, complete = _kernels.closure_bfs(_gen_table(gens), cap)
    if not complete:
        raise ResourceLimitError(
            f"closure exceeded the cap of {cap} elements", partial_count=len(codes)
        )
    return codes, dists


def group_closure(
    gens: Sequence[Permutation], cap: int = DEFAULT_CLOSURE_CAP
) -> frozenset[Permutation]:
    """All products of the generators."""
    degree = gens[0].degree
    codes, _ = closure_with_distances(gens, cap)
    return frozenset(decode(int(c), degree) for c in codes)


def symmetrized(gens: Sequence[Permutation]) -> list[Permutation]:
    """S union S^-1 without duplicates, preserving first-seen order."""
    out: dict[tuple[int, ...], Permutation] = {}
    for g in list(gens) + [inverse(g) for g in gens]:
        out.setdefault(g.images, g)
    return list(out.values())


def cayley_distances(
    gens: Sequence[Permutation], cap: int = DEFAULT_CLOSURE_CAP
) -> dict[int, int]:
    """Distance from the identity in the undirected Cayley graph."""
    codes, dists = closure_with_distances(symmetrized(gens), cap)
    return {int(c): int(d) for c, d in zip(codes, dists)}


def cayley_diameter(gens: Sequence[Permutation], cap: int = DEFAULT_CLOSURE_CAP) -> int:
    """Eccentricity of the identity; equals the diameter by vertex transitivity."""
    _, dists = closure_with_distances(symmetrized(gens), cap)
    return int(dists.max())


@dataclass(frozen=True)
class GroupRecord:
    name: str
    degree: int
    sigma: Permutation
    tau: Permutation
    order: int
    tau1: int
    tau2: int
    o1: int
    o2: int
    diameter: int
    log2_order: float


def _alternating_gens(n: int) -> tuple[Permutation, Permutation]:
    if n % 2 == 1:
        sigma = Permutation.from_cycles(n, tuple(range(n)))
    else:
        sigma = Permutation.from_cycles(n, tuple(range(1, n)))
    return sigma, Permutation.from_cycles(n, (0, 1, 2))


# PSL(3,2) acting on the 7 nonzero vectors of GF(2)^3 (point i is the bit
# pattern of i+1): a Singer 7-cycle and a basis swap. PSL(2,8) acting on
# GF(8) + {infinity} (point 8): z -> x*z and z -> 1/z + 1 in
# GF(2)[x]/(x^3 + x + 1). Both pairs were found by closure search and are
# re-validated against the published orders on every build.
_PSL32_SIGMA = Permutation((1, 3, 5, 2, 0, 6, 4))
_PSL32_TAU = Permutation((1, 0, 2, 3, 5, 4, 6))
_PSL28_SIGMA = Permutation((0, 2, 4, 6, 3, 1, 7, 5, 8))
_PSL28_TAU = Permutation((8, 0, 4, 7, 6, 3, 2, 5, 1))

CATALOG_SPEC: tuple[tuple[str, int, Permutation, Permutation], ...] = tuple(
    [
        (f"A{n}", math.factorial(n) // 2, *_alternating_gens(n))
        for n in range(5, 10)
    ]
    + [
        ("PSL(3,2)", 168, _PSL32_SIGMA, _PSL32_TAU),
        ("PSL(2,8)", 504, _PSL28_SIGMA, _PSL28_TAU),
    ]
)


def build_catalog(cap: int = DEFAULT_CLOSURE_CAP) -> list[GroupRecord]:
    """Build and validate one record per curated (group, generator pair)."""
    records = []
    for name, published_order, sigma, tau in CATALOG_SPEC:
        codes, _ = closure_with_distances([sigma, tau], cap)
        order = len(codes)
        if order != published_order:
            raise CatalogIntegrityError(
                f"{name}: closure found {order} elements, expected {published_order}"
            )
        if compose(sigma, tau).images == compose(tau, sigma).images:
            raise CatalogIntegrityError(f"{name}: generator pair commutes")
        records.append(
            GroupRecord(
                name=name,
                degree=sigma.degree,
                sigma=sigma,
                tau=tau,
                order=order,
                tau1=trace(sigma),
                tau2=trace(tau),
                o1=element_order(sigma),
                o2=element_order(tau),
                diameter=cayley_diameter([sigma, tau], cap),
                log2_order=float(math.log2(order)),
            )
        )
    return records


GROUP_FEATURES = ("tau1", "tau2", "o1", "o2", "log2_order", "diameter")


def dataset_rows(catalog: Iterable[GroupRecord]):
    """(tau1, tau2, o1, o2, log2|H|, diameter) per catalog record."""
    for rec in catalog:
        yield (rec.tau1, rec.tau2, rec.o1, rec.o2, rec.log2_order, rec.diameter)


def groups_dataset(catalog: Sequence[GroupRecord]):
    from .function_space import Dataset

    rows = np.array(list(dataset_rows(catalog)), dtype=np.float64)
    return Dataset(
        variables=GROUP_FEATURES,
        rows=rows,
        integer_columns=(True, True, True, True, False, True),
        name="groups",
    )


def write_catalog_csv(path, catalog: Sequence[GroupRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("name,degree,tau1,tau2,o1,o2,log2_order,diameter\n")
        for r in catalog:
            fh.write(
                f"{r.name},{r.degree},{r.tau1},{r.tau2},{r.o1},{r.o2},"
                f"{r.log2_order!r},{r.diameter}\n"
            )
