"""Counterexample search over integer boxes and explicit datasets.

Scanning is chunked and embarrassingly parallel; chunks merge by min-margin
reduction, with the witness taken from the lexicographically first violating
point, so results do not depend on thread scheduling. Margins over
integer-valued features with rational coefficients are compared in exact
integer arithmetic; everything else uses an absolute tolerance of 1e-9.
"""

from __future__ import annotations

import json
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from .errors import ConfigError
from .function_space import (
    CandidateConjecture,
    Dataset,
    feature_matrix,
    feature_matrix_exact,
)

REAL_EQ_TOL = 1e-9
CHUNK_ROWS = 1 << 18
_INT64_SAFE = 2**62

_RANGE_RE = re.compile(r"^\s*([A-Za-z]\w*)\s*=\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*$")


@dataclass(frozen=True)
class DomainSpec:
    """Closed integer box with optional `left <= right` variable filters."""

    ranges: tuple[tuple[str, int, int], ...]
    filters: tuple[tuple[str, str], ...] = ()
    sample_count: int | None = None
    seed: int = 0

    @classmethod
    def parse(cls, text: str, filters: str = "") -> "DomainSpec":
        ranges = []
        for part in text.split(","):
            m = _RANGE_RE.match(part)
            if not m:
                raise ConfigError(f"bad range spec {part!r}; expected name=lo..hi")
            name, lo, hi = m.group(1), int(m.group(2)), int(m.group(3))
            if lo > hi:
                raise ConfigError(f"empty range {part!r}")
            ranges.append((name, lo, hi))
        parsed_filters = []
        for part in filter(None, (p.strip() for p in filters.split(","))):
            left, sep, right = part.partition("<=")
            if not sep:
                raise ConfigError(f"bad filter {part!r}; expected left<=right")
            parsed_filters.append((left.strip(), right.strip()))
        return cls(tuple(ranges), tuple(parsed_filters))

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(name for name, _, _ in self.ranges)

    def total_points(self) -> int:
        return math.prod(hi - lo + 1 for _, lo, hi in self.ranges)

    def describe(self) -> dict:
        return {
            "kind": "box",
            "ranges": {name: [lo, hi] for name, lo, hi in self.ranges},
            "filters": [f"{l}<={r}" for l, r in self.filters],
            "exhaustive": self.sample_count is None,
        }


@dataclass(frozen=True)
class VerificationReport:
    status: str
    domain: dict
    min_margin: float
    witness: dict | None
    equality_points: int
    relation: str
    points_tested: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "status": self.status,
                "domain": self.domain,
                "min_margin": self.min_margin,
                "witness": self.witness,
                "equality_points": self.equality_points,
                "relation": self.relation,
                "points_tested": self.points_tested,
            },
            sort_keys=True,
        )


def _decode_box(spec: DomainSpec, flat: np.ndarray) -> np.ndarray:
    sizes = [hi - lo + 1 for _, lo, hi in spec.ranges]
    los = np.array([lo for _, lo, _ in spec.ranges], dtype=np.int64)
    out = np.empty((flat.size, len(sizes)), dtype=np.int64)
    rem = flat.astype(np.int64)
    for j in range(len(sizes) - 1, -1, -1):
        rem, off = np.divmod(rem, sizes[j])
        out[:, j] = los[j] + off
    return out


def _apply_filters(spec: DomainSpec, rows: np.ndarray) -> np.ndarray:
    if not spec.filters:
        return rows
    names = spec.variables
    mask = np.ones(rows.shape[0], dtype=bool)
    for left, right in spec.filters:
        mask &= rows[:, names.index(left)] <= rows[:, names.index(right)]
    return rows[mask]


def _box_chunks(spec: DomainSpec) -> Iterator[np.ndarray]:
    total = spec.total_points()
    if spec.sample_count is None:
        for start in range(0, total, CHUNK_ROWS):
            flat = np.arange(start, min(start + CHUNK_ROWS, total), dtype=np.int64)
            yield _apply_filters(spec, _decode_box(spec, flat))
    else:
        rng = np.random.default_rng(spec.seed)
        picks = np.sort(
            rng.choice(total, size=min(spec.sample_count, total), replace=False)
        )
        for start in range(0, picks.size, CHUNK_ROWS):
            yield _apply_filters(spec, _decode_box(spec, picks[start : start + CHUNK_ROWS]))


def _domain_chunks(candidate: CandidateConjecture, domain):
    """Yield rows in basis-variable column order, plus a domain descriptor."""
    basis_vars = candidate.basis.variables
    if isinstance(domain, Dataset):
        if tuple(domain.variables) != basis_vars:
            order = [domain.variables.index(v) for v in basis_vars]
            rows = domain.rows[:, order]
            flags = tuple(domain.integer_columns[i] for i in order)
        else:
            rows, flags = domain.rows, domain.integer_columns
        descr = {
            "kind": "dataset",
            "name": domain.name,
            "exhaustive": True,
        }
        chunks = (rows[s : s + CHUNK_ROWS] for s in range(0, len(rows), CHUNK_ROWS))
        return chunks, flags, descr
    if isinstance(domain, DomainSpec):
        if set(domain.variables) != set(basis_vars):
            raise ConfigError(
                f"domain variables {domain.variables} do not match basis "
                f"variables {basis_vars}"
            )
        order = [domain.variables.index(v) for v in basis_vars]

        def reordered():
            for rows in _box_chunks(domain):
                yield rows[:, order].astype(np.float64)

        return reordered(), tuple(True for _ in basis_vars), domain.describe()
    raise TypeError(f"unsupported domain {type(domain).__name__}")


def _exact_coeffs(candidate: CandidateConjecture) -> tuple[np.ndarray, int] | None:
    if not candidate.is_exact:
        return None
    diff = [g - f for f, g in zip(candidate.exact_f, candidate.exact_g)]
    denom = math.lcm(*(x.denominator for x in diff)) if diff else 1
    return np.array([int(x * denom) for x in diff], dtype=np.int64), denom


@dataclass
class _ChunkResult:
    min_margin: float
    equalities: int
    rows_seen: int
    witness_row: np.ndarray | None


def _scan_chunk(candidate, rows, flags, exact) -> _ChunkResult:
    if rows.shape[0] == 0:
        return _ChunkResult(math.inf, 0, 0, None)
    phi_int = None
    if exact is not None:
        coeffs, denom = exact
        dataset = Dataset(candidate.basis.variables, rows, flags)
        phi_int = feature_matrix_exact(candidate.basis, dataset)
        if phi_int is not None:
            bound = float(np.max(np.abs(phi_int))) * float(np.sum(np.abs(coeffs)))
            if bound >= _INT64_SAFE:
                phi_int = None
    if phi_int is not None:
        margins = phi_int @ coeffs
        violations = margins < 0
        equalities = int(np.count_nonzero(margins == 0))
        min_margin = float(margins.min()) / denom
    else:
        phi = feature_matrix(candidate.basis, rows)
        margins = phi @ (candidate.theta_g - candidate.theta_f)
        violations = margins < -REAL_EQ_TOL
        equalities = int(np.count_nonzero(np.abs(margins) <= REAL_EQ_TOL))
        min_margin = float(margins.min())
    witness = None
    if violations.any():
        witness = rows[int(np.argmax(violations))].copy()
    return _ChunkResult(min_margin, equalities, rows.shape[0], witness)


def verify(
    candidate: CandidateConjecture,
    domain,
    threads: int = 1,
) -> VerificationReport:
    """Scan the whole domain; classify as Holds / NonStrict / Falsified."""
    chunks, flags, descr = _domain_chunks(candidate, domain)
    exact = _exact_coeffs(candidate)

    results: list[_ChunkResult] = []
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(
                lambda rows: _scan_chunk(candidate, rows, flags, exact), chunks
            ))
    else:
        results = [_scan_chunk(candidate, rows, flags, exact) for rows in chunks]

    min_margin = math.inf
    equalities = 0
    tested = 0
    witness_row = None
    for res in results:
        min_margin = min(min_margin, res.min_margin)
        equalities += res.equalities
        tested += res.rows_seen
        if witness_row is None and res.witness_row is not None:
            witness_row = res.witness_row
    if tested == 0:
        raise ConfigError("empty verification domain")

    if witness_row is not None:
        status = "Falsified"
        names = candidate.basis.variables
        witness = {
            name: (int(v) if flag else float(v))
            for name, v, flag in zip(names, witness_row, flags)
        }
    else:
        status = "NonStrict" if equalities else "Holds"
        witness = None
    descr["points"] = tested
    return VerificationReport(
        status=status,
        domain=descr,
        min_margin=float(min_margin),
        witness=witness,
        equality_points=equalities,
        relation=candidate.relation,
        points_tested=tested,
    )


def margin_profile(candidate: CandidateConjecture, domain):
    """Yield (point tuple, margin g-f) across the domain, in scan order."""
    chunks, flags, _ = _domain_chunks(candidate, domain)
    d = candidate.theta_g - candidate.theta_f
    for rows in chunks:
        margins = feature_matrix(candidate.basis, rows) @ d
        for row, m in zip(rows, margins):
            point = tuple(
                int(v) if flag else float(v) for v, flag in zip(row, flags)
            )
            yield point, float(m)


def write_margin_csv(path, candidate: CandidateConjecture, domain) -> None:
    names = candidate.basis.variables
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(names) + ",margin\n")
        for point, m in margin_profile(candidate, domain):
            fh.write(",".join(str(v) for v in point) + f",{m!r}\n")
