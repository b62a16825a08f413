"""Hot numeric loops: prime sieve, permutation-group BFS, surrogate-loss step.

Each kernel has a pure-numpy implementation and, when numba is importable,
an ``@njit`` twin. The active backend is numba unless the environment
variable ``CONJGEN_NO_NUMBA`` is set (any non-empty value) or numba is
missing. ``IMPLEMENTATIONS`` keeps every compiled variant addressable so
the benchmark in ``benchmarks/bench_kernels.py`` can race them directly.

Permutations are packed 4 bits per point into a single int64 (degree <= 12),
so group elements hash and compare as plain integers.
"""

from __future__ import annotations

import math
import os

import numpy as np

_HASH_MIX = 0x9E3779B97F4A7C15


def _sieve_flags_np(limit: int) -> np.ndarray:
    flags = np.ones(limit + 1, dtype=np.uint8)
    flags[0] = 0
    if limit >= 1:
        flags[1] = 0
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = 0
    return flags


def _pack_shifts(degree: int) -> np.ndarray:
    return np.int64(4) * np.arange(degree, dtype=np.int64)


def _closure_bfs_np(gens: np.ndarray, cap: int):
    _, degree = gens.shape
    shifts = _pack_shifts(degree)
    ident = int((np.arange(degree, dtype=np.int64) << shifts).sum())
    dist: dict[int, int] = {ident: 0}
    frontier = np.array([ident], dtype=np.int64)
    level = 0
    complete = True
    while frontier.size and complete:
        level += 1
        imgs = (frontier[:, None] >> shifts[None, :]) & np.int64(15)
        branches = [
            ((imgs[:, g]) << shifts[None, :]).sum(axis=1) for g in gens
        ]
        fresh = []
        for code in np.unique(np.concatenate(branches)):
            c = int(code)
            if c not in dist:
                if len(dist) >= cap:
                    complete = False
                    break
                dist[c] = level
                fresh.append(c)
        frontier = np.array(fresh, dtype=np.int64)
    codes = np.fromiter(dist.keys(), dtype=np.int64, count=len(dist))
    dists = np.fromiter(dist.values(), dtype=np.int32, count=len(dist))
    order = np.argsort(codes)
    return codes[order], dists[order], complete


def _surrogate_grad_np(phi: np.ndarray, theta: np.ndarray, kappa: float,
                       prefactor: float):
    k = phi.shape[1]
    margins = phi @ (theta[:k] - theta[k:])
    s = np.tanh(kappa * margins)
    omega = prefactor * float(s.sum()) / phi.shape[0]
    sloss = (1.0 - omega * omega) ** 2
    scale = -4.0 * omega * (1.0 - omega * omega) * prefactor * kappa / phi.shape[0]
    gf = phi.T @ (scale * (1.0 - s * s))
    return omega, sloss, np.concatenate([gf, -gf])


def _sign_omega_np(phi: np.ndarray, theta: np.ndarray, prefactor: float) -> float:
    k = phi.shape[1]
    margins = phi @ (theta[:k] - theta[k:])
    return prefactor * float(np.sign(margins).sum()) / phi.shape[0]


_NUMPY_IMPLS = {
    "sieve_flags": _sieve_flags_np,
    "closure_bfs": _closure_bfs_np,
    "surrogate_grad": _surrogate_grad_np,
    "sign_omega": _sign_omega_np,
}

IMPLEMENTATIONS: dict[str, dict] = {"numpy": _NUMPY_IMPLS}

_DISABLED = bool(os.environ.get("CONJGEN_NO_NUMBA"))
try:
    from numba import njit  # noqa: F401

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only without numba
    NUMBA_AVAILABLE = False

if NUMBA_AVAILABLE:

    @njit(cache=True)
    def _sieve_flags_nb(limit):
        flags = np.ones(limit + 1, dtype=np.uint8)
        flags[0] = 0
        if limit >= 1:
            flags[1] = 0
        p = 2
        while p * p <= limit:
            if flags[p]:
                for q in range(p * p, limit + 1, p):
                    flags[q] = 0
            p += 1
        return flags

    @njit(cache=True)
    def _probe(keys, mask, code):
        h = np.uint64(code) * np.uint64(_HASH_MIX)
        h ^= h >> np.uint64(29)
        slot = np.int64(h & np.uint64(mask))
        while keys[slot] != -1 and keys[slot] != code:
            slot = (slot + 1) & mask
        return slot

    @njit(cache=True)
    def _closure_bfs_nb(gens, cap):
        m, degree = gens.shape
        size = 1
        while size < 4 * (cap + 2):
            size <<= 1
        mask = np.int64(size - 1)
        keys = np.full(size, np.int64(-1))
        codes = np.empty(cap, dtype=np.int64)
        dists = np.empty(cap, dtype=np.int32)
        cur = np.empty(degree, dtype=np.int64)

        ident = np.int64(0)
        for i in range(degree):
            ident |= np.int64(i) << np.int64(4 * i)
        keys[_probe(keys, mask, ident)] = ident
        codes[0] = ident
        dists[0] = 0
        count = 1
        head = 0
        complete = True
        while head < count and complete:
            code = codes[head]
            d = dists[head]
            head += 1
            for i in range(degree):
                cur[i] = (code >> np.int64(4 * i)) & np.int64(15)
            for gi in range(m):
                nxt = np.int64(0)
                for i in range(degree):
                    nxt |= cur[gens[gi, i]] << np.int64(4 * i)
                slot = _probe(keys, mask, nxt)
                if keys[slot] == -1:
                    if count >= cap:
                        complete = False
                        break
                    keys[slot] = nxt
                    codes[count] = nxt
                    dists[count] = d + 1
                    count += 1
        out_codes = codes[:count].copy()
        out_dists = dists[:count].copy()
        order = np.argsort(out_codes)
        return out_codes[order], out_dists[order], complete

    @njit(cache=True)
    def _surrogate_grad_nb(phi, theta, kappa, prefactor):
        b, k = phi.shape
        grad = np.zeros(2 * k)
        w = np.empty(b)
        ssum = 0.0
        for i in range(b):
            mi = 0.0
            for j in range(k):
                mi += (theta[j] - theta[k + j]) * phi[i, j]
            s = math.tanh(kappa * mi)
            ssum += s
            w[i] = 1.0 - s * s
        omega = prefactor * ssum / b
        sloss = (1.0 - omega * omega) ** 2
        scale = -4.0 * omega * (1.0 - omega * omega) * prefactor * kappa / b
        for i in range(b):
            cw = scale * w[i]
            for j in range(k):
                grad[j] += cw * phi[i, j]
                grad[k + j] -= cw * phi[i, j]
        return omega, sloss, grad

    @njit(cache=True)
    def _sign_omega_nb(phi, theta, prefactor):
        b, k = phi.shape
        total = 0.0
        for i in range(b):
            mi = 0.0
            for j in range(k):
                mi += (theta[j] - theta[k + j]) * phi[i, j]
            if mi > 0.0:
                total += 1.0
            elif mi < 0.0:
                total -= 1.0
        return prefactor * total / b

    IMPLEMENTATIONS["numba"] = {
        "sieve_flags": _sieve_flags_nb,
        "closure_bfs": _closure_bfs_nb,
        "surrogate_grad": _surrogate_grad_nb,
        "sign_omega": _sign_omega_nb,
    }

BACKEND = "numba" if (NUMBA_AVAILABLE and not _DISABLED) else "numpy"
_ACTIVE = IMPLEMENTATIONS[BACKEND]

sieve_flags = _ACTIVE["sieve_flags"]
closure_bfs = _ACTIVE["closure_bfs"]
surrogate_grad = _ACTIVE["surrogate_grad"]
sign_omega = _ACTIVE["sign_omega"]
