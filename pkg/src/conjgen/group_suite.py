"""Randomized checks of the matrix-group laws behind the conjecture cone.

Every check here is a theorem; failures indicate implementation bugs, not
bad luck. The heavy closure checks run vectorised over stacked 2x2 matrices
so a 1000-trial sweep stays well under the two-second budget.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotInGroupError
from .group_algebra import (
    ConjugatedParams,
    DilationParam,
    FunctionPair,
    GroupElement,
    HParams,
    MEMBER_TOL,
    ROUNDTRIP_TOL,
    abc_from_mat,
    act,
    decompose_TH,
    fixed_point_witness,
    is_in_G,
    is_in_H,
    is_in_J1,
    is_in_J2,
    is_in_T,
    mat_from_abc,
    mat_from_dilation,
    mat_from_h,
)

_B = np.array([[1.0, 1.0], [-1.0, 1.0]])
_B_INV = np.array([[0.5, -0.5], [0.5, 0.5]])


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def _rand_signed(rng, n, lo=0.2, hi=3.0):
    return rng.choice([-1.0, 1.0], size=n) * rng.uniform(lo, hi, size=n)


def _abc_mats(a, b, c):
    """Stacked matrices for parameter vectors (vectorised mat_from_abc)."""
    return np.stack(
        [
            np.stack([a + b - c, a - b + c], axis=-1),
            np.stack([a - b - c, a + b + c], axis=-1),
        ],
        axis=-2,
    )


def _h_mats(p, q):
    return np.stack(
        [np.stack([p, q - 1.0], axis=-1), np.stack([p - 1.0, q], axis=-1)],
        axis=-2,
    )


def _conjugated(mats):
    q = _B @ mats @ _B_INV
    return q[..., 0, 0] / 2, q[..., 1, 1] / 2, q[..., 0, 1] / 2, np.abs(q[..., 1, 0])


def _in_g_mask(mats, tol=MEMBER_TOL):
    a, b, _, resid = _conjugated(mats)
    return (resid <= tol) & (b > tol) & (np.abs(a) > tol)


def _in_t_mask(mats, tol=MEMBER_TOL):
    return (
        (np.abs(mats[..., 0, 1]) <= tol)
        & (np.abs(mats[..., 1, 0]) <= tol)
        & (np.abs(mats[..., 0, 0] - mats[..., 1, 1]) <= tol)
        & (mats[..., 0, 0] > tol)
    )


def _in_h_mask(mats, tol=MEMBER_TOL):
    return (
        (np.abs(mats[..., 0, 0] - mats[..., 1, 0] - 1.0) <= tol)
        & (np.abs(mats[..., 1, 1] - mats[..., 0, 1] - 1.0) <= tol)
        & (np.abs(mats[..., 0, 0] + mats[..., 1, 1] - 1.0) > tol)
    )


def _inv2(mats):
    det = mats[..., 0, 0] * mats[..., 1, 1] - mats[..., 0, 1] * mats[..., 1, 0]
    out = np.empty_like(mats)
    out[..., 0, 0] = mats[..., 1, 1]
    out[..., 1, 1] = mats[..., 0, 0]
    out[..., 0, 1] = -mats[..., 0, 1]
    out[..., 1, 0] = -mats[..., 1, 0]
    return out / det[..., None, None]


def _sample_mats(rng, family: str, n: int):
    if family == "T":
        lam = 10.0 ** rng.uniform(-1, 1, size=n)
        return lam[:, None, None] * np.eye(2)[None]
    if family == "H":
        p = rng.uniform(-3, 3, size=n)
        q = rng.uniform(-3, 3, size=n)
        bad = np.abs(p + q - 1.0) < 0.1
        q[bad] += 0.5
        return _h_mats(p, q)
    a = _rand_signed(rng, n)
    b = rng.uniform(0.2, 3.0, size=n)
    c = rng.uniform(-3, 3, size=n)
    if family == "J1":
        a = b.copy()
    elif family == "J2":
        a = np.full(n, 0.5)
    return _abc_mats(a, b, c)


_MASKS = {"T": _in_t_mask, "H": _in_h_mask, "G": _in_g_mask}


def _family_mask(family: str):
    if family in _MASKS:
        return _MASKS[family]

    def mask(mats, tol=MEMBER_TOL):
        a, b, _, resid = _conjugated(mats)
        base = (resid <= tol) & (b > tol) & (np.abs(a) > tol)
        if family == "J1":
            return base & (np.abs(a - b) <= tol)
        return base & (np.abs(a - 0.5) <= tol)

    return mask


def _closure_check(rng, family: str, trials: int) -> CheckResult:
    x = _sample_mats(rng, family, trials)
    y = _sample_mats(rng, family, trials)
    mask = _family_mask(family)
    ok = (
        mask(x).all()
        and mask(x @ y).all()
        and mask(_inv2(x)).all()
    )
    return CheckResult(f"closure_{family}", bool(ok))


def _det_trace_check(rng, trials: int) -> CheckResult:
    mats = _sample_mats(rng, "H", trials)
    det = mats[:, 0, 0] * mats[:, 1, 1] - mats[:, 0, 1] * mats[:, 1, 0]
    tr = mats[:, 0, 0] + mats[:, 1, 1]
    worst = float(np.max(np.abs(1.0 + det - tr)))
    return CheckResult("h_det_trace_identity", worst <= MEMBER_TOL, f"max |1+det-tr| = {worst:.2e}")


def _rand_cone_pair(rng, samples: int = 6) -> FunctionPair:
    f = rng.normal(size=samples)
    return FunctionPair.from_values(f, f + rng.uniform(0.05, 2.0, size=samples))


def _difference_scaling_check(rng, trials: int) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        a = float(_rand_signed(rng, 1)[0])
        b = float(rng.uniform(0.2, 3.0))
        c = float(rng.uniform(-3, 3))
        elem = mat_from_abc(ConjugatedParams(a, b, c))
        pair = _rand_cone_pair(rng)
        moved = act(elem, pair)
        if not moved.in_cone():
            return CheckResult("g_preserves_cone", False, f"cone broken at (a,b,c)=({a},{b},{c})")
        resid = float(np.max(np.abs(moved.difference() - 2.0 * b * pair.difference())))
        worst = max(worst, resid)
    return CheckResult(
        "g_difference_scaling", worst <= 1e-10, f"max residual {worst:.2e}"
    )


def _noninvariance_check(rng, trials: int) -> CheckResult:
    neg = GroupElement.from_matrix(-np.eye(2))
    pair = _rand_cone_pair(rng)
    return CheckResult("minus_identity_breaks_cone", not act(neg, pair).in_cone())


def _decompose_check(rng, trials: int) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        a = float(_rand_signed(rng, 1)[0])
        b = float(rng.uniform(0.2, 3.0))
        c = float(rng.uniform(-3, 3))
        elem = mat_from_abc(ConjugatedParams(a, b, c))
        dil, h = decompose_TH(elem)
        rebuilt = mat_from_dilation(dil) @ mat_from_h(h)
        worst = max(worst, float(np.max(np.abs(rebuilt.entries - elem.entries))))
        dil2, h2 = decompose_TH(rebuilt)
        worst = max(
            worst,
            abs(dil2.scale - dil.scale),
            abs(h2.p - h.p),
            abs(h2.q - h.q),
        )
    return CheckResult(
        "decompose_roundtrip_unique", worst <= ROUNDTRIP_TOL, f"max error {worst:.2e}"
    )


def _semidirect_check(rng, trials: int) -> CheckResult:
    lam = 10.0 ** rng.uniform(-1, 1, size=trials)
    lam[np.abs(lam - 1.0) < 1e-3] = 2.0
    t_mats = lam[:, None, None] * np.eye(2)[None]
    if _in_h_mask(t_mats).any():
        return CheckResult("semidirect_T_cap_H", False, "non-identity dilation passed the H test")
    if not (is_in_T(GroupElement.from_matrix(np.eye(2))) and is_in_H(GroupElement.from_matrix(np.eye(2)))):
        return CheckResult("semidirect_T_cap_H", False, "identity rejected")
    h_mats = _sample_mats(rng, "H", trials)
    conj = h_mats @ t_mats @ _inv2(h_mats)
    normal = _in_t_mask(conj).all()
    return CheckResult("semidirect_T_cap_H_and_normality", bool(normal))


def _free_action_check(rng, trials: int, family: str) -> CheckResult:
    mats = _sample_mats(rng, family, trials)
    for i in range(trials):
        elem = GroupElement.from_matrix(mats[i])
        if elem.is_identity():
            continue
        if fixed_point_witness(elem) is not None:
            return CheckResult(f"free_action_{family}", False, f"witness at trial {i}")
    return CheckResult(f"free_action_{family}", True)


def _witness_check(rng, trials: int) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        a = float(_rand_signed(rng, 1)[0])
        if abs(2 * a - 1.0) < 0.05:  # keep 1/(1-2a) moderate for the 1e-12 bound
            a += 0.5
        c = float(rng.uniform(-3, 3))
        elem = mat_from_abc(ConjugatedParams(a, 0.5, c))
        pair = fixed_point_witness(elem)
        if pair is None:
            return CheckResult("fixed_point_witness_iff", False, f"missing witness at a={a}")
        if not pair.in_cone():
            return CheckResult("fixed_point_witness_iff", False, "witness outside the cone")
        moved = act(elem, pair)
        worst = max(
            worst,
            float(np.max(np.abs(moved.f - pair.f))),
            float(np.max(np.abs(moved.g - pair.g))),
        )
        # 2b != 1 must yield no witness
        other = mat_from_abc(ConjugatedParams(a, 1.5, c))
        if fixed_point_witness(other) is not None:
            return CheckResult("fixed_point_witness_iff", False, "witness despite 2b != 1")
    return CheckResult(
        "fixed_point_witness_iff", worst <= 1e-12, f"max fixed-point residual {worst:.2e}"
    )


def _dilation_moves_check(rng, trials: int) -> CheckResult:
    double = GroupElement.from_matrix(2.0 * np.eye(2))
    for _ in range(trials):
        pair = _rand_cone_pair(rng)
        moved = act(double, pair)
        if np.allclose(moved.f, pair.f) and np.allclose(moved.g, pair.g):
            return CheckResult("dilation_moves_every_pair", False)
    return CheckResult("dilation_moves_every_pair", True)


def _components_check(rng, trials: int) -> CheckResult:
    for _ in range(trials):
        a0 = -float(rng.uniform(0.2, 3.0))
        a1 = float(rng.uniform(0.2, 3.0))
        b = float(rng.uniform(0.2, 3.0))
        c = float(rng.uniform(-3, 3))
        m0 = mat_from_abc(ConjugatedParams(a0, b, c)).entries
        m1 = mat_from_abc(ConjugatedParams(a1, b, c)).entries
        tstar = a0 / (a0 - a1)
        crossing = (1 - tstar) * m0 + tstar * m1
        try:
            inside = is_in_G(GroupElement.from_matrix(crossing))
        except NotInGroupError:
            inside = False
        if inside:
            return CheckResult("two_connected_components", False, "a=0 crossing accepted")
    return CheckResult("two_connected_components", True)


def _closedness_check(rng, trials: int) -> CheckResult:
    idx = np.arange(1, 201)
    for _ in range(trials):
        b = float(rng.uniform(0.2, 3.0))
        c = float(rng.uniform(-3, 3))
        a = float(_rand_signed(rng, 1)[0])
        seqs = {
            "T": (lambda i: mat_from_dilation(DilationParam(b + 1.0 / i)).entries,
                  mat_from_dilation(DilationParam(b)), is_in_T),
            "H": (lambda i: mat_from_h(HParams(a + 1.0 / i, 5.0)).entries,
                  mat_from_h(HParams(a, 5.0)), is_in_H),
            "G": (lambda i: mat_from_abc(ConjugatedParams(a, b + 1.0 / i, c)).entries,
                  mat_from_abc(ConjugatedParams(a, b, c)), is_in_G),
            "J1": (lambda i: mat_from_abc(ConjugatedParams(b + 1.0 / i, b + 1.0 / i, c)).entries,
                   mat_from_abc(ConjugatedParams(b, b, c)), is_in_J1),
            "J2": (lambda i: mat_from_abc(ConjugatedParams(0.5, b + 1.0 / i, c)).entries,
                   mat_from_abc(ConjugatedParams(0.5, b, c)), is_in_J2),
        }
        for family, (seq, limit, member) in seqs.items():
            gap = float(np.max(np.abs(seq(idx[-1]) - limit.entries)))
            if gap > 0.1 or not member(limit):
                return CheckResult(
                    "closedness_limits", False, f"{family} limit rejected (gap {gap:.2e})"
                )
    return CheckResult("closedness_limits", True)


def run_group_suite(trials: int = 1000, seed: int = 0) -> list[CheckResult]:
    """Run every randomized group-law check; returns one result per check."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    children = iter(np.random.SeedSequence(seed).spawn(32))

    def rng():
        return np.random.default_rng(next(children))

    results = [
        _closure_check(rng(), family, trials) for family in ("T", "H", "G", "J1", "J2")
    ]
    results.append(_det_trace_check(rng(), trials))
    results.append(_difference_scaling_check(rng(), trials))
    results.append(_noninvariance_check(rng(), trials))
    results.append(_decompose_check(rng(), trials))
    results.append(_semidirect_check(rng(), trials))
    results.append(_free_action_check(rng(), trials, "J1"))
    results.append(_free_action_check(rng(), trials, "J2"))
    results.append(_witness_check(rng(), min(trials, 300)))
    results.append(_dilation_moves_check(rng(), min(trials, 300)))
    results.append(_components_check(rng(), min(trials, 200)))
    results.append(_closedness_check(rng(), min(trials, 50)))
    return results
