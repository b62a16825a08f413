"""Sign-agreement loss descent over candidate coefficient vectors.

Each restart draws a fresh unit-sphere theta, then repeats: sample a random
mini-batch, check the exact sign loss against the tolerance, and if not done
take one preconditioned step down the tanh surrogate of that loss. Dilations
act freely on candidates, so every step re-projects theta onto the unit
sphere (gauge fixing); the projection quantises the direction at 1e-10 so
that rescaled inputs land on bit-identical trajectories.

The batch-mean sign statistic uses a 1/b prefactor, making zero loss
attainable exactly when the whole batch satisfies one strict orientation;
the historical 2/b weighting stays available behind ``doubled_omega``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import DegenerateCandidateError
from .function_space import (
    CandidateConjecture,
    Dataset,
    FeatureBasis,
    canonical_key,
    feature_matrix,
    snap_rational,
)
from .verifier import VerificationReport, verify

GAUGE_QUANTUM = 1e-10
FD_STEP = 1e-5
METRIC_MODES = ("identity", "diagonal-feature-scale")
METRIC_FLOOR = 1e-8


@dataclass(frozen=True)
class OracleConfig:
    tol: float = 1e-3
    batch_size: int = 8
    emax: int = 40
    eta: float = 0.1
    kappa: float = 1.0
    metric_mode: str = "identity"
    restarts: int = 1
    seed: int = 0
    snap_denominator: int = 12
    doubled_omega: bool = False

    def __post_init__(self):
        if self.tol < 0:
            raise ValueError("tol must be nonnegative")
        if self.batch_size < 1 or self.emax < 1 or self.restarts < 1:
            raise ValueError("batch_size, emax and restarts must be positive")
        if self.eta <= 0 or self.kappa <= 0:
            raise ValueError("eta and kappa must be positive")
        if self.snap_denominator < 1:
            raise ValueError("snap_denominator must be at least 1")
        if self.metric_mode not in METRIC_MODES:
            raise ValueError(f"metric_mode must be one of {METRIC_MODES}")

    @property
    def prefactor(self) -> float:
        return 2.0 if self.doubled_omega else 1.0


@dataclass
class OracleRun:
    config: OracleConfig
    basis_id: str
    restart_index: int
    trajectory: list[tuple[int, int, float]]
    result: CandidateConjecture | None = None
    verification: VerificationReport | None = None
    diagnostics: str | None = None


@dataclass
class SearchResult:
    runs: list[OracleRun]
    emitted: list[OracleRun] = field(default_factory=list)

    def verified(self) -> list[OracleRun]:
        return [
            r
            for r in self.emitted
            if r.verification is not None and r.verification.status != "Falsified"
        ]


def _batch_phi(c: CandidateConjecture, batch) -> np.ndarray:
    rows = np.asarray(batch, dtype=np.float64)
    if rows.ndim == 1:
        rows = rows.reshape(1, -1)
    if rows.shape[0] == 0:
        raise ValueError("batch must be nonempty")
    return np.ascontiguousarray(feature_matrix(c.basis, rows))


def _theta(c: CandidateConjecture) -> np.ndarray:
    return np.concatenate([c.theta_f, c.theta_g])


def omega(c: CandidateConjecture, batch, doubled: bool = False) -> float:
    """Batch mean of sgn(f - g); sgn(0) counts as 0."""
    pref = 2.0 if doubled else 1.0
    return float(_kernels.sign_omega(_batch_phi(c, batch), _theta(c), pref))


def loss(c: CandidateConjecture, batch, doubled: bool = False) -> float:
    """(1 - omega^2)^2; zero exactly at a unanimous strict batch."""
    om = omega(c, batch, doubled)
    return (1.0 - om * om) ** 2


def smooth_loss(c: CandidateConjecture, batch, kappa: float,
                doubled: bool = False) -> float:
    """Same loss with sgn replaced by tanh(kappa * (f - g))."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    pref = 2.0 if doubled else 1.0
    _, sloss, _ = _kernels.surrogate_grad(_batch_phi(c, batch), _theta(c), kappa, pref)
    return float(sloss)


def _smooth_loss_theta(phi: np.ndarray, theta: np.ndarray, kappa: float,
                       pref: float) -> float:
    k = phi.shape[1]
    s = np.tanh(kappa * (phi @ (theta[:k] - theta[k:])))
    om = pref * float(s.sum()) / phi.shape[0]
    return (1.0 - om * om) ** 2


def gradient(c: CandidateConjecture, batch, kappa: float, step: float = FD_STEP,
             doubled: bool = False) -> np.ndarray:
    """Central finite-difference gradient of the smooth loss in theta."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    pref = 2.0 if doubled else 1.0
    phi = _batch_phi(c, batch)
    theta = _theta(c)
    grad = np.empty_like(theta)
    for i in range(theta.size):
        hi = theta.copy()
        lo = theta.copy()
        hi[i] += step
        lo[i] -= step
        grad[i] = (
            _smooth_loss_theta(phi, hi, kappa, pref)
            - _smooth_loss_theta(phi, lo, kappa, pref)
        ) / (2.0 * step)
    return grad


def gradient_analytic(c: CandidateConjecture, batch, kappa: float,
                      doubled: bool = False) -> np.ndarray:
    """Chain-rule gradient of the smooth loss; the descent workhorse."""
    pref = 2.0 if doubled else 1.0
    _, _, grad = _kernels.surrogate_grad(_batch_phi(c, batch), _theta(c), kappa, pref)
    return grad


def gauge_fix(theta: np.ndarray) -> np.ndarray:
    """Project onto the unit sphere, quotienting positive dilations.

    The direction is quantised before normalising so theta and lambda*theta
    (lambda > 0) map to the same representative bit-for-bit.
    """
    theta = np.asarray(theta, dtype=np.float64)
    scale = float(np.max(np.abs(theta)))
    if scale == 0.0 or not math.isfinite(scale):
        raise ValueError("cannot gauge-fix a zero or non-finite vector")
    q = np.round(theta / scale / GAUGE_QUANTUM) * GAUGE_QUANTUM
    return q / math.sqrt(float(np.sum(q * q)))


def step(theta: np.ndarray, grad: np.ndarray, config: OracleConfig,
         batch_phi: np.ndarray | None = None) -> np.ndarray:
    """One preconditioned descent step followed by gauge projection."""
    grad = np.asarray(grad, dtype=np.float64)
    if not np.all(np.isfinite(grad)):
        raise ValueError("non-finite gradient")
    if config.metric_mode == "diagonal-feature-scale":
        if batch_phi is None:
            raise ValueError("the diagonal metric needs the batch features")
        diag = np.maximum((batch_phi * batch_phi).mean(axis=0), METRIC_FLOOR)
        grad = grad / np.concatenate([diag, diag])
    return gauge_fix(theta - config.eta * grad)


def _restart_seed(config: OracleConfig, restart_index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=config.seed, spawn_key=(restart_index,))


def run_oracle(
    config: OracleConfig,
    dataset: Dataset,
    basis: FeatureBasis,
    restart_index: int = 0,
    initial_theta: np.ndarray | None = None,
    verify_domain=None,
    verify_threads: int = 1,
) -> OracleRun:
    """One seeded descent; emits a snapped, oriented, verified candidate."""
    if len(dataset) == 0:
        raise ValueError("dataset must be nonempty")
    run = OracleRun(config, basis.basis_id, restart_index, trajectory=[])
    rng = np.random.default_rng(_restart_seed(config, restart_index))
    phi_all = np.ascontiguousarray(feature_matrix(basis, dataset.rows))
    n, k = phi_all.shape
    bsz = min(config.batch_size, n)

    theta = rng.normal(size=2 * k) if initial_theta is None else np.asarray(
        initial_theta, dtype=np.float64
    )
    theta = gauge_fix(theta)

    success_omega = None
    for epoch in range(1, config.emax + 1):
        for inner in range(1, config.batch_size + 1):
            idx = rng.choice(n, size=bsz, replace=False)
            phi = phi_all[idx]
            om = _kernels.sign_omega(phi, theta, config.prefactor)
            cur_loss = (1.0 - om * om) ** 2
            run.trajectory.append((epoch, inner, cur_loss))
            if cur_loss <= config.tol:
                success_omega = om
                break
            _, _, grad = _kernels.surrogate_grad(
                phi, theta, config.kappa, config.prefactor
            )
            if not np.all(np.isfinite(grad)):
                run.diagnostics = (
                    f"aborted: non-finite gradient at epoch {epoch} step {inner}"
                )
                return run
            theta = step(theta, grad, config, phi)
        if success_omega is not None:
            break
    if success_omega is None:
        run.diagnostics = "exhausted emax without reaching tol"
        return run

    if success_omega > 0:  # descent settled on f > g; emit as f < g
        theta = np.concatenate([theta[k:], theta[:k]])
    exact_f, _ = snap_rational(theta[:k], config.snap_denominator)
    exact_g, _ = snap_rational(theta[k:], config.snap_denominator)
    if (
        all(x == 0 for x in exact_f)
        or all(x == 0 for x in exact_g)
        or all(f == g for f, g in zip(exact_f, exact_g))
    ):
        run.diagnostics = "discarded: degenerate candidate after snapping"
        return run
    candidate = CandidateConjecture(
        basis=basis,
        theta_f=np.array([float(x) for x in exact_f]),
        theta_g=np.array([float(x) for x in exact_g]),
        relation="strict",
        exact_f=exact_f,
        exact_g=exact_g,
    )
    run.result = candidate
    run.verification = verify(
        candidate, dataset if verify_domain is None else verify_domain,
        threads=verify_threads,
    )
    return run


def run_search(
    config: OracleConfig,
    dataset: Dataset,
    basis: FeatureBasis,
    threads: int = 1,
    verify_domain=None,
) -> SearchResult:
    """All restarts, merged in restart order and deduplicated by canonical key."""
    indices = range(config.restarts)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            runs = list(pool.map(
                lambda r: run_oracle(config, dataset, basis, restart_index=r,
                                     verify_domain=verify_domain),
                indices,
            ))
    else:
        runs = [
            run_oracle(config, dataset, basis, restart_index=r,
                       verify_domain=verify_domain)
            for r in indices
        ]
    result = SearchResult(runs=runs)
    seen: set[tuple[str, str]] = set()
    for run in runs:
        if run.result is None:
            continue
        try:
            key = (canonical_key(run.result), run.result.relation)
        except DegenerateCandidateError:
            continue
        if key in seen:
            continue
        seen.add(key)
        result.emitted.append(run)
    return result


def write_trajectory_csv(path, run: OracleRun) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("epoch,step,loss\n")
        for epoch, inner, value in run.trajectory:
            fh.write(f"{epoch},{inner},{value!r}\n")


def best_so_far(trajectory: Sequence[tuple[int, int, float]]) -> list[float]:
    out = []
    best = math.inf
    for _, _, value in trajectory:
        best = min(best, value)
        out.append(best)
    return out
