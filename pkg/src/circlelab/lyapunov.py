"""Lyapunov estimators, the dichotomy classifier, and basin probabilities."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .maps import circle_dist, derivative
from .measures import (
    GridMeasure,
    _subsample_grid,
    detect_invariant_measure,
    measure_distance,
    stationary_measure,
    ulam_matrix,
)
from .system import GeneratorSystem, SymmetryReport, check_symmetry
from .trajectory import derive_seed, empirical_measure, indexed_map, simulate_trajectory


@dataclass(frozen=True)
class LyapunovEstimate:
    value: float
    std_error: float
    n_paths: int
    horizon: int
    method: str

    def __post_init__(self):
        if self.std_error < 0.0:
            raise ValueError("std_error must be >= 0")
        if self.method == "trajectory" and self.n_paths < 2:
            raise ValueError("trajectory estimates need n_paths >= 2")


def estimate_lyapunov_trajectory(
    sys: GeneratorSystem,
    start: float,
    horizon: int,
    n_paths: int,
    master_seed: int,
    threads: int = 1,
    return_per_path: bool = False,
):
    """Mean of L_horizon/horizon over an ensemble with derived per-path seeds."""
    if horizon < 100:
        raise ValueError("horizon must be >= 100")
    if n_paths < 2:
        raise ValueError("n_paths must be >= 2")

    def one(i):
        traj = simulate_trajectory(sys, start, horizon, derive_seed(master_seed, i))
        return float(traj.cocycle[-1]) / horizon

    vals = np.array(indexed_map(one, n_paths, threads))
    est = LyapunovEstimate(
        value=float(vals.mean()),
        std_error=float(vals.std(ddof=1) / math.sqrt(n_paths)),
        n_paths=n_paths,
        horizon=horizon,
        method="trajectory",
    )
    return (est, vals) if return_per_path else est


def _integrand_samples(sys: GeneratorSystem, bins: int) -> np.ndarray:
    """f(theta) = sum_i w_i(theta) log derivative(g_i, theta) on the Ulam
    subsample grid; shape (bins, SUBSAMPLES_PER_BIN)."""
    pts = _subsample_grid(bins)
    flat = pts.ravel()
    w = sys.weights_at(flat)
    f = np.zeros_like(flat)
    for i, g in enumerate(sys.generators):
        f += w[i] * np.log(derivative(g, flat))
    return f.reshape(pts.shape)


def lyapunov_from_formula(sys: GeneratorSystem, m: GridMeasure) -> float:
    """Integral of the mean log-derivative against a (near-)stationary measure."""
    f = _integrand_samples(sys, m.bins)
    return float(np.dot(m.mass, f.mean(axis=1)))


def formula_quadrature_bound(sys: GeneratorSystem, m: GridMeasure) -> float:
    """Mass-weighted half-spread of the integrand inside each bin; bounds the
    within-bin quadrature error of lyapunov_from_formula."""
    f = _integrand_samples(sys, m.bins)
    return float(np.dot(m.mass, 0.5 * (f.max(axis=1) - f.min(axis=1))))


@dataclass(frozen=True)
class DichotomyParams:
    bins: int = 512
    stationary_tol: float = 1e-8
    max_iter: int = 100_000
    invariance_tol: float = 1e-2
    start: float = 0.17
    horizon: int = 10_000
    n_paths: int = 100
    ue_steps: int = 1_000_000
    ue_starts: int = 10
    ue_spread_tol: float = 0.03
    stat_emp_tol: float = 0.02
    symmetry_tol: float = 1e-10
    master_seed: int = 0
    threads: int = 1

    def thresholds(self) -> dict:
        return {
            "invariance_tol": self.invariance_tol,
            "ue_spread_tol": self.ue_spread_tol,
            "stat_emp_tol": self.stat_emp_tol,
            "symmetry_tol": self.symmetry_tol,
        }


@dataclass(frozen=True)
class DichotomyVerdict:
    """Classifier outcome with all the evidence scalars behind it."""

    verdict: str
    symmetry: Optional[SymmetryReport]
    invariance_residuals: Optional[np.ndarray]
    invariant_measure: Optional[GridMeasure]
    lyapunov: Optional[LyapunovEstimate]
    ue_spread: Optional[float]
    stationary_empirical_w1: Optional[float]
    stationary_converged: Optional[bool]
    stationary: Optional[GridMeasure] = None
    lyapunov_per_path: Optional[np.ndarray] = None
    thresholds: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "symmetric": None if self.symmetry is None else self.symmetry.is_symmetric,
            "symmetry_witness": None if self.symmetry is None else self.symmetry.witness,
            "invariance_residuals": (
                None
                if self.invariance_residuals is None
                else [float(x) for x in self.invariance_residuals]
            ),
            "lyapunov_value": None if self.lyapunov is None else self.lyapunov.value,
            "lyapunov_std_error": None if self.lyapunov is None else self.lyapunov.std_error,
            "ue_spread": self.ue_spread,
            "stationary_empirical_w1": self.stationary_empirical_w1,
            "stationary_converged": self.stationary_converged,
            "thresholds": dict(self.thresholds),
        }


def classify_dichotomy(sys: GeneratorSystem, params: DichotomyParams = DichotomyParams()) -> DichotomyVerdict:
    """The executable dichotomy.

    Pipeline: symmetry check, per-generator invariance probe, ensemble
    Lyapunov estimate, unique-ergodicity probe (empirical measures from
    equispaced starts vs. each other and vs. the Ulam stationary measure).
    An invariant measure short-circuits; the negative-exponent verdict
    additionally requires the unique-ergodicity probe to pass.
    """
    symmetry = check_symmetry(sys, params.symmetry_tol) if sys.has_constant_weights else None
    symmetric = symmetry is not None and symmetry.is_symmetric

    invariance_residuals = None
    invariant_measure = None
    if sys.has_constant_weights:
        inv = detect_invariant_measure(sys, bins=params.bins, tol=params.invariance_tol)
        invariance_residuals = inv.residuals
        invariant_measure = inv.measure
        # The invariant branch of the dichotomy is only asserted for
        # symmetric systems; for non-symmetric ones the residuals are
        # recorded as evidence and classification continues.
        if inv.found and symmetric:
            return DichotomyVerdict(
                verdict="InvariantMeasure",
                symmetry=symmetry,
                invariance_residuals=invariance_residuals,
                invariant_measure=invariant_measure,
                lyapunov=None,
                ue_spread=None,
                stationary_empirical_w1=None,
                stationary_converged=None,
                thresholds=params.thresholds(),
            )

    est, per_path = estimate_lyapunov_trajectory(
        sys,
        params.start,
        params.horizon,
        params.n_paths,
        params.master_seed,
        threads=params.threads,
        return_per_path=True,
    )

    stat, conv = stationary_measure(
        sys, bins=params.bins, tol=params.stationary_tol, max_iter=params.max_iter
    )
    empiricals = []
    for s in range(params.ue_starts):
        traj = simulate_trajectory(
            sys, s / params.ue_starts, params.ue_steps, derive_seed(params.master_seed, 10_000 + s)
        )
        empiricals.append(empirical_measure(traj, params.bins))
    spread = 0.0
    for i in range(len(empiricals)):
        for j in range(i + 1, len(empiricals)):
            spread = max(spread, measure_distance(empiricals[i], empiricals[j]))
    stat_emp = max(measure_distance(stat, e) for e in empiricals)

    negative = est.value + 3.0 * est.std_error < 0.0
    ue_pass = spread < params.ue_spread_tol and stat_emp < params.stat_emp_tol
    if negative and ue_pass:
        verdict = "NegativeExponentUniquelyErgodic"
    elif symmetric:
        verdict = "Inconclusive"
    else:
        verdict = "NonSymmetricInconclusive"
    return DichotomyVerdict(
        verdict=verdict,
        symmetry=symmetry,
        invariance_residuals=invariance_residuals,
        invariant_measure=invariant_measure,
        lyapunov=est,
        ue_spread=spread,
        stationary_empirical_w1=stat_emp,
        stationary_converged=conv.converged,
        stationary=stat,
        lyapunov_per_path=per_path,
        thresholds=params.thresholds(),
    )


@dataclass(frozen=True)
class BasinEstimate:
    """Monte Carlo attraction probabilities with Wilson 95% intervals."""

    attractors: tuple
    counts: np.ndarray
    n_paths: int
    ci_low: np.ndarray
    ci_high: np.ndarray

    @property
    def probabilities(self) -> np.ndarray:
        return self.counts / self.n_paths

    @property
    def unresolved(self) -> float:
        return float(self.n_paths - self.counts.sum()) / self.n_paths


def _wilson_interval(k: int, n: int, z: float = 1.959963984540054):
    p = k / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom
    return center - half, center + half


def _covering_arc(points: np.ndarray) -> float:
    """Length of the smallest arc containing all points."""
    if points.size <= 1:
        return 0.0
    s = np.sort(points % 1.0)
    gaps = np.diff(np.concatenate([s, [s[0] + 1.0]]))
    return float(1.0 - gaps.max())


def _label_path(points: np.ndarray, attractors, capture_radius: float) -> int:
    """Index of the capturing attractor, or -1 for unresolved.

    Primary criterion: the last 10% of points lie within capture_radius of
    the attractor. When several attractors qualify, the trail must in
    addition show monotone-shrinking covering-arc diameters over its four
    quarters, and the one nearest to the final point wins.
    """
    n = len(points) - 1
    trail = points[-max(1, n // 10):]
    candidates = [
        j
        for j, a in enumerate(attractors)
        if float(np.max(circle_dist(trail, a))) <= capture_radius
    ]
    if len(candidates) == 1:
        return candidates[0]
    if len(candidates) > 1:
        quarters = np.array_split(trail, 4)
        diams = [_covering_arc(q) for q in quarters if q.size]
        if all(d2 <= d1 for d1, d2 in zip(diams, diams[1:])):
            final = float(points[-1])
            return min(candidates, key=lambda j: circle_dist(final, attractors[j]))
    return -1


def estimate_basin_probabilities(
    sys: GeneratorSystem,
    attractors: Sequence[float],
    start: float,
    horizon: int,
    n_paths: int,
    capture_radius: float,
    master_seed: int,
    threads: int = 1,
) -> BasinEstimate:
    if not attractors:
        raise ValueError("attractors: the declared attractor list must not be empty")
    if capture_radius <= 0.0:
        raise ValueError("capture_radius must be positive")
    attractors = tuple(a % 1.0 for a in attractors)

    def one(i):
        traj = simulate_trajectory(sys, start, horizon, derive_seed(master_seed, i))
        return _label_path(traj.points, attractors, capture_radius)

    labels = np.array(indexed_map(one, n_paths, threads))
    counts = np.array([(labels == j).sum() for j in range(len(attractors))], dtype=float)
    lows, highs = [], []
    for k in counts:
        lo, hi = _wilson_interval(int(k), n_paths)
        lows.append(lo)
        highs.append(hi)
    return BasinEstimate(
        attractors=attractors,
        counts=counts,
        n_paths=n_paths,
        ci_low=np.array(lows),
        ci_high=np.array(highs),
    )
