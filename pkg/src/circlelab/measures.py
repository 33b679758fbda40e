"""Grid measures on the circle: Ulam pushforward, stationary solver, distances."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .maps import apply_map
from .system import GeneratorSystem

SUBSAMPLES_PER_BIN = 16
DEFAULT_BINS = 512
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 100_000


@dataclass(frozen=True)
class GridMeasure:
    """Probability measure on a uniform bin grid: mass >= 0, total 1."""

    mass: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mass, dtype=np.float64)
        if m.ndim != 1 or m.size < 2:
            raise ValueError("GridMeasure needs a 1-d mass vector with >= 2 bins")
        if np.any(m < 0.0):
            raise ValueError("GridMeasure mass entries must be non-negative")
        if abs(float(m.sum()) - 1.0) > 1e-10:
            raise ValueError(f"GridMeasure mass must sum to 1 within 1e-10, got {m.sum()!r}")
        object.__setattr__(self, "mass", m)

    @property
    def bins(self) -> int:
        return self.mass.size

    @property
    def bin_centers(self) -> np.ndarray:
        return (np.arange(self.bins) + 0.5) / self.bins


def uniform_measure(bins: int) -> GridMeasure:
    return GridMeasure(np.full(bins, 1.0 / bins))


def dirac_measure(bins: int, theta: float) -> GridMeasure:
    mass = np.zeros(bins)
    mass[int((theta % 1.0) * bins) % bins] = 1.0
    return GridMeasure(mass)


@dataclass(frozen=True)
class ConvergenceReport:
    iterations: int
    gap: float
    converged: bool


def _subsample_grid(bins: int) -> np.ndarray:
    """Stratified subsample points, shape (bins, SUBSAMPLES_PER_BIN)."""
    s = (np.arange(SUBSAMPLES_PER_BIN) + 0.5) / SUBSAMPLES_PER_BIN
    return (np.arange(bins)[:, None] + s[None, :]) / bins


def ulam_matrix(sys: GeneratorSystem, bins: int, generator: Optional[int] = None) -> np.ndarray:
    """Column-stochastic transfer matrix T with (T m)_j = pushforward mass.

    Each source bin is represented by 16 stratified subsample points; the
    image of each point deposits weight_i(point)/16 of the source mass into
    its target bin. ``generator`` restricts to a single map with weight 1.
    """
    pts = _subsample_grid(bins)
    flat = pts.ravel()
    T = np.zeros((bins, bins))
    src = np.repeat(np.arange(bins), SUBSAMPLES_PER_BIN)
    if generator is None:
        weights = sys.weights_at(flat)
        items = [(g, weights[i]) for i, g in enumerate(sys.generators)]
    else:
        items = [(sys.generators[generator], np.ones(flat.size))]
    for g, w in items:
        img = np.clip((apply_map(g, flat) * bins).astype(np.int64), 0, bins - 1)
        np.add.at(T, (img, src), w / SUBSAMPLES_PER_BIN)
    return T


def apply_diffusion(sys: GeneratorSystem, m: GridMeasure) -> GridMeasure:
    """Pushforward under the averaged random map (adjoint diffusion step)."""
    out = ulam_matrix(sys, m.bins) @ m.mass
    return GridMeasure(out / out.sum())


def stationary_measure(
    sys: GeneratorSystem,
    bins: int = DEFAULT_BINS,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
):
    """Power iteration of the Ulam matrix from the uniform measure.

    Stops when the successive-iterate total-variation gap drops to ``tol``;
    non-convergence is reported, not raised.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    T = ulam_matrix(sys, bins)
    m = np.full(bins, 1.0 / bins)
    gap = np.inf
    iterations = 0
    for iterations in range(1, max_iter + 1):
        m_next = T @ m
        m_next /= m_next.sum()
        gap = 0.5 * float(np.abs(m_next - m).sum())
        m = m_next
        if gap <= tol:
            break
    return GridMeasure(m), ConvergenceReport(iterations, gap, gap <= tol)


def measure_distance(m1: GridMeasure, m2: GridMeasure, kind: str = "wasserstein1_circle") -> float:
    """Total variation, or circular W1 by the rotation-optimal CDF shift.

    W1 = min_s (1/bins) * sum_b |CDF1_b - CDF2_b - s|, minimized at the
    median of the CDF difference.
    """
    if m1.bins != m2.bins:
        raise ValueError(f"bin-count mismatch: {m1.bins} vs {m2.bins}")
    if kind == "total_variation":
        return 0.5 * float(np.abs(m1.mass - m2.mass).sum())
    if kind == "wasserstein1_circle":
        diff = np.cumsum(m1.mass - m2.mass)
        s = np.median(diff)
        return float(np.abs(diff - s).sum()) / m1.bins
    raise ValueError(f"unknown distance kind {kind!r}")


@dataclass(frozen=True)
class InvariantMeasureReport:
    """Result of the per-generator invariance probe.

    ``measure`` is set iff every generator's pushforward residual
    ||(g_i)_* m - m||_TV is within tolerance.
    """

    measure: Optional[GridMeasure]
    residuals: np.ndarray
    tol: float

    @property
    def found(self) -> bool:
        return self.measure is not None


def detect_invariant_measure(
    sys: GeneratorSystem, bins: int = DEFAULT_BINS, tol: float = 1e-2
) -> InvariantMeasureReport:
    """Fixed point of the averaged pushforward, then per-generator TV residuals.

    A measure invariant under every generator separately (not just on
    average) must be a fixed point of the average, so the averaged fixed
    point is the only candidate.
    """
    if not sys.has_constant_weights:
        raise ValueError("invariant-measure detection requires constant weights")
    candidate, _ = stationary_measure(sys, bins=bins)
    residuals = np.empty(len(sys))
    for i in range(len(sys)):
        push = ulam_matrix(sys, bins, generator=i) @ candidate.mass
        push /= push.sum()
        residuals[i] = 0.5 * float(np.abs(push - candidate.mass).sum())
    ok = bool(np.all(residuals <= tol))
    return InvariantMeasureReport(candidate if ok else None, residuals, tol)


def write_measure_csv(m: GridMeasure, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bin_center", "mass"])
        for c, x in zip(m.bin_centers, m.mass):
            w.writerow([repr(float(c)), repr(float(x))])


def measure_to_json(m: GridMeasure) -> dict:
    return {"bins": m.bins, "mass": [float(x) for x in m.mass]}


def write_measure_json(m: GridMeasure, path) -> None:
    with open(path, "w") as fh:
        json.dump(measure_to_json(m), fh)
