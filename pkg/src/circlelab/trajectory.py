"""Random-composition trajectories and the log-derivative cocycle."""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .maps import apply_map, circle_dist
from .measures import GridMeasure
from .system import GeneratorSystem

_MASK64 = 0xFFFFFFFFFFFFFFFF


def derive_seed(master_seed: int, index: int) -> int:
    """Per-path seed: splitmix64 finalizer applied to master_seed + index.

    Paths keep their identity under any ensemble scheduling, so reductions
    in path-index order are independent of thread count.
    """
    z = (int(master_seed) + int(index)) & _MASK64
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def indexed_map(fn, count: int, threads: int = 1) -> list:
    """[fn(0), ..., fn(count-1)], optionally on a thread pool, order preserved."""
    if threads is None or threads <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, range(count)))


@dataclass(frozen=True)
class TrajectoryRecord:
    """One sampled random composition.

    ``points`` has length n+1; ``cocycle`` is the running sum of
    ``log_increments`` (L_0 = 0), accumulated in index order.
    """

    seed: int
    start: float
    indices: np.ndarray
    points: np.ndarray
    log_increments: np.ndarray
    cocycle: np.ndarray

    @property
    def n(self) -> int:
        return len(self.indices)

    def shift(self, m: int) -> "TrajectoryRecord":
        """The shifted trajectory sigma^m: drop the first m steps and re-base."""
        if not 0 <= m <= self.n:
            raise ValueError(f"shift offset {m} outside [0, {self.n}]")
        inc = self.log_increments[m:]
        return TrajectoryRecord(
            seed=self.seed,
            start=float(self.points[m]),
            indices=self.indices[m:],
            points=self.points[m:],
            log_increments=inc,
            cocycle=np.concatenate(([0.0], np.cumsum(inc))),
        )


def simulate_trajectory(sys: GeneratorSystem, start: float, n: int, seed: int) -> TrajectoryRecord:
    """n random steps from ``start``; deterministic in ``seed``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    codes, mparams, wkind, wparams = _kernels.pack_system(sys)
    uniforms = np.random.default_rng(seed).random(n)
    indices = np.empty(n, dtype=np.int64)
    points = np.empty(n + 1, dtype=np.float64)
    logd = np.empty(n, dtype=np.float64)
    _kernels.trajectory_kernel(
        codes, mparams, wkind, wparams, float(start), uniforms, indices, points, logd
    )
    return TrajectoryRecord(
        seed=int(seed),
        start=float(start) % 1.0,
        indices=indices,
        points=points,
        log_increments=logd,
        cocycle=np.concatenate(([0.0], np.cumsum(logd))),
    )


def cocycle_identity_holds(traj: TrajectoryRecord, m: int, n: int) -> bool:
    """L_{m+n} = L_m + L_n(sigma^m), with the right side evaluated by resuming
    the stored running sum at L_m, the summation order that makes the
    identity exact in floating point."""
    acc = float(traj.cocycle[m])
    for l in traj.log_increments[m : m + n]:
        acc = acc + float(l)
    return acc == float(traj.cocycle[m + n])


def verify_record(traj: TrajectoryRecord, sys: GeneratorSystem, tol: float = 1e-12) -> float:
    """max circle distance between points[j+1] and apply(g_{i_j}, points[j])."""
    worst = 0.0
    for i, g in enumerate(sys.generators):
        mask = traj.indices == i
        if not np.any(mask):
            continue
        img = apply_map(g, traj.points[:-1][mask])
        worst = max(worst, float(np.max(circle_dist(img, traj.points[1:][mask]))))
    if worst > tol:
        raise AssertionError(f"trajectory inconsistent with system: gap {worst}")
    return worst


def birkhoff_average(traj: TrajectoryRecord, f) -> float:
    """(1/n) sum_{j=1..n} f(points[j]) for a vectorized observable f."""
    if traj.n < 1:
        raise ValueError("birkhoff_average needs at least one step")
    return float(np.mean(f(traj.points[1:])))


def empirical_measure(traj: TrajectoryRecord, bins: int) -> GridMeasure:
    """Occupation histogram of points[1..n] on a uniform bin grid, mass 1."""
    if bins < 2:
        raise ValueError("bins must be >= 2")
    if traj.n < 1:
        raise ValueError("empirical_measure needs at least one step")
    idx = np.clip((traj.points[1:] * bins).astype(np.int64), 0, bins - 1)
    counts = np.bincount(idx, minlength=bins).astype(np.float64)
    return GridMeasure(counts / counts.sum())


# Named observables (serializable experiment vocabulary).

def fourier_sin(k: int):
    return lambda theta: np.sin(2.0 * np.pi * k * np.asarray(theta))


def fourier_cos(k: int):
    return lambda theta: np.cos(2.0 * np.pi * k * np.asarray(theta))


def arc_indicator(a: float, b: float):
    """Indicator of the arc [a, b) on R/Z (wraps when a > b)."""
    a, b = a % 1.0, b % 1.0
    if a <= b:
        return lambda theta: ((np.asarray(theta) >= a) & (np.asarray(theta) < b)).astype(float)
    return lambda theta: ((np.asarray(theta) >= a) | (np.asarray(theta) < b)).astype(float)


def distance_to(p: float):
    return lambda theta: circle_dist(theta, p % 1.0)


def observable_from_config(obj, where: str = "observable"):
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ValueError(f"{where}: expected one of fourier_sin/fourier_cos/arc/distance_to")
    (kind, arg), = obj.items()
    if kind == "fourier_sin":
        return fourier_sin(int(arg))
    if kind == "fourier_cos":
        return fourier_cos(int(arg))
    if kind == "arc":
        if not (isinstance(arg, (list, tuple)) and len(arg) == 2):
            raise ValueError(f"{where}.arc: expected [a, b]")
        return arc_indicator(float(arg[0]), float(arg[1]))
    if kind == "distance_to":
        return distance_to(float(arg))
    raise ValueError(f"{where}: unknown observable {kind!r}")


def write_trajectory_csv(traj: TrajectoryRecord, path) -> None:
    """Columns: step, index (generator applied at this step; -1 on the last
    row), theta, cocycle."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "index", "theta", "cocycle"])
        for j in range(traj.n + 1):
            idx = int(traj.indices[j]) if j < traj.n else -1
            w.writerow([j, idx, repr(float(traj.points[j])), repr(float(traj.cocycle[j]))])
