"""Drifted Brownian motion on the hyperbolic upper half-plane.

The generator is the leafwise hyperbolic Laplacian plus kappa times the
vertical field y*d/dy, with Brownian intensity 2; in coordinates the lifted
path solves dx = sqrt(2) y dW1, dy = kappa y dt + sqrt(2) y dW2. Integration
happens in (x, u = log y): u has exact Gaussian increments with drift
(kappa - 1) dt, which keeps y = e^u positive and makes the vertical
log-coordinate (the holonomy cocycle) free of discretization bias.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .lyapunov import LyapunovEstimate
from .trajectory import derive_seed, indexed_map

_XI_BLOCK = 1_000_000


@dataclass(frozen=True)
class HyperbolicParams:
    """kappa: vertical drift coefficient; dt: Euler step; T: horizon;
    delta: discretization time for the path LLN; A: cylinder period of the
    identification z ~ e^A z (enters only through the automorphic v, xi
    coordinates)."""

    kappa: float
    dt: float
    T: float
    delta: float = 0.1
    A: float = 1.0

    def __post_init__(self):
        if self.dt <= 0.0 or self.T <= 0.0 or self.delta <= 0.0:
            raise ValueError("dt, T, delta must be positive")
        if self.dt > self.delta / 100.0 * (1.0 + 1e-12):
            raise ValueError(f"dt must satisfy dt <= delta/100, got dt={self.dt}, delta={self.delta}")
        if self.T < 100.0 * self.delta * (1.0 - 1e-12):
            raise ValueError(f"T must satisfy T >= 100*delta, got T={self.T}, delta={self.delta}")

    @property
    def n_steps(self) -> int:
        n = round(self.T / self.dt)
        if abs(n * self.dt - self.T) > 1e-9 * max(1.0, self.T):
            raise ValueError("T must be an integer multiple of dt")
        return n


@dataclass(frozen=True)
class HyperbolicPath:
    """A recorded path: times t, horizontal coordinate x, vertical
    log-coordinate u = log y, and per-interval scaled horizontal increments
    (x_{k+1} - x_k) * exp(-u_k) accumulated during integration.

    The scaled increments stay representable for any drift; the raw x array
    loses the increments once e^u drops below the float spacing of x, and
    y = e^u underflows to 0.0 beyond u < -745 (positive in exact
    arithmetic).
    """

    t: np.ndarray
    x: np.ndarray
    u: np.ndarray
    scaled_dx: np.ndarray
    kappa: float
    dt: float
    seed: Optional[int]

    @property
    def T(self) -> float:
        return float(self.t[-1])

    @property
    def y(self) -> np.ndarray:
        return np.exp(self.u)

    @property
    def v(self) -> np.ndarray:
        return self.x / np.exp(self.u)

    @property
    def xi(self) -> np.ndarray:
        return arcsinh_formula(self.v)


def arcsinh_formula(v) -> np.ndarray:
    """log(v + sqrt(1 + v^2)) evaluated stably through |v| and the sign."""
    v = np.asarray(v, dtype=float)
    av = np.abs(v)
    with np.errstate(over="ignore"):
        body = np.where(av > 1e150, np.log(np.maximum(av, 1e-300)) + math.log(2.0), np.log(av + np.sqrt(1.0 + av * av)))
    return np.sign(v) * body


def simulate_hyperbolic_path(
    params: HyperbolicParams,
    start=(0.0, 1.0),
    seed: Optional[int] = 0,
    record_stride: int = 1,
    normals: Optional[np.ndarray] = None,
) -> HyperbolicPath:
    """Euler path in (x, u); the u channel is distributionally exact.

    ``normals`` (shape (n_steps, 2), columns = x and u channels) overrides
    the seeded draw (used for coupled-noise experiments).
    """
    x0, y0 = float(start[0]), float(start[1])
    if y0 <= 0.0:
        raise ValueError("start must have y > 0")
    n = params.n_steps
    if record_stride < 1 or n % record_stride:
        raise ValueError("record_stride must divide the step count")
    if normals is None:
        normals = np.random.default_rng(seed).standard_normal((n, 2))
    elif normals.shape != (n, 2):
        raise ValueError(f"normals must have shape ({n}, 2)")
    sq = math.sqrt(2.0 * params.dt)
    du = (params.kappa - 1.0) * params.dt + sq * normals[:, 1]
    u_full = np.empty(n + 1)
    u_full[0] = math.log(y0)
    np.cumsum(du, out=u_full[1:])
    u_full[1:] += u_full[0]

    u_rec = u_full[::record_stride]
    n_rec = n // record_stride
    # Horizontal increments scaled to each recorded interval's start height;
    # the raw x array overflows to inf once e^u exceeds float range (u > 709),
    # mirroring the underflow note on the type. The u channel never does.
    with np.errstate(over="ignore", invalid="ignore"):
        anchors = np.repeat(u_rec[:-1], record_stride)
        scaled = sq * np.exp(u_full[:-1] - anchors) * normals[:, 0]
        scaled_dx = scaled.reshape(n_rec, record_stride).sum(axis=1)

        dx = scaled * np.exp(anchors)
        x_full = np.empty(n + 1)
        x_full[0] = x0
        np.cumsum(dx, out=x_full[1:])
        x_full[1:] += x0

    t = np.arange(n_rec + 1) * (params.dt * record_stride)
    return HyperbolicPath(
        t=t,
        x=x_full[::record_stride].copy(),
        u=u_rec.copy(),
        scaled_dx=scaled_dx,
        kappa=params.kappa,
        dt=params.dt,
        seed=None if seed is None else int(seed),
    )


def simulate_hyperbolic_ensemble(
    params: HyperbolicParams,
    start=(0.0, 1.0),
    n_paths: int = 2,
    master_seed: int = 0,
    record_stride: int = 1,
    threads: int = 1,
) -> list:
    return indexed_map(
        lambda i: simulate_hyperbolic_path(
            params, start, derive_seed(master_seed, i), record_stride
        ),
        n_paths,
        threads,
    )


def leafwise_lyapunov(paths: Sequence[HyperbolicPath]) -> LyapunovEstimate:
    """Mean and standard error of (u_T - u_0)/T over the ensemble."""
    if len(paths) < 2:
        raise ValueError("need an ensemble of at least 2 paths")
    T = paths[0].T
    if any(abs(p.T - T) > 1e-9 * max(1.0, T) for p in paths):
        raise ValueError("all paths must share the same horizon T")
    vals = np.array([(p.u[-1] - p.u[0]) / T for p in paths])
    return LyapunovEstimate(
        value=float(vals.mean()),
        std_error=float(vals.std(ddof=1) / math.sqrt(len(vals))),
        n_paths=len(paths),
        horizon=len(paths[0].t) - 1,
        method="trajectory",
    )


def simulate_v_process(
    params: HyperbolicParams,
    v0: float,
    seed: int,
    mode: str = "direct",
    record_stride: int = 1,
):
    """The slope process v = x/y: either its own Euler SDE ("direct") or the
    ratio of a simulated (x, y) path ("from_xy"). Returns (t, v)."""
    n = params.n_steps
    if record_stride < 1 or n % record_stride:
        raise ValueError("record_stride must divide the step count")
    if mode == "from_xy":
        path = simulate_hyperbolic_path(params, (v0, 1.0), seed, record_stride)
        return path.t, path.v
    if mode != "direct":
        raise ValueError(f"unknown v-process mode {mode!r}")
    z = np.random.default_rng(seed).standard_normal(n)
    out = np.empty(n)
    _v_path_kernel(float(v0), 2.0 - params.kappa, params.dt, z, out)
    v = np.concatenate(([v0], out))[::record_stride]
    t = np.arange(v.size) * (params.dt * record_stride)
    return t, v


def v_final_ensemble(
    params: HyperbolicParams,
    v0: float,
    n_paths: int,
    master_seed: int,
    mode: str = "direct",
    threads: int = 1,
) -> np.ndarray:
    """Terminal values v_T over an ensemble with derived per-path seeds."""
    n = params.n_steps

    if mode == "direct":
        def one(i):
            z = np.random.default_rng(derive_seed(master_seed, i)).standard_normal(n)
            return _kernels.v_euler_kernel(float(v0), 2.0 - params.kappa, params.dt, z)
    elif mode == "from_xy":
        sq = math.sqrt(2.0 * params.dt)
        drift = (params.kappa - 1.0) * params.dt

        def one(i):
            # Same draws and update as simulate_hyperbolic_path from (v0, 1),
            # keeping only x_T / y_T.
            z = np.random.default_rng(derive_seed(master_seed, i)).standard_normal((n, 2))
            u = np.cumsum(drift + sq * z[:, 1])
            u_prev = np.concatenate(([0.0], u[:-1]))
            x_T = v0 + float(np.cumsum(sq * np.exp(u_prev) * z[:, 0])[-1])
            return x_T / math.exp(u[-1])
    else:
        raise ValueError(f"unknown v-process mode {mode!r}")
    return np.array(indexed_map(one, n_paths, threads))


def _v_path_kernel(v0, two_minus_kappa, dt, z, out):
    # Same update expression as _kernels.v_euler_kernel, with the path kept.
    v = v0
    for i in range(z.size):
        v = v + two_minus_kappa * v * dt + math.sqrt(2.0 * (1.0 + v * v) * dt) * z[i]
        out[i] = v
    return v


def xi_stationary_density(kappa: float, centers: np.ndarray, width: float) -> np.ndarray:
    """Per-bin probabilities of the zero-flux stationary law rho ~ cosh^(1-kappa),
    normalized over the histogram window."""
    if kappa <= 1.0:
        raise ValueError("stationary density exists only for kappa > 1")
    logrho = (1.0 - kappa) * np.log(np.cosh(centers))
    p = np.exp(logrho - logrho.max()) * width
    return p / p.sum()


def wasserstein1_line(p: np.ndarray, q: np.ndarray, width: float) -> float:
    """W1 between two distributions binned on a common uniform grid."""
    return float(np.abs(np.cumsum(p - q)).sum() * width)


@dataclass(frozen=True)
class XiStationarityReport:
    kappa: float
    mode: str
    # stationary mode (kappa > 1)
    w1_to_density: Optional[float] = None
    w1_halves: Optional[float] = None
    out_of_window: Optional[float] = None
    bin_centers: Optional[np.ndarray] = None
    histogram: Optional[np.ndarray] = None
    density: Optional[np.ndarray] = None
    # escape mode (kappa <= 1)
    escape_fraction: Optional[float] = None
    exit_times: Optional[np.ndarray] = None
    escape_threshold: Optional[float] = None


def xi_stationarity_test(
    params: HyperbolicParams,
    seed: int = 0,
    xi0: float = 0.0,
    bins: int = 200,
    window=(-10.0, 10.0),
    escape_threshold: float = 10.0,
    escape_runs: int = 100,
    escape_horizon: float = 1e4,
    escape_dt: float = 0.01,
    threads: int = 1,
) -> XiStationarityReport:
    """For kappa > 1: compare the long-run xi histogram over t in [T/2, T]
    with the closed-form stationary density by W1 (plus a half-vs-half
    self-consistency W1). For kappa <= 1: first-exit diagnostic above
    |xi| = escape_threshold."""
    kappa = params.kappa
    if kappa > 1.0:
        n = params.n_steps
        lo, hi = float(window[0]), float(window[1])
        edges = np.linspace(lo, hi, bins + 1)
        width = (hi - lo) / bins
        centers = 0.5 * (edges[:-1] + edges[1:])
        counts_a = np.zeros(bins)
        counts_b = np.zeros(bins)
        outside = 0
        rng = np.random.default_rng(seed)
        sq2dt = math.sqrt(2.0 * params.dt)
        xi = float(xi0)
        done = 0
        half = n // 2  # first half of the collection window vs second
        out = np.empty(_XI_BLOCK)
        while done < n:
            block = min(_XI_BLOCK, n - done)
            z = rng.standard_normal(block)
            xi = _kernels.xi_euler_block(xi, 1.0 - kappa, params.dt, sq2dt, z[:block], out[:block])
            seg = out[:block]
            first_part = seg[: max(0, min(block, half - done))]
            second_part = seg[max(0, min(block, half - done)):]
            for part, counts in ((first_part, counts_a), (second_part, counts_b)):
                if part.size == 0:
                    continue
                c, _ = np.histogram(part, bins=edges)
                outside += part.size - int(c.sum())
                counts += c
            done += block
        hist_b = counts_b / counts_b.sum()
        hist_a = counts_a / counts_a.sum()
        dens = xi_stationary_density(kappa, centers, width)
        return XiStationarityReport(
            kappa=kappa,
            mode="stationary",
            w1_to_density=wasserstein1_line(hist_b, dens, width),
            w1_halves=wasserstein1_line(hist_a, hist_b, width),
            out_of_window=outside / n,
            bin_centers=centers,
            histogram=hist_b,
            density=dens,
        )

    n = int(round(escape_horizon / escape_dt))
    sq2dt = math.sqrt(2.0 * escape_dt)

    def one(i):
        rng_i = np.random.default_rng(derive_seed(seed, i))
        xi_i = float(xi0)
        step = 0
        while step < n:
            block = min(_XI_BLOCK, n - step)
            z = rng_i.standard_normal(block)
            xi_i, hit = _kernels.xi_escape_block(
                xi_i, 1.0 - kappa, escape_dt, sq2dt, z, escape_threshold
            )
            if hit >= 0:
                return (step + hit + 1) * escape_dt
            step += block
        return math.inf

    exits = np.array(indexed_map(one, escape_runs, threads))
    return XiStationarityReport(
        kappa=kappa,
        mode="escape",
        escape_fraction=float(np.mean(np.isfinite(exits))),
        exit_times=exits,
        escape_threshold=escape_threshold,
    )


def hyperbolic_distance(x1, y1, x2, y2):
    """Upper half-plane distance: cosh d = 1 + ((dx)^2 + (dy)^2) / (2 y1 y2)."""
    h = ((np.asarray(x2) - x1) ** 2 + (np.asarray(y2) - y1) ** 2) / (2.0 * np.asarray(y1) * y2)
    out = np.arccosh(1.0 + h)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class DiscretizationRecord:
    """delta-skeleton of a path with per-step integer weights
    k_n = floor(dist(z_{n-1}, z_n)) + 1 and their running total K_n."""

    delta: float
    x_samples: np.ndarray
    u_samples: np.ndarray
    distances: np.ndarray
    k: np.ndarray
    K: np.ndarray

    @property
    def n(self) -> int:
        return len(self.k)

    @property
    def ratios(self) -> np.ndarray:
        """K_n / n for n = 1..N."""
        return self.K / np.arange(1, self.n + 1)


def discretize_path(path: HyperbolicPath, delta: Optional[float] = None) -> DiscretizationRecord:
    """Sample the path every delta and weight each step by its hyperbolic
    length. Distances are evaluated from (u, scaled dx), which stays in
    range for arbitrarily strong drift."""
    if delta is None:
        raise ValueError("delta is required")
    rec_dt = float(path.t[1] - path.t[0])
    span = round(delta / rec_dt)
    if span < 1 or abs(span * rec_dt - delta) > 1e-9 * max(1.0, delta):
        raise ValueError("delta must be a positive multiple of the path's recording step")
    n_rec = len(path.t) - 1
    n = n_rec // span
    if n < 1:
        raise ValueError("path shorter than one delta span")
    u = path.u[: n * span + 1]
    ends = u[::span]
    du = np.diff(ends)
    # scaled_dx entries re-anchored to each span's start height, then summed
    anchors = np.repeat(ends[:-1], span)
    d_scaled = (path.scaled_dx[: n * span] * np.exp(u[:-1][: n * span] - anchors)).reshape(n, span).sum(axis=1)
    h = 0.5 * d_scaled**2 * np.exp(-du) + 2.0 * np.sinh(0.5 * du) ** 2
    dist = np.arccosh(1.0 + h)
    k = np.floor(dist).astype(np.int64) + 1
    return DiscretizationRecord(
        delta=float(delta),
        x_samples=path.x[:: span][: n + 1].copy(),
        u_samples=ends.copy(),
        distances=dist,
        k=k,
        K=np.cumsum(k),
    )


def estimate_step_scale(
    params: HyperbolicParams, n_samples: int = 100_000, seed: int = 0, chunk: int = 20_000
):
    """Monte Carlo oracle for the LLN constant: c = E[k_1] + 1, with k_1 the
    weight of a single delta step started at (0, 1)."""
    m = round(params.delta / params.dt)
    sq = math.sqrt(2.0 * params.dt)
    rng = np.random.default_rng(seed)
    total = 0.0
    count = 0
    while count < n_samples:
        b = min(chunk, n_samples - count)
        z = rng.standard_normal((m, b, 2))
        du = (params.kappa - 1.0) * params.dt + sq * z[:, :, 1]
        u = np.vstack([np.zeros(b), np.cumsum(du, axis=0)])
        d_scaled = (sq * np.exp(u[:-1]) * z[:, :, 0]).sum(axis=0)
        dU = u[-1]
        h = 0.5 * d_scaled**2 * np.exp(-dU) + 2.0 * np.sinh(0.5 * dU) ** 2
        dist = np.arccosh(1.0 + h)
        total += float(np.sum(np.floor(dist) + 1.0))
        count += b
    mean_k1 = total / n_samples
    return mean_k1 + 1.0, mean_k1
