"""Numba kernels for the sequential hot loops.

Maps are packed as (codes, params): code 0 = Möbius with params (a, b, c, d)
already det-normalized and sign-canonical, code 1 = perturbed identity with
params (eps, k, 0, 0). Weightings: kind 0 = constant (params[:, 0] = probs),
kind 1 = cosine family (params rows = (c, a, phi), normalized pointwise).

All kernels consume pre-drawn noise arrays, so randomness lives entirely in
the callers' seeded numpy generators.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .maps import MoebiusMap, ParametricMap
from .system import GeneratorSystem


def pack_maps(maps):
    codes = np.empty(len(maps), dtype=np.int64)
    params = np.zeros((len(maps), 4), dtype=np.float64)
    for i, g in enumerate(maps):
        if isinstance(g, MoebiusMap):
            codes[i] = 0
            params[i] = (g.a, g.b, g.c, g.d)
        elif isinstance(g, ParametricMap):
            codes[i] = 1
            params[i, 0] = g.eps
            params[i, 1] = float(g.k)
        else:
            raise TypeError(f"unsupported map type {type(g)!r}")
    return codes, params


def pack_system(sys: GeneratorSystem):
    codes, params = pack_maps(sys.generators)
    if sys.has_constant_weights:
        wkind = 0
        wparams = np.zeros((len(sys), 3), dtype=np.float64)
        wparams[:, 0] = sys.weighting.probs
    else:
        wkind = 1
        w = sys.weighting
        wparams = np.column_stack(
            [np.asarray(w.c), np.asarray(w.a), np.asarray(w.phi)]
        ).astype(np.float64)
    return codes, params, wkind, wparams


@njit(inline="always")
def _apply_ld(code, p0, p1, p2, p3, theta):
    if code == 0:
        u = math.sin(math.pi * theta)
        v = math.cos(math.pi * theta)
        u2 = p0 * u + p1 * v
        v2 = p2 * u + p3 * v
        th = (math.atan2(u2, v2) / math.pi) % 1.0
        if p0 == p3 and p1 == -p2:
            ld = 0.0
        else:
            ld = math.log((u * u + v * v) / (u2 * u2 + v2 * v2))
        return th, ld
    w = 2.0 * math.pi * p1
    th = (theta + p0 * math.sin(w * theta) / w) % 1.0
    ld = math.log(1.0 + p0 * math.cos(w * theta))
    return th, ld


@njit(cache=True, nogil=True)
def trajectory_kernel(codes, mparams, wkind, wparams, theta0, uniforms, indices, thetas, logd):
    k = codes.size
    n = uniforms.size
    raws = np.empty(k, dtype=np.float64)
    theta = theta0 % 1.0
    thetas[0] = theta
    for step in range(n):
        u = uniforms[step]
        idx = k - 1
        if wkind == 0:
            c = 0.0
            for i in range(k):
                c += wparams[i, 0]
                if u < c:
                    idx = i
                    break
        else:
            total = 0.0
            for i in range(k):
                r = wparams[i, 0] * (1.0 + wparams[i, 1] * math.cos(2.0 * math.pi * theta + wparams[i, 2]))
                raws[i] = r
                total += r
            cu = u * total
            c = 0.0
            for i in range(k):
                c += raws[i]
                if cu < c:
                    idx = i
                    break
        theta, ld = _apply_ld(
            codes[idx], mparams[idx, 0], mparams[idx, 1], mparams[idx, 2], mparams[idx, 3], theta
        )
        indices[step] = idx
        thetas[step + 1] = theta
        logd[step] = ld


@njit(cache=True, nogil=True)
def orbit_batch_kernel(codes, mparams, indices, starts, thetas):
    m = starts.size
    n = indices.size
    for j in range(m):
        th = starts[j] % 1.0
        thetas[j, 0] = th
        for s in range(n):
            i = indices[s]
            th, _ = _apply_ld(
                codes[i], mparams[i, 0], mparams[i, 1], mparams[i, 2], mparams[i, 3], th
            )
            thetas[j, s + 1] = th


@njit(cache=True, nogil=True)
def v_euler_kernel(v0, two_minus_kappa, dt, z):
    v = v0
    for i in range(z.size):
        v = v + two_minus_kappa * v * dt + math.sqrt(2.0 * (1.0 + v * v) * dt) * z[i]
    return v


@njit(cache=True, nogil=True)
def xi_euler_block(xi0, one_minus_kappa, dt, sq2dt, z, out):
    xi = xi0
    for i in range(z.size):
        xi = xi + one_minus_kappa * math.tanh(xi) * dt + sq2dt * z[i]
        out[i] = xi
    return xi


@njit(cache=True, nogil=True)
def xi_escape_block(xi0, one_minus_kappa, dt, sq2dt, z, threshold):
    """Integrate until |xi| >= threshold; returns (xi, exit step or -1)."""
    xi = xi0
    for i in range(z.size):
        xi = xi + one_minus_kappa * math.tanh(xi) * dt + sq2dt * z[i]
        if abs(xi) >= threshold:
            return xi, i
    return xi, -1
