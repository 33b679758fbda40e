"""Finite random systems of circle maps with constant or point-dependent weights."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .maps import (
    CircleMap,
    MoebiusMap,
    apply_map,
    derivative,
    invert,
    map_from_config,
    map_to_config,
    maps_equal,
)

_CHECK_GRID = 10_000


@dataclass(frozen=True)
class ConstantWeights:
    """Probability vector over the generators: p_i > 0, sum = 1 within 1e-12."""

    probs: tuple

    def __post_init__(self):
        p = tuple(float(x) for x in self.probs)
        if any(x <= 0.0 for x in p):
            raise ValueError("weights: all probabilities must be positive")
        if abs(sum(p) - 1.0) > 1e-12:
            raise ValueError(f"weights: probabilities must sum to 1 within 1e-12, got {sum(p)!r}")
        object.__setattr__(self, "probs", p)

    def __len__(self):
        return len(self.probs)

    def at(self, theta):
        """Weight vector at theta; shape (k,) for scalar, (k, n) for arrays."""
        p = np.asarray(self.probs)
        t = np.asarray(theta, dtype=float)
        if t.ndim == 0:
            return p
        return np.repeat(p[:, None], t.size, axis=1)


@dataclass(frozen=True)
class CosineWeights:
    """Point-dependent weights w_i(theta) = c_i*(1 + a_i*cos(2*pi*theta + phi_i)).

    The raw family members must be positive everywhere (checked on a 10^4
    grid); sampling uses the pointwise-normalized vector.
    """

    c: tuple
    a: tuple
    phi: tuple

    def __post_init__(self):
        c = tuple(float(x) for x in self.c)
        a = tuple(float(x) for x in self.a)
        phi = tuple(float(x) for x in self.phi)
        if not (len(c) == len(a) == len(phi)):
            raise ValueError("weights.cosine: c, a, phi must have equal length")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "phi", phi)
        grid = np.arange(_CHECK_GRID) / _CHECK_GRID
        raw = self._raw(grid)
        if np.min(raw) <= 0.0:
            bad = int(np.argmin(np.min(raw, axis=1)))
            raise ValueError(f"weights.cosine[{bad}]: weight function not positive on the circle")

    def __len__(self):
        return len(self.c)

    def _raw(self, theta):
        t = np.atleast_1d(np.asarray(theta, dtype=float))
        c = np.asarray(self.c)[:, None]
        a = np.asarray(self.a)[:, None]
        phi = np.asarray(self.phi)[:, None]
        return c * (1.0 + a * np.cos(2.0 * np.pi * t[None, :] + phi))

    def at(self, theta):
        """Pointwise-normalized weight vector at theta."""
        t = np.asarray(theta, dtype=float)
        raw = self._raw(t)
        out = raw / np.sum(raw, axis=0)
        return out[:, 0] if t.ndim == 0 else out


Weighting = Union[ConstantWeights, CosineWeights]


@dataclass(frozen=True)
class GeneratorSystem:
    """An ordered finite family of circle maps with a weighting scheme."""

    generators: tuple
    weighting: Weighting

    def __post_init__(self):
        gens = tuple(self.generators)
        if not gens:
            raise ValueError("generators: at least one map required")
        if len(self.weighting) != len(gens):
            raise ValueError(
                f"weights: expected {len(gens)} entries to match generators, got {len(self.weighting)}"
            )
        object.__setattr__(self, "generators", gens)

    def __len__(self):
        return len(self.generators)

    @property
    def has_constant_weights(self) -> bool:
        return isinstance(self.weighting, ConstantWeights)

    def weights_at(self, theta):
        return self.weighting.at(theta)

    def to_config(self) -> dict:
        cfg = {"generators": [map_to_config(g) for g in self.generators]}
        if self.has_constant_weights:
            cfg["weights"] = list(self.weighting.probs)
        else:
            w = self.weighting
            cfg["weights"] = {
                "cosine": [
                    {"c": w.c[i], "a": w.a[i], "phi": w.phi[i]} for i in range(len(w))
                ]
            }
        return cfg


@dataclass(frozen=True)
class SymmetryReport:
    """Outcome of the detailed-balance check (constant-weight systems).

    ``witness`` is the index of the first generator with no matching
    inverse in the list, or whose inverse carries a different weight.
    """

    is_symmetric: bool
    witness: Optional[int]
    tol: float


def sample_step(sys: GeneratorSystem, theta: float, rng: np.random.Generator):
    """One Markov step: (generator index, image point, log derivative).

    The index is drawn with the weight vector evaluated at theta; the draw
    consumes exactly one uniform from ``rng``, so sequences are reproducible
    from the generator state.
    """
    w = sys.weights_at(theta)
    u = rng.random()
    idx = int(np.searchsorted(np.cumsum(w), u, side="right"))
    idx = min(idx, len(sys) - 1)
    g = sys.generators[idx]
    return idx, apply_map(g, theta), float(np.log(derivative(g, theta)))


def check_symmetry(sys: GeneratorSystem, tol: float = 1e-10) -> SymmetryReport:
    """Detailed balance in the constant-potential case: the generator list is
    inverse-closed and each map's weight equals its inverse's weight.

    Möbius inverses are matched by sign-canonical matrix entries; other map
    types are matched by their action on a grid.
    """
    if not sys.has_constant_weights:
        raise ValueError("symmetry check unsupported for this weighting")
    probs = sys.weighting.probs
    for i, g in enumerate(sys.generators):
        target = invert(g) if isinstance(g, MoebiusMap) else None
        partner = None
        for j, h in enumerate(sys.generators):
            if target is not None:
                if maps_equal(h, target, tol):
                    partner = j
                    break
            elif _is_inverse_pair(g, h, tol):
                partner = j
                break
        if partner is None or abs(probs[i] - probs[partner]) > tol:
            return SymmetryReport(False, i, tol)
    return SymmetryReport(True, None, tol)


def _is_inverse_pair(g: CircleMap, h: CircleMap, tol: float) -> bool:
    grid = np.arange(256) / 256.0
    round_trip = apply_map(h, apply_map(g, grid))
    d = np.abs(np.mod(round_trip - grid, 1.0))
    return bool(np.max(np.minimum(d, 1.0 - d)) <= tol)


def system_from_config(cfg: dict, where: str = "system") -> GeneratorSystem:
    """Build a GeneratorSystem from {"generators": [...], "weights": ...}.

    Raises ValueError naming the offending key on any schema violation.
    """
    if not isinstance(cfg, dict):
        raise ValueError(f"{where}: expected an object")
    unknown = set(cfg) - {"generators", "weights"}
    if unknown:
        raise ValueError(f"{where}: unknown keys {sorted(unknown)}")
    if "generators" not in cfg:
        raise ValueError(f"{where}.generators: missing")
    if "weights" not in cfg:
        raise ValueError(f"{where}.weights: missing")
    raw_gens = cfg["generators"]
    if not isinstance(raw_gens, list) or not raw_gens:
        raise ValueError(f"{where}.generators: expected a non-empty list")
    gens = [
        map_from_config(g, where=f"{where}.generators[{i}]") for i, g in enumerate(raw_gens)
    ]
    raw_w = cfg["weights"]
    if isinstance(raw_w, list):
        try:
            weighting = ConstantWeights(tuple(raw_w))
        except ValueError as exc:
            raise ValueError(f"{where}.{exc}") from exc
    elif isinstance(raw_w, dict) and set(raw_w) == {"cosine"}:
        rows = raw_w["cosine"]
        if not isinstance(rows, list):
            raise ValueError(f"{where}.weights.cosine: expected a list")
        for i, row in enumerate(rows):
            if not isinstance(row, dict) or set(row) != {"c", "a", "phi"}:
                raise ValueError(
                    f"{where}.weights.cosine[{i}]: expected keys 'c', 'a', 'phi'"
                )
        try:
            weighting = CosineWeights(
                tuple(r["c"] for r in rows),
                tuple(r["a"] for r in rows),
                tuple(r["phi"] for r in rows),
            )
        except ValueError as exc:
            raise ValueError(f"{where}.{exc}") from exc
    else:
        raise ValueError(f"{where}.weights: expected a probability list or {{'cosine': [...]}}")
    try:
        return GeneratorSystem(tuple(gens), weighting)
    except ValueError as exc:
        raise ValueError(f"{where}.{exc}") from exc


def weight_normalization_gap(sys: GeneratorSystem, grid_points: int = _CHECK_GRID) -> float:
    """max_theta |sum_i weight_i(theta) - 1| on a uniform grid."""
    grid = np.arange(grid_points) / grid_points
    return float(np.max(np.abs(np.sum(sys.weights_at(grid), axis=0) - 1.0)))
