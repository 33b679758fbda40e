"""Conformal circle maps: Möbius (projective) and perturbed-identity families.

The circle is R/Z with coordinate theta in [0, 1). Möbius maps act on the
projective line through the chart x = tan(pi*theta); internally every
evaluation goes through homogeneous coordinates (sin(pi*theta), cos(pi*theta)),
so the chart pole theta = 1/2 (x = infinity) needs no special casing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def reduce_circle(theta):
    """Reduce a circle coordinate (scalar or array) to [0, 1)."""
    return np.mod(theta, 1.0) if isinstance(theta, np.ndarray) else theta % 1.0


def circle_dist(a, b):
    """Shorter-arc distance on R/Z; works on scalars and arrays."""
    d = np.abs(np.mod(np.asarray(a) - b, 1.0))
    d = np.minimum(d, 1.0 - d)
    return float(d) if d.ndim == 0 else d


def _canonical_entries(a, b, c, d):
    # det-normalize, then fix the projective sign: first nonzero entry > 0.
    det = a * d - b * c
    if not math.isfinite(det) or det <= 0.0:
        raise ValueError(
            f"Möbius matrix must have positive determinant (orientation-preserving); got det={det!r}"
        )
    s = 1.0 / math.sqrt(det)
    entries = [a * s, b * s, c * s, d * s]
    for e in entries:
        if e != 0.0:
            if e < 0.0:
                entries = [-x for x in entries]
            break
    return tuple(entries)


@dataclass(frozen=True)
class MoebiusMap:
    """Fractional-linear map (a*x+b)/(c*x+d) on RP^1, det-normalized to 1.

    The stored entries are sign-canonical (a matrix and its negation
    construct the identical object), so projectively equal maps compare
    equal entrywise.
    """

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        a, b, c, d = _canonical_entries(float(self.a), float(self.b), float(self.c), float(self.d))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def is_rotation_form(self) -> bool:
        # [[a, b], [-b, a]] with det 1 is an exact isometry of theta.
        return self.a == self.d and self.b == -self.c

    def __call__(self, theta):
        return moebius_apply(self, theta)


@dataclass(frozen=True)
class ParametricMap:
    """Perturbed identity theta -> theta + eps*sin(2*pi*k*theta)/(2*pi*k) on R/Z.

    Requires |eps| < 1 so the derivative 1 + eps*cos(2*pi*k*theta) stays
    positive (circle diffeomorphism).
    """

    eps: float
    k: int = 1
    family: str = field(default="perturbed-identity", repr=False)

    def __post_init__(self):
        if not abs(self.eps) < 1.0:
            raise ValueError(f"ParametricMap requires |eps| < 1, got eps={self.eps}")
        if int(self.k) < 1 or self.k != int(self.k):
            raise ValueError(f"ParametricMap requires a positive integer frequency, got k={self.k}")
        object.__setattr__(self, "eps", float(self.eps))
        object.__setattr__(self, "k", int(self.k))

    def lift(self, theta):
        """The unreduced image theta + eps*sin(2*pi*k*theta)/(2*pi*k)."""
        w = 2.0 * math.pi * self.k
        return theta + self.eps * np.sin(w * np.asarray(theta, dtype=float)) / w

    def __call__(self, theta):
        return apply_map(self, theta)


CircleMap = MoebiusMap | ParametricMap


def identity_map() -> MoebiusMap:
    return MoebiusMap(1.0, 0.0, 0.0, 1.0)


def rotation(alpha: float) -> MoebiusMap:
    """Rotation of the circle by alpha: theta -> theta + alpha (mod 1).

    In the chart this is the matrix of angle pi*alpha acting on RP^1.
    """
    phi = math.pi * alpha
    return MoebiusMap(math.cos(phi), math.sin(phi), -math.sin(phi), math.cos(phi))


def moebius_apply(m: MoebiusMap, theta):
    t = np.asarray(theta, dtype=float)
    u = np.sin(np.pi * t)
    v = np.cos(np.pi * t)
    u2 = m.a * u + m.b * v
    v2 = m.c * u + m.d * v
    out = np.mod(np.arctan2(u2, v2) / np.pi, 1.0)
    return float(out) if out.ndim == 0 else out


def moebius_derivative(m: MoebiusMap, theta):
    if m.is_rotation_form:
        t = np.asarray(theta, dtype=float)
        return 1.0 if t.ndim == 0 else np.ones_like(t)
    t = np.asarray(theta, dtype=float)
    u = np.sin(np.pi * t)
    v = np.cos(np.pi * t)
    u2 = m.a * u + m.b * v
    v2 = m.c * u + m.d * v
    out = (u * u + v * v) / (u2 * u2 + v2 * v2)
    return float(out) if out.ndim == 0 else out


def apply_map(m: CircleMap, theta):
    """Image of a circle point (or array of points) under the map, in [0, 1)."""
    if isinstance(m, MoebiusMap):
        return moebius_apply(m, theta)
    return reduce_circle(m.lift(theta))


def derivative(m: CircleMap, theta):
    """Derivative d(theta')/d(theta) > 0 of the map at theta."""
    if isinstance(m, MoebiusMap):
        return moebius_derivative(m, theta)
    t = np.asarray(theta, dtype=float)
    out = 1.0 + m.eps * np.cos(2.0 * math.pi * m.k * t)
    return float(out) if out.ndim == 0 else out


def compose(g: MoebiusMap, h: MoebiusMap) -> MoebiusMap:
    """Matrix product: apply(compose(g, h), p) == apply(g, apply(h, p))."""
    return MoebiusMap(
        g.a * h.a + g.b * h.c,
        g.a * h.b + g.b * h.d,
        g.c * h.a + g.d * h.c,
        g.c * h.b + g.d * h.d,
    )


def invert(m: MoebiusMap) -> MoebiusMap:
    """Matrix inverse, det-normalized (det is already 1)."""
    return MoebiusMap(m.d, -m.b, -m.c, m.a)


def maps_equal(g: CircleMap, h: CircleMap, tol: float = 1e-10) -> bool:
    """Projective map equality.

    Möbius pairs compare by sup-distance of sign-canonical matrix entries;
    any other combination compares the action on a 256-point grid.
    """
    if isinstance(g, MoebiusMap) and isinstance(h, MoebiusMap):
        return (
            max(abs(g.a - h.a), abs(g.b - h.b), abs(g.c - h.c), abs(g.d - h.d)) <= tol
        )
    grid = np.arange(256) / 256.0
    return bool(np.max(circle_dist(apply_map(g, grid), apply_map(h, grid))) <= tol)


def map_to_config(m: CircleMap) -> dict:
    if isinstance(m, MoebiusMap):
        return {"moebius": [m.a, m.b, m.c, m.d]}
    return {"perturbed": {"eps": m.eps, "k": m.k}}


def map_from_config(obj: dict, where: str = "generator") -> CircleMap:
    """Parse {"moebius": [a,b,c,d]} or {"perturbed": {"eps":..,"k":..}}.

    Matrices are accepted unnormalized and are det-normalized on load.
    """
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ValueError(f"{where}: expected exactly one of 'moebius' or 'perturbed'")
    (kind, payload), = obj.items()
    if kind == "moebius":
        if not (isinstance(payload, (list, tuple)) and len(payload) == 4):
            raise ValueError(f"{where}.moebius: expected 4 numbers [a, b, c, d]")
        try:
            return MoebiusMap(*(float(x) for x in payload))
        except (TypeError, ValueError) as exc:
            raise ValueError(f"{where}.moebius: {exc}") from exc
    if kind == "perturbed":
        if not isinstance(payload, dict) or set(payload) != {"eps", "k"}:
            raise ValueError(f"{where}.perturbed: expected keys 'eps' and 'k'")
        try:
            return ParametricMap(float(payload["eps"]), int(payload["k"]))
        except (TypeError, ValueError) as exc:
            raise ValueError(f"{where}.perturbed: {exc}") from exc
    raise ValueError(f"{where}: unknown map kind {kind!r}")
