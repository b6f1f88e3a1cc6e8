"""Sampled compact sets, domains and neighbourhoods.

Every compact set is represented by a finite, deterministic, quasi-uniform
point cloud.  Sup norms over a set become maxima over its samples; the
``mesh`` attribute records the target spacing so callers can reason about
the discretisation error.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.spatial import ConvexHull, cKDTree

DUPLICATE_TOL = 1e-12

SHAPE_KINDS = (
    "disk",
    "circle",
    "annulus",
    "segment",
    "rectangle",
    "finite_points",
    "union_of",
)


class GeometryError(ValueError):
    """Raised for degenerate shapes or inconsistent point sets."""


@dataclass(frozen=True)
class ShapeDescriptor:
    """A concrete compact set.

    ``kind`` is one of :data:`SHAPE_KINDS`.  In three dimensions ``disk`` is
    the closed ball and ``circle`` the sphere.  ``union_of`` keeps its parts
    under ``params["parts"]``.
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in SHAPE_KINDS:
            raise GeometryError(f"unknown shape kind {self.kind!r}")
        _validate_params(self.kind, self.params)

    @property
    def dim(self) -> int:
        p = self.params
        if self.kind in ("disk", "circle", "annulus"):
            return len(p["center"])
        if self.kind == "segment":
            return len(p["start"])
        if self.kind == "rectangle":
            return len(p["lo"])
        if self.kind == "finite_points":
            return len(p["points"][0])
        return p["parts"][0].dim

    # -- constructors -----------------------------------------------------
    @classmethod
    def disk(cls, center, radius) -> ShapeDescriptor:
        return cls("disk", {"center": _tup(center), "radius": float(radius)})

    @classmethod
    def circle(cls, center, radius) -> ShapeDescriptor:
        return cls("circle", {"center": _tup(center), "radius": float(radius)})

    @classmethod
    def annulus(cls, center, inner, outer) -> ShapeDescriptor:
        return cls(
            "annulus",
            {"center": _tup(center), "inner": float(inner), "outer": float(outer)},
        )

    @classmethod
    def segment(cls, start, end) -> ShapeDescriptor:
        return cls("segment", {"start": _tup(start), "end": _tup(end)})

    @classmethod
    def rectangle(cls, lo, hi) -> ShapeDescriptor:
        return cls("rectangle", {"lo": _tup(lo), "hi": _tup(hi)})

    @classmethod
    def finite_points(cls, points) -> ShapeDescriptor:
        return cls("finite_points", {"points": tuple(_tup(p) for p in points)})

    @classmethod
    def union(cls, parts: Sequence[ShapeDescriptor]) -> ShapeDescriptor:
        return cls("union_of", {"parts": tuple(parts)})

    # -- serialisation ----------------------------------------------------
    def to_dict(self) -> dict:
        if self.kind == "union_of":
            params = {"parts": [p.to_dict() for p in self.params["parts"]]}
        elif self.kind == "finite_points":
            params = {"points": [list(p) for p in self.params["points"]]}
        else:
            params = {
                k: list(v) if isinstance(v, tuple) else v for k, v in self.params.items()
            }
        return {"kind": self.kind, "params": params}

    @classmethod
    def from_dict(cls, data: dict) -> ShapeDescriptor:
        if set(data) != {"kind", "params"}:
            raise GeometryError(f"shape object needs exactly 'kind' and 'params', got {sorted(data)}")
        kind, params = data["kind"], dict(data["params"])
        if kind == "union_of":
            params = {"parts": tuple(cls.from_dict(p) for p in params["parts"])}
        elif kind == "finite_points":
            params = {"points": tuple(_tup(p) for p in params["points"])}
        else:
            params = {k: _tup(v) if isinstance(v, list) else float(v) for k, v in params.items()}
        return cls(kind, params)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> ShapeDescriptor:
        return cls.from_dict(json.loads(text))

    def contains(self, X: np.ndarray, tol: float = 1e-12) -> np.ndarray:
        """Membership mask of the rows of ``X`` in the closed shape."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        p = self.params
        if self.kind in ("disk", "circle", "annulus"):
            r = np.linalg.norm(X - np.asarray(p["center"]), axis=1)
            if self.kind == "disk":
                return r <= p["radius"] + tol
            if self.kind == "circle":
                return np.abs(r - p["radius"]) <= tol
            return (r >= p["inner"] - tol) & (r <= p["outer"] + tol)
        if self.kind == "segment":
            a, b = np.asarray(p["start"]), np.asarray(p["end"])
            return _segment_distance(X, a, b) <= tol
        if self.kind == "rectangle":
            lo, hi = np.asarray(p["lo"]), np.asarray(p["hi"])
            return np.all((X >= lo - tol) & (X <= hi + tol), axis=1)
        if self.kind == "finite_points":
            d, _ = cKDTree(np.asarray(p["points"])).query(X)
            return d <= tol
        mask = np.zeros(len(X), dtype=bool)
        for part in p["parts"]:
            mask |= part.contains(X, tol)
        return mask


def _tup(v) -> tuple:
    return tuple(float(t) for t in v)


def _validate_params(kind: str, p: dict) -> None:
    def need(*keys):
        missing = [k for k in keys if k not in p]
        if missing:
            raise GeometryError(f"{kind} needs parameters {missing}")

    def dim_ok(v, what):
        if len(v) not in (2, 3):
            raise GeometryError(f"{kind}: {what} must have length 2 or 3, got {len(v)}")
        if not all(math.isfinite(t) for t in v):
            raise GeometryError(f"{kind}: {what} must be finite")

    if kind in ("disk", "circle"):
        need("center", "radius")
        dim_ok(p["center"], "center")
        if not p["radius"] > 0:
            raise GeometryError(f"{kind}: radius must be > 0, got {p['radius']}")
    elif kind == "annulus":
        need("center", "inner", "outer")
        dim_ok(p["center"], "center")
        if not 0 < p["inner"] < p["outer"]:
            raise GeometryError(
                f"annulus: need 0 < inner < outer, got inner={p['inner']} outer={p['outer']}"
            )
    elif kind == "segment":
        need("start", "end")
        dim_ok(p["start"], "start")
        if len(p["start"]) != len(p["end"]):
            raise GeometryError("segment: endpoints of different dimension")
        if np.linalg.norm(np.subtract(p["end"], p["start"])) <= DUPLICATE_TOL:
            raise GeometryError("segment: endpoints must be distinct")
    elif kind == "rectangle":
        need("lo", "hi")
        dim_ok(p["lo"], "lo")
        if len(p["lo"]) != len(p["hi"]) or not all(a < b for a, b in zip(p["lo"], p["hi"])):
            raise GeometryError("rectangle: need lo < hi componentwise")
    elif kind == "finite_points":
        need("points")
        if len(p["points"]) == 0:
            raise GeometryError("finite_points: need at least one point")
        dims = {len(q) for q in p["points"]}
        if len(dims) != 1:
            raise GeometryError("finite_points: mixed dimensions")
        for q in p["points"]:
            dim_ok(q, "point")
    elif kind == "union_of":
        need("parts")
        parts = p["parts"]
        if not parts:
            raise GeometryError("union_of: need at least one part")
        if len({q.dim for q in parts}) != 1:
            raise GeometryError("union_of: parts of different dimension")


@dataclass(frozen=True, eq=False)
class SampledSet:
    """Finite point cloud standing in for a compact set.

    ``points`` has shape ``(n, dim)``.  Empty sets are only allowed when
    ``allow_empty`` is set (sublevel sets may legitimately be empty).
    """

    label: str
    points: np.ndarray
    source: ShapeDescriptor | None = None
    mesh: float = 1.0
    allow_empty: bool = field(default=False, repr=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, ndmin=2)
        if pts.size == 0:
            if not self.allow_empty:
                raise GeometryError(f"sampled set {self.label!r} is empty")
            pts = pts.reshape(0, pts.shape[1] if pts.ndim == 2 and pts.shape[1] else 2)
        elif pts.shape[1] not in (2, 3):
            raise GeometryError(f"points must be 2D or 3D, got dimension {pts.shape[1]}")
        if not np.all(np.isfinite(pts)):
            raise GeometryError(f"sampled set {self.label!r} has non-finite coordinates")
        if not self.mesh > 0:
            raise GeometryError(f"mesh must be > 0, got {self.mesh}")
        if len(pts) > 1 and cKDTree(pts).query_pairs(DUPLICATE_TOL):
            raise GeometryError(f"sampled set {self.label!r} contains duplicate points")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def is_empty(self) -> bool:
        return len(self.points) == 0

    def subset(self, mask, label: str | None = None) -> SampledSet:
        """Samples selected by a boolean mask; membership is exact."""
        return SampledSet(
            label or self.label,
            self.points[np.asarray(mask, dtype=bool)],
            None,
            self.mesh,
            allow_empty=True,
        )

    def translated(self, shift) -> SampledSet:
        return SampledSet(self.label, self.points + np.asarray(shift, float), None, self.mesh)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "z"][: self.dim])
        for p in self.points:
            w.writerow([repr(float(t)) for t in p])
        return buf.getvalue()


@dataclass(frozen=True)
class Scene:
    """The sets of the uniqueness problem: zero set ``E`` inside ``K``, both
    compactly inside the domain ``D``."""

    K: SampledSet
    E: SampledSet
    D: SampledSet
    delta: float

    def __post_init__(self):
        if not self.delta > 0:
            raise GeometryError("delta must be > 0")
        if self.E.is_empty:
            raise GeometryError("E must be nonempty")
        if len({self.K.dim, self.E.dim, self.D.dim}) != 1:
            raise GeometryError("K, E, D must share a dimension")
        d, _ = cKDTree(self.K.points).query(self.E.points)
        if np.any(d > DUPLICATE_TOL):
            raise GeometryError("every point of E must be a sample of K")
        margin = hull_margin(self.K, self.D)
        slack = 0.5 * max(self.K.mesh, self.D.mesh)
        if margin < self.delta - slack:
            raise GeometryError(
                f"K is not compactly inside D: margin {margin:.4g} < delta {self.delta:.4g}"
            )


def _segment_distance(X: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    t = np.clip((X - a) @ ab / (ab @ ab), 0.0, 1.0)
    return np.linalg.norm(X - (a + t[:, None] * ab), axis=1)


def _grid(lo: np.ndarray, hi: np.ndarray, mesh: float, anchor: np.ndarray) -> np.ndarray:
    """Lattice of spacing ``mesh`` through ``anchor`` covering ``[lo, hi]``."""
    axes = []
    for l, h, a in zip(lo, hi, anchor):
        k0 = math.floor((l - a) / mesh)
        k1 = math.ceil((h - a) / mesh)
        axes.append(a + mesh * np.arange(k0, k1 + 1))
    mesh_axes = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh_axes], axis=1)


def _sphere_points(center: np.ndarray, radius: float, mesh: float) -> np.ndarray:
    if len(center) == 2:
        n = max(3, math.ceil(2 * math.pi * radius / mesh))
        t = 2 * math.pi * np.arange(n) / n
        return center + radius * np.stack([np.cos(t), np.sin(t)], axis=1)
    # Fibonacci lattice; hexagonal cell area ~ (sqrt(3)/2) mesh^2
    n = max(4, math.ceil(4 * math.pi * radius**2 / (0.5 * math.sqrt(3) * mesh**2)))
    i = np.arange(n) + 0.5
    z = 1 - 2 * i / n
    phi = math.pi * (1 + math.sqrt(5)) * i
    s = np.sqrt(1 - z**2)
    return center + radius * np.stack([s * np.cos(phi), s * np.sin(phi), z], axis=1)


def _ball_interior(center: np.ndarray, r_in: float, r_out: float, mesh: float) -> np.ndarray:
    G = _grid(center - r_out, center + r_out, mesh, center)
    r = np.linalg.norm(G - center, axis=1)
    keep = r < r_out - mesh / 2
    if r_in > 0:
        keep &= r > r_in + mesh / 2
    return G[keep]


def _raw_samples(shape: ShapeDescriptor, mesh: float) -> np.ndarray:
    p = shape.params
    if shape.kind == "finite_points":
        return np.asarray(p["points"], dtype=float)
    if shape.kind == "circle":
        return _sphere_points(np.asarray(p["center"]), p["radius"], mesh)
    if shape.kind == "disk":
        c = np.asarray(p["center"])
        return np.vstack([_ball_interior(c, 0.0, p["radius"], mesh), _sphere_points(c, p["radius"], mesh)])
    if shape.kind == "annulus":
        c = np.asarray(p["center"])
        return np.vstack(
            [
                _ball_interior(c, p["inner"], p["outer"], mesh),
                _sphere_points(c, p["inner"], mesh),
                _sphere_points(c, p["outer"], mesh),
            ]
        )
    if shape.kind == "segment":
        a, b = np.asarray(p["start"]), np.asarray(p["end"])
        n = math.ceil(np.linalg.norm(b - a) / mesh) + 1
        t = np.linspace(0.0, 1.0, n)[:, None]
        return a + t * (b - a)
    if shape.kind == "rectangle":
        lo, hi = np.asarray(p["lo"]), np.asarray(p["hi"])
        axes = [np.linspace(l, h, math.ceil((h - l) / mesh) + 1) for l, h in zip(lo, hi)]
        mesh_axes = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh_axes], axis=1)
    return np.vstack([_raw_samples(part, mesh) for part in p["parts"]])


def dedupe(points: np.ndarray, tol: float = DUPLICATE_TOL) -> np.ndarray:
    """Drop points within ``tol`` of an earlier point, keeping first occurrences."""
    if len(points) < 2:
        return points
    drop = set()
    for i, j in sorted(cKDTree(points).query_pairs(tol)):
        if i not in drop:
            drop.add(j)
    keep = np.ones(len(points), dtype=bool)
    keep[list(drop)] = False
    return points[keep]


def sample_shape(shape: ShapeDescriptor, mesh: float, label: str | None = None) -> SampledSet:
    """Deterministic quasi-uniform samples of ``shape`` with spacing <= ``mesh``.

    Two- and three-dimensional regions get an interior lattice plus explicit
    boundary rings (spheres in 3D), so boundary maxima of harmonic functions
    are captured.
    """
    if not mesh > 0:
        raise GeometryError(f"mesh must be > 0, got {mesh}")
    pts = dedupe(_raw_samples(shape, mesh))
    return SampledSet(label or shape.kind, pts, shape, float(mesh))


def resample(S: SampledSet, factor: float = 2.0) -> SampledSet:
    """Same shape at ``mesh / factor``; used by the refinement oracles."""
    if S.source is None:
        raise GeometryError(f"sampled set {S.label!r} has no shape to refine")
    return sample_shape(S.source, S.mesh / factor, S.label)


def set_distance(x, S: SampledSet) -> float:
    """Euclidean distance from ``x`` to the nearest sample of ``S``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (S.dim,):
        raise GeometryError(f"point of dimension {x.shape} vs set of dimension {S.dim}")
    return float(np.min(np.linalg.norm(S.points - x, axis=1)))


def distances(X: np.ndarray, S: SampledSet) -> np.ndarray:
    """Vectorised :func:`set_distance` for the rows of ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    d, _ = cKDTree(S.points).query(X)
    return d


def delta_neighborhood(K: SampledSet, delta: float, mesh: float) -> SampledSet:
    """Samples of ``{x : dist(x, K) < delta}``.

    A lattice anchored at the first sample of ``K`` is clipped to the open
    neighbourhood and merged with the samples of ``K`` itself.
    """
    if not delta > 0:
        raise GeometryError(f"delta must be > 0, got {delta}")
    if not mesh > 0:
        raise GeometryError(f"mesh must be > 0, got {mesh}")
    P = K.points
    G = _grid(P.min(axis=0) - delta, P.max(axis=0) + delta, mesh, P[0])
    # open set: lattice points on the boundary up to round-off stay out
    G = G[distances(G, K) < delta * (1.0 - 1e-12)]
    pts = dedupe(np.vstack([P, G]))
    return SampledSet(f"U_delta({K.label})", pts, None, float(min(mesh, K.mesh)))


def hull_margin(K: SampledSet, D: SampledSet) -> float:
    """Smallest distance from samples of ``K`` to the boundary of the convex
    hull of ``D`` (negative if some sample lies outside)."""
    try:
        hull = ConvexHull(D.points)
    except Exception as exc:  # qhull raises its own error type
        raise GeometryError(f"domain {D.label!r} has a degenerate hull") from exc
    eq = hull.equations  # rows (normal, offset), inside <=> normal.x + offset <= 0
    signed = K.points @ eq[:, :-1].T + eq[:, -1]
    return float(np.min(-signed.max(axis=1)))


def inside_hull(X: np.ndarray, D: SampledSet, margin: float = 0.0) -> np.ndarray:
    """Mask of rows of ``X`` at least ``margin`` inside the hull of ``D``."""
    eq = ConvexHull(D.points).equations
    signed = np.atleast_2d(X) @ eq[:, :-1].T + eq[:, -1]
    return signed.max(axis=1) <= -margin


def grid_in(D: SampledSet, n: int, label: str = "grid") -> SampledSet:
    """``n`` points per axis over the bounding box of ``D``, kept where they
    fall inside the convex hull of ``D``."""
    lo, hi = D.points.min(axis=0), D.points.max(axis=0)
    axes = [np.linspace(l, h, n) for l, h in zip(lo, hi)]
    mesh_axes = np.meshgrid(*axes, indexing="ij")
    G = np.stack([m.ravel() for m in mesh_axes], axis=1)
    G = G[inside_hull(G, D, margin=1e-9)]
    spacing = float(np.max((hi - lo) / max(n - 1, 1)))
    return SampledSet(label, G, None, spacing)


def points_where(S: SampledSet, predicate: Callable[[np.ndarray], np.ndarray], label: str) -> SampledSet:
    """Samples of ``S`` satisfying a vectorised predicate (exact subset)."""
    out = S.subset(predicate(S.points), label)
    if out.is_empty:
        raise GeometryError(f"no samples of {S.label!r} satisfy the predicate for {label!r}")
    return out
