"""Real harmonic polynomial bases in two and three dimensions.

2D: ``1, Re w, Im w, Re w^2, Im w^2, ...`` with ``w = (z - center) / scale``.
3D: real solid harmonics ``S_l^m`` (Racah normalisation, ``|S_l^m| <= r^l``)
ordered ``l = 0..m``, ``m = -l..l``.

``center`` and ``scale`` only change the coordinates the basis is written
in; the span, and hence every best-approximation quantity, is the same.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

MAX_DEGREE = {2: 40, 3: 20}


class BasisError(ValueError):
    pass


@dataclass(frozen=True)
class BasisSpec:
    dim: int
    max_degree: int
    center: tuple | None = None
    scale: float = 1.0

    def __post_init__(self):
        if self.dim not in MAX_DEGREE:
            raise BasisError(f"dim must be 2 or 3, got {self.dim}")
        if int(self.max_degree) != self.max_degree or self.max_degree < 0:
            raise BasisError(f"max_degree must be a nonnegative integer, got {self.max_degree}")
        if self.max_degree > MAX_DEGREE[self.dim]:
            raise BasisError(
                f"degree {self.max_degree} exceeds the cap {MAX_DEGREE[self.dim]} for dim {self.dim}"
            )
        if not self.scale > 0:
            raise BasisError("scale must be > 0")
        if self.center is not None:
            c = tuple(float(t) for t in self.center)
            if len(c) != self.dim:
                raise BasisError("center dimension mismatch")
            object.__setattr__(self, "center", c)

    @property
    def size(self) -> int:
        return basis_size(self)

    def with_degree(self, m: int) -> BasisSpec:
        return BasisSpec(self.dim, m, self.center, self.scale)


def basis_size(spec: BasisSpec) -> int:
    m = spec.max_degree
    return 2 * m + 1 if spec.dim == 2 else (m + 1) ** 2


def element_degrees(spec: BasisSpec) -> np.ndarray:
    """Total degree of each basis element, in basis order."""
    m = spec.max_degree
    if spec.dim == 2:
        return np.array([0] + [k for k in range(1, m + 1) for _ in (0, 1)])
    return np.array([l for l in range(m + 1) for _ in range(2 * l + 1)])


def _local(spec: BasisSpec, X: np.ndarray) -> np.ndarray:
    if spec.center is not None:
        X = X - np.asarray(spec.center)
    if spec.scale != 1.0:
        X = X / spec.scale
    return X


def _eval2(X: np.ndarray, m: int) -> np.ndarray:
    x, y = X[:, 0], X[:, 1]
    out = np.empty((len(X), 2 * m + 1))
    out[:, 0] = 1.0
    re, im = np.ones_like(x), np.zeros_like(x)
    for k in range(1, m + 1):
        re, im = x * re - y * im, x * im + y * re
        out[:, 2 * k - 1] = re
        out[:, 2 * k] = im
    return out


def _eval3(X: np.ndarray, m: int) -> np.ndarray:
    # Cartesian recurrences for real regular solid harmonics (Racah
    # normalisation); S[l][l + mm] holds S_l^mm.
    x, y, z = X[:, 0], X[:, 1], X[:, 2]
    r2 = x * x + y * y + z * z
    S = [[np.ones_like(x)]]
    for l in range(m):
        prev = S[l]
        nxt = [None] * (2 * l + 3)
        f = math.sqrt((2 if l == 0 else 1) * (2 * l + 1) / (2 * l + 2))
        s_ll, s_lml = prev[2 * l], prev[0]
        if l == 0:
            nxt[2 * l + 2] = f * x * s_ll
            nxt[0] = f * y * s_ll
        else:
            nxt[2 * l + 2] = f * (x * s_ll - y * s_lml)
            nxt[0] = f * (y * s_ll + x * s_lml)
        for mm in range(-l, l + 1):
            a = (2 * l + 1) * z * prev[l + mm]
            if abs(mm) <= l - 1:
                a = a - math.sqrt((l + mm) * (l - mm)) * r2 * S[l - 1][l - 1 + mm]
            nxt[l + 1 + mm] = a / math.sqrt((l + mm + 1) * (l - mm + 1))
        S.append(nxt)
    return np.stack([col for row in S for col in row], axis=1)


def eval_basis(spec: BasisSpec, x) -> np.ndarray:
    """All basis elements at ``x``.

    ``x`` may be a single point (returns a vector of length
    ``basis_size(spec)``) or an ``(n, dim)`` array (returns ``(n, size)``).
    """
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != spec.dim:
        raise BasisError(f"points of dimension {X.shape[1]} for a {spec.dim}D basis")
    X = _local(spec, X)
    V = _eval2(X, spec.max_degree) if spec.dim == 2 else _eval3(X, spec.max_degree)
    return V[0] if single else V


@dataclass(frozen=True, eq=False)
class HarmonicPoly:
    """Coefficient vector over the basis described by ``spec``."""

    spec: BasisSpec
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).ravel()
        if len(c) != basis_size(self.spec):
            raise BasisError(f"expected {basis_size(self.spec)} coefficients, got {len(c)}")
        if not np.all(np.isfinite(c)):
            raise BasisError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zero(cls, spec: BasisSpec) -> HarmonicPoly:
        return cls(spec, np.zeros(basis_size(spec)))

    @property
    def degree(self) -> int:
        nz = np.flatnonzero(self.coeffs)
        return int(element_degrees(self.spec)[nz[-1]]) if len(nz) else 0

    def __call__(self, x):
        return eval(self, x)

    def padded(self, m: int) -> HarmonicPoly:
        """The same polynomial expressed in the degree-``m`` basis (m >= current)."""
        spec = self.spec.with_degree(m)
        c = np.zeros(basis_size(spec))
        c[: len(self.coeffs)] = self.coeffs
        return HarmonicPoly(spec, c)

    def __sub__(self, other: HarmonicPoly) -> HarmonicPoly:
        m = max(self.spec.max_degree, other.spec.max_degree)
        a, b = self.padded(m), other.padded(m)
        if (a.spec.center, a.spec.scale) != (b.spec.center, b.spec.scale):
            raise BasisError("cannot combine polynomials over different coordinates")
        return HarmonicPoly(a.spec, a.coeffs - b.coeffs)

    def to_dict(self) -> dict:
        d = {"dim": self.spec.dim, "max_degree": self.spec.max_degree, "coeffs": [float(c) for c in self.coeffs]}
        if self.spec.center is not None:
            d["center"] = list(self.spec.center)
        if self.spec.scale != 1.0:
            d["scale"] = self.spec.scale
        return d

    @classmethod
    def from_dict(cls, d: dict) -> HarmonicPoly:
        spec = BasisSpec(d["dim"], d["max_degree"], d.get("center"), d.get("scale", 1.0))
        return cls(spec, d["coeffs"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> HarmonicPoly:
        return cls.from_dict(json.loads(text))


def eval(p: HarmonicPoly, x):  # noqa: A001 - mirrors the operation name
    """Value of ``p`` at a point or at the rows of an array."""
    return eval_basis(p.spec, x) @ p.coeffs


def sup_norm(p: HarmonicPoly, S) -> float:
    """``max |p|`` over the samples of ``S`` (a SampledSet or point array)."""
    pts = getattr(S, "points", S)
    if len(pts) == 0:
        raise BasisError("sup norm over an empty set")
    return float(np.max(np.abs(eval(p, pts))))
