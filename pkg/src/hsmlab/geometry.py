"""Domains in R^N (N = 1, 2, 3): membership, boundary distance, and
directional distance along lines.

A domain is an open, nonempty, proper subset of R^N.  Supported shapes:
finite unions of open intervals (1D), simple polygons (2D), balls,
axis-aligned boxes, and bounded convex polytopes given by half-spaces.
All queries are pure; domain objects are immutable after construction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog


class DomainError(ValueError):
    """Raised when a query violates a domain contract (e.g. x outside)."""


class DomainSpecError(ValueError):
    """Raised by the spec-file loader; carries the offending key path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


_VERTEX_TOL = 1e-9          # edge-parameter window treated as a vertex hit
_TANGENT_ROT = 1e-12        # ray rotation used to resolve vertex tangency


def direction(components) -> np.ndarray:
    """Validate a unit vector (|e| = 1 within 1e-12) and return it as an array."""
    e = np.atleast_1d(np.asarray(components, dtype=float))
    if abs(np.linalg.norm(e) - 1.0) > 1e-12:
        raise DomainError(f"direction is not unit length: |e| = {np.linalg.norm(e)!r}")
    return e


def _as_points(x, dim):
    X = np.asarray(x, dtype=float)
    if X.ndim == 1:
        if X.shape[0] != dim:
            raise DomainError(f"point has dimension {X.shape[0]}, domain has {dim}")
        return X[None, :], True
    if X.shape[1] != dim:
        raise DomainError(f"points have dimension {X.shape[1]}, domain has {dim}")
    return X, False


class Domain:
    """Base class; concrete shapes implement the vectorized queries."""

    dim: int
    convex: bool

    def bounding_box(self):
        raise NotImplementedError

    def diameter(self) -> float:
        lo, hi = self.bounding_box()
        return float(np.linalg.norm(np.asarray(hi) - np.asarray(lo)))

    def contains_many(self, X) -> np.ndarray:
        raise NotImplementedError

    def contains(self, x) -> bool:
        X, _ = _as_points(x, self.dim)
        return bool(self.contains_many(X)[0])

    def boundary_distances(self, X) -> np.ndarray:
        raise NotImplementedError

    def boundary_distance(self, x) -> float:
        X, _ = _as_points(x, self.dim)
        if not self.contains_many(X)[0]:
            raise DomainError(f"point {x} is not inside the domain")
        return float(self.boundary_distances(X)[0])

    def directional_distances(self, x, dirs) -> np.ndarray:
        """d_e(x) for each row e of ``dirs``: smallest |t| with x + t e outside.

        The minimum runs over both signs of t, so d_e = d_{-e}.  +inf marks
        directions along which the full line stays inside.
        """
        raise NotImplementedError

    def directional_distances_many(self, X, dirs) -> np.ndarray:
        """(n_points, n_dirs) table of directional distances (no membership check)."""
        return np.stack([self.directional_distances(x, dirs) for x in np.asarray(X, dtype=float)])


# ---------------------------------------------------------------------------
# 1D interval unions


@dataclass(frozen=True)
class IntervalUnion(Domain):
    intervals: tuple  # sorted tuple of (a, b) pairs, a < b, pairwise disjoint

    dim = 1

    def __post_init__(self):
        ivs = tuple((float(a), float(b)) for a, b in self.intervals)
        if not ivs:
            raise DomainError("interval union is empty")
        for a, b in ivs:
            if not a < b:
                raise DomainError(f"interval ({a}, {b}) has nonpositive length")
        ivs = tuple(sorted(ivs))
        for (a1, b1), (a2, b2) in zip(ivs, ivs[1:]):
            if a2 < b1:
                raise DomainError(f"intervals ({a1}, {b1}) and ({a2}, {b2}) overlap")
        if math.isinf(ivs[0][0]) and math.isinf(ivs[-1][1]) and len(ivs) == 1:
            raise DomainError("domain must be a proper subset of R")
        object.__setattr__(self, "intervals", ivs)

    @property
    def convex(self) -> bool:
        return len(self.intervals) == 1

    def bounding_box(self):
        return (np.array([self.intervals[0][0]]), np.array([self.intervals[-1][1]]))

    def _component(self, x: float):
        for a, b in self.intervals:
            if a < x < b:
                return a, b
        return None

    def contains_many(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float).reshape(-1)
        out = np.zeros(X.shape, dtype=bool)
        for a, b in self.intervals:
            out |= (X > a) & (X < b)
        return out

    def boundary_distances(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float).reshape(-1)
        out = np.full(X.shape, np.nan)
        for a, b in self.intervals:
            m = (X > a) & (X < b)
            out[m] = np.minimum(X[m] - a, b - X[m])
        return out

    def directional_distances(self, x, dirs) -> np.ndarray:
        x = float(np.atleast_1d(x)[0])
        comp = self._component(x)
        if comp is None:
            raise DomainError(f"point {x} is not inside the domain")
        a, b = comp
        d = min(x - a, b - x)   # nearest exit along the line, either sign
        dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
        return np.full(dirs.shape[0], d)


# ---------------------------------------------------------------------------
# Balls and boxes


@dataclass(frozen=True)
class Ball(Domain):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        if c.shape[0] not in (1, 2, 3):
            raise DomainError("ball dimension must be 1, 2 or 3")
        if not self.radius > 0:
            raise DomainError(f"ball radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    convex = True

    def bounding_box(self):
        return (self.center - self.radius, self.center + self.radius)

    def contains_many(self, X) -> np.ndarray:
        X, _ = _as_points(X, self.dim)
        return ((X - self.center) ** 2).sum(axis=1) < self.radius**2

    def boundary_distances(self, X) -> np.ndarray:
        X, _ = _as_points(X, self.dim)
        return self.radius - np.sqrt(((X - self.center) ** 2).sum(axis=1))

    def directional_distances(self, x, dirs) -> np.ndarray:
        X, _ = _as_points(x, self.dim)
        return self.directional_distances_many(X, dirs)[0]

    def directional_distances_many(self, X, dirs) -> np.ndarray:
        X, _ = _as_points(X, self.dim)
        dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
        v = X - self.center
        b = v @ dirs.T                                   # (n, M)
        c0 = (v**2).sum(axis=1) - self.radius**2          # negative inside
        if np.any(c0 >= 0):
            raise DomainError("directional distance queried outside the ball")
        return np.sqrt(b * b - c0[:, None]) - np.abs(b)


@dataclass(frozen=True)
class AxisBox(Domain):
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape or lo.shape[0] not in (1, 2, 3):
            raise DomainError("box corners must share a dimension in {1,2,3}")
        if not np.all(lo < hi):
            raise DomainError("box needs min corner < max corner componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    convex = True

    def bounding_box(self):
        return (self.lo.copy(), self.hi.copy())

    def contains_many(self, X) -> np.ndarray:
        X, _ = _as_points(X, self.dim)
        return np.all((X > self.lo) & (X < self.hi), axis=1)

    def boundary_distances(self, X) -> np.ndarray:
        X, _ = _as_points(X, self.dim)
        return np.minimum(X - self.lo, self.hi - X).min(axis=1)

    def directional_distances(self, x, dirs) -> np.ndarray:
        X, _ = _as_points(x, self.dim)
        return self.directional_distances_many(X, dirs)[0]

    def directional_distances_many(self, X, dirs) -> np.ndarray:
        # min over axes of (nearer face margin)/|e_axis|; two-sided minimum
        # over t collapses to the per-axis nearer face.
        X, _ = _as_points(X, self.dim)
        dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
        margins = np.minimum(X - self.lo, self.hi - X)    # (n, N)
        if np.any(margins <= 0):
            raise DomainError("directional distance queried outside the box")
        with np.errstate(divide="ignore"):
            inv = 1.0 / np.abs(dirs)                      # (M, N), inf where e_ax = 0
        d = margins[:, None, 0] * inv[None, :, 0]
        for ax in range(1, self.dim):
            np.minimum(d, margins[:, None, ax] * inv[None, :, ax], out=d)
        return d


# ---------------------------------------------------------------------------
# Convex polytopes (half-space intersections)


@dataclass(frozen=True)
class ConvexPolytope(Domain):
    normals: np.ndarray   # (k, N) rows a_i
    offsets: np.ndarray   # (k,)   the set is {x : a_i . x <= b_i}

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.normals, dtype=float))
        b = np.atleast_1d(np.asarray(self.offsets, dtype=float))
        if A.shape[0] != b.shape[0]:
            raise DomainError("normals and offsets disagree in count")
        if A.shape[1] not in (2, 3):
            raise DomainError("polytope dimension must be 2 or 3")
        if np.any(np.linalg.norm(A, axis=1) == 0):
            raise DomainError("zero normal vector in polytope")
        object.__setattr__(self, "normals", A)
        object.__setattr__(self, "offsets", b)
        lo, hi = self._extent_lp()
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise DomainError("polytope is unbounded")
        r = self._chebyshev_radius()
        if not r > 0:
            raise DomainError("polytope has empty interior")
        object.__setattr__(self, "_bbox", (lo, hi))

    @property
    def dim(self) -> int:
        return self.normals.shape[1]

    convex = True

    def _extent_lp(self):
        n = self.dim
        lo = np.empty(n)
        hi = np.empty(n)
        for j in range(n):
            c = np.zeros(n)
            c[j] = 1.0
            r1 = linprog(c, A_ub=self.normals, b_ub=self.offsets, bounds=[(None, None)] * n, method="highs")
            r2 = linprog(-c, A_ub=self.normals, b_ub=self.offsets, bounds=[(None, None)] * n, method="highs")
            lo[j] = r1.fun if r1.status == 0 else -np.inf
            hi[j] = -r2.fun if r2.status == 0 else np.inf
        return lo, hi

    def _chebyshev_radius(self) -> float:
        n = self.dim
        norms = np.linalg.norm(self.normals, axis=1)
        c = np.zeros(n + 1)
        c[-1] = -1.0
        A = np.hstack([self.normals, norms[:, None]])
        res = linprog(c, A_ub=A, b_ub=self.offsets, bounds=[(None, None)] * n + [(0, None)], method="highs")
        return float(res.x[-1]) if res.status == 0 else -1.0

    def bounding_box(self):
        lo, hi = self._bbox
        return lo.copy(), hi.copy()

    def contains_many(self, X) -> np.ndarray:
        X, _ = _as_points(X, self.dim)
        return np.all(X @ self.normals.T < self.offsets, axis=1)

    def boundary_distances(self, X) -> np.ndarray:
        X, _ = _as_points(X, self.dim)
        norms = np.linalg.norm(self.normals, axis=1)
        return ((self.offsets - X @ self.normals.T) / norms).min(axis=1)

    def directional_distances(self, x, dirs) -> np.ndarray:
        X, _ = _as_points(x, self.dim)
        return self.directional_distances_many(X, dirs)[0]

    def directional_distances_many(self, X, dirs) -> np.ndarray:
        # two-sided exit: min over faces of margin_i / |a_i . e|
        X, _ = _as_points(X, self.dim)
        dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
        margins = self.offsets - X @ self.normals.T       # (n, k)
        if np.any(margins <= 0):
            raise DomainError("directional distance queried outside the polytope")
        with np.errstate(divide="ignore"):
            inv = 1.0 / np.abs(dirs @ self.normals.T)     # (M, k)
        d = margins[:, None, 0] * inv[None, :, 0]
        for i in range(1, self.normals.shape[0]):
            np.minimum(d, margins[:, None, i] * inv[None, :, i], out=d)
        return d


# ---------------------------------------------------------------------------
# Simple polygons


def _segments_properly_intersect(p1, p2, q1, q2) -> bool:
    d1 = np.cross(q2 - q1, p1 - q1)
    d2 = np.cross(q2 - q1, p2 - q1)
    d3 = np.cross(p2 - p1, q1 - p1)
    d4 = np.cross(p2 - p1, q2 - p1)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))


@dataclass(frozen=True)
class Polygon(Domain):
    vertices: np.ndarray   # (n, 2), counter-clockwise

    dim = 2

    def __post_init__(self):
        V = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if V.shape[0] < 3 or V.shape[1] != 2:
            raise DomainError("polygon needs at least 3 planar vertices")
        if np.any(np.all(V == np.roll(V, -1, axis=0), axis=1)):
            raise DomainError("polygon has repeated consecutive vertices")
        area2 = float(np.cross(V, np.roll(V, -1, axis=0)).sum())
        if area2 == 0:
            raise DomainError("polygon is degenerate (zero area)")
        if area2 < 0:
            raise DomainError("polygon vertices must be counter-clockwise")
        n = V.shape[0]
        for i in range(n):
            for j in range(i + 1, n):
                if j == i or (j + 1) % n == i or (i + 1) % n == j:
                    continue
                if _segments_properly_intersect(V[i], V[(i + 1) % n], V[j], V[(j + 1) % n]):
                    raise DomainError(f"polygon is self-intersecting: edges {i} and {j} cross")
        object.__setattr__(self, "vertices", V)
        e = np.roll(V, -1, axis=0) - V
        cr = np.cross(e, np.roll(e, -1, axis=0))
        object.__setattr__(self, "_convex", bool(np.all(cr >= 0) or np.all(cr <= 0)))

    @property
    def convex(self) -> bool:
        return self._convex

    def bounding_box(self):
        return (self.vertices.min(axis=0), self.vertices.max(axis=0))

    def _edges(self):
        return self.vertices, np.roll(self.vertices, -1, axis=0)

    def contains_many(self, X) -> np.ndarray:
        # even-odd crossing with the half-open rule; boundary points excluded
        X, _ = _as_points(X, 2)
        P, Q = self._edges()
        inside = np.zeros(X.shape[0], dtype=bool)
        on_edge = np.zeros(X.shape[0], dtype=bool)
        for p, q in zip(P, Q):
            y1, y2 = p[1], q[1]
            cond = (y1 > X[:, 1]) != (y2 > X[:, 1])
            with np.errstate(divide="ignore", invalid="ignore"):
                xint = p[0] + (X[:, 1] - y1) * (q[0] - p[0]) / (y2 - y1)
            inside ^= cond & (X[:, 0] < xint)
            # exact on-segment test (open set semantics)
            seg = q - p
            rel = X - p
            cross = seg[0] * rel[:, 1] - seg[1] * rel[:, 0]
            t = (rel @ seg) / (seg @ seg)
            on_edge |= (cross == 0) & (t >= 0) & (t <= 1)
        return inside & ~on_edge

    def boundary_distances(self, X) -> np.ndarray:
        X, _ = _as_points(X, 2)
        P, Q = self._edges()
        best = np.full(X.shape[0], np.inf)
        for p, q in zip(P, Q):
            seg = q - p
            t = np.clip(((X - p) @ seg) / (seg @ seg), 0.0, 1.0)
            proj = p + t[:, None] * seg
            np.minimum(best, np.linalg.norm(X - proj, axis=1), out=best)
        return best

    def _ray_hits(self, x, dirs):
        """min |t| over boundary crossings for each direction; flags vertex grazing."""
        P, Q = self._edges()
        seg = Q - P                                  # (E, 2)
        rel = P - x                                  # (E, 2)
        ex, ey = dirs[:, 0:1], dirs[:, 1:2]          # (M, 1)
        denom = ex * seg[:, 1] - ey * seg[:, 0]      # (M, E)
        rel_x_seg = rel[:, 0] * seg[:, 1] - rel[:, 1] * seg[:, 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = rel_x_seg / denom
            u = (rel[:, 0] * ey - rel[:, 1] * ex) / denom
        ok = (np.abs(denom) > 0) & (u >= -_VERTEX_TOL) & (u <= 1 + _VERTEX_TOL) & np.isfinite(t)
        grazing = ok & ((np.abs(u) < _VERTEX_TOL) | (np.abs(u - 1.0) < _VERTEX_TOL))
        tt = np.where(ok & (np.abs(t) > 0), np.abs(t), np.inf)
        return tt.min(axis=1), grazing.any(axis=1)

    def directional_distances(self, x, dirs) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(2)
        if not self.contains(x):
            raise DomainError(f"point {x} is not inside the polygon")
        dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
        d, grazing = self._ray_hits(x, dirs)
        if grazing.any():
            # deterministic tangency fix: nudge grazing rays by a fixed angle
            rot = _TANGENT_ROT
            c, s = math.cos(rot), math.sin(rot)
            R = np.array([[c, -s], [s, c]])
            for attempt in range(6):
                sub = dirs[grazing] @ R.T
                d_sub, still = self._ray_hits(x, sub)
                d[grazing] = d_sub
                if not still.any():
                    break
                R = R @ R
        return d


# ---------------------------------------------------------------------------
# Spec'd operation aliases and the convexity comparison harness


def contains(domain: Domain, x) -> bool:
    """Open-set membership: True iff x lies strictly inside the domain."""
    return domain.contains(x)


def directional_distance(domain: Domain, x, e) -> float:
    """d_e(x): smallest |t| such that x + t e leaves the domain (may be +inf)."""
    e = direction(e)
    X, _ = _as_points(x, domain.dim)
    if not domain.contains_many(X)[0]:
        raise DomainError(f"point {x} is not inside the domain")
    return float(domain.directional_distances(X[0], e[None, :])[0])


def boundary_distance(domain: Domain, x) -> float:
    """Euclidean distance from an interior point to the complement."""
    return domain.boundary_distance(x)


def min_directional_distance_property(domain: Domain, x, quad, p: float = 2.0,
                                      tol: float = 1e-9) -> bool:
    """On a convex domain, check D(x) <= dist(x, boundary) + tol at one sample.

    Misuse guard: raises on non-convex domains, where the comparison is not
    expected to hold.
    """
    if not domain.convex:
        raise DomainError("convexity comparison called on a non-convex domain")
    from .sphere_weight import davies_weight

    return davies_weight(domain, x, p, quad) <= domain.boundary_distance(x) + tol


# ---------------------------------------------------------------------------
# Domain spec files
#
# JSON with a "dim" and "shape" key; shape-specific fields:
#   interval_union: {"intervals": [[a, b], ...]}
#   polygon:        {"vertices": [[x, y], ...]}
#   ball:           {"center": [...], "radius": r}
#   box:            {"min": [...], "max": [...]}
#   polytope:       {"normals": [[...], ...], "offsets": [...]}


def _need(obj, key, path):
    if key not in obj:
        raise DomainSpecError(f"{path}.{key}", "missing required key")
    return obj[key]


def domain_from_dict(spec: dict, path: str = "$") -> Domain:
    if not isinstance(spec, dict):
        raise DomainSpecError(path, "domain spec must be an object")
    shape = _need(spec, "shape", path)
    dim = _need(spec, "dim", path)
    try:
        if shape == "interval_union":
            if dim != 1:
                raise DomainSpecError(f"{path}.dim", "interval_union requires dim = 1")
            return IntervalUnion(tuple(map(tuple, _need(spec, "intervals", path))))
        if shape == "polygon":
            if dim != 2:
                raise DomainSpecError(f"{path}.dim", "polygon requires dim = 2")
            return Polygon(np.asarray(_need(spec, "vertices", path), dtype=float))
        if shape == "ball":
            dom = Ball(np.asarray(_need(spec, "center", path), dtype=float),
                       float(_need(spec, "radius", path)))
        elif shape == "box":
            dom = AxisBox(np.asarray(_need(spec, "min", path), dtype=float),
                          np.asarray(_need(spec, "max", path), dtype=float))
        elif shape == "polytope":
            dom = ConvexPolytope(np.asarray(_need(spec, "normals", path), dtype=float),
                                 np.asarray(_need(spec, "offsets", path), dtype=float))
        else:
            raise DomainSpecError(f"{path}.shape", f"unknown shape {shape!r}")
        if dom.dim != dim:
            raise DomainSpecError(f"{path}.dim", f"dim = {dim} does not match shape data ({dom.dim})")
        return dom
    except DomainError as err:
        raise DomainSpecError(f"{path}.{shape}", str(err)) from err


def load_domain(fname: str) -> Domain:
    """Load and validate a domain spec file; reports the first violation."""
    with open(fname) as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as err:
            raise DomainSpecError("$", f"not valid JSON: {err}") from err
    return domain_from_dict(spec)


def domain_to_dict(domain: Domain) -> dict:
    if isinstance(domain, IntervalUnion):
        return {"dim": 1, "shape": "interval_union", "intervals": [list(iv) for iv in domain.intervals]}
    if isinstance(domain, Polygon):
        return {"dim": 2, "shape": "polygon", "vertices": domain.vertices.tolist()}
    if isinstance(domain, Ball):
        return {"dim": domain.dim, "shape": "ball", "center": domain.center.tolist(), "radius": domain.radius}
    if isinstance(domain, AxisBox):
        return {"dim": domain.dim, "shape": "box", "min": domain.lo.tolist(), "max": domain.hi.tolist()}
    if isinstance(domain, ConvexPolytope):
        return {"dim": domain.dim, "shape": "polytope", "normals": domain.normals.tolist(),
                "offsets": domain.offsets.tolist()}
    raise TypeError(f"unknown domain type {type(domain)!r}")


def domain_hash(domain: Domain) -> str:
    import hashlib

    blob = json.dumps(domain_to_dict(domain), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def line_march_distance(domain: Domain, x, e, step: float, t_max: float) -> float:
    """Brute-force oracle: march along +/- e until the first exit, in steps."""
    e = direction(e)
    x = np.asarray(x, dtype=float)
    best = np.inf
    for sgn in (1.0, -1.0):
        t = step
        while t <= t_max:
            if not domain.contains(x + sgn * t * e):
                best = min(best, t)
                break
            t += step
    return best
