"""Shared domain model: points, convex domains, maps, dual lines, verdicts."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import linprog


class DimensionMismatchError(ValueError):
    pass


class EvaluationError(RuntimeError):
    """A map selection failed to evaluate at a concrete point."""


class DomainSpecError(ValueError):
    """Malformed domain mini-syntax."""


def as_point(coords) -> np.ndarray:
    """Validate and return a finite 1-D float vector."""
    p = np.asarray(coords, dtype=float)
    if p.ndim != 1:
        raise ValueError(f"point must be 1-D, got shape {p.shape}")
    if p.size == 0:
        raise ValueError("point must be nonempty")
    if not np.all(np.isfinite(p)):
        raise ValueError("point has non-finite entries")
    return p


# ---------------------------------------------------------------------------
# Tolerances


@dataclass(frozen=True)
class TolerancePolicy:
    """Numerical realization of strict vs non-strict inequalities.

    A premise "> 0" fires only above ``premise_eps``; a conclusion ">= 0"
    fails only below ``-slack``.  ``scale`` multiplies both knobs so callers
    working with rescaled values can keep predicates invariant; it is never
    adjusted implicitly.
    """

    strict_premise_eps: float = 0.0
    conclusion_slack: float = 1e-9
    orth_tol: float = 1e-10
    eig_tol: float = 1e-8
    fd_step: float = 1e-6
    scale: float = 1.0

    @property
    def premise_eps(self) -> float:
        return self.strict_premise_eps * self.scale

    @property
    def slack(self) -> float:
        return self.conclusion_slack * self.scale

    def with_scale(self, scale: float) -> "TolerancePolicy":
        return replace(self, scale=float(scale))


# ---------------------------------------------------------------------------
# Convex domains


class ConvexDomain:
    """Base class for the three supported convex-set variants."""

    ambient_dim: int

    def contains(self, p, tol: float = 1e-9) -> bool:
        raise NotImplementedError

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def clamp(self, p) -> np.ndarray:
        """Push a nearby point back into the set."""
        raise NotImplementedError

    def snapped(self, p: np.ndarray, counter: int) -> np.ndarray:
        """Deterministically snap a point toward a special value (bound,
        zero, vertex).  Used by the falsifier's structured sample tranche."""
        raise NotImplementedError

    def diameter_scale(self) -> float:
        raise NotImplementedError

    def inner_spread(self, v: np.ndarray) -> float:
        """Exact max - min of <v, p> over the set."""
        raise NotImplementedError


@dataclass(frozen=True)
class Box(ConvexDomain):
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", as_point(self.lo))
        object.__setattr__(self, "hi", as_point(self.hi))
        if self.lo.shape != self.hi.shape:
            raise DimensionMismatchError("box lo/hi dimension mismatch")
        if np.any(self.lo > self.hi):
            raise ValueError("box requires lo <= hi componentwise")

    @property
    def ambient_dim(self) -> int:
        return self.lo.size

    def contains(self, p, tol: float = 1e-9) -> bool:
        p = as_point(p)
        if p.size != self.ambient_dim:
            raise DimensionMismatchError("point/box dimension mismatch")
        pad = tol * (1.0 + np.maximum(np.abs(self.lo), np.abs(self.hi)))
        return bool(np.all(p >= self.lo - pad) and np.all(p <= self.hi + pad))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        u = rng.random((n, self.ambient_dim))
        return self.lo + u * (self.hi - self.lo)

    def clamp(self, p) -> np.ndarray:
        return np.clip(np.asarray(p, float), self.lo, self.hi)

    def snapped(self, p: np.ndarray, counter: int) -> np.ndarray:
        q = np.array(p, copy=True)
        d = self.ambient_dim
        j = (counter // 3) % d
        which = counter % 3
        if which == 0:
            val = 0.0 if self.lo[j] <= 0.0 <= self.hi[j] else 0.5 * (self.lo[j] + self.hi[j])
        elif which == 1:
            val = self.lo[j]
        else:
            val = self.hi[j]
        q[j] = val
        return q

    def diameter_scale(self) -> float:
        return float(np.max(self.hi - self.lo))

    def inner_spread(self, v: np.ndarray) -> float:
        return float(np.sum(np.abs(v) * (self.hi - self.lo)))

    def corners(self) -> np.ndarray:
        d = self.ambient_dim
        if d > 16:
            raise ValueError("corner enumeration limited to dimension 16")
        out = np.empty((2 ** d, d))
        for i in range(2 ** d):
            for j in range(d):
                out[i, j] = self.hi[j] if (i >> j) & 1 else self.lo[j]
        return out


@dataclass(frozen=True)
class VertexPolytope(ConvexDomain):
    vertices: np.ndarray  # (m, ambient_dim)

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[0] < 1:
            raise ValueError("polytope needs at least one vertex, shape (m, d)")
        if not np.all(np.isfinite(v)):
            raise ValueError("polytope vertices must be finite")
        object.__setattr__(self, "vertices", v)

    @property
    def ambient_dim(self) -> int:
        return self.vertices.shape[1]

    def contains(self, p, tol: float = 1e-9) -> bool:
        p = as_point(p)
        if p.size != self.ambient_dim:
            raise DimensionMismatchError("point/polytope dimension mismatch")
        m, d = self.vertices.shape
        if m == 1:
            return bool(np.max(np.abs(self.vertices[0] - p)) <= tol * (1 + np.max(np.abs(p))))
        # minimize t s.t. |V^T w - p|_inf <= t, sum w = 1, w >= 0
        c = np.zeros(m + 1)
        c[-1] = 1.0
        a_ub = np.zeros((2 * d, m + 1))
        b_ub = np.zeros(2 * d)
        a_ub[:d, :m] = self.vertices.T
        a_ub[:d, -1] = -1.0
        b_ub[:d] = p
        a_ub[d:, :m] = -self.vertices.T
        a_ub[d:, -1] = -1.0
        b_ub[d:] = -p
        a_eq = np.zeros((1, m + 1))
        a_eq[0, :m] = 1.0
        res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0],
                      bounds=[(0, None)] * m + [(0, None)], method="highs")
        if not res.success:
            return False
        return bool(res.x[-1] <= tol * (1 + np.max(np.abs(p))) + 1e-12)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        m = self.vertices.shape[0]
        if m == 1:
            return np.repeat(self.vertices, n, axis=0)
        # sorted-uniform-spacings simplex weights
        u = np.sort(rng.random((n, m - 1)), axis=1)
        w = np.diff(np.concatenate(
            [np.zeros((n, 1)), u, np.ones((n, 1))], axis=1), axis=1)
        return w @ self.vertices

    def clamp(self, p) -> np.ndarray:
        p = np.asarray(p, float)
        m = self.vertices.shape[0]
        if m == 1:
            return self.vertices[0].copy()
        # least-squares barycentric weights, clamp negatives, renormalize
        a = np.vstack([self.vertices.T, np.ones(m)])
        b = np.concatenate([p, [1.0]])
        w, *_ = np.linalg.lstsq(a, b, rcond=None)
        w = np.maximum(w, 0.0)
        s = w.sum()
        w = w / s if s > 0 else np.full(m, 1.0 / m)
        return w @ self.vertices

    def snapped(self, p: np.ndarray, counter: int) -> np.ndarray:
        m = self.vertices.shape[0]
        k = counter % (m + 1)
        if k == m:
            return self.vertices.mean(axis=0)
        return self.vertices[k].copy()

    def diameter_scale(self) -> float:
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return float(max(np.max(hi - lo), 1e-30))

    def inner_spread(self, v: np.ndarray) -> float:
        vals = self.vertices @ v
        return float(vals.max() - vals.min())


@dataclass(frozen=True)
class AffineSlice(ConvexDomain):
    """base + sum c_i dirs_i with c in a coordinate box; dirs orthonormal."""

    base: np.ndarray
    dirs: np.ndarray  # (k, ambient_dim), rows orthonormal
    lo: np.ndarray    # (k,)
    hi: np.ndarray    # (k,)

    def __post_init__(self):
        object.__setattr__(self, "base", as_point(self.base))
        d = np.asarray(self.dirs, dtype=float)
        if d.ndim != 2 or d.shape[1] != self.base.size:
            raise DimensionMismatchError("dirs must have shape (k, ambient_dim)")
        gram = d @ d.T
        if np.max(np.abs(gram - np.eye(d.shape[0]))) > 1e-10:
            raise ValueError("slice directions must be pairwise orthonormal")
        object.__setattr__(self, "dirs", d)
        object.__setattr__(self, "lo", as_point(self.lo))
        object.__setattr__(self, "hi", as_point(self.hi))
        if self.lo.size != d.shape[0] or self.hi.size != d.shape[0]:
            raise DimensionMismatchError("slice box dimension mismatch")
        if np.any(self.lo > self.hi):
            raise ValueError("slice box requires lo <= hi")

    @property
    def ambient_dim(self) -> int:
        return self.base.size

    @property
    def slice_dim(self) -> int:
        return self.dirs.shape[0]

    def coords(self, p) -> np.ndarray:
        return (np.asarray(p, float) - self.base) @ self.dirs.T

    def embed(self, c) -> np.ndarray:
        return self.base + np.asarray(c, float) @ self.dirs

    def contains(self, p, tol: float = 1e-10) -> bool:
        p = as_point(p)
        if p.size != self.ambient_dim:
            raise DimensionMismatchError("point/slice dimension mismatch")
        c = self.coords(p)
        off_plane = p - self.embed(c)
        if np.linalg.norm(off_plane) > tol * (1 + np.linalg.norm(p)):
            return False
        pad = 1e-9 * (1.0 + np.maximum(np.abs(self.lo), np.abs(self.hi)))
        return bool(np.all(c >= self.lo - pad) and np.all(c <= self.hi + pad))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        u = rng.random((n, self.slice_dim))
        c = self.lo + u * (self.hi - self.lo)
        return self.embed(c)

    def clamp(self, p) -> np.ndarray:
        c = np.clip(self.coords(p), self.lo, self.hi)
        return self.embed(c)

    def snapped(self, p: np.ndarray, counter: int) -> np.ndarray:
        c = np.clip(self.coords(p), self.lo, self.hi)
        k = self.slice_dim
        j = (counter // 3) % k
        which = counter % 3
        if which == 0:
            val = 0.0 if self.lo[j] <= 0.0 <= self.hi[j] else 0.5 * (self.lo[j] + self.hi[j])
        elif which == 1:
            val = self.lo[j]
        else:
            val = self.hi[j]
        c[j] = val
        return self.embed(c)

    def diameter_scale(self) -> float:
        return float(np.max(self.hi - self.lo))

    def inner_spread(self, v: np.ndarray) -> float:
        # <v, p> varies only through the slice coordinates
        proj = self.dirs @ v
        return float(np.sum(np.abs(proj) * (self.hi - self.lo)))


# ---------------------------------------------------------------------------
# Maps and lines


@dataclass(frozen=True)
class TestMap:
    """An evaluable map with one or more selections (finite set-valuedness).

    Selections are pure functions accepting arrays of shape (..., dim_in)
    and returning (..., dim_out).
    """

    __test__ = False  # "Test" prefix, but not a test case

    name: str
    dim_in: int
    dim_out: int
    selections: tuple
    analytic_jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.dim_in < 1 or self.dim_out < 1:
            raise ValueError("map dimensions must be positive")
        if len(self.selections) < 1:
            raise ValueError("map needs at least one selection")
        object.__setattr__(self, "selections", tuple(self.selections))

    @property
    def n_selections(self) -> int:
        return len(self.selections)

    def eval_selection(self, i: int, pts) -> np.ndarray:
        pts = np.asarray(pts, float)
        try:
            out = np.asarray(self.selections[i](pts), float)
        except Exception as exc:  # surfaced with the offending point
            bad = pts if pts.ndim == 1 else pts[0]
            raise EvaluationError(
                f"map {self.name!r} selection {i} failed near point "
                f"{np.array2string(np.atleast_1d(bad), precision=6)}: {exc}") from exc
        want = pts.shape[:-1] + (self.dim_out,)
        if out.shape != want:
            raise EvaluationError(
                f"map {self.name!r} selection {i} returned shape {out.shape}, "
                f"expected {want}")
        if not np.all(np.isfinite(out)):
            idx = np.argwhere(~np.isfinite(out).all(axis=-1))
            bad = pts[tuple(idx[0])] if pts.ndim > 1 else pts
            raise EvaluationError(
                f"map {self.name!r} selection {i} produced non-finite value at "
                f"{np.array2string(np.atleast_1d(bad), precision=6)}")
        return out


@dataclass(frozen=True)
class DualLine:
    """The line {u + lambda * v} in the dual space, with a finite lambda grid."""

    u: np.ndarray
    v: np.ndarray
    lambda_grid: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "u", as_point(self.u))
        object.__setattr__(self, "v", as_point(self.v))
        if self.u.shape != self.v.shape:
            raise DimensionMismatchError("line u/v dimension mismatch")
        if np.linalg.norm(self.v) == 0.0:
            raise ValueError("line direction v must be nonzero")
        g = np.asarray(self.lambda_grid, dtype=float)
        if g.ndim != 1 or g.size == 0:
            raise ValueError("lambda grid must be a nonempty 1-D list")
        if np.any(np.diff(g) <= 0):
            raise ValueError("lambda grid must be strictly increasing")
        object.__setattr__(self, "lambda_grid", g)

    def omega(self, lam: float) -> np.ndarray:
        return self.u + lam * self.v


# ---------------------------------------------------------------------------
# Verdicts


@dataclass(frozen=True)
class ViolationWitness:
    x: np.ndarray
    y: np.ndarray
    fx: np.ndarray
    fy: np.ndarray
    sel_x: int
    sel_y: int
    lhs: float
    rhs: float
    margin: float


@dataclass(frozen=True)
class PropertyVerdict:
    property: str            # monotone | strict | strong | pseudo | quasi
    status: str              # no_violation_found | falsified
    witness: Optional[ViolationWitness]
    samples_used: int
    seed: int
    tolerances: TolerancePolicy
    strong_modulus: Optional[float] = None
    empirical_modulus: Optional[float] = None

    def __post_init__(self):
        if (self.status == "falsified") != (self.witness is not None):
            raise ValueError("status falsified iff witness present")

    @property
    def falsified(self) -> bool:
        return self.status == "falsified"


# ---------------------------------------------------------------------------
# Operations


def domain_contains(d: ConvexDomain, p, tol: float = 1e-9) -> bool:
    return d.contains(p, tol)


def domain_sample(d: ConvexDomain, n: int, seed: int) -> np.ndarray:
    if n < 1:
        raise ValueError("sample count must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed)]))
    return d.sample(n, rng)


def segment_sample(x, y, k: int) -> np.ndarray:
    x = as_point(x)
    y = as_point(y)
    if x.shape != y.shape:
        raise DimensionMismatchError("segment endpoint dimension mismatch")
    if k < 2:
        raise ValueError("segment sample needs k >= 2")
    lam = np.arange(k) / (k - 1)
    return (1.0 - lam)[:, None] * x + lam[:, None] * y


# ---------------------------------------------------------------------------
# Domain mini-syntax, e.g.  box:-1,-1:1,1
#                           slice:base=0,0,0;dirs=e1,e2;box=-5:5
#                           poly:v1=0,0;v2=1,0;v3=0,1


def _csv_floats(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",")])
    except ValueError as exc:
        raise DomainSpecError(f"bad number list {text!r}") from exc


def parse_domain(spec: str) -> ConvexDomain:
    spec = spec.strip()
    if ":" not in spec:
        raise DomainSpecError(f"domain spec {spec!r} missing variant prefix")
    kind, _, rest = spec.partition(":")
    if kind == "box":
        parts = rest.split(":")
        if len(parts) != 2:
            raise DomainSpecError(f"box spec {rest!r} must be LO:HI")
        return Box(_csv_floats(parts[0]), _csv_floats(parts[1]))
    if kind == "poly":
        verts = []
        for item in rest.split(";"):
            if not item:
                continue
            _, _, val = item.partition("=")
            verts.append(_csv_floats(val if val else item))
        if not verts:
            raise DomainSpecError(f"poly spec {rest!r} has no vertices")
        return VertexPolytope(np.array(verts))
    if kind == "slice":
        fields = {}
        for item in rest.split(";"):
            key, _, val = item.partition("=")
            fields[key.strip()] = val.strip()
        for need in ("base", "dirs", "box"):
            if need not in fields:
                raise DomainSpecError(f"slice spec missing {need!r}")
        base = _csv_floats(fields["base"])
        dirs = []
        for token in fields["dirs"].split("|" if "|" in fields["dirs"] else ","):
            token = token.strip()
            if token.startswith("e") and token[1:].isdigit():
                i = int(token[1:]) - 1
                if not 0 <= i < base.size:
                    raise DomainSpecError(f"unit direction {token!r} out of range")
                e = np.zeros(base.size)
                e[i] = 1.0
                dirs.append(e)
            else:
                dirs.append(_csv_floats(token))
        k = len(dirs)
        box = fields["box"]
        lo_s, _, hi_s = box.partition(":")
        lo = _csv_floats(lo_s)
        hi = _csv_floats(hi_s)
        if lo.size == 1 and k > 1:
            lo = np.full(k, lo[0])
            hi = np.full(k, hi[0])
        return AffineSlice(base, np.array(dirs), lo, hi)
    raise DomainSpecError(f"unknown domain variant {kind!r}")


def format_domain(d: ConvexDomain) -> str:
    if isinstance(d, Box):
        return "box:%s:%s" % (",".join(repr(float(v)) for v in d.lo),
                              ",".join(repr(float(v)) for v in d.hi))
    if isinstance(d, VertexPolytope):
        return "poly:" + ";".join(
            "v%d=%s" % (i + 1, ",".join(repr(float(x)) for x in v))
            for i, v in enumerate(d.vertices))
    if isinstance(d, AffineSlice):
        return "slice:base=%s;dirs=%s;box=%s:%s" % (
            ",".join(repr(float(v)) for v in d.base),
            "|".join(",".join(repr(float(x)) for x in row) for row in d.dirs),
            ",".join(repr(float(v)) for v in d.lo),
            ",".join(repr(float(v)) for v in d.hi))
    raise TypeError(f"unknown domain type {type(d)!r}")
