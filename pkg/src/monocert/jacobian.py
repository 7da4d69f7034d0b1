"""Sampled Clarke generalized Jacobian estimation and PSD classification."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from .core import (
    AffineSlice,
    ConvexDomain,
    TestMap,
    TolerancePolicy,
    ViolationWitness,
    as_point,
    segment_sample,
)
from .monotonicity import PairEvaluation, _seed_rng


class JacobianError(RuntimeError):
    pass


@dataclass(frozen=True)
class MatrixHull:
    """Finite generator surrogate for the convex hull of limiting Jacobians."""

    generators: tuple       # tuple of (k, k) arrays
    center: np.ndarray
    radius: float
    fd_step: float

    def __post_init__(self):
        gens = tuple(np.asarray(g, float) for g in self.generators)
        if not gens:
            raise ValueError("matrix hull needs at least one generator")
        shape = gens[0].shape
        for g in gens:
            if g.shape != shape:
                raise ValueError("hull generators must share dimensions")
            if not np.all(np.isfinite(g)):
                raise ValueError("hull generators must be finite")
        object.__setattr__(self, "generators", gens)


@dataclass(frozen=True)
class PsdReport:
    verdict: str                      # psd | pd | indefinite
    min_eigenvalue: float
    witness_direction: Optional[np.ndarray]


def _tangent_basis(domain: Optional[ConvexDomain], dim: int) -> np.ndarray:
    """Directions spanning the domain; slices restrict to their plane."""
    if isinstance(domain, AffineSlice):
        return domain.dirs
    return np.eye(dim)


def fd_jacobian(F: TestMap, x, h: float, domain: Optional[ConvexDomain] = None,
                selection: int = 0, detail: bool = False):
    """Central-difference Jacobian, one-sided where the domain blocks a step.

    For AffineSlice domains the result is the slice-restricted matrix: rows
    and columns are expressed in the slice's orthonormal coordinates.
    """
    if h <= 0:
        raise ValueError("fd step must be positive")
    x = as_point(x)
    basis = _tangent_basis(domain, x.size)
    k = basis.shape[0]
    plus = np.empty((k, x.size))
    minus = np.empty((k, x.size))
    one_sided = []
    for i in range(k):
        xp = x + h * basis[i]
        xm = x - h * basis[i]
        ok_p = domain is None or domain.contains(xp, 1e-9)
        ok_m = domain is None or domain.contains(xm, 1e-9)
        if ok_p and ok_m:
            plus[i], minus[i] = xp, xm
        elif ok_p:
            plus[i], minus[i] = xp, x
            one_sided.append(i)
        elif ok_m:
            plus[i], minus[i] = x, xm
            one_sided.append(i)
        else:
            raise JacobianError(
                f"cannot step along direction {i} at point {x} within the domain")
    fp = F.eval_selection(selection, plus)
    fm = F.eval_selection(selection, minus)
    if isinstance(domain, AffineSlice):
        fp = fp @ basis.T
        fm = fm @ basis.T
    cols = np.empty((k, fp.shape[1]))
    for i in range(k):
        step = np.linalg.norm(plus[i] - minus[i])
        cols[i] = (fp[i] - fm[i]) / step
    jac = cols.T
    if detail:
        return jac, tuple(one_sided)
    return jac


def estimate_clarke(F: TestMap, x, radius: float, m: int, h: float, seed: int,
                    domain: Optional[ConvexDomain] = None,
                    dedup_tol: float = 1e-8) -> MatrixHull:
    """Finite Jacobians sampled in a ball around x, deduplicated in max-norm."""
    if m < 1:
        raise ValueError("sample count must be >= 1")
    if radius <= h:
        raise ValueError("sampling radius must exceed the fd step")
    x = as_point(x)
    rng = _seed_rng(seed, 11)
    basis = _tangent_basis(domain, x.size)
    k = basis.shape[0]
    pts = []
    attempts = 0
    while len(pts) < m and attempts < 50 * m:
        attempts += 1
        d = rng.normal(size=k)
        n = np.linalg.norm(d)
        if n == 0:
            continue
        r = radius * rng.random() ** (1.0 / k)
        p = x + (r / n) * (d @ basis)
        if domain is None or domain.contains(p, 1e-9):
            pts.append(p)
    if not pts:
        raise JacobianError(
            f"no ball sample around {x} with radius {radius} lies in the domain")
    gens = []
    for p in pts:
        jac = fd_jacobian(F, p, h, domain=domain)
        if all(np.max(np.abs(jac - g)) >= dedup_tol for g in gens):
            gens.append(jac)
    return MatrixHull(generators=tuple(gens), center=x,
                      radius=float(radius), fd_step=float(h))


def psd_check(hull: MatrixHull, tol: Optional[TolerancePolicy] = None) -> PsdReport:
    """Classify via symmetric parts; PSD generators imply a PSD hull."""
    tol = tol or TolerancePolicy()
    min_eig = np.inf
    witness = None
    for g in hull.generators:
        sym = 0.5 * (g + g.T)
        w, vec = np.linalg.eigh(sym)
        if w[0] < min_eig:
            min_eig = float(w[0])
            witness = vec[:, 0]
    if min_eig < -tol.eig_tol:
        return PsdReport("indefinite", min_eig, witness)
    if min_eig >= tol.eig_tol:
        return PsdReport("pd", min_eig, None)
    return PsdReport("psd", min_eig, None)


def contradiction_probe(F: TestMap, x, hull: MatrixHull,
                        tol: Optional[TolerancePolicy] = None,
                        domain: Optional[ConvexDomain] = None
                        ) -> Optional[ViolationWitness]:
    """Turn an indefinite hull direction into a concrete monotonicity witness
    by probing ever smaller steps along it."""
    tol = tol or TolerancePolicy()
    report = psd_check(hull, tol)
    if report.verdict != "indefinite":
        return None
    x = as_point(x)
    basis = _tangent_basis(domain, x.size)
    u = report.witness_direction @ basis
    fx = F.eval_selection(0, x[None, :])[0]
    for t in 10.0 ** -np.arange(1, 7):
        y = x + (t * hull.radius) * u
        if domain is not None:
            y = domain.clamp(y)
        fy = F.eval_selection(0, y[None, :])[0]
        val = float(np.dot(y - x, fy - fx))
        if val < -tol.slack:
            return ViolationWitness(
                x=y, y=x, fx=fy, fy=fx, sel_x=0, sel_y=0,
                lhs=val, rhs=0.0, margin=val)
    return None


def simplex_distance(vectors: np.ndarray, target: np.ndarray):
    """Distance from target to the convex hull of the row vectors."""
    q = vectors.shape[0]
    best_w = None
    best = np.inf
    for i in range(q):  # single-vertex candidates keep the solver honest
        d = np.linalg.norm(vectors[i] - target)
        if d < best:
            best = d
            best_w = np.eye(q)[i]
    if q > 1:
        def objective(w):
            r = w @ vectors - target
            return 0.5 * float(np.dot(r, r)), vectors @ r
        w0 = np.full(q, 1.0 / q)
        res = minimize(objective, w0, jac=True, method="SLSQP",
                       bounds=[(0.0, 1.0)] * q,
                       constraints=[{"type": "eq", "fun": lambda w: np.sum(w) - 1.0,
                                     "jac": lambda w: np.ones_like(w)}],
                       options={"maxiter": 200, "ftol": 1e-18})
        w = np.maximum(res.x, 0.0)
        s = w.sum()
        if s > 0:
            w = w / s
            d = np.linalg.norm(w @ vectors - target)
            if d < best:
                best = d
                best_w = w
    return float(best), best_w


@dataclass(frozen=True)
class MvtReport:
    x: np.ndarray
    y: np.ndarray
    difference: np.ndarray      # F(x) - F(y), in chart coordinates
    distance: float
    threshold: float
    included: bool
    hull_sizes: tuple


def mvt_inclusion(F: TestMap, x, y, k: int,
                  tol: Optional[TolerancePolicy] = None,
                  domain: Optional[ConvexDomain] = None,
                  radius: float = 1e-4, m: int = 8, h: float = 1e-7,
                  seed: int = 0) -> MvtReport:
    """Check F(x)-F(y) against the hull of {G (x-y)} for Clarke hulls G
    estimated along the segment [x, y]."""
    tol = tol or TolerancePolicy()
    x = as_point(x)
    y = as_point(y)
    pts = segment_sample(x, y, k)
    basis = _tangent_basis(domain, x.size)
    d_chart = (x - y) @ basis.T if isinstance(domain, AffineSlice) else (x - y)
    fx = F.eval_selection(0, x[None, :])[0]
    fy = F.eval_selection(0, y[None, :])[0]
    diff = (fx - fy) @ basis.T if isinstance(domain, AffineSlice) else (fx - fy)
    vectors = []
    sizes = []
    for idx, p in enumerate(pts):
        hull = estimate_clarke(F, p, radius, m, h, seed=seed * 1000 + idx,
                               domain=domain)
        sizes.append(len(hull.generators))
        for g in hull.generators:
            vectors.append(g @ d_chart)
    distance, _ = simplex_distance(np.array(vectors), diff)
    threshold = 1e-3 * (1.0 + np.linalg.norm(diff))
    return MvtReport(x=x, y=y, difference=diff, distance=distance,
                     threshold=float(threshold),
                     included=bool(distance <= threshold),
                     hull_sizes=tuple(sizes))


def probe_witness_is_monotone_violation(w: ViolationWitness,
                                        tol: Optional[TolerancePolicy] = None) -> bool:
    tol = tol or TolerancePolicy()
    e = PairEvaluation(w.x, w.y, w.fx, w.fy, w.sel_x, w.sel_y)
    return e.d_inner < -tol.slack
