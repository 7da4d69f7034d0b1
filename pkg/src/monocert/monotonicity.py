"""Pairwise monotonicity predicates and the budgeted witness-search falsifier."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    ConvexDomain,
    DimensionMismatchError,
    PropertyVerdict,
    TestMap,
    TolerancePolicy,
    ViolationWitness,
    as_point,
    segment_sample,
)

# strongest to weakest
PROPERTY_ORDER = ("strong", "strict", "monotone", "pseudo", "quasi")


class DegeneratePairError(ValueError):
    pass


class FalsifyError(RuntimeError):
    pass


@dataclass(frozen=True)
class PairEvaluation:
    """Inner products of one ordered pair (x with value fx, y with value fy)."""

    x: np.ndarray
    y: np.ndarray
    fx: np.ndarray
    fy: np.ndarray
    sel_x: int = 0
    sel_y: int = 0

    @property
    def d_inner(self) -> float:
        return float(np.dot(self.fx - self.fy, self.x - self.y))

    @property
    def premise_inner(self) -> float:
        return float(np.dot(self.fy, self.x - self.y))

    @property
    def conclusion_inner(self) -> float:
        return float(np.dot(self.fx, self.x - self.y))

    @property
    def sq_dist(self) -> float:
        d = self.x - self.y
        return float(np.dot(d, d))


@dataclass(frozen=True)
class StrongParams:
    modulus: float

    def __post_init__(self):
        if not self.modulus > 0:
            raise ValueError("strong modulus must be > 0")


def pair_monotone(e: PairEvaluation, tol: TolerancePolicy) -> bool:
    return e.d_inner >= -tol.slack


def pair_strict(e: PairEvaluation, tol: TolerancePolicy) -> bool:
    if np.linalg.norm(e.x - e.y) <= tol.orth_tol:
        raise DegeneratePairError("strict monotonicity needs x != y")
    return e.d_inner > tol.premise_eps


def pair_strong(e: PairEvaluation, s: StrongParams, tol: TolerancePolicy) -> bool:
    # exact comparison: a scaled slack would let vanishing-derivative maps
    # pass any tiny modulus vacuously
    return e.d_inner >= s.modulus * e.sq_dist


def pair_pseudo(e: PairEvaluation, tol: TolerancePolicy) -> bool:
    if e.premise_inner < -tol.slack:
        return True
    return e.conclusion_inner >= -tol.slack


def pair_quasi(e: PairEvaluation, tol: TolerancePolicy) -> bool:
    if e.premise_inner <= tol.premise_eps:
        return True
    return e.conclusion_inner >= -tol.slack


# ---------------------------------------------------------------------------
# Vectorized batch machinery


@dataclass
class _SelectionPairArrays:
    sel_x: int
    sel_y: int
    premise: np.ndarray     # <F(ys), xs - ys>
    conclusion: np.ndarray  # <F(xs), xs - ys>
    d_inner: np.ndarray
    sq: np.ndarray


@dataclass
class _Batch:
    F: TestMap
    domain: ConvexDomain
    xs: np.ndarray
    ys: np.ndarray
    fxs: list          # per selection, values at xs
    fys: list          # per selection, values at ys
    pairs: list        # _SelectionPairArrays
    close_slice: slice  # index range of the close-pair tranche


def _seed_rng(seed: int, branch: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(branch)]))


def _draw_batch(F: TestMap, domain: ConvexDomain, budget: int, seed: int) -> _Batch:
    """Budget pairs: mostly two independent uniform streams, plus a snapped
    tranche (points pinned to bounds/zeros) and a close-pair tranche
    (y = x + t*d with t log-uniform down to 1e-6 of the domain scale).

    The structured tranches catch measure-thin violations that uniform pairs
    essentially never hit (e.g. pseudomonotonicity of x^2 fails only near
    y = 0; strong-modulus failures of x^3 only near the flat point).
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if F.dim_in != domain.ambient_dim:
        raise DimensionMismatchError("map/domain dimension mismatch")
    xs = domain.sample(budget, _seed_rng(seed, 0))
    ys = domain.sample(budget, _seed_rng(seed, 1))

    n_snap = budget // 8
    n_close = budget // 8
    snap_start = budget - n_snap - n_close
    close_start = budget - n_close

    for k in range(n_snap):
        i = snap_start + k
        if k % 2 == 0:
            ys[i] = domain.snapped(ys[i], k // 2)
        else:
            xs[i] = domain.snapped(xs[i], k // 2)

    if n_close:
        rng = _seed_rng(seed, 2)
        scale = domain.diameter_scale()
        t = scale * 10.0 ** rng.uniform(-6, -1, n_close)
        dirs = rng.normal(size=(n_close, domain.ambient_dim))
        norms = np.linalg.norm(dirs, axis=1, keepdims=True)
        dirs = dirs / np.where(norms > 0, norms, 1.0)
        for k in range(n_close):
            i = close_start + k
            if k % 2 == 0:  # half centered at snapped special points
                xs[i] = domain.snapped(xs[i], k)
            ys[i] = domain.clamp(xs[i] + t[k] * dirs[k])

    fxs = [F.eval_selection(i, xs) for i in range(F.n_selections)]
    fys = [F.eval_selection(i, ys) for i in range(F.n_selections)]
    d = xs - ys
    sq = np.einsum("ij,ij->i", d, d)
    pairs = []
    for i in range(F.n_selections):
        for j in range(F.n_selections):
            diff = fxs[i] - fys[j]
            pairs.append(_SelectionPairArrays(
                sel_x=i, sel_y=j,
                premise=np.einsum("ij,ij->i", fys[j], d),
                conclusion=np.einsum("ij,ij->i", fxs[i], d),
                d_inner=np.einsum("ij,ij->i", diff, d),
                sq=sq))
    return _Batch(F=F, domain=domain, xs=xs, ys=ys, fxs=fxs, fys=fys,
                  pairs=pairs, close_slice=slice(close_start, budget))


def _violation_mask(prop: str, premise, conclusion, d_inner, sq,
                    tol: TolerancePolicy, modulus: Optional[float]):
    if prop == "monotone":
        return d_inner < -tol.slack
    if prop == "strict":
        return (np.sqrt(sq) > tol.orth_tol) & (d_inner <= tol.premise_eps)
    if prop == "strong":
        return d_inner < modulus * sq
    if prop == "pseudo":
        return (premise >= -tol.slack) & (conclusion < -tol.slack)
    if prop == "quasi":
        return (premise > tol.premise_eps) & (conclusion < -tol.slack)
    raise ValueError(f"unknown property {prop!r}")


def _pair_margin(prop: str, e: PairEvaluation, tol: TolerancePolicy,
                 modulus: Optional[float]) -> float:
    if prop in ("monotone", "strict"):
        return e.d_inner
    if prop == "strong":
        return e.d_inner - modulus * e.sq_dist
    # pseudo / quasi: conclusion margin, only when the premise fires
    premise = e.premise_inner
    fires = premise >= -tol.slack if prop == "pseudo" else premise > tol.premise_eps
    return e.conclusion_inner if fires else np.inf


def _is_violation(prop: str, e: PairEvaluation, tol: TolerancePolicy,
                  modulus: Optional[float]) -> bool:
    return bool(_violation_mask(
        prop,
        np.asarray([e.premise_inner]), np.asarray([e.conclusion_inner]),
        np.asarray([e.d_inner]), np.asarray([e.sq_dist]), tol, modulus)[0])


def _refine_witness(batch: _Batch, prop: str, tol: TolerancePolicy,
                    modulus: Optional[float], x0, y0, sel_x, sel_y) -> ViolationWitness:
    """Local 9x9 perturbation grid at step fd_step; keep the worst margin."""
    h = tol.fd_step
    dim = batch.domain.ambient_dim
    if dim == 1:
        offsets = np.arange(-4, 5)[:, None] * h
    else:
        g = np.array([-1.0, 0.0, 1.0]) * h
        offsets = np.zeros((9, dim))
        k = 0
        for a in g:
            for b in g:
                offsets[k, 0] = a
                offsets[k, 1] = b
                k += 1
    cand_x = np.array([batch.domain.clamp(x0 + o) for o in offsets])
    cand_y = np.array([batch.domain.clamp(y0 + o) for o in offsets])
    fx = batch.F.eval_selection(sel_x, cand_x)
    fy = batch.F.eval_selection(sel_y, cand_y)
    best = None
    best_margin = np.inf
    for a in range(len(cand_x)):
        for b in range(len(cand_y)):
            e = PairEvaluation(cand_x[a], cand_y[b], fx[a], fy[b], sel_x, sel_y)
            if not _is_violation(prop, e, tol, modulus):
                continue
            m = _pair_margin(prop, e, tol, modulus)
            if m < best_margin:
                best_margin = m
                best = e
    assert best is not None  # the unperturbed pair is in the grid
    if prop in ("monotone", "strict"):
        lhs, rhs = best.d_inner, (tol.premise_eps if prop == "strict" else 0.0)
    elif prop == "strong":
        lhs, rhs = best.d_inner, modulus * best.sq_dist
    else:
        lhs, rhs = best.premise_inner, best.conclusion_inner
    return ViolationWitness(
        x=best.x, y=best.y, fx=best.fx, fy=best.fy,
        sel_x=sel_x, sel_y=sel_y, lhs=lhs, rhs=rhs, margin=best_margin)


def _search(batch: _Batch, prop: str, seed: int, tol: TolerancePolicy,
            modulus: Optional[float], skip_close: bool = False) -> PropertyVerdict:
    budget = batch.xs.shape[0]
    hits = []  # (sample index, order key, pair arrays, oriented)
    for order, pa in enumerate(batch.pairs):
        masks = [(0, _violation_mask(prop, pa.premise, pa.conclusion,
                                     pa.d_inner, pa.sq, tol, modulus))]
        if prop in ("pseudo", "quasi"):
            # swapped orientation reuses the same arrays with roles flipped
            masks.append((1, _violation_mask(prop, -pa.conclusion, -pa.premise,
                                             pa.d_inner, pa.sq, tol, modulus)))
        for orient, mask in masks:
            if skip_close:
                mask = mask.copy()
                mask[batch.close_slice] = False
            idx = np.flatnonzero(mask)
            if idx.size:
                hits.append((int(idx[0]), order, orient, pa))

    empirical = None
    if prop == "strong":
        vals = []
        for pa in batch.pairs:
            ok = np.sqrt(pa.sq) > tol.orth_tol
            if np.any(ok):
                vals.append(np.min(pa.d_inner[ok] / pa.sq[ok]))
        empirical = float(min(vals)) if vals else None

    if not hits:
        return PropertyVerdict(
            property=prop, status="no_violation_found", witness=None,
            samples_used=budget, seed=int(seed), tolerances=tol,
            strong_modulus=modulus, empirical_modulus=empirical)

    i, _, orient, pa = min(hits, key=lambda t: (t[0], t[1], t[2]))
    if orient == 0:
        x0, y0, sx, sy = batch.xs[i], batch.ys[i], pa.sel_x, pa.sel_y
    else:
        x0, y0, sx, sy = batch.ys[i], batch.xs[i], pa.sel_y, pa.sel_x
    witness = _refine_witness(batch, prop, tol, modulus, x0, y0, sx, sy)
    return PropertyVerdict(
        property=prop, status="falsified", witness=witness,
        samples_used=i + 1, seed=int(seed), tolerances=tol,
        strong_modulus=modulus, empirical_modulus=empirical)


def falsify(F: TestMap, domain: ConvexDomain, prop: str, budget: int,
            seed: int, tol: Optional[TolerancePolicy] = None,
            strong: Optional[StrongParams] = None) -> PropertyVerdict:
    """Budgeted, seeded witness search for one property."""
    if prop not in PROPERTY_ORDER:
        raise ValueError(f"unknown property {prop!r}")
    tol = tol or TolerancePolicy()
    modulus = strong.modulus if strong is not None else (
        1e-6 if prop == "strong" else None)
    batch = _draw_batch(F, domain, budget, seed)
    return _search(batch, prop, seed, tol, modulus,
                   skip_close=(prop == "strict"))


def segment_monotone(F: TestMap, x, y, k: int,
                     tol: Optional[TolerancePolicy] = None) -> PropertyVerdict:
    """Monotonicity of the restriction of F to the segment [x, y]."""
    tol = tol or TolerancePolicy()
    pts = segment_sample(as_point(x), as_point(y), k)
    vals = [F.eval_selection(i, pts) for i in range(F.n_selections)]
    n_pairs = 0
    worst = None
    for a in range(k):
        for b in range(a + 1, k):
            for i in range(F.n_selections):
                for j in range(F.n_selections):
                    n_pairs += 1
                    e = PairEvaluation(pts[a], pts[b], vals[i][a], vals[j][b], i, j)
                    if e.d_inner < -tol.slack and (worst is None or e.d_inner < worst.d_inner):
                        worst = e
    if worst is None:
        return PropertyVerdict(
            property="monotone", status="no_violation_found", witness=None,
            samples_used=n_pairs, seed=0, tolerances=tol)
    witness = ViolationWitness(
        x=worst.x, y=worst.y, fx=worst.fx, fy=worst.fy,
        sel_x=worst.sel_x, sel_y=worst.sel_y,
        lhs=worst.d_inner, rhs=0.0, margin=worst.d_inner)
    return PropertyVerdict(
        property="monotone", status="falsified", witness=witness,
        samples_used=n_pairs, seed=0, tolerances=tol)


@dataclass(frozen=True)
class HierarchyReport:
    verdicts: dict              # property name -> PropertyVerdict, chain order
    inversions: tuple           # human-readable chain-inversion flags

    @property
    def consistent(self) -> bool:
        return not self.inversions

    @property
    def holding(self) -> frozenset:
        return frozenset(p for p, v in self.verdicts.items() if not v.falsified)


def hierarchy_check(F: TestMap, domain: ConvexDomain, budget: int, seed: int,
                    tol: Optional[TolerancePolicy] = None,
                    strong_modulus: Optional[float] = None) -> HierarchyReport:
    """All five properties on one shared sample stream, plus chain checks."""
    tol = tol or TolerancePolicy()
    modulus = strong_modulus if strong_modulus is not None else 1e-6
    batch = _draw_batch(F, domain, budget, seed)
    verdicts = {}
    for prop in PROPERTY_ORDER:
        verdicts[prop] = _search(
            batch, prop, seed, tol,
            modulus if prop == "strong" else None,
            skip_close=(prop == "strict"))
    inversions = []
    for a_i, a in enumerate(PROPERTY_ORDER):
        for b in PROPERTY_ORDER[a_i + 1:]:
            if not verdicts[a].falsified and verdicts[b].falsified:
                inversions.append(
                    f"{a} had no violation but weaker property {b} was falsified")
    return HierarchyReport(verdicts=verdicts, inversions=tuple(inversions))
