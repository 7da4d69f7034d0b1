"""Dual-line machinery: orthogonality, translation sweeps, cross-checks,
the averaged-point proof trace, and the bundled counterexample verifier."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Optional

import numpy as np

from .core import (
    AffineSlice,
    ConvexDomain,
    DualLine,
    PropertyVerdict,
    TestMap,
    TolerancePolicy,
    as_point,
)
from .jacobian import MatrixHull, PsdReport, estimate_clarke, psd_check
from .monotonicity import _seed_rng, falsify


class TraceError(RuntimeError):
    pass


def translate(F: TestMap, omega) -> TestMap:
    """The translation map x -> F(x) + omega."""
    omega = as_point(omega)
    if omega.size != F.dim_out:
        raise ValueError("offset dimension must match the map output")
    selections = tuple(
        (lambda pts, s=s: s(pts) + omega) for s in F.selections)
    return TestMap(name=f"{F.name}+offset", dim_in=F.dim_in, dim_out=F.dim_out,
                   selections=selections, analytic_jacobian=F.analytic_jacobian)


@dataclass(frozen=True)
class OrthogonalityReport:
    orthogonal: bool
    spread: float


def is_orthogonal(v, domain: ConvexDomain, probes: int = 64, seed: int = 0,
                  tol: Optional[TolerancePolicy] = None) -> OrthogonalityReport:
    """Is <v, .> constant on the domain?  Exact spread for all three variants
    (linear functionals attain extremes at vertices/corners), backed by a
    sampled probe."""
    tol = tol or TolerancePolicy()
    v = as_point(v)
    if np.linalg.norm(v) == 0:
        raise ValueError("orthogonality direction must be nonzero")
    spread = domain.inner_spread(v)
    if probes > 0:
        pts = domain.sample(probes, _seed_rng(seed, 7))
        vals = pts @ v
        spread = max(spread, float(vals.max() - vals.min()))
    return OrthogonalityReport(
        orthogonal=bool(spread <= tol.orth_tol * (1.0 + np.linalg.norm(v))),
        spread=spread)


def line_orthogonal(L: DualLine, domain: ConvexDomain, probes: int = 64,
                    seed: int = 0,
                    tol: Optional[TolerancePolicy] = None) -> OrthogonalityReport:
    # the base point u is irrelevant: only the direction matters
    return is_orthogonal(L.v, domain, probes=probes, seed=seed, tol=tol)


@dataclass(frozen=True)
class SweepResult:
    property: str
    rows: tuple                  # (lambda, PropertyVerdict) in grid order
    all_pass: bool
    first_falsified: Optional[float]

    @property
    def n_falsified(self) -> int:
        return sum(1 for _, v in self.rows if v.falsified)


def _lambda_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([int(seed), 101, index]).generate_state(
        1, np.uint64)[0] >> 1)


def sweep(F: TestMap, domain: ConvexDomain, L: DualLine, prop: str,
          budget: int, seed: int,
          tol: Optional[TolerancePolicy] = None) -> SweepResult:
    """Falsify the translated map F + (u + lambda v) at every grid lambda."""
    if prop not in ("pseudo", "quasi", "monotone"):
        raise ValueError("sweep property must be pseudo, quasi, or monotone")
    rows = []
    first = None
    for i, lam in enumerate(L.lambda_grid):
        shifted = translate(F, L.omega(float(lam)))
        verdict = falsify(shifted, domain, prop, budget,
                          _lambda_seed(seed, i), tol=tol)
        rows.append((float(lam), verdict))
        if verdict.falsified and first is None:
            first = float(lam)
    return SweepResult(property=prop, rows=tuple(rows),
                       all_pass=first is None, first_falsified=first)


@dataclass(frozen=True)
class PsdSideReport:
    points: np.ndarray
    reports: tuple               # PsdReport per point
    min_eigenvalue: float

    @property
    def all_psd(self) -> bool:
        return all(r.verdict != "indefinite" for r in self.reports)


def _psd_side(F: TestMap, domain: ConvexDomain, n_points: int, seed: int,
              radius: float, m: int, h: float,
              tol: TolerancePolicy) -> PsdSideReport:
    pts = domain.sample(n_points, _seed_rng(seed, 23))
    reports = []
    for i, p in enumerate(pts):
        hull = estimate_clarke(F, p, radius, m, h, seed=seed * 997 + i,
                               domain=domain)
        reports.append(psd_check(hull, tol))
    return PsdSideReport(points=pts, reports=tuple(reports),
                         min_eigenvalue=float(min(r.min_eigenvalue for r in reports)))


@dataclass(frozen=True)
class Theorem1Report:
    sweep_result: SweepResult
    psd_side: PsdSideReport
    line_orthogonality: OrthogonalityReport
    agree: bool
    note: str


def theorem1_check(F: TestMap, domain: ConvexDomain, L: DualLine, budget: int,
                   seed: int, tol: Optional[TolerancePolicy] = None,
                   psd_points: int = 25, radius: float = 1e-4, m: int = 8,
                   h: float = 1e-7) -> Theorem1Report:
    """Quasimonotone translation sweep against pointwise PSD of the sampled
    generalized Jacobian; the two sides should agree on non-orthogonal lines."""
    tol = tol or TolerancePolicy()
    if F.n_selections != 1:
        raise ValueError("Jacobian side supports single-selection maps only")
    sw = sweep(F, domain, L, "quasi", budget, seed, tol=tol)
    psd = _psd_side(F, domain, psd_points, seed, radius, m, h, tol)
    orth = line_orthogonal(L, domain, seed=seed, tol=tol)
    agree = sw.all_pass == psd.all_psd
    if agree:
        note = "sweep and pointwise PSD classification agree"
    elif sw.all_pass and not psd.all_psd and orth.orthogonal:
        note = ("orthogonality hypothesis violated: the line direction is "
                "constant on the domain, so translations along it can stay "
                "quasimonotone while the Jacobian has negative curvature")
    else:
        note = "sweep and PSD classification disagree on a non-orthogonal line"
    return Theorem1Report(sweep_result=sw, psd_side=psd,
                          line_orthogonality=orth, agree=agree, note=note)


@dataclass(frozen=True)
class Proposition1Report:
    monotone_verdict: PropertyVerdict
    pseudo_sweep: SweepResult
    quasi_sweep: SweepResult
    line_orthogonality: OrthogonalityReport
    flags: tuple

    @property
    def outcome(self) -> tuple:
        return (not self.monotone_verdict.falsified,
                self.pseudo_sweep.all_pass,
                self.quasi_sweep.all_pass)


def proposition1_crosscheck(F: TestMap, domain: ConvexDomain, L: DualLine,
                            budget: int, seed: int,
                            tol: Optional[TolerancePolicy] = None
                            ) -> Proposition1Report:
    """Three-way equivalence: monotone vs pseudo-sweep vs quasi-sweep."""
    tol = tol or TolerancePolicy()
    mono = falsify(F, domain, "monotone", budget, seed, tol=tol)
    ps = sweep(F, domain, L, "pseudo", budget, seed, tol=tol)
    qs = sweep(F, domain, L, "quasi", budget, seed, tol=tol)
    orth = line_orthogonal(L, domain, seed=seed, tol=tol)
    bits = (not mono.falsified, ps.all_pass, qs.all_pass)
    flags = []
    if orth.orthogonal:
        if bits != (bits[0],) * 3:
            flags.append("line is orthogonal to the domain: the equivalence "
                         "is not expected to hold (necessity of the "
                         "non-orthogonality hypothesis)")
    else:
        if len(set(bits)) != 1:
            flags.append(f"equivalence violated on a non-orthogonal line: "
                         f"(monotone, pseudo, quasi) = {bits}")
    return Proposition1Report(monotone_verdict=mono, pseudo_sweep=ps,
                              quasi_sweep=qs, line_orthogonality=orth,
                              flags=tuple(flags))


@dataclass(frozen=True)
class ProofTrace:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    z_alpha: np.ndarray
    alpha: float
    x_star: np.ndarray
    y_star: np.ndarray
    z_star: np.ndarray
    z_alpha_star: np.ndarray
    ineq1_lhs: float
    ineq1_rhs: float
    ineq2_lhs: float
    ineq2_rhs: float
    limit_estimate: float


@dataclass(frozen=True)
class ProofTraceSummary:
    min_ineq1_margin: float
    min_ineq2_margin: float
    max_limit_estimate: float
    margin_scale: float
    conforms: bool


DEFAULT_ALPHA_GRID = (0.5, 0.2, 0.1, 0.05, 0.01)


def proof_trace(F: TestMap, domain: ConvexDomain, L: DualLine, x, y,
                alpha_grid=DEFAULT_ALPHA_GRID, seed: int = 0,
                tol: Optional[TolerancePolicy] = None, z_budget: int = 200):
    """Averaged-point construction for a degenerate pair (x - y orthogonal to
    the line direction): records both derived inequalities per alpha and the
    limiting monotonicity estimate."""
    tol = tol or TolerancePolicy()
    x = as_point(x)
    y = as_point(y)
    v = L.v
    thresh = tol.orth_tol * (1.0 + np.linalg.norm(v))
    if abs(float(np.dot(v, x - y))) > thresh:
        raise TraceError("pair is not degenerate: <v, x-y> must vanish")
    orth = line_orthogonal(L, domain, seed=seed, tol=tol)
    if orth.orthogonal:
        raise TraceError("line is orthogonal to the domain; no admissible "
                         "averaging point z can exist")
    rng = _seed_rng(seed, 31)
    z = None
    for cand in domain.sample(z_budget, rng):
        if (abs(float(np.dot(v, cand - x))) > thresh
                and abs(float(np.dot(v, cand - y))) > thresh):
            z = cand
            break
    if z is None:
        raise TraceError(
            f"no averaging point found in {z_budget} draws; the line must "
            "not be orthogonal to the domain")
    mid = 0.5 * (x + y)
    fx = [F.eval_selection(i, x[None, :])[0] for i in range(F.n_selections)]
    fy = [F.eval_selection(i, y[None, :])[0] for i in range(F.n_selections)]
    fz = [F.eval_selection(i, z[None, :])[0] for i in range(F.n_selections)]
    traces = []
    for alpha in alpha_grid:
        if not 0.0 < alpha < 1.0:
            raise ValueError("alpha values must lie in (0, 1)")
        z_alpha = alpha * z + (1.0 - alpha) * mid
        fza = [F.eval_selection(i, z_alpha[None, :])[0]
               for i in range(F.n_selections)]
        sels = range(F.n_selections)
        for sx, sy, sz, sza in product(sels, sels, sels, sels):
            x_star, y_star = fx[sx], fy[sy]
            z_star, za_star = fz[sz], fza[sza]
            traces.append(ProofTrace(
                x=x, y=y, z=z, z_alpha=z_alpha, alpha=float(alpha),
                x_star=x_star, y_star=y_star, z_star=z_star,
                z_alpha_star=za_star,
                ineq1_lhs=2.0 * alpha * float(np.dot(za_star, z - mid)),
                ineq1_rhs=float(np.dot(x_star, z_alpha - x))
                + float(np.dot(y_star, z_alpha - y)),
                ineq2_lhs=float(np.dot(z_star, z - mid)),
                ineq2_rhs=float(np.dot(za_star, z - mid)),
                limit_estimate=float(np.dot(x_star - y_star, y - x))))
    quantities = [abs(q) for t in traces
                  for q in (t.ineq1_lhs, t.ineq1_rhs, t.ineq2_lhs, t.ineq2_rhs,
                            t.limit_estimate)]
    scale = 1.0 + max(quantities)
    m1 = min(t.ineq1_lhs - t.ineq1_rhs for t in traces)
    m2 = min(t.ineq2_lhs - t.ineq2_rhs for t in traces)
    lim = max(t.limit_estimate for t in traces)
    slack = tol.conclusion_slack * scale
    summary = ProofTraceSummary(
        min_ineq1_margin=float(m1), min_ineq2_margin=float(m2),
        max_limit_estimate=float(lim), margin_scale=float(scale),
        conforms=bool(m1 >= -slack and m2 >= -slack and lim <= slack))
    return traces, summary


@dataclass(frozen=True)
class CounterexampleReport:
    truncation: float
    orthogonality: OrthogonalityReport
    monotone_verdict: PropertyVerdict
    pseudo_sweep: SweepResult
    quasi_sweep: SweepResult
    passed: bool
    narrative: str


def counterexample_map(truncation: float) -> tuple:
    """The exponential plane field (x, y, 0) -> e^{-(x+y)} (1, 1, 0) on the
    truncated coordinate slice of R^3."""
    def f(pts):
        pts = np.asarray(pts, float)
        c = np.exp(-(pts[..., 0] + pts[..., 1]))
        return np.stack([c, c, np.zeros_like(c)], axis=-1)

    def jac(p):
        c = np.exp(-(p[0] + p[1]))
        return np.array([[-c, -c, 0.0], [-c, -c, 0.0], [0.0, 0.0, 0.0]])

    F = TestMap(name="paper-counterexample", dim_in=3, dim_out=3,
                selections=(f,), analytic_jacobian=jac)
    R = float(truncation)
    domain = AffineSlice(base=np.zeros(3),
                         dirs=np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]),
                         lo=np.array([-R, -R]), hi=np.array([R, R]))
    return F, domain


def counterexample_suite(truncation: float = 5.0, budget: int = 2000,
                         seed: int = 42, lambda_grid=None,
                         tol: Optional[TolerancePolicy] = None,
                         line: Optional[DualLine] = None) -> CounterexampleReport:
    """Exponential slice map: not monotone, yet every translate along the
    slice-orthogonal axis stays pseudomonotone (and hence quasimonotone)."""
    if truncation <= 0:
        raise ValueError("truncation radius must be positive")
    tol = tol or TolerancePolicy()
    if lambda_grid is None:
        lambda_grid = np.arange(-2.0, 2.0 + 0.125, 0.25)
    F, domain = counterexample_map(truncation)
    if line is None:
        line = DualLine(u=np.zeros(3), v=np.array([0.0, 0.0, 1.0]),
                        lambda_grid=np.asarray(lambda_grid, float))
    orth = line_orthogonal(line, domain, seed=seed, tol=tol)
    mono = falsify(F, domain, "monotone", budget, seed, tol=tol)
    ps = sweep(F, domain, line, "pseudo", budget, seed, tol=tol)
    qs = sweep(F, domain, line, "quasi", budget, seed, tol=tol)
    passed = (orth.orthogonal and mono.falsified and ps.all_pass and qs.all_pass)
    if passed:
        narrative = (
            "The line direction is constant on the slice (orthogonal line). "
            "The map is not monotone (witness found), yet every sampled "
            "translate along the line remains pseudomonotone and "
            "quasimonotone: dropping the non-orthogonality hypothesis breaks "
            "the equivalence between translated quasimonotonicity and "
            "monotonicity, so that hypothesis is necessary.")
    else:
        parts = []
        if not orth.orthogonal:
            parts.append("line is not orthogonal to the slice "
                         f"(spread {orth.spread:.3g}); suite misuse")
        if not mono.falsified:
            parts.append("no monotonicity violation found")
        if not ps.all_pass:
            parts.append(f"pseudo sweep falsified at {ps.first_falsified}")
        if not qs.all_pass:
            parts.append(f"quasi sweep falsified at {qs.first_falsified}")
        narrative = "suite failed: " + "; ".join(parts)
    return CounterexampleReport(
        truncation=float(truncation), orthogonality=orth,
        monotone_verdict=mono, pseudo_sweep=ps, quasi_sweep=qs,
        passed=passed, narrative=narrative)
