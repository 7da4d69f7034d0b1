import numpy as np
import pytest

from monocert.core import Box, DualLine, TolerancePolicy
from monocert.monotonicity import PairEvaluation, falsify, pair_monotone
from monocert.registry import lookup
from monocert.translation import (
    TraceError,
    counterexample_map,
    counterexample_suite,
    is_orthogonal,
    line_orthogonal,
    proof_trace,
    proposition1_crosscheck,
    sweep,
    theorem1_check,
    translate,
)

GRID = np.linspace(-2.0, 2.0, 9)


def line(u, v, grid=GRID):
    return DualLine(u=np.asarray(u, float), v=np.asarray(v, float),
                    lambda_grid=np.asarray(grid, float))


def test_translate_shifts_values():
    e = lookup("identity-2d")
    g = translate(e.map, [3.0, -1.0])
    pts = np.array([[0.5, 0.5]])
    np.testing.assert_allclose(g.selections[0](pts), [[3.5, -0.5]])


def test_translate_dimension_check():
    e = lookup("identity-2d")
    with pytest.raises(ValueError):
        translate(e.map, [1.0])


def test_pair_monotone_translation_invariant():
    # <(F+w)(x) - (F+w)(y), x - y> is literally the same number, so the
    # verdict is exactly invariant
    rng = np.random.default_rng(4)
    e = lookup("square-1d")
    tol = TolerancePolicy()
    for _ in range(25):
        w = rng.normal(size=1)
        x, y = rng.uniform(-2, 2, (2, 1))
        g = translate(e.map, w)
        ex = PairEvaluation(x=x, y=y,
                            fx=e.map.selections[0](x[None, :])[0],
                            fy=e.map.selections[0](y[None, :])[0])
        eg = PairEvaluation(x=x, y=y,
                            fx=g.selections[0](x[None, :])[0],
                            fy=g.selections[0](y[None, :])[0])
        assert pair_monotone(ex, tol) == pair_monotone(eg, tol)
        assert ex.d_inner == pytest.approx(eg.d_inner, abs=1e-12)


def test_orthogonality_box_vs_normal():
    box = Box([-1.0, -1.0], [1.0, 1.0])
    assert not is_orthogonal([1.0, 0.0], box).orthogonal
    assert not is_orthogonal([1.0, 1.0], box).orthogonal


def test_orthogonality_slice_normal():
    e = lookup("paper-counterexample")
    rep = is_orthogonal([0.0, 0.0, 1.0], e.domain)
    assert rep.orthogonal
    assert rep.spread == 0.0
    assert not is_orthogonal([1.0, 0.0, 0.0], e.domain).orthogonal


def test_orthogonality_rejects_zero_direction():
    box = Box([-1.0], [1.0])
    with pytest.raises(ValueError):
        is_orthogonal([0.0], box)


def test_line_orthogonal_ignores_base_point():
    e = lookup("paper-counterexample")
    a = line_orthogonal(line([0, 0, 0], [0, 0, 1]), e.domain)
    b = line_orthogonal(line([7, -3, 2], [0, 0, 1]), e.domain)
    assert a.orthogonal and b.orthogonal
    assert a.spread == b.spread


def test_sweep_identity_all_pass():
    e = lookup("identity-2d")
    sw = sweep(e.map, e.domain, line([0, 0], [1, 1]), "quasi",
               budget=400, seed=5)
    assert sw.all_pass
    assert sw.first_falsified is None
    assert len(sw.rows) == len(GRID)


def test_sweep_neg_map_falsified_at_interior_lambdas():
    # -x + lam has a quasi violation iff the root lam lies strictly inside
    # the domain [-2, 2]: a premise (lam - y)(x - y) > 0 with conclusion
    # (lam - x)(x - y) < 0 needs x, y on opposite sides of lam.  On our grid
    # that is every lambda except the endpoints +-2.
    e = lookup("neg-1d")
    sw = sweep(e.map, e.domain, line([0.0], [1.0]), "quasi",
               budget=1000, seed=5)
    assert not sw.all_pass
    assert sw.n_falsified == len(GRID) - 2
    statuses = {lam: v.falsified for lam, v in sw.rows}
    assert statuses[-2.0] is False and statuses[2.0] is False


def test_sweep_deterministic():
    e = lookup("square-1d")
    a = sweep(e.map, e.domain, line([0.0], [1.0]), "quasi", budget=500, seed=3)
    b = sweep(e.map, e.domain, line([0.0], [1.0]), "quasi", budget=500, seed=3)
    assert [r[0] for r in a.rows] == [r[0] for r in b.rows]
    assert [r[1].status for r in a.rows] == [r[1].status for r in b.rows]


def test_sweep_rejects_strict():
    e = lookup("identity-2d")
    with pytest.raises(ValueError):
        sweep(e.map, e.domain, line([0, 0], [1, 0]), "strict",
              budget=10, seed=0)


def test_theorem1_agreement_pd_map():
    e = lookup("identity-2d")
    rep = theorem1_check(e.map, e.domain, line([0, 0], [1, 1]),
                         budget=400, seed=7, psd_points=10)
    assert rep.agree
    assert rep.psd_side.all_psd
    assert rep.sweep_result.all_pass


def test_theorem1_agreement_indefinite_map():
    e = lookup("neg-1d")
    rep = theorem1_check(e.map, e.domain, line([0.0], [1.0]),
                         budget=1000, seed=7, psd_points=10)
    assert rep.agree
    assert not rep.psd_side.all_psd
    assert not rep.sweep_result.all_pass


def test_theorem1_orthogonal_line_disagreement_is_flagged():
    # on the coordinate slice the e3 line never perturbs the quasi premise,
    # so the sweep passes while the Jacobian side is indefinite: this is the
    # necessity failure under an orthogonal line, and the note must say so
    F, domain = counterexample_map(5.0)
    rep = theorem1_check(F, domain, line([0, 0, 0], [0, 0, 1]),
                         budget=1000, seed=7, psd_points=10)
    assert rep.line_orthogonality.orthogonal
    assert not rep.agree
    assert "orthogonal" in rep.note


def test_proposition1_uniform_for_monotone_map():
    e = lookup("identity-2d")
    rep = proposition1_crosscheck(e.map, e.domain, line([0, 0], [1, 1]),
                                  budget=400, seed=6)
    assert rep.outcome == (True, True, True)
    assert rep.flags == ()


def test_proposition1_flags_orthogonal_split():
    F, domain = counterexample_map(5.0)
    rep = proposition1_crosscheck(F, domain, line([0, 0, 0], [0, 0, 1]),
                                  budget=1500, seed=6)
    assert rep.outcome == (False, True, True)
    assert rep.flags  # non-uniform outcome on an orthogonal line


def test_proof_trace_identity_conforms():
    e = lookup("identity-2d")
    L = line([0, 0], [1, 0], grid=[0.0, 1.0])
    x, y = np.array([0.5, 0.5]), np.array([0.5, -0.5])   # <v, x-y> = 0
    traces, summary = proof_trace(e.map, e.domain, L, x, y, seed=1)
    assert summary.conforms
    assert summary.max_limit_estimate <= 1e-9 * summary.margin_scale
    assert len(traces) == 5   # one per alpha for a single-selection map


def test_proof_trace_rejects_non_degenerate_pair():
    e = lookup("identity-2d")
    L = line([0, 0], [1, 0], grid=[0.0, 1.0])
    with pytest.raises(TraceError):
        proof_trace(e.map, e.domain, L, [0.5, 0.0], [-0.5, 0.0], seed=1)


def test_proof_trace_rejects_orthogonal_line():
    F, domain = counterexample_map(5.0)
    L = line([0, 0, 0], [0, 0, 1], grid=[0.0, 1.0])
    with pytest.raises(TraceError):
        proof_trace(F, domain, L, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], seed=1)


def test_proof_trace_flip_map_breaks_averaging_step():
    # (x1, x2) -> (-x1, x2) is not monotone; the averaged-point comparison
    # must fail on some pair rather than silently conform
    from monocert.core import TestMap

    def f(pts):
        pts = np.asarray(pts, float)
        return np.stack([-pts[..., 0], pts[..., 1]], axis=-1)

    F = TestMap("flip", 2, 2, (f,))
    domain = Box([-1.0, -1.0], [1.0, 1.0])
    L = line([0, 0], [0, 1], grid=[0.0, 1.0])
    x, y = np.array([0.8, 0.3]), np.array([-0.8, 0.3])   # <v, x-y> = 0
    _, summary = proof_trace(F, domain, L, x, y, seed=1)
    assert not summary.conforms
    assert summary.max_limit_estimate > 1e-6


def test_counterexample_suite_passes():
    rep = counterexample_suite(truncation=5.0, budget=1000, seed=42)
    assert rep.passed
    assert rep.orthogonality.orthogonal
    assert rep.monotone_verdict.falsified
    assert rep.pseudo_sweep.all_pass
    assert rep.quasi_sweep.all_pass
    assert rep.monotone_verdict.witness.margin <= -1e-6
    assert rep.narrative


def test_counterexample_suite_rejects_bad_truncation():
    with pytest.raises(ValueError):
        counterexample_suite(truncation=0.0)


def test_counterexample_witness_margin_independent_of_truncation_sign():
    rep = counterexample_suite(truncation=3.0, budget=1000, seed=7)
    assert rep.passed
    w = rep.monotone_verdict.witness
    e = PairEvaluation(x=w.x, y=w.y, fx=w.fx, fy=w.fy)
    assert e.d_inner == pytest.approx(w.margin, abs=1e-12)
