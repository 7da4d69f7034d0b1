import numpy as np

from monocert.core import TolerancePolicy
from monocert.monotonicity import falsify
from monocert.registry import lookup
from monocert.report import (
    build_report,
    dump_report,
    jsonable,
    load_report,
    reports_equal_modulo_walltime,
    write_report,
)


def test_jsonable_arrays_and_scalars():
    out = jsonable({"a": np.array([1.0, 2.0]), "b": np.float64(3.5),
                    "c": np.int64(2), "s": frozenset({"b", "a"})})
    assert out == {"a": [1.0, 2.0], "b": 3.5, "c": 2, "s": ["a", "b"]}


def test_jsonable_dataclass_tagged():
    out = jsonable(TolerancePolicy())
    assert out["_type"] == "TolerancePolicy"
    assert out["conclusion_slack"] == 1e-9


def test_report_roundtrip(tmp_path):
    e = lookup("neg-1d")
    v = falsify(e.map, e.domain, "monotone", budget=200, seed=1)
    rep = build_report(["check"], 1, TolerancePolicy(), {"verdict": v}, 12.5)
    path = tmp_path / "r.json"
    write_report(str(path), rep)
    loaded = load_report(str(path))
    assert loaded["schema_version"] == rep["schema_version"]
    assert loaded["payload"]["verdict"]["status"] == "falsified"


def test_reports_equal_modulo_walltime():
    tol = TolerancePolicy()
    a = build_report(["x"], 0, tol, {"k": 1}, 1.0)
    b = build_report(["x"], 0, tol, {"k": 1}, 99.0)
    c = build_report(["x"], 0, tol, {"k": 2}, 1.0)
    assert reports_equal_modulo_walltime(a, b)
    assert not reports_equal_modulo_walltime(a, c)


def test_dump_ends_with_newline_and_is_stable():
    rep = build_report(["x"], 0, TolerancePolicy(), {"k": [1, 2]}, 0.0)
    s1 = dump_report(rep)
    s2 = dump_report(rep)
    assert s1 == s2
    assert s1.endswith("\n")
