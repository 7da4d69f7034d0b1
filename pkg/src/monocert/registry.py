"""Built-in corpus of test maps with known classifications, plus map files."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Box, ConvexDomain, TestMap, parse_domain
from .expr import eval_expr, parse_expr
from .translation import counterexample_map

FULL_CHAIN = frozenset({"strong", "strict", "monotone", "pseudo", "quasi"})


@dataclass(frozen=True)
class RegistryEntry:
    name: str
    map: TestMap
    domain: ConvexDomain
    known_class: frozenset
    provenance: str
    strong_modulus: Optional[float] = None
    smooth: bool = False
    jacobian_lipschitz: Optional[float] = None

    def __post_init__(self):
        implied = {"strong": {"strict", "monotone", "pseudo", "quasi"},
                   "strict": {"monotone", "pseudo", "quasi"},
                   "monotone": {"pseudo", "quasi"},
                   "pseudo": {"quasi"}}
        for prop, weaker in implied.items():
            if prop in self.known_class and not weaker <= self.known_class:
                raise ValueError(
                    f"{self.name}: known_class breaks the implication chain")


def _map_1d(name, f, jac=None):
    return TestMap(name=name, dim_in=1, dim_out=1,
                   selections=(f,), analytic_jacobian=jac)


def _affine_map(name: str, a: np.ndarray) -> TestMap:
    n = a.shape[0]
    return TestMap(name=name, dim_in=n, dim_out=n,
                   selections=(lambda pts: np.asarray(pts, float) @ a.T,),
                   analytic_jacobian=lambda p, a=a: a.copy())


AFFINE_CORPUS_SEED = 604631


def affine_corpus(count: int = 20, seed: int = AFFINE_CORPUS_SEED,
                  eig_margin: float = 0.05):
    """Seeded random 2x2 and 3x3 matrices whose symmetric part is definitely
    PSD or definitely not (minimum eigenvalue kept away from zero)."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        n = 2 if i % 2 == 0 else 3
        while True:
            a = rng.uniform(-1.0, 1.0, size=(n, n))
            min_eig = float(np.linalg.eigvalsh(0.5 * (a + a.T))[0])
            if abs(min_eig) >= eig_margin:
                break
        out.append((a, min_eig))
    return out


def _registry_entries():
    entries = []

    entries.append(RegistryEntry(
        name="identity-2d",
        map=TestMap("identity-2d", 2, 2,
                    (lambda pts: np.array(pts, float, copy=True),),
                    analytic_jacobian=lambda p: np.eye(2)),
        domain=Box([-1.0, -1.0], [1.0, 1.0]),
        known_class=FULL_CHAIN,
        provenance="identity field; strongly monotone with modulus exactly 1",
        strong_modulus=1.0, smooth=True, jacobian_lipschitz=0.0))

    entries.append(RegistryEntry(
        name="zero-2d",
        map=TestMap("zero-2d", 2, 2,
                    (lambda pts: np.zeros_like(np.asarray(pts, float)),),
                    analytic_jacobian=lambda p: np.zeros((2, 2))),
        domain=Box([-1.0, -1.0], [1.0, 1.0]),
        known_class=frozenset({"monotone", "pseudo", "quasi"}),
        provenance="constant map; monotone but never strict",
        smooth=True, jacobian_lipschitz=0.0))

    entries.append(RegistryEntry(
        name="cube-1d",
        map=_map_1d("cube-1d", lambda pts: np.asarray(pts, float) ** 3,
                    jac=lambda p: np.array([[3.0 * p[0] ** 2]])),
        domain=Box([-2.0], [2.0]),
        known_class=frozenset({"strict", "monotone", "pseudo", "quasi"}),
        provenance="x^3: strictly monotone, derivative vanishes at 0 so no "
                   "positive modulus works",
        smooth=True, jacobian_lipschitz=12.0))

    entries.append(RegistryEntry(
        name="square-1d",
        map=_map_1d("square-1d", lambda pts: np.asarray(pts, float) ** 2,
                    jac=lambda p: np.array([[2.0 * p[0]]])),
        domain=Box([-2.0], [2.0]),
        known_class=frozenset({"quasi"}),
        provenance="x^2: quasimonotone only; pseudo fails at y=0, x<0",
        smooth=True, jacobian_lipschitz=2.0))

    entries.append(RegistryEntry(
        name="expneg-1d",
        map=_map_1d("expneg-1d", lambda pts: np.exp(-np.asarray(pts, float)),
                    jac=lambda p: np.array([[-np.exp(-p[0])]])),
        domain=Box([-3.0], [3.0]),
        known_class=frozenset({"pseudo", "quasi"}),
        provenance="e^{-x}: pseudomonotone but strictly decreasing in value, "
                   "hence not monotone",
        smooth=True, jacobian_lipschitz=np.exp(3.0)))

    entries.append(RegistryEntry(
        name="neg-1d",
        map=_map_1d("neg-1d", lambda pts: -np.asarray(pts, float),
                    jac=lambda p: np.array([[-1.0]])),
        domain=Box([-2.0], [2.0]),
        known_class=frozenset(),
        provenance="-x: anti-monotone, fails even quasimonotonicity",
        smooth=True, jacobian_lipschitz=0.0))

    entries.append(RegistryEntry(
        name="abs-1d",
        map=_map_1d("abs-1d", lambda pts: np.abs(np.asarray(pts, float)),
                    jac=lambda p: np.array([[float(np.sign(p[0]))]])),
        domain=Box([-2.0], [2.0]),
        known_class=frozenset({"quasi"}),
        provenance="|x|: nonsmooth at 0; quasimonotone only",
        smooth=False))

    cf, cdom = counterexample_map(5.0)
    entries.append(RegistryEntry(
        name="paper-counterexample",
        map=cf, domain=cdom,
        known_class=frozenset({"pseudo", "quasi"}),
        provenance="exponential plane field on the truncated coordinate "
                   "slice; pseudomonotone with respect to the slice geometry "
                   "but not monotone",
        smooth=True, jacobian_lipschitz=1e5))

    for i, (a, min_eig) in enumerate(affine_corpus()):
        n = a.shape[0]
        name = f"affine-{n}x{n}-{i:02d}"
        if min_eig > 0:
            cls = FULL_CHAIN
            modulus = min_eig / 2.0  # headroom against float rounding
        else:
            cls = frozenset()
            modulus = None
        entries.append(RegistryEntry(
            name=name,
            map=_affine_map(name, a),
            domain=Box([-1.0] * n, [1.0] * n),
            known_class=cls,
            provenance=f"seeded random linear map, min sym eigenvalue "
                       f"{min_eig:+.4f}",
            strong_modulus=modulus, smooth=True, jacobian_lipschitz=0.0))
    return entries


_REGISTRY = None


def registry():
    global _REGISTRY
    if _REGISTRY is None:
        _REGISTRY = tuple(_registry_entries())
    return _REGISTRY


def lookup(name: str) -> RegistryEntry:
    for entry in registry():
        if entry.name == name:
            return entry
    raise KeyError(f"no registry map named {name!r}")


# ---------------------------------------------------------------------------
# Map files: {name, dimension, components: [...], selections: [[...]], domain}


class MapFileError(ValueError):
    pass


def compile_components(components, dim: int):
    asts = [parse_expr(src, dim) for src in components]

    def f(pts, asts=tuple(asts)):
        pts = np.asarray(pts, float)
        return np.stack([eval_expr(a, pts) for a in asts], axis=-1)

    return f, asts


def load_map_file(path: str):
    """Returns (TestMap, domain or None)."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise MapFileError(f"cannot read map file {path}: {exc}") from exc
    for key in ("name", "dimension"):
        if key not in doc:
            raise MapFileError(f"map file {path} missing field {key!r}")
    if "components" not in doc and "selections" not in doc:
        raise MapFileError(f"map file {path} missing field 'components'")
    dim = int(doc["dimension"])
    component_lists = [doc["components"]] if "components" in doc else []
    component_lists += list(doc.get("selections", []))
    selections = []
    dim_out = None
    for comps in component_lists:
        if dim_out is None:
            dim_out = len(comps)
        elif len(comps) != dim_out:
            raise MapFileError(f"map file {path}: selections disagree on "
                               "output dimension")
        f, _ = compile_components(comps, dim)
        selections.append(f)
    domain = parse_domain(doc["domain"]) if "domain" in doc else None
    return (TestMap(name=str(doc["name"]), dim_in=dim, dim_out=dim_out,
                    selections=tuple(selections)), domain)


def resolve_map(spec: str):
    """`name` from the registry or `file:path`; returns (map, default domain)."""
    if spec.startswith("file:"):
        return load_map_file(spec[5:])
    entry = lookup(spec)
    return entry.map, entry.domain
