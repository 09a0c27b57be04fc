"""Constraint sets: vectorized membership predicates over R^K.

A constraint set carries a membership function evaluated on rows of an
(L, K) array, a scale A (the total mass of the affine slice the set lives
on, used by the simplex-mode inversion), and a user assertion that the set
is regular (closure of its interior).  Regularity is never machine-checked.

Builders cover halfspaces, boxes, affine equalities (with tolerance) and
arbitrary intersections/unions, which is enough to express every
constraint set used by the built-in problem reductions without executing
user code; ``from_predicate`` wraps a row-wise Python callable as an
escape hatch.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "ConstraintSet",
    "halfspace",
    "box",
    "affine_equality",
    "simplex_face",
    "intersection",
    "union",
    "full_space",
    "empty_set",
    "from_predicate",
    "constraint_from_dict",
]


@dataclass(frozen=True)
class ConstraintSet:
    """Membership predicate for Omega, with scale metadata.

    ``membership`` maps an (L, K) array to an (L,) boolean array.  The
    caller asserts regularity (cl(Omega) = cl(int(Omega)) in the relevant
    topology); a False assertion is allowed but the large-deviation limit
    backing the estimators is then unsupported.
    """

    membership: Callable[[np.ndarray], np.ndarray]
    scale: float = 1.0
    regularity_asserted: bool = True
    description: str = ""

    def contains(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.asarray(self.membership(pts), dtype=bool)
        if out.shape != (pts.shape[0],):
            raise ValueError("membership must return one boolean per row")
        return out

    def contains_point(self, point) -> bool:
        return bool(self.contains(np.atleast_2d(np.asarray(point, dtype=float)))[0])


def halfspace(coeffs, rhs: float, op: str = ">=", **kw) -> ConstraintSet:
    """{x : <coeffs, x> op rhs} with op one of >=, <=, >, <."""
    c = np.asarray(coeffs, dtype=float)
    ops = {
        ">=": lambda v: v >= rhs,
        "<=": lambda v: v <= rhs,
        ">": lambda v: v > rhs,
        "<": lambda v: v < rhs,
    }
    if op not in ops:
        raise ValueError(f"unknown comparison {op!r}")
    test = ops[op]
    return ConstraintSet(
        membership=lambda pts: test(pts @ c),
        description=f"halfspace <c,x> {op} {rhs}",
        **kw,
    )


def box(lower, upper, **kw) -> ConstraintSet:
    """Componentwise bounds; entries may be -inf/inf."""
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    if np.any(lo > hi):
        raise ValueError("lower bound exceeds upper bound")
    return ConstraintSet(
        membership=lambda pts: np.all((pts >= lo) & (pts <= hi), axis=1),
        description="box",
        **kw,
    )


def affine_equality(coeffs, rhs: float, tol: float = 1e-9, **kw) -> ConstraintSet:
    """{x : |<coeffs, x> - rhs| <= tol}; the tolerance keeps membership
    stable under the floating-point block-sum arithmetic."""
    c = np.asarray(coeffs, dtype=float)
    return ConstraintSet(
        membership=lambda pts: np.abs(pts @ c - rhs) <= tol,
        description=f"affine <c,x> = {rhs} (tol {tol})",
        **kw,
    )


def simplex_face(index: int, bound: float, op: str = ">=", **kw):
    """Convenience: one-coordinate halfspace {x : x_index op bound}."""
    def member(pts: np.ndarray) -> np.ndarray:
        v = pts[:, index]
        if op == ">=":
            return v >= bound
        if op == "<=":
            return v <= bound
        raise ValueError(f"unknown comparison {op!r}")

    return ConstraintSet(membership=member, description=f"x[{index}] {op} {bound}", **kw)


def intersection(*sets: ConstraintSet, **kw) -> ConstraintSet:
    if not sets:
        raise ValueError("need at least one set")
    kw.setdefault("scale", sets[0].scale)

    def member(pts: np.ndarray) -> np.ndarray:
        out = sets[0].contains(pts)
        for s in sets[1:]:
            out &= s.contains(pts)
        return out

    return ConstraintSet(
        membership=member,
        description=" and ".join(s.description or "?" for s in sets),
        **kw,
    )


def union(*sets: ConstraintSet, **kw) -> ConstraintSet:
    if not sets:
        raise ValueError("need at least one set")
    kw.setdefault("scale", sets[0].scale)

    def member(pts: np.ndarray) -> np.ndarray:
        out = sets[0].contains(pts)
        for s in sets[1:]:
            out |= s.contains(pts)
        return out

    return ConstraintSet(
        membership=member,
        description=" or ".join(s.description or "?" for s in sets),
        **kw,
    )


def full_space(**kw) -> ConstraintSet:
    return ConstraintSet(
        membership=lambda pts: np.ones(pts.shape[0], dtype=bool),
        description="full space",
        **kw,
    )


def empty_set(**kw) -> ConstraintSet:
    return ConstraintSet(
        membership=lambda pts: np.zeros(pts.shape[0], dtype=bool),
        description="empty set",
        regularity_asserted=False,
        **kw,
    )


def from_predicate(pred: Callable[[np.ndarray], bool], **kw) -> ConstraintSet:
    """Wrap a row-wise predicate (slow path; prefer the vector builders)."""
    return ConstraintSet(
        membership=lambda pts: np.fromiter(
            (bool(pred(row)) for row in pts), dtype=bool, count=pts.shape[0]
        ),
        **kw,
    )


def constraint_from_dict(spec: dict) -> ConstraintSet:
    """Build a constraint set from the JSON config schema.

    Leaf forms: {"type": "halfspace", "coeffs": [...], "rhs": r, "op": ">="},
    {"type": "box", "lower": [...], "upper": [...]},
    {"type": "affine_eq", "coeffs": [...], "rhs": r, "tol": 1e-9},
    {"type": "coordinate", "index": k, "bound": b, "op": ">="}.
    Combinators: {"type": "all"/"any", "parts": [...]}.
    Optional top-level keys: "scale", "regularity_asserted", "description".
    """
    meta = {
        "scale": float(spec.get("scale", 1.0)),
        "regularity_asserted": bool(spec.get("regularity_asserted", True)),
    }
    kind = spec["type"]
    if kind == "halfspace":
        out = halfspace(spec["coeffs"], float(spec["rhs"]), spec.get("op", ">="), **meta)
    elif kind == "box":
        out = box(spec["lower"], spec["upper"], **meta)
    elif kind == "affine_eq":
        out = affine_equality(
            spec["coeffs"], float(spec["rhs"]), float(spec.get("tol", 1e-9)), **meta
        )
    elif kind == "coordinate":
        out = simplex_face(int(spec["index"]), float(spec["bound"]), spec.get("op", ">="), **meta)
    elif kind in ("all", "any"):
        parts = [constraint_from_dict(p) for p in spec["parts"]]
        combo = intersection if kind == "all" else union
        out = combo(*parts, **meta)
    else:
        raise ValueError(f"unknown constraint type {kind!r}")
    if "description" in spec:
        out = ConstraintSet(
            membership=out.membership,
            scale=out.scale,
            regularity_asserted=out.regularity_asserted,
            description=spec["description"],
        )
    return out
