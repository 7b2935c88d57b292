"""Group actions on R^3 used as the advected-variable machinery.

Two representation kinds ship: STANDARD (matrix-vector action; the advected
quantity is a spatial direction such as the gravity axis of a heavy top) and
ADJOINT (the advected quantity is algebra-valued and carried by Ad).  On
SO(3) both give the same numbers, but the ADJOINT code path routes through
the adjoint machinery so the two formulations stay independently testable.

The dual space V* is identified with V through the dot product, which makes
the diamond operator computable in closed form; the defining pairing
identities remain the tested contract.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import liegroup as lie
from .liegroup import Rotation, _cross


class RepKind(enum.Enum):
    STANDARD = "standard"
    ADJOINT = "adjoint"


@dataclass(frozen=True)
class Representation:
    """A representation kind plus the anchor vector whose orbit carries P."""

    kind: RepKind
    anchor: np.ndarray

    def __post_init__(self):
        a = np.array(self.anchor, dtype=float)
        a.setflags(write=False)
        object.__setattr__(self, "anchor", a)

    @property
    def anchor_norm(self) -> float:
        return float(np.linalg.norm(self.anchor))


def standard_rep(anchor=(0.0, 0.0, 1.0)) -> Representation:
    return Representation(RepKind.STANDARD, np.asarray(anchor, dtype=float))


def adjoint_rep(anchor=(0.0, 0.0, 1.0)) -> Representation:
    return Representation(RepKind.ADJOINT, np.asarray(anchor, dtype=float))


def act(rep: Representation, g: Rotation, v: np.ndarray) -> np.ndarray:
    """Group action on V: matrix action (STANDARD) or Ad (ADJOINT)."""
    if rep.kind is RepKind.STANDARD:
        return g.matrix @ v
    return lie.Ad(g, v)


def dact(rep: Representation, xi: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Algebra action, d/ds act(exp(s xi), v) at s = 0."""
    if rep.kind is RepKind.STANDARD:
        return _cross(xi, v)
    return lie.ad(xi, v)


def dact_star(rep: Representation, xi: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Dual of dact: <dact_star(xi, y), v> = <y, dact(xi, v)> for all v.

    This is an anti-representation of the algebra on V*.
    """
    if rep.kind is RepKind.STANDARD:
        return _cross(y, xi)
    return lie.ad_star(xi, y)


def diamond(rep: Representation, y: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Bilinear V* x V -> coalgebra map: <y <> v, xi> = -<y, dact(xi, v)>.

    Closed forms (confirmed against the defining identity in the tests):
    cross(y, v) for STANDARD, ad_star(v, y) for ADJOINT.
    """
    if rep.kind is RepKind.STANDARD:
        return _cross(y, v)
    return lie.ad_star(v, y)


def in_isotropy(rep: Representation, h: Rotation, tol: float) -> bool:
    """Whether h fixes the anchor: |act(h, a) - a| <= tol."""
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    return bool(np.linalg.norm(act(rep, h, rep.anchor) - rep.anchor) <= tol)


def orbit_check(rep: Representation, P: np.ndarray, tol: float) -> bool:
    """Whether P sits on the anchor's orbit (a sphere for both kinds)."""
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    return bool(abs(np.linalg.norm(P) - rep.anchor_norm) <= tol)


def isotropy_element(rep: Representation, angle: float) -> Rotation:
    """A rotation about the anchor axis, i.e. an element fixing the anchor."""
    return lie.rotation_about(rep.anchor, angle)


def lift_left(rep: Representation, P: np.ndarray) -> Rotation:
    """A group element g with act(g^-1, anchor) = P (left-reduction lift).

    Deterministic: g^-1 is the minimal rotation taking the anchor to P
    (half-turn about a fixed perpendicular axis at the antipode).
    """
    return lie.rotation_between(rep.anchor, P).inverse()


def lift_right(rep: Representation, p: np.ndarray) -> Rotation:
    """A group element g with act(g, anchor) = p (right-reduction lift)."""
    return lie.rotation_between(rep.anchor, p)
