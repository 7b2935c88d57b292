"""Discrete Lagrangians and their calculus on SO(3).

Three layers of Lagrangian are handled:

  * full two-point functions L(g, g_next) on the group squared,
  * trivialized forms, left  Lt(g, W) = L(g, g W)  with W = g^-1 g_next,
    or right Lt(g, w) = L(g, w g) with w = g_next g^-1,
  * reduced forms  Lam(W, P)  on group x orbit obtained by quotienting an
    isotropy symmetry out of a trivialized form.

Left/right Lie derivatives are taken by central differences on the algebra
directions unless an analytic provider is attached; the finite-difference
step defaults to 1e-5.  All objects are immutable after construction and
all evaluations are pure.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import liegroup as lie
from . import representation as rep_mod
from .liegroup import Rotation
from .representation import Representation

FD_STEP = 1e-5

_BASIS = np.eye(3)


class NonFinite(ArithmeticError):
    """A Lagrangian or observable returned a non-finite value at a probe point."""


class NotInvariant(ValueError):
    """Invariance audit found the Lagrangian depends on the symmetry direction."""


class Side(enum.Enum):
    LEFT = "left"
    RIGHT = "right"


def _check_finite(value: float) -> float:
    if not np.isfinite(value):
        raise NonFinite(f"non-finite value {value} at probe point")
    return float(value)


def lie_deriv_left(f: Callable[[Rotation], float], g: Rotation, h: float = FD_STEP) -> np.ndarray:
    """Left Lie derivative df(g): <df(g), eta> = d/ds f(exp(s eta) g) at 0."""
    out = np.empty(3)
    for i in range(3):
        step = lie.exp(h * _BASIS[i])
        fp = _check_finite(f(lie.compose(step, g)))
        fm = _check_finite(f(lie.compose(step.inverse(), g)))
        out[i] = (fp - fm) / (2.0 * h)
    return out


def lie_deriv_right(f: Callable[[Rotation], float], g: Rotation, h: float = FD_STEP) -> np.ndarray:
    """Right Lie derivative d'f(g): <d'f(g), eta> = d/ds f(g exp(s eta)) at 0."""
    out = np.empty(3)
    for i in range(3):
        step = lie.exp(h * _BASIS[i])
        fp = _check_finite(f(lie.compose(g, step)))
        fm = _check_finite(f(lie.compose(g, step.inverse())))
        out[i] = (fp - fm) / (2.0 * h)
    return out


def vector_gradient(f: Callable[[np.ndarray], float], x: np.ndarray, h: float = FD_STEP) -> np.ndarray:
    """Central-difference gradient of a scalar function on R^3."""
    out = np.empty(3)
    for i in range(3):
        d = h * _BASIS[i]
        out[i] = (_check_finite(f(x + d)) - _check_finite(f(x - d))) / (2.0 * h)
    return out


class FullLagrangian:
    """A two-point Lagrangian L(g, g_next) -> scalar."""

    def __init__(self, eval_fn: Callable[[Rotation, Rotation], float]):
        self._eval = eval_fn

    def eval(self, g: Rotation, g_next: Rotation) -> float:
        return float(self._eval(g, g_next))

    def d1_right(self, g: Rotation, g_next: Rotation, h: float = FD_STEP) -> np.ndarray:
        """Right Lie derivative in the first slot."""
        return lie_deriv_right(lambda x: self._eval(x, g_next), g, h)

    def d2_right(self, g: Rotation, g_next: Rotation, h: float = FD_STEP) -> np.ndarray:
        """Right Lie derivative in the second slot."""
        return lie_deriv_right(lambda x: self._eval(g, x), g_next, h)

    def d1_left(self, g: Rotation, g_next: Rotation, h: float = FD_STEP) -> np.ndarray:
        return lie_deriv_left(lambda x: self._eval(x, g_next), g, h)

    def d2_left(self, g: Rotation, g_next: Rotation, h: float = FD_STEP) -> np.ndarray:
        return lie_deriv_left(lambda x: self._eval(g, x), g_next, h)


class TrivializedLagrangian:
    """Trivialized two-point Lagrangian Lt(g, W) (left) or Lt(g, w) (right).

    The derivative flavors follow the side: for LEFT the stepping equations
    use the right Lie derivatives d'_g and d'_W, for RIGHT the left Lie
    derivatives d_g and d_w.  Analytic providers, when given, must match
    those flavors; finite differences are used otherwise.
    """

    def __init__(
        self,
        side: Side,
        eval_fn: Callable[[Rotation, Rotation], float],
        d_g: Optional[Callable[[Rotation, Rotation], np.ndarray]] = None,
        d_W: Optional[Callable[[Rotation, Rotation], np.ndarray]] = None,
        fd_h: float = FD_STEP,
    ):
        self.side = side
        self._eval = eval_fn
        self._d_g = d_g
        self._d_W = d_W
        self.fd_h = fd_h

    def eval(self, g: Rotation, W: Rotation) -> float:
        return float(self._eval(g, W))

    def deriv_g(self, g: Rotation, W: Rotation) -> np.ndarray:
        if self._d_g is not None:
            return np.asarray(self._d_g(g, W), dtype=float)
        if self.side is Side.LEFT:
            return lie_deriv_right(lambda x: self._eval(x, W), g, self.fd_h)
        return lie_deriv_left(lambda x: self._eval(x, W), g, self.fd_h)

    def deriv_W(self, g: Rotation, W: Rotation) -> np.ndarray:
        if self._d_W is not None:
            return np.asarray(self._d_W(g, W), dtype=float)
        if self.side is Side.LEFT:
            return lie_deriv_right(lambda x: self._eval(g, x), W, self.fd_h)
        return lie_deriv_left(lambda x: self._eval(g, x), W, self.fd_h)


def trivialize(L: FullLagrangian, side: Side) -> TrivializedLagrangian:
    """Pull a full Lagrangian back to (g, increment) coordinates.

    Left: Lt(g, W) = L(g, g W).  Right: Lt(g, w) = L(g, w g).
    """
    if side is Side.LEFT:
        return TrivializedLagrangian(side, lambda g, W: L.eval(g, lie.compose(g, W)))
    return TrivializedLagrangian(side, lambda g, w: L.eval(g, lie.compose(w, g)))


class ReducedLagrangian:
    """Reduced Lagrangian Lam(W, P) on group x orbit, with derivative providers.

    d_W is the Legendre momentum derivative in the side-matched flavor
    (right Lie derivative in W for LEFT, left Lie derivative in w for
    RIGHT).  grad_P is a plain vector gradient; since the advected slot
    only ever enters the dynamics through diamond(grad_P, P), the radial
    component of any smooth extension off the orbit is immaterial.
    """

    def __init__(
        self,
        side: Side,
        rep: Representation,
        eval_fn: Callable[[Rotation, np.ndarray], float],
        d_W: Optional[Callable[[Rotation, np.ndarray], np.ndarray]] = None,
        grad_P: Optional[Callable[[Rotation, np.ndarray], np.ndarray]] = None,
        fd_h: float = FD_STEP,
    ):
        self.side = side
        self.rep = rep
        self._eval = eval_fn
        self._d_W = d_W
        self._grad_P = grad_P
        self.fd_h = fd_h

    def eval(self, W: Rotation, P: np.ndarray) -> float:
        return float(self._eval(W, P))

    def d_W(self, W: Rotation, P: np.ndarray) -> np.ndarray:
        if self._d_W is not None:
            return np.asarray(self._d_W(W, P), dtype=float)
        if self.side is Side.LEFT:
            return lie_deriv_right(lambda x: self._eval(x, P), W, self.fd_h)
        return lie_deriv_left(lambda x: self._eval(x, P), W, self.fd_h)

    def grad_P(self, W: Rotation, P: np.ndarray) -> np.ndarray:
        if self._grad_P is not None:
            return np.asarray(self._grad_P(W, P), dtype=float)
        return vector_gradient(lambda p: self._eval(W, p), np.asarray(P, float), self.fd_h)

    def without_analytic(self) -> "ReducedLagrangian":
        """A view of the same Lagrangian with finite-difference derivatives only."""
        return ReducedLagrangian(self.side, self.rep, self._eval, fd_h=self.fd_h)


def legendre_reduced(lam: ReducedLagrangian, W: Rotation, P: np.ndarray) -> np.ndarray:
    """Discrete Legendre momentum of a reduced Lagrangian at (W, P)."""
    return lam.d_W(W, P)


def reduce(
    Lt: TrivializedLagrangian,
    rep: Representation,
    audit_samples: int = 20,
    audit_tol: float = 1e-9,
    seed: int = 0,
    fd_h: float = FD_STEP,
) -> ReducedLagrangian:
    """Quotient an isotropy-invariant trivialized Lagrangian to (W, P).

    The invariance hypothesis (Lt(h g, W) = Lt(g, W) for LEFT, Lt(g h, w) =
    Lt(g, w) for RIGHT, h fixing the anchor) is audited on `audit_samples`
    randomized triples before the reduced object is built; NotInvariant is
    raised past `audit_tol`.  Evaluation picks the deterministic lift of P;
    lift-independence is exactly the invariance that was just audited.
    """
    rng = np.random.default_rng(seed)
    for _ in range(audit_samples):
        h = rep_mod.isotropy_element(rep, rng.uniform(0.0, 2.0 * np.pi))
        g = lie.random_rotation(rng)
        W = lie.random_rotation(rng)
        if Lt.side is Side.LEFT:
            dev = abs(Lt.eval(lie.compose(h, g), W) - Lt.eval(g, W))
        else:
            dev = abs(Lt.eval(lie.compose(g, h), W) - Lt.eval(g, W))
        if dev > audit_tol:
            raise NotInvariant(
                f"invariance deviation {dev:.3e} exceeds {audit_tol:.1e}"
            )

    if Lt.side is Side.LEFT:
        def eval_fn(W, P):
            return Lt.eval(rep_mod.lift_left(rep, P), W)
    else:
        def eval_fn(W, p):
            return Lt.eval(rep_mod.lift_right(rep, p), W)
    return ReducedLagrangian(Lt.side, rep, eval_fn, fd_h=fd_h)


@dataclass(frozen=True)
class VariationSequence:
    """Algebra-valued variation directions eta_k with fixed (zero) endpoints."""

    etas: tuple

    def __post_init__(self):
        etas = tuple(np.asarray(e, dtype=float) for e in self.etas)
        if len(etas) < 2:
            raise ValueError("need at least the two endpoint variations")
        for e in (etas[0], etas[-1]):
            if np.linalg.norm(e) != 0.0:
                raise ValueError("endpoint variations must vanish")
        object.__setattr__(self, "etas", etas)

    def __len__(self) -> int:
        return len(self.etas)

    def apply(self, gs: Sequence[Rotation]) -> list[Rotation]:
        """Varied group sequence g_k exp(eta_k) (legs of admissible variations)."""
        if len(gs) != len(self.etas):
            raise ValueError("variation / trajectory length mismatch")
        return [lie.compose(g, lie.exp(e)) for g, e in zip(gs, self.etas)]


def action(L, trajectory) -> float:
    """Discrete action sum.

    For a FullLagrangian, `trajectory` is a sequence of group elements and
    the action is the sum of consecutive-pair evaluations.  For a
    ReducedLagrangian it is a sequence of (W, P) pairs summed directly.
    """
    if isinstance(L, FullLagrangian):
        if len(trajectory) < 2:
            raise ValueError("full-Lagrangian action needs at least two points")
        return float(sum(L.eval(a, b) for a, b in zip(trajectory[:-1], trajectory[1:])))
    if isinstance(L, ReducedLagrangian):
        if len(trajectory) < 1:
            raise ValueError("reduced action needs at least one (W, P) pair")
        return float(sum(L.eval(W, P) for W, P in trajectory))
    raise TypeError(f"unsupported Lagrangian type {type(L)!r}")
