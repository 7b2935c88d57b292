"""Poisson brackets, Casimirs, and numerical Poisson-map / Jacobi verifiers.

Four brackets are implemented.  On group x coalgebra (phase points are
(g, M) tuples):

    left:   {f1,f2} = -<d'_g f1, grad_M f2> + <d'_g f2, grad_M f1>
                      + <M, [grad_M f1, grad_M f2]>
    right:  {f1,f2} = -<d_g f1, grad_m f2> + <d_g f2, grad_m f1>
                      - <m, [grad_m f1, grad_m f2]>

and on coalgebra x V (phase points are ReducedState values), the
semidirect-product Lie-Poisson brackets

    left:   {F1,F2} =  <M, [grad_M F1, grad_M F2]>
                      + <grad_P F1, dact(grad_M F2) P> - <grad_P F2, dact(grad_M F1) P>
    right:  the sign-flipped form.

Observables may carry analytic gradients; otherwise gradients are taken by
central differences in the phase-space chart (algebra-coordinate charts
g exp(xi) or exp(xi) g for the group slot, matching the derivative flavor
each bracket uses).  Antisymmetry is exact by construction; everything
else is verified numerically by the functions below.
"""

from __future__ import annotations

import enum
from typing import Callable, Optional

import numpy as np

from . import liegroup as lie
from . import representation as rep_mod
from .lagrangian import NonFinite
from .representation import Representation
from .stepper import ReducedState

FD_H = 1e-5
JACOBI_OUTER_H = 1e-4


class BracketKind(enum.Enum):
    LEFT_TRIVIALIZED = "left_trivialized"
    RIGHT_TRIVIALIZED = "right_trivialized"
    SEMIDIRECT_LEFT = "semidirect_left"
    SEMIDIRECT_RIGHT = "semidirect_right"


def is_semidirect(kind: BracketKind) -> bool:
    return kind in (BracketKind.SEMIDIRECT_LEFT, BracketKind.SEMIDIRECT_RIGHT)


class Observable:
    """Scalar phase-space function with optional analytic gradient providers.

    For semidirect phase points supply grad_M / grad_P; for trivialized
    ones supply grad_M / d_g, where d_g must be the derivative flavor of
    the bracket it is used with (right Lie derivative for the left
    bracket's chart, left Lie derivative for the right one).
    """

    def __init__(self, eval_fn, grad_M=None, grad_P=None, d_g=None):
        self._eval = eval_fn
        self.grad_M = grad_M
        self.grad_P = grad_P
        self.d_g = d_g

    def __call__(self, x) -> float:
        v = float(self._eval(x))
        if not np.isfinite(v):
            raise NonFinite("observable returned a non-finite value")
        return v

    def without_analytic(self) -> "Observable":
        return Observable(self._eval)


def move(kind: BracketKind, x, delta: np.ndarray):
    """Displace a phase point by chart coordinates (6-vector)."""
    if is_semidirect(kind):
        return ReducedState(x.M + delta[:3], x.P + delta[3:])
    g, M = x
    if kind is BracketKind.LEFT_TRIVIALIZED:
        g_new = lie.compose(g, lie.exp(delta[:3]))
    else:
        g_new = lie.compose(lie.exp(delta[:3]), g)
    return g_new, M + delta[3:]


def chart_gradient(kind: BracketKind, F: Observable, x, h: float = FD_H) -> np.ndarray:
    """Gradient of an observable in the 6-dim chart at x.

    Layout: semidirect -> (grad_M, grad_P); trivialized -> (d_g, grad_M).
    Analytic providers are used where present, central differences fill
    the rest.
    """
    out = np.empty(6)
    if is_semidirect(kind):
        analytic = {0: F.grad_M, 1: F.grad_P}
    else:
        analytic = {0: F.d_g, 1: F.grad_M}
    for block in (0, 1):
        fn = analytic[block]
        if fn is not None:
            out[3 * block:3 * block + 3] = np.asarray(fn(x), dtype=float)
        else:
            for i in range(3 * block, 3 * block + 3):
                d = np.zeros(6)
                d[i] = h
                out[i] = (F(move(kind, x, d)) - F(move(kind, x, -d))) / (2.0 * h)
    return out


def _bracket_from_gradients(
    kind: BracketKind, grad1: np.ndarray, grad2: np.ndarray, x, rep: Optional[Representation]
) -> float:
    if is_semidirect(kind):
        if rep is None:
            raise ValueError("semidirect brackets need the representation")
        M, P = x.M, x.P
        gM1, gP1 = grad1[:3], grad1[3:]
        gM2, gP2 = grad2[:3], grad2[3:]
        core = (
            float(M @ np.cross(gM1, gM2))
            + float(gP1 @ rep_mod.dact(rep, gM2, P))
            - float(gP2 @ rep_mod.dact(rep, gM1, P))
        )
        if kind is BracketKind.SEMIDIRECT_LEFT:
            return core
        return -core
    _, M = x
    dg1, gM1 = grad1[:3], grad1[3:]
    dg2, gM2 = grad2[:3], grad2[3:]
    if kind is BracketKind.LEFT_TRIVIALIZED:
        return (
            -float(dg1 @ gM2) + float(dg2 @ gM1) + float(M @ np.cross(gM1, gM2))
        )
    return (
        -float(dg1 @ gM2) + float(dg2 @ gM1) - float(M @ np.cross(gM1, gM2))
    )


def bracket(
    kind: BracketKind,
    F1: Observable,
    F2: Observable,
    x,
    rep: Optional[Representation] = None,
    fd_h: float = FD_H,
) -> float:
    """Evaluate the chosen Poisson bracket of two observables at x."""
    g1 = chart_gradient(kind, F1, x, fd_h)
    g2 = chart_gradient(kind, F2, x, fd_h)
    return _bracket_from_gradients(kind, g1, g2, x, rep)


# ---------------------------------------------------------------------------
# Casimirs of the semidirect brackets (standard-action instances)

def casimir(kind: BracketKind, x: ReducedState) -> list[float]:
    """Casimir values [|P|^2, <M, P>] of the semidirect bracket at x."""
    if not is_semidirect(kind):
        raise ValueError("Casimirs are provided for the semidirect brackets only")
    return [float(x.P @ x.P), float(x.M @ x.P)]


def casimir_observables() -> list[Observable]:
    """[|P|^2, <M, P>] as observables with analytic gradients."""
    return [
        Observable(lambda s: float(s.P @ s.P),
                   grad_M=lambda s: np.zeros(3),
                   grad_P=lambda s: 2.0 * s.P),
        Observable(lambda s: float(s.M @ s.P),
                   grad_M=lambda s: s.P,
                   grad_P=lambda s: s.M),
    ]


# ---------------------------------------------------------------------------
# randomized test observables

def random_quadratic_observable(
    kind: BracketKind, rng: np.random.Generator, analytic: bool = True
) -> Observable:
    """Random quadratic observable for the given phase space.

    Semidirect: <A M, M> + <B M, P> + <C P, P> + <d, M> + <e, P>.
    Trivialized: <A M, M> + <d, M> + <y, g u>, smooth in the group slot.
    """
    if is_semidirect(kind):
        A = rng.normal(size=(3, 3))
        B = rng.normal(size=(3, 3))
        C = rng.normal(size=(3, 3))
        d = rng.normal(size=3)
        e = rng.normal(size=3)

        def eval_fn(s):
            return (
                float(s.M @ (A @ s.M)) + float(s.M @ (B @ s.P))
                + float(s.P @ (C @ s.P)) + float(d @ s.M) + float(e @ s.P)
            )

        if not analytic:
            return Observable(eval_fn)
        return Observable(
            eval_fn,
            grad_M=lambda s: (A + A.T) @ s.M + B @ s.P + d,
            grad_P=lambda s: B.T @ s.M + (C + C.T) @ s.P + e,
        )

    A = rng.normal(size=(3, 3))
    d = rng.normal(size=3)
    y = rng.normal(size=3)
    u = rng.normal(size=3)

    def eval_fn(x):
        g, M = x
        return float(M @ (A @ M)) + float(d @ M) + float(y @ (g.matrix @ u))

    if not analytic:
        return Observable(eval_fn)
    if kind is BracketKind.LEFT_TRIVIALIZED:
        d_g = lambda x: np.cross(u, x[0].matrix.T @ y)
    else:
        d_g = lambda x: np.cross(x[0].matrix @ u, y)
    return Observable(eval_fn, grad_M=lambda x: (A + A.T) @ x[1] + d, d_g=d_g)


def random_linear_observable(
    kind: BracketKind, rng: np.random.Generator, analytic: bool = True
) -> Observable:
    """Random observable linear in the momentum slots (analytic by default)."""
    if is_semidirect(kind):
        c = rng.normal(size=3)
        e = rng.normal(size=3)
        eval_fn = lambda s: float(c @ s.M) + float(e @ s.P)
        if not analytic:
            return Observable(eval_fn)
        return Observable(eval_fn, grad_M=lambda s: c, grad_P=lambda s: e)
    c = rng.normal(size=3)
    y = rng.normal(size=3)
    u = rng.normal(size=3)
    eval_fn = lambda x: float(c @ x[1]) + float(y @ (x[0].matrix @ u))
    if not analytic:
        return Observable(eval_fn)
    if kind is BracketKind.LEFT_TRIVIALIZED:
        d_g = lambda x: np.cross(u, x[0].matrix.T @ y)
    else:
        d_g = lambda x: np.cross(x[0].matrix @ u, y)
    return Observable(eval_fn, grad_M=lambda x: c, d_g=d_g)


# ---------------------------------------------------------------------------
# verifiers

def verify_poisson_map(
    map_fn: Callable,
    kind: BracketKind,
    x,
    n_pairs: int = 20,
    rep: Optional[Representation] = None,
    seed: int = 0,
    fd_h: float = FD_H,
    tol: float = 1e-5,
) -> dict:
    """Numerical check that a phase map preserves the bracket at x.

    For random quadratic observable pairs (F1, F2) the relative defect

        | {F1 o Psi, F2 o Psi}(x) - {F1, F2}(Psi(x)) | / max(1, |{F1,F2}(Psi(x))|)

    is computed; gradients of the composed observables are taken by central
    differences of the map in the chart at x (12 map evaluations, shared by
    all pairs).  Report fields: kind, seed, n_pairs, max_residual, pass.
    """
    rng = np.random.default_rng(seed)
    pairs = [
        (random_quadratic_observable(kind, rng), random_quadratic_observable(kind, rng))
        for _ in range(n_pairs)
    ]
    y0 = map_fn(x)
    probes = []
    for i in range(6):
        d = np.zeros(6)
        d[i] = fd_h
        probes.append((map_fn(move(kind, x, d)), map_fn(move(kind, x, -d))))

    def pulled_gradient(F: Observable) -> np.ndarray:
        out = np.empty(6)
        for i, (yp, ym) in enumerate(probes):
            out[i] = (F(yp) - F(ym)) / (2.0 * fd_h)
        return out

    max_residual = 0.0
    for F1, F2 in pairs:
        lhs = _bracket_from_gradients(kind, pulled_gradient(F1), pulled_gradient(F2), x, rep)
        rhs = bracket(kind, F1, F2, y0, rep, fd_h)
        residual = abs(lhs - rhs) / max(1.0, abs(rhs))
        max_residual = max(max_residual, residual)
    return {
        "kind": kind.value,
        "seed": seed,
        "n_pairs": n_pairs,
        "max_residual": max_residual,
        "pass": bool(max_residual < tol),
    }


def corrupt_momentum(map_fn: Callable, factor: float = 1.01) -> Callable:
    """Negative-control wrapper: scales the momentum output of a phase map."""
    def corrupted(x):
        s = map_fn(x)
        return ReducedState(factor * s.M, s.P)
    return corrupted


def verify_jacobi(
    kind: BracketKind,
    F1: Observable,
    F2: Observable,
    F3: Observable,
    x,
    rep: Optional[Representation] = None,
    fd_h: float = FD_H,
    outer_h: Optional[float] = None,
) -> float:
    """Relative Jacobi defect |{{F1,F2},F3} + cyclic| / max(1, sum |terms|).

    Inner brackets become plain observables whose gradients the outer
    bracket takes by central differences.  Nested differentiation
    amplifies the inner evaluation noise by 1/outer_h, so when the inner
    gradients themselves come from finite differences a wider outer step
    is used; with analytic inner gradients the inner values are exact and
    a smaller outer step keeps the truncation error down.
    """
    def pair_bracket(Fa, Fb) -> Observable:
        return Observable(lambda y: bracket(kind, Fa, Fb, y, rep, fd_h))

    if outer_h is None:
        analytic = all(
            F.grad_M is not None and (F.grad_P is not None or F.d_g is not None)
            for F in (F1, F2, F3)
        )
        outer_h = 2e-5 if analytic else JACOBI_OUTER_H

    terms = [
        bracket(kind, pair_bracket(F1, F2), F3, x, rep, outer_h),
        bracket(kind, pair_bracket(F2, F3), F1, x, rep, outer_h),
        bracket(kind, pair_bracket(F3, F1), F2, x, rep, outer_h),
    ]
    scale = max(1.0, sum(abs(t) for t in terms))
    return abs(sum(terms)) / scale
