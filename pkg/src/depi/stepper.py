"""Discrete-time evolution maps and the brute-force variational oracle.

All steppers solve an implicit update for the group increment by damped
Newton iteration in algebra coordinates, W = W_pred exp(xi), with the
previous increment as the predictor (nearest-branch continuation of the
multivalued discrete correspondence).  The left-reduced update solved per
step is

    Ad*(W^-1) . d'_W Lam(W, P)  =  M + diamond(grad_P Lam(W, P), P),
    M' = d'_W Lam(W, P),   P' = act(W^-1, P),

and its mirror image on the right.  Failure to converge is always an
error; nothing is silently accepted.  Steppers are pure and deterministic:
identical inputs and configuration produce bit-identical trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import liegroup as lie
from . import representation as rep_mod
from .lagrangian import (
    FullLagrangian,
    ReducedLagrangian,
    Side,
    TrivializedLagrangian,
    VariationSequence,
)
from .liegroup import Rotation


class NoConvergence(RuntimeError):
    """Newton iteration exhausted max_iter without meeting the tolerance."""


class OrbitDrift(RuntimeError):
    """Advected variable left the orbit beyond tolerance after a step."""


@dataclass(frozen=True)
class NewtonConfig:
    tol: float = 1e-12
    max_iter: int = 50
    fd_h: float = 1e-6

    def __post_init__(self):
        if self.tol <= 0.0 or self.max_iter < 1:
            raise ValueError("tol must be positive, max_iter at least 1")


DEFAULT_NEWTON = NewtonConfig()


@dataclass(frozen=True)
class ReducedState:
    """Body momentum plus advected quantity, the reduced phase point."""

    M: np.ndarray
    P: np.ndarray

    def __post_init__(self):
        for name in ("M", "P"):
            v = np.array(getattr(self, name), dtype=float)
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    def packed(self) -> np.ndarray:
        return np.concatenate([self.M, self.P])


@dataclass
class Trajectory:
    states: list
    steps: list            # group increments W_k (left) or w_k (right)
    residuals: list        # recomputed stepping residual per increment
    side: Side
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.states)


def _newton_solve(
    residual: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    cfg: NewtonConfig,
) -> tuple[np.ndarray, float]:
    """Damped Newton on R^3 with forward-difference Jacobian.

    After the tolerance is met one extra polish step is attempted (kept
    only if it reduces the residual), so long invariant audits see the
    solver's limiting accuracy rather than a value just under tol.
    """
    x = np.array(x0, dtype=float)
    r = residual(x)
    rn = float(np.sqrt(r @ r))

    def newton_step(x, r, rn):
        jac = np.empty((3, 3))
        for i in range(3):
            dx = np.zeros(3)
            dx[i] = cfg.fd_h
            jac[:, i] = (residual(x + dx) - r) / cfg.fd_h
        try:
            delta = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(f"singular Newton Jacobian: {exc}") from exc
        alpha = 1.0
        for _ in range(40):
            x_new = x + alpha * delta
            r_new = residual(x_new)
            rn_new = float(np.sqrt(r_new @ r_new))
            if rn_new < rn:
                return x_new, r_new, rn_new
            alpha *= 0.5
        return None

    for _ in range(cfg.max_iter):
        if rn <= cfg.tol:
            # polish once unless already at the solver floor, so audits see
            # limiting accuracy rather than a value just under tol
            if rn > 1e-3 * cfg.tol:
                polish = newton_step(x, r, rn)
                if polish is not None:
                    x, r, rn = polish
            return x, rn
        stepped = newton_step(x, r, rn)
        if stepped is None:
            raise NoConvergence(f"line search stalled at residual {rn:.3e}")
        x, r, rn = stepped
    if rn <= cfg.tol:
        return x, rn
    raise NoConvergence(f"residual {rn:.3e} after {cfg.max_iter} iterations")


# ---------------------------------------------------------------------------
# residuals (shared by the steppers and by post-hoc audits)

def ep_residual(lam: ReducedLagrangian, W: Rotation, state: ReducedState) -> np.ndarray:
    """Defect of the reduced update equation at increment W (either side)."""
    force = rep_mod.diamond(lam.rep, lam.grad_P(W, state.P), state.P)
    momentum_next = lam.d_W(W, state.P)
    if lam.side is Side.LEFT:
        return lie.Ad_star(W.inverse(), momentum_next) - state.M - force
    return lie.Ad_star(W, momentum_next) - state.M + force


def trivialized_residual(
    Lt: TrivializedLagrangian, W: Rotation, g: Rotation, M: np.ndarray
) -> np.ndarray:
    """Defect of the trivialized update equation at increment W."""
    momentum_next = Lt.deriv_W(g, W)
    if Lt.side is Side.LEFT:
        return lie.Ad_star(W.inverse(), momentum_next) - M - Lt.deriv_g(g, W)
    return lie.Ad_star(W, momentum_next) - M - Lt.deriv_g(g, W)


def full_residual(
    L: FullLagrangian, g_prev: Rotation, g_cur: Rotation, g_next: Rotation
) -> np.ndarray:
    """Stationarity defect of the two-point equations in trivialized form."""
    return L.d1_right(g_cur, g_next) + L.d2_right(g_prev, g_cur)


# ---------------------------------------------------------------------------
# steppers

def step_ep(
    lam: ReducedLagrangian,
    state: ReducedState,
    cfg: Optional[NewtonConfig] = None,
    W_guess: Optional[Rotation] = None,
    orbit_tol: float = 1e-9,
) -> tuple[ReducedState, Rotation]:
    """One reduced step; dispatches on the Lagrangian's side."""
    cfg = cfg or DEFAULT_NEWTON
    # the predictor is only a guess, so it can be re-orthonormalized freely;
    # without this, predictor-chain roundoff feeds back into the group
    # products and the orthonormality defect compounds geometrically
    W_pred = lie.orthonormalized(W_guess) if W_guess is not None else Rotation.identity()

    def residual(xi):
        return ep_residual(lam, lie.compose(W_pred, lie.exp(xi)), state)

    xi, _ = _newton_solve(residual, np.zeros(3), cfg)
    W = lie.compose(W_pred, lie.exp(xi))
    momentum_next = lam.d_W(W, state.P)
    if lam.side is Side.LEFT:
        P_next = rep_mod.act(lam.rep, W.inverse(), state.P)
    else:
        P_next = rep_mod.act(lam.rep, W, state.P)
    if not rep_mod.orbit_check(lam.rep, P_next, orbit_tol):
        raise OrbitDrift(f"|P| = {np.linalg.norm(P_next):.15f} off the orbit")
    return ReducedState(momentum_next, P_next), W


def step_ep_left(lam, state, cfg=None, W_guess=None):
    if lam.side is not Side.LEFT:
        raise ValueError("left stepper needs a left-reduced Lagrangian")
    return step_ep(lam, state, cfg, W_guess)


def step_ep_right(lam, state, cfg=None, w_guess=None):
    if lam.side is not Side.RIGHT:
        raise ValueError("right stepper needs a right-reduced Lagrangian")
    return step_ep(lam, state, cfg, w_guess)


def run_ep(
    lam: ReducedLagrangian,
    state0: ReducedState,
    n_steps: int,
    cfg: Optional[NewtonConfig] = None,
    W_guess: Optional[Rotation] = None,
    meta: Optional[dict] = None,
) -> Trajectory:
    """Chain reduced steps, carrying each increment as the next predictor."""
    cfg = cfg or DEFAULT_NEWTON
    states = [state0]
    steps: list[Rotation] = []
    residuals: list[float] = []
    guess = W_guess
    for _ in range(n_steps):
        state, W = step_ep(lam, states[-1], cfg, guess)
        residuals.append(float(np.linalg.norm(ep_residual(lam, W, states[-1]))))
        states.append(state)
        steps.append(W)
        guess = W
    return Trajectory(states, steps, residuals, lam.side, dict(meta or {}))


def step_trivialized(
    Lt: TrivializedLagrangian,
    g: Rotation,
    M: np.ndarray,
    cfg: Optional[NewtonConfig] = None,
    W_guess: Optional[Rotation] = None,
) -> tuple[Rotation, np.ndarray]:
    """One step of the trivialized two-point equations; dispatches on side.

    Returns (g_next, momentum_next) with g_next = g W (left) or w g (right).
    """
    cfg = cfg or DEFAULT_NEWTON
    W_pred = lie.orthonormalized(W_guess) if W_guess is not None else Rotation.identity()

    def residual(xi):
        return trivialized_residual(Lt, lie.compose(W_pred, lie.exp(xi)), g, M)

    xi, _ = _newton_solve(residual, np.zeros(3), cfg)
    W = lie.compose(W_pred, lie.exp(xi))
    momentum_next = Lt.deriv_W(g, W)
    if Lt.side is Side.LEFT:
        return lie.compose(g, W), momentum_next
    return lie.compose(W, g), momentum_next


def step_left_trivialized(Lt, g, M, cfg=None, W_guess=None):
    if Lt.side is not Side.LEFT:
        raise ValueError("left stepper needs a left-trivialized Lagrangian")
    return step_trivialized(Lt, g, M, cfg, W_guess)


def step_right_trivialized(Lt, g, m, cfg=None, w_guess=None):
    if Lt.side is not Side.RIGHT:
        raise ValueError("right stepper needs a right-trivialized Lagrangian")
    return step_trivialized(Lt, g, m, cfg, w_guess)


def step_full(
    L: FullLagrangian,
    g_prev: Rotation,
    g_cur: Rotation,
    cfg: Optional[NewtonConfig] = None,
) -> Rotation:
    """One step of the two-point equations on the unreduced group.

    The predictor continues the previous increment: g_pred = g_cur
    (g_prev^-1 g_cur), then Newton runs in the chart g_pred exp(xi).
    """
    cfg = cfg or DEFAULT_NEWTON
    W_prev = lie.orthonormalized(lie.compose(g_prev.inverse(), g_cur))
    g_pred = lie.compose(g_cur, W_prev)
    momentum_in = L.d2_right(g_prev, g_cur)

    def residual(xi):
        g_next = lie.compose(g_pred, lie.exp(xi))
        return L.d1_right(g_cur, g_next) + momentum_in

    xi, _ = _newton_solve(residual, np.zeros(3), cfg)
    return lie.compose(g_pred, lie.exp(xi))


def momentum(L: FullLagrangian, g_prev: Rotation, g_cur: Rotation, side: Side) -> np.ndarray:
    """Trivialized coordinates of the two-point momentum at g_cur.

    Left gives the body momentum M = d'_2 L(g_prev, g_cur); right gives the
    spatial momentum m = d_2 L(g_prev, g_cur); they differ by Ad*(g_cur^-1).
    """
    if side is Side.LEFT:
        return L.d2_right(g_prev, g_cur)
    return L.d2_left(g_prev, g_cur)


def reconstruct(g0: Rotation, increments, side: Side) -> list[Rotation]:
    """Rebuild the group path from increments: g W (left) or w g (right)."""
    gs = [g0]
    for W in increments:
        if side is Side.LEFT:
            gs.append(lie.compose(gs[-1], W))
        else:
            gs.append(lie.compose(W, gs[-1]))
    return gs


def extract_increments(gs, side: Side) -> list[Rotation]:
    """Inverse of reconstruct on a group path."""
    if side is Side.LEFT:
        return [lie.compose(a.inverse(), b) for a, b in zip(gs[:-1], gs[1:])]
    return [lie.compose(b, a.inverse()) for a, b in zip(gs[:-1], gs[1:])]


# ---------------------------------------------------------------------------
# brute-force variational oracle (left-reduced convention)

def extremize_action_bruteforce(
    lam: ReducedLagrangian,
    start: ReducedState,
    end_product: Rotation,
    n_steps: int,
    cfg: Optional[NewtonConfig] = None,
    fd_h: float = 3e-6,
    hess_h: float = 1e-4,
) -> Trajectory:
    """Directly extremize the reduced action over interior points.

    The boundary data is the starting reduced state plus the fixed overall
    group displacement (the product of all increments); the interior group
    points are the unknowns, perturbed exactly as in the admissible
    variations (right-multiplied exponentials with vanishing endpoint
    directions).  A damped Newton iteration drives the finite-difference
    action gradient, i.e. the stacked first-order stationarity system of
    dimension 3 (n_steps - 1), below tolerance.

    Independence from the steppers: only Lam evaluations enter; derivative
    providers and the per-step update equation are never used, and the
    initial guess is the uniform geodesic between the endpoints.  Momenta
    along the returned trajectory are recovered by finite-difference
    Legendre transforms; the starting momentum is passed through from the
    boundary data.
    """
    if lam.side is not Side.LEFT:
        raise ValueError("the brute-force oracle implements the left-reduced convention")
    if not 2 <= n_steps <= 8:
        raise ValueError("n_steps must be between 2 and 8 (desk scale)")
    cfg = cfg or NewtonConfig(tol=1e-9, max_iter=200)
    rep = lam.rep
    n_free = n_steps - 1

    # uniform-geodesic base path for the relative prefixes C_k = g0^-1 g_k
    total = lie.log(end_product)
    base = [lie.exp(k * total / n_steps) for k in range(n_steps + 1)]

    def path(x: np.ndarray) -> list[Rotation]:
        etas = [np.zeros(3)] + [x[3 * k:3 * k + 3] for k in range(n_free)] + [np.zeros(3)]
        return VariationSequence(tuple(etas)).apply(base)

    def action_of(x: np.ndarray) -> float:
        cs = path(x)
        total_action = 0.0
        P = start.P
        for k in range(n_steps):
            W = lie.compose(cs[k].inverse(), cs[k + 1])
            total_action += lam.eval(W, P)
            P = rep_mod.act(rep, W.inverse(), P)
        return total_action

    def gradient(x: np.ndarray) -> np.ndarray:
        g = np.empty(3 * n_free)
        for i in range(3 * n_free):
            dx = np.zeros(3 * n_free)
            dx[i] = fd_h
            g[i] = (action_of(x + dx) - action_of(x - dx)) / (2.0 * fd_h)
        return g

    x = np.zeros(3 * n_free)
    grad = gradient(x)
    gn = float(np.linalg.norm(grad))
    for _ in range(cfg.max_iter):
        if gn <= cfg.tol:
            break
        hess = np.empty((3 * n_free, 3 * n_free))
        for i in range(3 * n_free):
            dx = np.zeros(3 * n_free)
            dx[i] = hess_h
            hess[:, i] = (gradient(x + dx) - grad) / hess_h
        hess = 0.5 * (hess + hess.T)
        try:
            delta = np.linalg.solve(hess, -grad)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(f"singular stationarity Hessian: {exc}") from exc
        alpha, accepted = 1.0, False
        for _ in range(40):
            x_new = x + alpha * delta
            grad_new = gradient(x_new)
            gn_new = float(np.linalg.norm(grad_new))
            if gn_new < gn:
                x, grad, gn = x_new, grad_new, gn_new
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            raise NoConvergence(f"stationarity line search stalled at {gn:.3e}")
    if gn > cfg.tol:
        raise NoConvergence(f"stationarity residual {gn:.3e} after {cfg.max_iter} iterations")

    # assemble the trajectory; momenta via finite-difference Legendre only
    lam_fd = lam.without_analytic()
    cs = path(x)
    increments = [lie.compose(cs[k].inverse(), cs[k + 1]) for k in range(n_steps)]
    states = [start]
    P = start.P
    for k in range(n_steps):
        P_next = rep_mod.act(rep, increments[k].inverse(), P)
        M_next = lam_fd.d_W(increments[k], P)
        states.append(ReducedState(M_next, P_next))
        P = P_next
    per_step = [float(np.linalg.norm(grad[3 * k:3 * k + 3])) for k in range(n_free)]
    return Trajectory(
        states,
        increments,
        per_step,
        Side.LEFT,
        {"stationarity_residual": gn, "n_steps": n_steps},
    )
