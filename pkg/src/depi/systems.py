"""Concrete mechanical instances: free rigid body and heavy top.

Left-reduced heavy top (body frame): kinetic energy (1/2)<J Omega, Omega>
with body inertia J, potential -mgl <chi, P> where P is the gravity
direction advected into the body frame, chi the body symmetry axis.  The
free rigid body is the adjoint-representation case: same kinetic energy,
no potential, the advected slot carried but inert.

`side=RIGHT` builds the mirror-image instances (spatial-velocity kinetic
energy, right-advected direction), which evolve under the right-reduced
update rule and are Poisson for the right semidirect bracket.

`trivialized_pair` exposes the same left-invariant full Lagrangian in both
trivializations with analytic derivative providers, so the left and right
trivialized steppers can be cross-checked on identical dynamics to
tolerances finite differences cannot reach.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import liegroup as lie
from .continuum import ContinuousReducedLagrangian, Scheme, discretize
from .lagrangian import FullLagrangian, ReducedLagrangian, Side, TrivializedLagrangian
from .representation import Representation, RepKind


def _validate_inertia(J) -> np.ndarray:
    J = np.array(J, dtype=float)
    if J.shape == (3,):
        J = np.diag(J)
    if J.shape != (3, 3):
        raise ValueError("inertia must be a 3-vector of moments or a 3x3 matrix")
    if not np.allclose(J, J.T, atol=1e-12):
        raise ValueError("inertia must be symmetric")
    if np.min(np.linalg.eigvalsh(J)) <= 0.0:
        raise ValueError("inertia must be positive definite")
    J.setflags(write=False)
    return J


def _unit(v, name: str) -> np.ndarray:
    v = np.array(v, dtype=float)
    n = np.linalg.norm(v)
    if abs(n - 1.0) > 1e-6:
        raise ValueError(f"{name} must be a unit vector (|{name}| = {n:.6f})")
    v = v / n
    v.setflags(write=False)
    return v


@dataclass(frozen=True)
class RigidBodyParams:
    """Free rigid body: just the inertia tensor (kg m^2)."""

    inertia: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "inertia", _validate_inertia(self.inertia))


@dataclass(frozen=True)
class HeavyTopParams:
    """Heavy top: inertia, lumped weight coefficient, body axis, gravity axis.

    `mgl` lumps mass, gravity and pivot-to-center distance into one energy
    scale.  Physical realizability of the inertia (triangle inequalities)
    is not enforced.
    """

    inertia: np.ndarray
    mgl: float = 1.0
    chi: np.ndarray = (0.0, 0.0, 1.0)
    gravity_axis: np.ndarray = (0.0, 0.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "inertia", _validate_inertia(self.inertia))
        object.__setattr__(self, "chi", _unit(self.chi, "chi"))
        object.__setattr__(self, "gravity_axis", _unit(self.gravity_axis, "gravity_axis"))


def default_heavy_top() -> HeavyTopParams:
    """Symmetric-top demo fixture: J = diag(1, 1, 2), mgl = 1, chi = a = e_z."""
    return HeavyTopParams(inertia=np.diag([1.0, 1.0, 2.0]))


def default_rigid_body() -> RigidBodyParams:
    return RigidBodyParams(inertia=np.diag([1.0, 1.0, 2.0]))


def _continuous(J: np.ndarray, mgl: float, chi: np.ndarray) -> ContinuousReducedLagrangian:
    Jinv = np.linalg.inv(J)

    def eval_fn(Omega, P):
        return 0.5 * float(Omega @ (J @ Omega)) - mgl * float(chi @ P)

    return ContinuousReducedLagrangian(
        eval_fn,
        grad_Omega=lambda Omega, P: J @ Omega,
        grad_P=lambda Omega, P: -mgl * chi,
        omega_from_momentum=lambda M, P: Jinv @ M,
    )


def _trace_reduced(
    J: np.ndarray, mgl: float, chi: np.ndarray, eps: float, rep: Representation, side: Side
) -> ReducedLagrangian:
    """Trace-form kinetic sampling (experimental alternative to the log scheme).

    (1/eps) tr((I - W) J_d) with J_d = tr(J)/2 I - J reproduces the kinetic
    energy to O(eps^2); no acceptance claims attach to this scheme.
    """
    Jd = 0.5 * np.trace(J) * np.eye(3) - J

    def eval_fn(W, P):
        return float(np.trace((np.eye(3) - W.matrix) @ Jd) / eps) - eps * mgl * float(chi @ P)

    if side is Side.LEFT:
        def d_W(W, P):
            B = Jd @ W.matrix
            return lie.vee(B - B.T) / eps
    else:
        def d_W(W, P):
            B = W.matrix @ Jd
            return lie.vee(B - B.T) / eps

    def grad_P(W, P):
        return -eps * mgl * chi

    return ReducedLagrangian(side, rep, eval_fn, d_W=d_W, grad_P=grad_P)


def make_rigid_body(
    params: RigidBodyParams,
    eps: float,
    scheme: Scheme = Scheme.LOG,
    side: Side = Side.LEFT,
    anchor=(0.0, 0.0, 1.0),
) -> tuple[ContinuousReducedLagrangian, ReducedLagrangian]:
    """Continuous and discrete reduced Lagrangians of the free rigid body.

    The advected slot transforms under the adjoint action; with no
    potential it never feeds back, so its norm is an exact audit quantity.
    """
    rep = Representation(RepKind.ADJOINT, np.asarray(anchor, dtype=float))
    Lc = _continuous(params.inertia, 0.0, np.zeros(3))
    if scheme is Scheme.TRACE:
        lam = _trace_reduced(params.inertia, 0.0, np.zeros(3), eps, rep, side)
    else:
        lam = discretize(Lc, eps, scheme, rep, side)
    return Lc, lam


def make_heavy_top(
    params: HeavyTopParams,
    eps: float,
    scheme: Scheme = Scheme.LOG,
    side: Side = Side.LEFT,
) -> tuple[ContinuousReducedLagrangian, ReducedLagrangian]:
    """Continuous and discrete reduced Lagrangians of the heavy top.

    side=LEFT is the body-frame top; side=RIGHT is the mirror-image
    instance whose kinetic energy is quadratic in the spatial velocity.
    """
    rep = Representation(RepKind.STANDARD, params.gravity_axis)
    Lc = _continuous(params.inertia, params.mgl, params.chi)
    if scheme is Scheme.TRACE:
        lam = _trace_reduced(params.inertia, params.mgl, params.chi, eps, rep, side)
    else:
        lam = discretize(Lc, eps, scheme, rep, side)
    return Lc, lam


def full_lagrangian(params: HeavyTopParams, eps: float) -> FullLagrangian:
    """The unreduced two-point Lagrangian of the (left-invariant) heavy top.

    L(g, g_next) = eps [ (1/2) <J Omega, Omega> - mgl <chi, g^T a> ],
    Omega = log(g^-1 g_next)/eps.  Invariant under left translation by
    rotations about the gravity axis.  mgl = 0 gives the free rigid body.
    """
    J, mgl, chi, a = params.inertia, params.mgl, params.chi, params.gravity_axis

    def eval_fn(g, g_next):
        Omega = lie.log(lie.compose(g.inverse(), g_next)) / eps
        P = g.matrix.T @ a
        return eps * (0.5 * float(Omega @ (J @ Omega)) - mgl * float(chi @ P))

    return FullLagrangian(eval_fn)


def trivialized_pair(
    params: HeavyTopParams, eps: float
) -> tuple[TrivializedLagrangian, TrivializedLagrangian]:
    """Both trivializations of the same heavy-top full Lagrangian.

    Analytic derivative providers throughout, so cross-checks between the
    left and right trivialized steppers measure only the equations, not
    finite-difference truncation.
    """
    J, mgl, chi, a = params.inertia, params.mgl, params.chi, params.gravity_axis

    def eval_left(g, W):
        Omega = lie.log(W) / eps
        return eps * (0.5 * float(Omega @ (J @ Omega)) - mgl * float(chi @ (g.matrix.T @ a)))

    def d_g_left(g, W):
        P = g.matrix.T @ a
        return eps * mgl * np.cross(P, chi)

    def d_W_left(g, W):
        psi = lie.log(W)
        return lie.dexpinv(psi, J @ (psi / eps))

    left = TrivializedLagrangian(Side.LEFT, eval_left, d_g=d_g_left, d_W=d_W_left)

    def eval_right(g, w):
        Omega = g.matrix.T @ lie.log(w) / eps
        return eps * (0.5 * float(Omega @ (J @ Omega)) - mgl * float(chi @ (g.matrix.T @ a)))

    def d_g_right(g, w):
        psi = lie.log(w)
        Omega = g.matrix.T @ psi / eps
        spatial = g.matrix @ (J @ Omega)
        return np.cross(spatial, psi) + eps * mgl * np.cross(a, g.matrix @ chi)

    def d_w_right(g, w):
        psi = lie.log(w)
        Omega = g.matrix.T @ psi / eps
        return lie.dexpinv(-psi, g.matrix @ (J @ Omega))

    right = TrivializedLagrangian(Side.RIGHT, eval_right, d_g=d_g_right, d_W=d_w_right)
    return left, right


def invariant_report(name: str, lam: ReducedLagrangian, trajectory, eps: float) -> dict:
    """Exact-invariant audit series along a reduced trajectory.

    Reports per-step series and maximum drifts of the orbit radius |P|,
    the momentum pairing <M, P> (a Casimir for the standard-action case)
    and |M| (a Casimir of the potential-free adjoint case), plus the
    discrete energy proxy <M_k, log(W_k)/eps> - Lam(W_k, P_k)/eps, which
    has no exactness claim and is reported for boundedness inspection only.
    """
    states, steps = trajectory.states, trajectory.steps
    p_norm = [float(np.linalg.norm(s.P)) for s in states]
    m_norm = [float(np.linalg.norm(s.M)) for s in states]
    mp = [float(np.dot(s.M, s.P)) for s in states]
    energy = []
    for k, W in enumerate(steps):
        s = states[k]
        energy.append(
            float(np.dot(s.M, lie.log(W) / eps)) - lam.eval(W, s.P) / eps
        )
    drift = lambda series: float(max(abs(x - series[0]) for x in series))
    report = {
        "system": name,
        "eps": eps,
        "n_steps": len(steps),
        "series": {
            "P_norm": p_norm,
            "M_norm": m_norm,
            "MP_pairing": mp,
            "energy_proxy": energy,
        },
        "max_drift": {
            "P_norm": drift(p_norm),
            "M_norm": drift(m_norm),
            "MP_pairing": drift(mp),
        },
        "energy_proxy": {
            "min": float(min(energy)) if energy else None,
            "max": float(max(energy)) if energy else None,
            "span": float(max(energy) - min(energy)) if energy else None,
        },
        "max_residual": float(max(trajectory.residuals)) if trajectory.residuals else 0.0,
    }
    return report
