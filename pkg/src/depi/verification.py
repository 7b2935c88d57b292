"""Property-verification suite behind the `verify` command.

Each check returns a dict with name, pass flag, the worst residual seen and
the tolerance it was held to.  The suite is deterministic given the seed;
checks are independent and may be fanned out across threads.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import liegroup as lie
from . import representation as rep_mod
from . import poisson, stepper, systems
from .lagrangian import NotInvariant, Side, TrivializedLagrangian, reduce, trivialize
from .poisson import BracketKind
from .representation import Representation, RepKind
from .stepper import ReducedState

POISSON_TOL = 1e-5
JACOBI_QUADRATIC_TOL = 1e-5
JACOBI_LINEAR_TOL = 1e-8
IDENTITY_TOL = 1e-12
FD_IDENTITY_TOL = 1e-6
VARIATIONAL_TOL = 1e-8
LEFT_RIGHT_TOL = 1e-9
CASIMIR_TOL = 1e-6
GRADIENT_TOL = 1e-6
WELL_DEFINED_TOL = 1e-12


def _result(name, residual, tol, extra=None):
    out = {
        "name": name,
        "max_residual": float(residual),
        "tol": float(tol),
        "pass": bool(residual < tol),
    }
    if extra:
        out.update(extra)
    return out


def _random_state(rng) -> ReducedState:
    P = rng.normal(size=3)
    P /= np.linalg.norm(P)
    return ReducedState(rng.normal(size=3), P)


def check_defining_identities(seed: int = 0, n_samples: int = 1000) -> dict:
    """Diamond, dual-action and coadjoint dualities, analytic and FD."""
    rng = np.random.default_rng(seed)
    reps = [rep_mod.standard_rep(), rep_mod.adjoint_rep()]
    worst = 0.0
    h = 1e-5
    for _ in range(n_samples):
        g = lie.random_rotation(rng)
        xi, eta, zeta = (rng.normal(size=3) for _ in range(3))
        y, v = rng.normal(size=3), rng.normal(size=3)
        worst = max(worst, abs(
            lie.pairing(lie.Ad_star(g, xi), eta) - lie.pairing(xi, lie.Ad(g, eta))))
        worst = max(worst, abs(
            lie.pairing(lie.ad_star(eta, xi), zeta) - lie.pairing(xi, lie.ad(eta, zeta))))
        for rep in reps:
            worst = max(worst, abs(
                lie.pairing(rep_mod.diamond(rep, y, v), xi)
                + float(y @ rep_mod.dact(rep, xi, v))))
            worst = max(worst, abs(
                float(rep_mod.dact_star(rep, xi, y) @ v)
                - float(y @ rep_mod.dact(rep, xi, v))))
    result = _result("defining_identities", worst, IDENTITY_TOL)

    fd_worst = 0.0
    for _ in range(n_samples):
        xi, v = rng.normal(size=3), rng.normal(size=3)
        for rep in reps:
            fd = (rep_mod.act(rep, lie.exp(h * xi), v)
                  - rep_mod.act(rep, lie.exp(-h * xi), v)) / (2.0 * h)
            scale = max(1.0, float(np.linalg.norm(fd)))
            fd_worst = max(fd_worst, float(
                np.linalg.norm(fd - rep_mod.dact(rep, xi, v))) / scale)
        eta, zeta = rng.normal(size=3), rng.normal(size=3)
        fd_ad = (lie.Ad(lie.exp(h * eta), zeta) - lie.Ad(lie.exp(-h * eta), zeta)) / (2.0 * h)
        fd_worst = max(fd_worst, float(
            np.linalg.norm(fd_ad - lie.ad(eta, zeta))) / max(1.0, float(np.linalg.norm(fd_ad))))
    fd_result = _result("defining_identities_fd", fd_worst, FD_IDENTITY_TOL)
    return {"name": "defining_identities", "pass": result["pass"] and fd_result["pass"],
            "max_residual": result["max_residual"],
            "tol": IDENTITY_TOL, "analytic": result, "finite_difference": fd_result}


def check_gradient_providers(seed: int = 0, eps: float = 1e-2, n_samples: int = 20) -> dict:
    """Analytic derivative providers against finite differences, both systems."""
    rng = np.random.default_rng(seed)
    params = systems.default_heavy_top()
    worst = 0.0
    for side in (Side.LEFT, Side.RIGHT):
        lam = systems.make_heavy_top(params, eps, side=side)[1]
        lam_fd = lam.without_analytic()
        for _ in range(n_samples):
            W = lie.exp(rng.normal(size=3) * 0.05)
            P = rng.normal(size=3)
            P /= np.linalg.norm(P)
            a, f = lam.d_W(W, P), lam_fd.d_W(W, P)
            worst = max(worst, float(np.linalg.norm(a - f)) / max(1.0, float(np.linalg.norm(a))))
            a, f = lam.grad_P(W, P), lam_fd.grad_P(W, P)
            worst = max(worst, float(np.linalg.norm(a - f)) / max(1.0, float(np.linalg.norm(a))))
    Lt_left, Lt_right = systems.trivialized_pair(params, eps)
    for Lt in (Lt_left, Lt_right):
        plain = TrivializedLagrangian(Lt.side, Lt.eval)
        for _ in range(n_samples):
            g = lie.random_rotation(rng)
            W = lie.exp(rng.normal(size=3) * 0.05)
            for attr in ("deriv_g", "deriv_W"):
                a = getattr(Lt, attr)(g, W)
                f = getattr(plain, attr)(g, W)
                worst = max(worst, float(np.linalg.norm(a - f)) / max(1.0, float(np.linalg.norm(a))))
    return _result("gradient_providers", worst, GRADIENT_TOL)


def check_variational_equivalence(eps: float = 1e-2, n_steps: int = 5) -> dict:
    """Chained reduced steps against the brute-force action extremizer."""
    M0 = np.array([0.4, -0.3, 1.5])
    P0 = np.array([0.3, 0.0, 0.9539392014169456])
    P0 /= np.linalg.norm(P0)
    start = ReducedState(M0, P0)
    worst = 0.0
    for name, make in (
        ("heavy_top", lambda: systems.make_heavy_top(systems.default_heavy_top(), eps)[1]),
        ("rigid_body", lambda: systems.make_rigid_body(systems.default_rigid_body(), eps)[1]),
    ):
        lam = make()
        traj = stepper.run_ep(lam, start, n_steps)
        end_product = lie.Rotation.identity()
        for W in traj.steps:
            end_product = lie.compose(end_product, W)
        oracle = stepper.extremize_action_bruteforce(lam, start, end_product, n_steps)
        for s1, s2 in zip(traj.states, oracle.states):
            worst = max(worst, float(np.linalg.norm(s1.packed() - s2.packed())))
    return _result("variational_equivalence", worst, VARIATIONAL_TOL)


def check_poisson_maps(
    seed: int = 0,
    eps: float = 1e-2,
    n_pairs: int = 20,
    n_points: int = 5,
    negative_control: bool = False,
) -> dict:
    """Reduced steppers preserve their semidirect brackets; corrupted maps fail.

    With negative_control=True the momentum-corrupted map is scored as if
    it were the real one, so the suite (deliberately) fails.
    """
    rng = np.random.default_rng(seed)
    params = systems.default_heavy_top()
    results = []
    worst = 0.0
    control_margin = float("inf")
    for side, kind in (
        (Side.LEFT, BracketKind.SEMIDIRECT_LEFT),
        (Side.RIGHT, BracketKind.SEMIDIRECT_RIGHT),
    ):
        lam = systems.make_heavy_top(params, eps, side=side)[1]
        phase_map = lambda s, lam=lam: stepper.step_ep(lam, s, orbit_tol=1.0)[0]
        corrupted = poisson.corrupt_momentum(phase_map)
        for point_index in range(n_points):
            x = _random_state(rng)
            target = corrupted if negative_control else phase_map
            rpt = poisson.verify_poisson_map(
                target, kind, x, n_pairs, lam.rep, seed=seed + point_index, tol=POISSON_TOL)
            results.append(rpt)
            worst = max(worst, rpt["max_residual"])
            if not negative_control:
                bad = poisson.verify_poisson_map(
                    corrupted, kind, x, n_pairs, lam.rep, seed=seed + point_index, tol=POISSON_TOL)
                control_margin = min(control_margin, bad["max_residual"] / POISSON_TOL)
    out = _result("poisson_maps", worst, POISSON_TOL, {"reports": results})
    if not negative_control:
        # the corrupted map must overshoot the tolerance by >= 2 orders
        out["negative_control_margin"] = control_margin
        out["pass"] = bool(out["pass"] and control_margin >= 1e2)
    return out


def check_jacobi(seed: int = 0, n_triples: int = 50) -> dict:
    """Jacobi identity for all bracket kinds, quadratic and linear observables."""
    rng = np.random.default_rng(seed)
    params = systems.default_heavy_top()
    rep = Representation(RepKind.STANDARD, params.gravity_axis)
    worst_q, worst_l = 0.0, 0.0

    def moderate_momentum():
        v = rng.normal(size=3)
        return v / np.linalg.norm(v) * rng.uniform(0.5, 1.5)

    for kind in BracketKind:
        for _ in range(n_triples):
            if poisson.is_semidirect(kind):
                P = rng.normal(size=3)
                P /= np.linalg.norm(P)
                x = ReducedState(moderate_momentum(), P)
            else:
                x = (lie.random_rotation(rng), moderate_momentum())
            Fs = [poisson.random_quadratic_observable(kind, rng, analytic=False)
                  for _ in range(3)]
            worst_q = max(worst_q, poisson.verify_jacobi(kind, *Fs, x, rep))
            Ls = [poisson.random_linear_observable(kind, rng) for _ in range(3)]
            worst_l = max(worst_l, poisson.verify_jacobi(kind, *Ls, x, rep))
    ok = worst_q < JACOBI_QUADRATIC_TOL and worst_l < JACOBI_LINEAR_TOL
    return {"name": "jacobi", "pass": bool(ok),
            "max_residual": float(max(worst_q, worst_l * JACOBI_QUADRATIC_TOL / JACOBI_LINEAR_TOL)),
            "tol": JACOBI_QUADRATIC_TOL,
            "quadratic": {"max_residual": float(worst_q), "tol": JACOBI_QUADRATIC_TOL},
            "linear": {"max_residual": float(worst_l), "tol": JACOBI_LINEAR_TOL}}


def check_casimirs(seed: int = 0, n_observables: int = 20) -> dict:
    """Casimir brackets vanish (FD path) and Casimirs are transport-invariant."""
    rng = np.random.default_rng(seed)
    rep = rep_mod.standard_rep()
    worst = 0.0
    for kind in (BracketKind.SEMIDIRECT_LEFT, BracketKind.SEMIDIRECT_RIGHT):
        for C in poisson.casimir_observables():
            C_fd = C.without_analytic()
            for _ in range(n_observables):
                F = poisson.random_quadratic_observable(kind, rng, analytic=False)
                x = _random_state(rng)
                worst = max(worst, abs(poisson.bracket(kind, C_fd, F, x, rep)))
    transport_worst = 0.0
    for _ in range(50):
        x = _random_state(rng)
        g = lie.random_rotation(rng)
        moved = ReducedState(lie.Ad_star(g, x.M),
                             rep_mod.act(rep, g.inverse(), x.P))
        before = poisson.casimir(BracketKind.SEMIDIRECT_LEFT, x)
        after = poisson.casimir(BracketKind.SEMIDIRECT_LEFT, moved)
        transport_worst = max(transport_worst,
                              max(abs(a - b) for a, b in zip(before, after)))
    ok = worst < CASIMIR_TOL and transport_worst < 1e-12
    return {"name": "casimirs", "pass": bool(ok), "max_residual": float(worst),
            "tol": CASIMIR_TOL, "transport_residual": float(transport_worst)}


def check_left_right_consistency(eps: float = 1e-2, n_steps: int = 100) -> dict:
    """Left and right trivialized steppers agree on the same dynamics.

    Both integrate the identical full Lagrangian from the identical state;
    momenta are converted through the coadjoint action (spatial = Ad*_{g^-1}
    body) and trajectories compared after reconversion.
    """
    params = systems.default_heavy_top()
    Lt_left, Lt_right = systems.trivialized_pair(params, eps)
    rng = np.random.default_rng(11)
    g = lie.random_rotation(rng)
    M = np.array([0.4, -0.3, 1.5])
    m = lie.Ad_star(g.inverse(), M)
    gl, gr = g, g
    worst = 0.0
    WL = WR = None
    for k in range(n_steps):
        gl_next, M = stepper.step_left_trivialized(Lt_left, gl, M, W_guess=WL)
        WL = lie.compose(gl.inverse(), gl_next)
        gr_next, m = stepper.step_right_trivialized(Lt_right, gr, m, w_guess=WR)
        WR = lie.compose(gr_next, gr.inverse())
        gl, gr = gl_next, gr_next
        worst = max(worst, lie.geodesic_distance(gl, gr))
        worst = max(worst, float(np.linalg.norm(lie.Ad_star(gl.inverse(), M) - m)))
    return _result("left_right_consistency", worst, LEFT_RIGHT_TOL)


def check_reduction_well_defined(eps: float = 1e-2, seed: int = 0) -> dict:
    """Reduced values are lift-independent; non-invariant inputs are rejected."""
    rng = np.random.default_rng(seed)
    params = systems.default_heavy_top()
    rep = Representation(RepKind.STANDARD, params.gravity_axis)
    full = systems.full_lagrangian(params, eps)
    lam = reduce(trivialize(full, Side.LEFT), rep)
    worst = 0.0
    for _ in range(20):
        P = rng.normal(size=3)
        P /= np.linalg.norm(P)
        W = lie.exp(rng.normal(size=3) * 0.1)
        g1 = rep_mod.lift_left(rep, P)
        g2 = lie.compose(rep_mod.isotropy_element(rep, rng.uniform(0, 2 * np.pi)), g1)
        Lt = trivialize(full, Side.LEFT)
        worst = max(worst, abs(Lt.eval(g1, W) - Lt.eval(g2, W)))
        worst = max(worst, abs(lam.eval(W, P) - Lt.eval(g2, W)))
    rejected = False
    bad = TrivializedLagrangian(
        Side.LEFT, lambda g, W: float(g.matrix[0, 1]) + float(np.trace(W.matrix)))
    try:
        reduce(bad, rep)
    except NotInvariant:
        rejected = True
    return _result("reduction_well_defined", worst, WELL_DEFINED_TOL,
                   {"non_invariant_rejected": rejected,
                    "pass": bool(worst < WELL_DEFINED_TOL and rejected)})


ALL_CHECKS = (
    check_defining_identities,
    check_gradient_providers,
    check_variational_equivalence,
    check_poisson_maps,
    check_jacobi,
    check_casimirs,
    check_left_right_consistency,
    check_reduction_well_defined,
)


def run_suite(
    seed: int = 0,
    n_pairs: int = 20,
    n_points: int = 5,
    n_triples: int = 50,
    negative_control: bool = False,
    threads: int = 1,
) -> dict:
    """Run every check; the report names any failing one."""
    jobs = [
        lambda: check_defining_identities(seed),
        lambda: check_gradient_providers(seed),
        lambda: check_variational_equivalence(),
        lambda: check_poisson_maps(seed, n_pairs=n_pairs, n_points=n_points,
                                   negative_control=negative_control),
        lambda: check_jacobi(seed, n_triples=n_triples),
        lambda: check_casimirs(seed),
        lambda: check_left_right_consistency(),
        lambda: check_reduction_well_defined(seed=seed),
    ]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            checks = list(pool.map(lambda job: job(), jobs))
    else:
        checks = [job() for job in jobs]
    failing = [c["name"] for c in checks if not c["pass"]]
    return {
        "seed": seed,
        "negative_control": negative_control,
        "checks": checks,
        "failing": failing,
        "pass": not failing,
    }
