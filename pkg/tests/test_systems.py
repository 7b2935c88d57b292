"""System factories: parameter validation, physical checks, invariant audits."""

import numpy as np
import pytest

from depi import liegroup as lie
from depi import representation as rep_mod
from depi import stepper, systems
from depi.continuum import Scheme
from depi.lagrangian import Side, reduce, trivialize
from depi.poisson import BracketKind, verify_poisson_map
from depi.stepper import ReducedState, run_ep, step_ep

PARAMS = systems.default_heavy_top()
EPS = 1e-2
M0 = np.array([0.4, -0.3, 1.5])
P0 = np.array([0.3, 0.0, 0.9539392014169456])
P0 = P0 / np.linalg.norm(P0)


def test_parameter_validation():
    with pytest.raises(ValueError):
        systems.RigidBodyParams(inertia=np.diag([1.0, -1.0, 2.0]))
    with pytest.raises(ValueError):
        systems.RigidBodyParams(inertia=np.ones((2, 2)))
    asym = np.array([[1.0, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    with pytest.raises(ValueError):
        systems.RigidBodyParams(inertia=asym)
    with pytest.raises(ValueError):
        systems.HeavyTopParams(inertia=np.eye(3), chi=[0.0, 0.0, 2.0])
    p = systems.HeavyTopParams(inertia=[1.0, 1.0, 2.0])
    assert p.inertia.shape == (3, 3)


def test_momentum_is_inertia_times_velocity():
    Lc, _ = systems.make_heavy_top(PARAMS, EPS)
    rng = np.random.default_rng(0)
    for _ in range(10):
        Om = rng.normal(size=3)
        assert np.allclose(Lc.grad_Omega(Om, P0), PARAMS.inertia @ Om)
        assert np.allclose(Lc.omega_from_momentum(PARAMS.inertia @ Om, P0), Om)


def test_isotropic_body_constant_increment():
    rb = systems.RigidBodyParams(np.eye(3))
    _, lam = systems.make_rigid_body(rb, EPS)
    traj = run_ep(lam, ReducedState(M0, P0), 50)
    for W in traj.steps[1:]:
        assert lie.geodesic_distance(traj.steps[0], W) < 1e-12


def test_rigid_body_momentum_norm_casimir():
    _, lam = systems.make_rigid_body(systems.default_rigid_body(), EPS)
    traj = run_ep(lam, ReducedState(M0, P0), 2000)
    drift = max(abs(np.linalg.norm(s.M) - np.linalg.norm(M0)) for s in traj.states)
    assert drift < 1e-11


def test_heavy_top_invariance_audit():
    rep = rep_mod.standard_rep(PARAMS.gravity_axis)
    Lt = trivialize(systems.full_lagrangian(PARAMS, EPS), Side.LEFT)
    lam = reduce(Lt, rep, audit_tol=1e-12)  # passes at much tighter than default
    assert lam.side is Side.LEFT


def test_heavy_top_upright_equilibrium_long_run():
    _, lam = systems.make_heavy_top(PARAMS, EPS)
    a = PARAMS.gravity_axis
    traj = run_ep(lam, ReducedState(2.5 * a, a), 500)
    for s in traj.states:
        assert np.linalg.norm(s.P - a) < 1e-11
        assert np.linalg.norm(s.M - 2.5 * a) < 1e-11


def test_heavy_top_pairing_conserved():
    _, lam = systems.make_heavy_top(PARAMS, EPS)
    traj = run_ep(lam, ReducedState(M0, P0), 2000)
    mp = [float(s.M @ s.P) for s in traj.states]
    assert max(abs(x - mp[0]) for x in mp) < 1e-11


def test_free_body_equals_heavy_top_at_zero_weight():
    # adjoint-case equations coincide with the standard-rep ones at mgl = 0
    free_top = systems.HeavyTopParams(inertia=PARAMS.inertia, mgl=0.0)
    _, lam_top = systems.make_heavy_top(free_top, EPS)
    _, lam_rb = systems.make_rigid_body(systems.RigidBodyParams(PARAMS.inertia), EPS)
    t1 = run_ep(lam_top, ReducedState(M0, P0), 200)
    t2 = run_ep(lam_rb, ReducedState(M0, P0), 200)
    for a, b in zip(t1.states, t2.states):
        assert np.linalg.norm(a.M - b.M) < 1e-10


def test_heavy_top_poisson_property():
    rng = np.random.default_rng(1)
    _, lam = systems.make_heavy_top(PARAMS, EPS)
    phase_map = lambda s: step_ep(lam, s, orbit_tol=1.0)[0]
    for seed in range(3):
        P = rng.normal(size=3)
        P /= np.linalg.norm(P)
        x = ReducedState(rng.normal(size=3), P)
        rpt = verify_poisson_map(phase_map, BracketKind.SEMIDIRECT_LEFT, x, 10,
                                 lam.rep, seed=seed)
        assert rpt["pass"]


def test_trace_scheme_runs_and_conserves():
    _, lam = systems.make_heavy_top(PARAMS, EPS, scheme=Scheme.TRACE)
    traj = run_ep(lam, ReducedState(M0, P0), 300)
    mp = [float(s.M @ s.P) for s in traj.states]
    assert max(abs(x - mp[0]) for x in mp) < 1e-11
    assert max(abs(np.linalg.norm(s.P) - 1.0) for s in traj.states) < 1e-12


def test_midpoint_scheme_runs():
    _, lam = systems.make_heavy_top(PARAMS, EPS, scheme=Scheme.MIDPOINT)
    traj = run_ep(lam, ReducedState(M0, P0), 20)
    assert max(traj.residuals) < 1e-11


def test_invariant_report_fields():
    _, lam = systems.make_heavy_top(PARAMS, EPS)
    traj = run_ep(lam, ReducedState(M0, P0), 100)
    rpt = systems.invariant_report("heavy_top", lam, traj, EPS)
    assert rpt["n_steps"] == 100
    assert len(rpt["series"]["P_norm"]) == 101
    assert len(rpt["series"]["energy_proxy"]) == 100
    assert rpt["max_drift"]["P_norm"] < 1e-12
    assert rpt["max_drift"]["MP_pairing"] < 1e-11
    assert np.isfinite(rpt["energy_proxy"]["span"])
