"""Continuous reference dynamics and discrete-to-continuous consistency."""

import numpy as np
import pytest

from depi import continuum, liegroup as lie, systems
from depi.continuum import Scheme
from depi.lagrangian import Side

PARAMS = systems.default_heavy_top()
M0 = np.array([0.4, -0.3, 1.5])
P0 = np.array([0.3, 0.0, 0.9539392014169456])
P0 = P0 / np.linalg.norm(P0)
Y0 = np.concatenate([M0, P0])


def heavy():
    return systems.make_heavy_top(PARAMS, 1e-2)


def test_field_relative_equilibria():
    Lc, lam = heavy()
    # free body, momentum along a principal axis: dM = 0
    Lc_rb, lam_rb = systems.make_rigid_body(systems.default_rigid_body(), 1e-2)
    dM, dP = continuum.ep_vector_field(Side.LEFT, Lc_rb,
                                       (np.array([0.0, 0.0, 2.0]), P0), lam_rb.rep)
    assert np.linalg.norm(dM) < 1e-15
    # upright heavy top: dP = 0
    a = PARAMS.gravity_axis
    dM, dP = continuum.ep_vector_field(Side.LEFT, Lc, (3.0 * a, a), lam.rep)
    assert np.linalg.norm(dP) < 1e-15
    assert np.linalg.norm(dM) < 1e-15


def test_orbit_radius_constant_along_flow():
    Lc, lam = heavy()
    _, states = continuum.reference_trajectory(Side.LEFT, Lc, lam.rep, Y0, 1.0, 1e-3)
    drift = max(abs(np.linalg.norm(s[3:]) - 1.0) for s in states)
    assert drift < 1e-10


def test_energy_conserved_along_reference():
    Lc, lam = heavy()
    _, states = continuum.reference_trajectory(Side.LEFT, Lc, lam.rep, Y0, 1.0, 1e-3)
    E0 = Lc.energy(M0, P0)
    drift = max(abs(Lc.energy(s[:3], s[3:]) - E0) for s in states[::20])
    assert drift < 1e-8


def test_rk4_zero_field_and_validation():
    ts, states = continuum.rk4_integrate(lambda y: np.zeros(3), np.ones(3), 1.0, 0.1)
    assert np.allclose(states[-1], 1.0)
    with pytest.raises(ValueError):
        continuum.rk4_integrate(lambda y: y, np.ones(3), 1.0, 0.0)


def test_rk4_fourth_order_self_convergence():
    Lc, lam = heavy()
    field = continuum.make_ep_field(Side.LEFT, Lc, lam.rep)
    errs = []
    for dt in (0.1, 0.05):
        _, coarse = continuum.rk4_integrate(field, Y0, 1.0, dt)
        _, fine = continuum.rk4_integrate(field, Y0, 1.0, dt / 2.0)
        errs.append(np.linalg.norm(coarse[-1] - fine[-1]))
    slope = np.log(errs[0] / errs[1]) / np.log(2.0)
    assert 3.8 <= slope <= 4.2


def test_rk4_linear_field_matches_exponential():
    # block rotation field; the flow is elementwise sine/cosine
    omega = 1.3
    A = np.array([[0.0, omega], [-omega, 0.0]])
    field = lambda y: A @ y
    _, states = continuum.rk4_integrate(field, np.array([1.0, 0.0]), 1.0, 1e-3)
    exact = np.array([np.cos(omega), -np.sin(omega)])
    assert np.linalg.norm(states[-1] - exact) < 1e-12


def test_discretize_validation_and_consistency():
    Lc, lam = heavy()
    with pytest.raises(ValueError):
        continuum.discretize(Lc, 0.0, Scheme.LOG, lam.rep)
    with pytest.raises(ValueError):
        continuum.discretize(Lc, 1e-2, Scheme.TRACE, lam.rep)
    # eps-expansion: Lam(exp(eps Om), P)/eps approaches L(Om, P) linearly
    Om = np.array([0.7, -0.4, 1.1])
    for scheme in (Scheme.LOG, Scheme.MIDPOINT):
        residuals = []
        for eps in (1e-2, 1e-3, 1e-4):
            lam_e = continuum.discretize(Lc, eps, scheme, lam.rep)
            residuals.append(abs(lam_e.eval(lie.exp(eps * Om), P0) / eps
                                 - Lc.eval(Om, P0)))
        assert all(r <= 5.0 * eps for r, eps in zip(residuals, (1e-2, 1e-3, 1e-4)))


def test_schemes_agree_at_first_order():
    Lc, lam = heavy()
    Om = np.array([0.5, -0.2, 0.9])
    diffs = {}
    for scheme in (Scheme.MIDPOINT,):
        diffs[scheme] = []
        for eps in (1e-2, 1e-3, 1e-4):
            lam_log = continuum.discretize(Lc, eps, Scheme.LOG, lam.rep)
            lam_alt = continuum.discretize(Lc, eps, scheme, lam.rep)
            W = lie.exp(eps * Om)
            diffs[scheme].append(abs(lam_alt.eval(W, P0) - lam_log.eval(W, P0)) / eps)
    for seq in diffs.values():
        # difference over eps vanishes linearly
        assert seq[1] / seq[0] < 0.2 and seq[2] / seq[1] < 0.2


def test_trace_scheme_agrees_at_first_order():
    Om = np.array([0.5, -0.2, 0.9])
    seq = []
    for eps in (1e-2, 1e-3, 1e-4):
        lam_log = systems.make_heavy_top(PARAMS, eps, scheme=Scheme.LOG)[1]
        lam_tr = systems.make_heavy_top(PARAMS, eps, scheme=Scheme.TRACE)[1]
        W = lie.exp(eps * Om)
        seq.append(abs(lam_tr.eval(W, P0) - lam_log.eval(W, P0)) / eps)
    assert seq[1] / seq[0] < 0.05


def test_convergence_study_heavy_top():
    Lc, _ = heavy()
    lam_for = lambda e: systems.make_heavy_top(PARAMS, e)[1]
    rpt = continuum.convergence_study(lam_for, Lc, (M0, P0), t_end=0.5,
                                      ref_divisions=40)
    assert rpt["slope"] >= 0.9
    assert rpt["reference_self_error"] < 1e-10
    errs = rpt["errors"]
    assert all(b < a for a, b in zip(errs, errs[1:]))  # refinement monotonicity


def test_convergence_study_exact_case():
    rb = systems.RigidBodyParams(np.eye(3))
    Lc, _ = systems.make_rigid_body(rb, 1e-2)
    lam_for = lambda e: systems.make_rigid_body(rb, e)[1]
    rpt = continuum.convergence_study(lam_for, Lc, (M0, P0), t_end=0.5,
                                      ref_divisions=40)
    assert rpt["exact"] and rpt["slope"] is None
    assert max(rpt["errors"]) <= 1e-10


def test_one_step_consistency_second_order_error():
    Lc, _ = heavy()
    lam_for = lambda e: systems.make_heavy_top(PARAMS, e)[1]
    rpt = continuum.one_step_consistency(lam_for, Lc, (M0, P0))
    assert rpt["slope"] >= 1.9


def test_legendre_not_invertible_surfaces():
    Lc = continuum.ContinuousReducedLagrangian(lambda Om, P: 0.0)
    with pytest.raises(continuum.LegendreNotInvertible):
        continuum.ep_vector_field(Side.LEFT, Lc, (M0, P0),
                                  systems.make_heavy_top(PARAMS, 1e-2)[1].rep)
