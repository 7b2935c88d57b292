"""Command-line front end: simulate, verify, converge.

All three subcommands take a single JSON config file and write their
artifacts (delimited output, JSON reports, rendered figures) into the
output directory.  Exit codes: 0 success, 1 usage or config error,
2 solver failure (partial trajectory flushed with a failure marker),
3 property/slope failure.  Outputs are byte-reproducible for a fixed
config and seed; DEPI_THREADS caps parallelism of independent checks.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import continuum, reporting, stepper, systems, verification
from .continuum import Scheme
from .lagrangian import Side
from .liegroup import NearBranchCut
from .stepper import NoConvergence, OrbitDrift, ReducedState

CONVERGE_MIN_SLOPE = 0.9


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"config error at '{field}': {message}")
        self.field = field


def _threads() -> int:
    raw = os.environ.get("DEPI_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def load_config(path: str) -> dict:
    try:
        with open(path) as handle:
            return json.load(handle)
    except FileNotFoundError:
        raise ConfigError(path, "file not found")
    except json.JSONDecodeError as exc:
        raise ConfigError(path, f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}")


def _field(cfg: dict, name: str, default=None, required: bool = False):
    if name in cfg:
        return cfg[name]
    if required:
        raise ConfigError(name, "missing required field")
    return default


def _vector(cfg: dict, name: str, raw) -> np.ndarray:
    try:
        v = np.array(raw, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(name, "must be a list of three numbers")
    if v.shape != (3,):
        raise ConfigError(name, f"must have three components, got shape {v.shape}")
    return v


def _enum(name: str, raw: str, mapping: dict):
    if raw not in mapping:
        raise ConfigError(name, f"must be one of {sorted(mapping)}, got {raw!r}")
    return mapping[raw]


def parse_run(cfg: dict):
    """Validate the simulation fields of a config; returns a plain namespace dict."""
    system = _enum("system", _field(cfg, "system", required=True),
                   {"heavy_top": "heavy_top", "rigid_body": "rigid_body"})
    side = _enum("side", _field(cfg, "side", "left"),
                 {"left": Side.LEFT, "right": Side.RIGHT})
    scheme = _enum("scheme", _field(cfg, "scheme", "log"),
                   {"log": Scheme.LOG, "midpoint": Scheme.MIDPOINT, "trace": Scheme.TRACE})
    eps = _field(cfg, "eps", required=True)
    if not isinstance(eps, (int, float)) or eps <= 0:
        raise ConfigError("eps", "must be a positive number")
    n_steps = _field(cfg, "n_steps", 1000)
    if not isinstance(n_steps, int) or n_steps < 1:
        raise ConfigError("n_steps", "must be an integer >= 1")
    seed = _field(cfg, "seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("seed", "must be an integer")

    raw_params = _field(cfg, "params", {})
    inertia = raw_params.get("inertia", [1.0, 1.0, 2.0])
    try:
        if system == "heavy_top":
            params = systems.HeavyTopParams(
                inertia=inertia,
                mgl=float(raw_params.get("mgl", 1.0)),
                chi=raw_params.get("chi", (0.0, 0.0, 1.0)),
                gravity_axis=raw_params.get("gravity_axis", (0.0, 0.0, 1.0)),
            )
        else:
            params = systems.RigidBodyParams(inertia=inertia)
    except ValueError as exc:
        raise ConfigError("params", str(exc))

    initial = _field(cfg, "initial", {})
    M0 = _vector(cfg, "initial.M", initial.get("M", [0.4, -0.3, 1.5]))
    P0 = _vector(cfg, "initial.P", initial.get("P", [0.3, 0.0, 0.95]))
    return {
        "system": system, "side": side, "scheme": scheme, "eps": float(eps),
        "n_steps": n_steps, "seed": seed, "params": params, "M0": M0, "P0": P0,
    }


def build_lagrangians(run: dict):
    if run["system"] == "heavy_top":
        return systems.make_heavy_top(run["params"], run["eps"],
                                      scheme=run["scheme"], side=run["side"])
    return systems.make_rigid_body(run["params"], run["eps"],
                                   scheme=run["scheme"], side=run["side"])


def _normalized_initial(run: dict, lam) -> ReducedState:
    P0 = run["P0"]
    target = lam.rep.anchor_norm
    norm = float(np.linalg.norm(P0))
    if norm == 0.0:
        raise ConfigError("initial.P", "must be nonzero")
    if abs(norm - target) > 1e-8:
        print(f"warning: renormalizing |P| from {norm:.12g} to {target:.12g}",
              file=sys.stderr)
    return ReducedState(run["M0"], P0 * (target / norm))


def cmd_simulate(cfg: dict, out_dir: str) -> int:
    from . import plots

    run = parse_run(cfg)
    Lc, lam = build_lagrangians(run)
    state = _normalized_initial(run, lam)
    os.makedirs(out_dir, exist_ok=True)

    states, steps, residuals = [state], [], []
    guess = None
    failure = None
    for k in range(run["n_steps"]):
        try:
            nxt, W = stepper.step_ep(lam, states[-1], W_guess=guess)
        except (NoConvergence, NearBranchCut, OrbitDrift) as exc:
            failure = f"{type(exc).__name__} at step {k}: {exc}"
            break
        residuals.append(float(np.linalg.norm(stepper.ep_residual(lam, W, states[-1]))))
        states.append(nxt)
        steps.append(W)
        guess = W
    traj = stepper.Trajectory(states, steps, residuals, lam.side,
                              {"system": run["system"], "eps": run["eps"]})

    csv_path = os.path.join(out_dir, "trajectory.csv")
    reporting.write_trajectory_csv(csv_path, traj, lam, failure=failure)
    report = systems.invariant_report(run["system"], lam, traj, run["eps"])
    report["seed"] = run["seed"]
    report["failed"] = failure
    reporting.write_json(os.path.join(out_dir, "invariants.json"), report)
    if traj.steps:
        plots.render_invariants(report, os.path.join(out_dir, "invariants.png"))
    if failure:
        print(failure, file=sys.stderr)
        return 2
    print(f"simulate: {run['n_steps']} steps written to {csv_path}")
    return 0


def cmd_verify(cfg: dict, out_dir: str) -> int:
    from . import plots

    seed = _field(cfg, "seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("seed", "must be an integer")
    report = verification.run_suite(
        seed=seed,
        n_pairs=int(_field(cfg, "n_pairs", 20)),
        n_points=int(_field(cfg, "n_phase_points", 5)),
        n_triples=int(_field(cfg, "n_triples", 50)),
        negative_control=bool(_field(cfg, "negative_control", False)),
        threads=_threads(),
    )
    os.makedirs(out_dir, exist_ok=True)
    reporting.write_json(os.path.join(out_dir, "verify_report.json"), report)
    plots.render_verification(report, os.path.join(out_dir, "verification.png"))
    if not report["pass"]:
        print("verify: FAILED checks: " + ", ".join(report["failing"]), file=sys.stderr)
        return 3
    print(f"verify: all {len(report['checks'])} checks passed")
    return 0


def cmd_converge(cfg: dict, out_dir: str) -> int:
    from . import plots

    run = parse_run(cfg)
    eps_list = _field(cfg, "eps_list", required=True)
    if (not isinstance(eps_list, list) or len(eps_list) < 3
            or any(not isinstance(e, (int, float)) or e <= 0 for e in eps_list)):
        raise ConfigError("eps_list", "must list at least three positive step sizes")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ConfigError("eps_list", "step sizes must be strictly decreasing")
    t_end = _field(cfg, "t_end", 1.0)
    if not isinstance(t_end, (int, float)) or t_end <= 0:
        raise ConfigError("t_end", "must be a positive number")

    def lam_for(eps):
        local = dict(run)
        local["eps"] = eps
        return build_lagrangians(local)[1]

    Lc = build_lagrangians(run)[0]
    state = _normalized_initial(run, lam_for(eps_list[0]))
    report = continuum.convergence_study(
        lam_for, Lc, (state.M, state.P), float(t_end),
        side=run["side"], eps_list=tuple(float(e) for e in eps_list))
    passed = bool(report["exact"] or (report["slope"] is not None
                                      and report["slope"] >= CONVERGE_MIN_SLOPE))
    report["pass"] = passed
    report["min_slope"] = CONVERGE_MIN_SLOPE
    report["seed"] = run["seed"]

    os.makedirs(out_dir, exist_ok=True)
    reporting.write_convergence_csv(os.path.join(out_dir, "convergence.csv"), report)
    reporting.write_json(os.path.join(out_dir, "convergence.json"), report)
    plots.render_convergence(report, os.path.join(out_dir, "convergence.png"))
    if not passed:
        slope = report["slope"]
        print(f"converge: slope {slope} below {CONVERGE_MIN_SLOPE}", file=sys.stderr)
        return 3
    marker = "exact" if report["exact"] else f"slope {report['slope']:.3f}"
    print(f"converge: pass ({marker})")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="depi",
        description="Structure-preserving discrete Euler-Poincare integrators on SO(3)",
    )
    parser.add_argument("--out-dir", default="depi-out",
                        help="directory for artifacts (default: depi-out)")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (
        ("simulate", "run a reduced trajectory, write CSV + invariant report"),
        ("verify", "run the property-verification suite"),
        ("converge", "run a continuous-limit convergence study"),
    ):
        p = sub.add_parser(name, help=doc)
        p.add_argument("config", help="JSON config file")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        out_dir = cfg.get("out_dir", args.out_dir)
        if args.command == "simulate":
            return cmd_simulate(cfg, out_dir)
        if args.command == "verify":
            return cmd_verify(cfg, out_dir)
        return cmd_converge(cfg, out_dir)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
