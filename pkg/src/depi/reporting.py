"""Artifact writers: delimited trajectory/convergence output and JSON reports.

Numbers are written with 17 significant digits ('%.17g') so doubles
round-trip exactly; files are written to a temporary sibling and renamed
into place, so partially-written artifacts are never observed.  Identical
inputs produce byte-identical files.
"""

from __future__ import annotations

import json
import os
import tempfile
from typing import Iterable, Sequence

import numpy as np

from . import liegroup as lie


def fmt(x: float) -> str:
    return "%.17g" % float(x)


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence],
              trailer: str | None = None) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(cell if isinstance(cell, str) else fmt(cell) for cell in row))
    if trailer:
        lines.append(trailer)
    _atomic_write(path, "\n".join(lines) + "\n")


def write_json(path: str, obj) -> None:
    _atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def trajectory_rows(trajectory, lam) -> list[list]:
    """CSV rows for a reduced trajectory: k, M, P, step axis-angle, residual.

    Row k carries the increment that produced state k and that increment's
    stepping residual, recomputed here from the stored states (audit mode)
    rather than echoed from the solver; row 0 has a zero increment and a
    zero residual.
    """
    from . import stepper as stepper_mod

    rows = []
    for k, state in enumerate(trajectory.states):
        if k == 0:
            axis_angle = np.zeros(3)
            residual = 0.0
        else:
            W = trajectory.steps[k - 1]
            axis_angle = lie.log(W)
            residual = float(np.linalg.norm(
                stepper_mod.ep_residual(lam, W, trajectory.states[k - 1])))
        rows.append([k, *state.M, *state.P, *axis_angle, residual])
    return rows


TRAJECTORY_HEADER = ["k", "M1", "M2", "M3", "P1", "P2", "P3", "W1", "W2", "W3", "residual"]


def write_trajectory_csv(path: str, trajectory, lam, failure: str | None = None) -> None:
    rows = trajectory_rows(trajectory, lam)
    formatted = [[str(int(r[0]))] + [fmt(x) for x in r[1:]] for r in rows]
    trailer = f"# FAILED {failure}" if failure else None
    write_csv(path, TRAJECTORY_HEADER, formatted, trailer=trailer)


def write_convergence_csv(path: str, report: dict) -> None:
    rows = []
    for eps, err, ratio in zip(report["eps"], report["errors"], report["ratios"]):
        rows.append([fmt(eps), fmt(err), "" if ratio is None else fmt(ratio)])
    write_csv(path, ["eps", "error", "ratio"], rows)
