"""SO(3) substrate: rotations, exp/log, adjoint machinery, pairings.

The interface is group-shaped (compose, inverse, exp, log, Ad, ad and their
duals under a fixed nondegenerate pairing) so other matrix groups could be
slotted in later, but only SO(3) is instantiated.  Lie-algebra and dual
elements are plain 3-vectors under the hat-map identification; the pairing
is the coordinate dot product, equivalently (1/2) tr(hat(x)^T hat(y)).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Compositions between polar-factor re-orthonormalizations.  Keeps the
# orthonormality defect of long products (10^4 steps and more) near roundoff
# without touching short chains.
RENORM_EVERY = 64

# Principal-log domain boundary: rotation angles at or beyond pi - this
# margin are rejected instead of silently picking a branch.
LOG_ANGLE_MARGIN = 1e-6

_EYE3 = np.eye(3)


class NearBranchCut(ValueError):
    """Rotation angle too close to pi for a trustworthy principal logarithm."""


def hat(v: np.ndarray) -> np.ndarray:
    """3-vector -> skew matrix, so that hat(v) @ w == cross(v, w)."""
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def _cross(a, b) -> np.ndarray:
    # np.cross has high per-call overhead on single 3-vectors; steppers and
    # field evaluations sit in tight loops on exactly that case.
    return np.array(
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    )


def _norm3(v) -> float:
    return float(np.sqrt(v @ v))


def vee(S: np.ndarray) -> np.ndarray:
    """Inverse of hat on skew matrices (uses only the lower triangle)."""
    return np.array([S[2, 1], S[0, 2], S[1, 0]])


def _polar_project(m: np.ndarray) -> np.ndarray:
    """Nearest rotation in Frobenius norm: the polar factor of m."""
    u, _, vt = np.linalg.svd(m)
    r = u @ vt
    if np.linalg.det(r) < 0.0:
        r = u @ np.diag([1.0, 1.0, -1.0]) @ vt
    return r


@dataclass(frozen=True)
class Rotation:
    """A point of SO(3): proper orthogonal 3x3 matrix, immutable.

    `depth` counts how many compositions produced this element since the
    last re-orthonormalization; `compose` projects back onto SO(3) every
    RENORM_EVERY compositions so that arbitrarily long operation chains
    stay orthonormal to ~1e-10.
    """

    matrix: np.ndarray
    depth: int = field(default=0, compare=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @staticmethod
    def identity() -> "Rotation":
        return Rotation(_EYE3)

    def inverse(self) -> "Rotation":
        return Rotation(self.matrix.T, self.depth)

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v


def identity() -> Rotation:
    return Rotation.identity()


def compose(g: Rotation, h: Rotation) -> Rotation:
    """Group product g h, with periodic polar re-orthonormalization."""
    m = g.matrix @ h.matrix
    depth = max(g.depth, h.depth) + 1
    if depth >= RENORM_EVERY:
        return Rotation(_polar_project(m), 0)
    return Rotation(m, depth)


def exp(xi: np.ndarray) -> Rotation:
    """Rodrigues-formula exponential of hat(xi); exp(0) is exactly I."""
    xi = np.asarray(xi, dtype=float)
    theta = _norm3(xi)
    if theta == 0.0:
        return Rotation(_EYE3)
    t2 = theta * theta
    if theta < 1e-4:
        a = 1.0 - t2 / 6.0 * (1.0 - t2 / 20.0)
        b = 0.5 * (1.0 - t2 / 12.0 * (1.0 - t2 / 30.0))
    else:
        a = np.sin(theta) / theta
        b = (1.0 - np.cos(theta)) / t2
    s = hat(xi)
    return Rotation(_EYE3 + a * s + b * (s @ s))


def _quaternion(g: Rotation) -> tuple[float, np.ndarray]:
    """Unit quaternion (w, xyz) with w >= 0, via the stable branch choice."""
    m = g.matrix
    t = np.trace(m)
    if t > m[0, 0] and t > m[1, 1] and t > m[2, 2]:
        r = np.sqrt(1.0 + t)
        w = 0.5 * r
        xyz = 0.5 * np.array(
            [m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]]
        ) / r
    else:
        i = int(np.argmax([m[0, 0], m[1, 1], m[2, 2]]))
        j, k = (i + 1) % 3, (i + 2) % 3
        r = np.sqrt(1.0 + m[i, i] - m[j, j] - m[k, k])
        xyz = np.empty(3)
        xyz[i] = 0.5 * r
        xyz[j] = 0.5 * (m[i, j] + m[j, i]) / r
        xyz[k] = 0.5 * (m[i, k] + m[k, i]) / r
        w = 0.5 * (m[k, j] - m[j, k]) / r
    if w < 0.0:
        w, xyz = -w, -xyz
    return float(w), xyz


def rotation_angle(g: Rotation) -> float:
    """Geodesic distance of g from the identity, in [0, pi]."""
    w, xyz = _quaternion(g)
    return 2.0 * float(np.arctan2(_norm3(xyz), w))


def log(g: Rotation) -> np.ndarray:
    """Principal logarithm as a 3-vector; exp(log(g)) == g to ~1e-10.

    Raises NearBranchCut when the rotation angle is within LOG_ANGLE_MARGIN
    of pi, where the principal branch degenerates.  Callers stepping a
    dynamical system should reduce the step size instead of branching.
    """
    w, xyz = _quaternion(g)
    n = _norm3(xyz)
    angle = 2.0 * float(np.arctan2(n, w))
    if angle >= np.pi - LOG_ANGLE_MARGIN:
        raise NearBranchCut(f"rotation angle {angle:.9f} too close to pi")
    if n < 1e-9:
        # atan2(n, w)/n -> 1/w as n -> 0; w ~ 1 here
        return (2.0 / w) * (1.0 - (n / w) ** 2 / 3.0) * xyz
    return (angle / n) * xyz


def rotation_about(axis: np.ndarray, angle: float) -> Rotation:
    """Rotation by `angle` about the given (not necessarily unit) axis."""
    axis = np.asarray(axis, dtype=float)
    return exp(angle * axis / np.linalg.norm(axis))


def rotation_between(u: np.ndarray, v: np.ndarray) -> Rotation:
    """Some rotation mapping direction u to direction v.

    Antipodal inputs get a half-turn about a fixed perpendicular axis, so
    the map is deterministic everywhere (but not continuous across the
    antipode; see orbit-lift notes in the lagrangian module).
    """
    u = np.asarray(u, dtype=float) / np.linalg.norm(u)
    v = np.asarray(v, dtype=float) / np.linalg.norm(v)
    c = float(np.clip(u @ v, -1.0, 1.0))
    w = np.cross(u, v)
    s = float(np.linalg.norm(w))
    if s < 1e-12:
        if c > 0.0:
            return Rotation.identity()
        # pick any axis perpendicular to u
        probe = np.array([1.0, 0.0, 0.0])
        if abs(u[0]) > 0.9:
            probe = np.array([0.0, 1.0, 0.0])
        axis = np.cross(u, probe)
        return rotation_about(axis, np.pi)
    return rotation_about(w, float(np.arctan2(s, c)))


def Ad(g: Rotation, eta: np.ndarray) -> np.ndarray:
    """Adjoint action: vee(g hat(eta) g^-1), which is just g @ eta on SO(3)."""
    return g.matrix @ eta


def Ad_star(g: Rotation, xi: np.ndarray) -> np.ndarray:
    """Coadjoint action, the pairing-adjoint of Ad: <Ad* g . xi, eta> = <xi, Ad g . eta>."""
    return g.matrix.T @ xi


def ad(eta: np.ndarray, zeta: np.ndarray) -> np.ndarray:
    """Lie bracket [eta, zeta]; the cross product under the hat map."""
    return _cross(eta, zeta)


def ad_star(eta: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """Infinitesimal coadjoint action: <ad* eta . xi, zeta> = <xi, [eta, zeta]>."""
    return _cross(xi, eta)


def pairing(xi: np.ndarray, eta: np.ndarray) -> float:
    """Duality pairing of a coalgebra and an algebra vector (dot product)."""
    return float(np.dot(xi, eta))


def dexpinv(psi: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Inverse of the right-trivialized differential of exp at psi, applied to v.

    With dexp(psi) defined by  d/ds exp(psi(s)) = hat(dexp(psi) psi') exp(psi),
    this computes dexp(psi)^-1 v.  Closed form on so(3):
        dexpinv(psi) = I - hat(psi)/2 + c2(|psi|) hat(psi)^2,
        c2(t) = (1 - (t/2) cot(t/2)) / t^2.
    Consequently d/ds log(exp(s hat(eta)) W)|_0 = dexpinv(log W, eta) and
    d/ds log(W exp(s hat(eta)))|_0 = dexpinv(-log W, eta).
    """
    psi = np.asarray(psi, dtype=float)
    theta = _norm3(psi)
    if theta < 1e-4:
        t2 = theta * theta
        c2 = 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0
    else:
        half = 0.5 * theta
        c2 = (1.0 - half / np.tan(half)) / (theta * theta)
    w = _cross(psi, v)
    return v - 0.5 * w + c2 * _cross(psi, w)


def orthonormalized(g: Rotation) -> Rotation:
    """Polar projection of g back onto SO(3), resetting its composition depth."""
    return Rotation(_polar_project(g.matrix), 0)


def geodesic_distance(g: Rotation, h: Rotation) -> float:
    """Bi-invariant distance: the rotation angle of g^-1 h."""
    return rotation_angle(compose(g.inverse(), h))


def orthonormality_defect(g: Rotation) -> float:
    """Max-entry deviation of g^T g from the identity."""
    return float(np.max(np.abs(g.matrix.T @ g.matrix - _EYE3)))


def random_rotation(rng: np.random.Generator) -> Rotation:
    """Haar-ish random rotation: exp of a uniformly random axis-angle, angle <= pi - 0.1."""
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = rng.uniform(0.0, np.pi - 0.1)
    return exp(angle * axis)


def random_vector(rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    return scale * rng.normal(size=3)
