"""SE(3) primitives: rigid transforms, Kabsch registration, screw decomposition.

Conventions used throughout the package:

* rotations are 3x3 proper orthogonal matrices acting on column vectors,
* angles are radians, lengths are meters,
* a screw is a rotation by ``angle`` about the line ``point + s*direction``
  composed with a translation of ``slide`` along ``direction``; ``point`` is
  the unique point on the axis closest to the origin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateConfiguration, NullMotion, ValidationError

# Tolerance ladder: exact-math round trips vs unit-norm checks on stored data.
EXACT_TOL = 1e-9
UNIT_TOL = 1e-6

# Rotations below this angle are treated as pure translations.
MIN_ROTATION = 1e-6


def _as_points(pts) -> np.ndarray:
    a = np.asarray(pts, dtype=float)
    if a.ndim == 1:
        a = a.reshape(1, 3)
    if a.ndim != 2 or a.shape[1] != 3:
        raise ValidationError(f"expected (N, 3) points, got shape {a.shape}")
    return a


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValidationError("cannot normalize a zero vector")
    return v / n


def canonical_direction(d) -> tuple[np.ndarray, float]:
    """Resolve the +/-d ambiguity of an undirected axis.

    Flips the vector so its first component with magnitude above 1e-9 is
    positive. Returns the canonical vector and the sign applied (+1 or -1),
    which callers use to keep signed states consistent with the flip.
    """
    d = np.asarray(d, dtype=float)
    for c in d:
        if abs(c) > 1e-9:
            if c < 0.0:
                return -d, -1.0
            return d.copy(), 1.0
    raise ValidationError("direction has no component above 1e-9")


def rotation_about_axis(direction, angle: float) -> np.ndarray:
    """Rodrigues rotation matrix about a unit direction through the origin."""
    d = unit(direction)
    K = np.array([
        [0.0, -d[2], d[1]],
        [d[2], 0.0, -d[0]],
        [-d[1], d[0], 0.0],
    ])
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)


@dataclass(frozen=True)
class RigidTransform:
    """Proper rigid motion x -> rotation @ x + translation."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=float)
        t = np.asarray(self.translation, dtype=float).reshape(-1)
        if R.shape != (3, 3):
            raise ValidationError(f"rotation must be 3x3, got {R.shape}")
        if t.shape != (3,):
            raise ValidationError(f"translation must be length 3, got {t.shape}")
        if not np.allclose(R @ R.T, np.eye(3), atol=EXACT_TOL, rtol=0.0):
            raise ValidationError("rotation is not orthogonal within 1e-9")
        if abs(np.linalg.det(R) - 1.0) > EXACT_TOL:
            raise ValidationError("rotation must have determinant +1 within 1e-9")
        object.__setattr__(self, "rotation", _frozen(R))
        object.__setattr__(self, "translation", _frozen(t))

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """self after other: (self @ other)(x) = self(other(x))."""
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def inverse(self) -> "RigidTransform":
        return RigidTransform(self.rotation.T, -self.rotation.T @ self.translation)

    def __eq__(self, other):
        if not isinstance(other, RigidTransform):
            return NotImplemented
        return np.array_equal(self.rotation, other.rotation) and np.array_equal(
            self.translation, other.translation
        )


@dataclass(frozen=True)
class ScrewParams:
    """Screw decomposition of a rigid motion.

    ``point`` is the minimum-norm point on the axis (point . direction = 0)
    and ``angle`` lies in [0, pi]; ``slide`` may take either sign.
    """

    direction: np.ndarray
    point: np.ndarray
    angle: float
    slide: float

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float).reshape(-1)
        p = np.asarray(self.point, dtype=float).reshape(-1)
        if d.shape != (3,) or p.shape != (3,):
            raise ValidationError("direction and point must be 3-vectors")
        if abs(np.linalg.norm(d) - 1.0) > EXACT_TOL:
            raise ValidationError("screw direction must be unit within 1e-9")
        if abs(float(np.dot(p, d))) > EXACT_TOL:
            raise ValidationError("screw point must be the minimum-norm axis point")
        if not (-EXACT_TOL <= self.angle <= np.pi + EXACT_TOL):
            raise ValidationError("screw angle must lie in [0, pi]")
        object.__setattr__(self, "direction", _frozen(d))
        object.__setattr__(self, "point", _frozen(p))
        object.__setattr__(self, "angle", float(self.angle))
        object.__setattr__(self, "slide", float(self.slide))

    def __eq__(self, other):
        if not isinstance(other, ScrewParams):
            return NotImplemented
        return (
            np.array_equal(self.direction, other.direction)
            and np.array_equal(self.point, other.point)
            and self.angle == other.angle
            and self.slide == other.slide
        )


def apply_transform(t: RigidTransform, pts) -> np.ndarray:
    """Map points (N, 3) through a rigid transform."""
    p = _as_points(pts)
    return p @ t.rotation.T + t.translation


def kabsch_fit(src, dst) -> RigidTransform:
    """Least-squares rigid transform taking src onto dst (corresponded rows).

    Minimizes sum ||R @ src_i + t - dst_i||^2 with det(R) = +1 enforced by
    flipping the smallest singular vector when the unconstrained optimum
    would reflect.
    """
    a = _as_points(src)
    b = _as_points(dst)
    if a.shape != b.shape:
        raise DegenerateConfiguration(
            f"point sets differ in shape: {a.shape} vs {b.shape}"
        )
    n = a.shape[0]
    if n < 3:
        raise DegenerateConfiguration(f"need at least 3 points, got {n}")
    ca = a.mean(axis=0)
    cb = b.mean(axis=0)
    ac = a - ca
    bc = b - cb
    # Collinear sources leave a rotation about the line undetermined.
    s = np.linalg.svd(ac, compute_uv=False)
    if s[1] <= 1e-9 * max(s[0], 1e-300):
        raise DegenerateConfiguration("source points are collinear")
    H = ac.T @ bc
    U, _, Vt = np.linalg.svd(H)
    V = Vt.T
    sign = np.sign(np.linalg.det(V @ U.T))
    R = V @ np.diag([1.0, 1.0, sign]) @ U.T
    return RigidTransform(R, cb - R @ ca)


def screw_from_transform(t: RigidTransform) -> ScrewParams:
    """Factor a rigid transform into rotation about + translation along one axis.

    Raises NullMotion when the transform is the identity to within the
    minimum-rotation / 1e-9 m floor.
    """
    R = t.rotation
    tr = t.translation
    cos_theta = np.clip((np.trace(R) - 1.0) / 2.0, -1.0, 1.0)
    theta = float(np.arccos(cos_theta))

    if theta <= MIN_ROTATION:
        norm_t = float(np.linalg.norm(tr))
        if norm_t <= 1e-9:
            raise NullMotion("transform is the identity within tolerance")
        d = tr / norm_t
        return ScrewParams(d, np.zeros(3), 0.0, norm_t)

    skew = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    if theta <= 3.0 * np.pi / 4.0:
        d = skew / (2.0 * np.sin(theta))
    else:
        # Near pi the skew part vanishes; recover the axis from the symmetric
        # part, which stays well conditioned, and use the skew only for sign.
        S = (R + R.T - 2.0 * cos_theta * np.eye(3)) / (2.0 * (1.0 - cos_theta))
        col = int(np.argmax(np.diag(S)))
        d = S[:, col] / np.sqrt(S[col, col])
        if np.linalg.norm(skew) > 1e-12:
            if float(np.dot(d, skew)) < 0.0:
                d = -d
        else:
            d, _ = canonical_direction(d)
    d = unit(d)

    slide = float(np.dot(d, tr))
    # Axis point: (I - R) p = t - slide * d, solved in the plane orthogonal
    # to d; the pseudoinverse returns the minimum-norm (on-axis) solution.
    # Both in-plane singular values equal 2 sin(theta/2), so rcond=1e-8
    # always truncates the numerically-null axis and nothing else.
    u = tr - slide * d
    p = np.linalg.pinv(np.eye(3) - R, rcond=1e-8) @ u
    p = p - float(np.dot(p, d)) * d
    return ScrewParams(d, p, theta, slide)


def transform_from_screw(s: ScrewParams) -> RigidTransform:
    """Rigid transform realizing a screw: axis points move only by slide."""
    R = rotation_about_axis(s.direction, s.angle)
    tr = (np.eye(3) - R) @ s.point + s.slide * s.direction
    return RigidTransform(R, tr)


def joint_transform(direction, point, state: float, prismatic: bool) -> RigidTransform:
    """Transform induced by a one-DoF joint at a given state.

    Revolute: rotation by ``state`` about the line through ``point`` along
    ``direction``. Prismatic: translation of ``state`` along ``direction``.
    Negative revolute states rotate about the reversed axis so the stored
    screw angle stays in [0, pi].
    """
    d = unit(direction)
    if prismatic:
        return RigidTransform(np.eye(3), state * d)
    p = np.asarray(point, dtype=float)
    p_min = p - float(np.dot(p, d)) * d
    if state < 0.0:
        d, state = -d, -state
    return transform_from_screw(ScrewParams(d, p_min, state, 0.0))


def point_line_distance(pts, line_point, line_dir) -> np.ndarray:
    """Distances from points (N, 3) to the line through line_point along line_dir."""
    p = _as_points(pts)
    d = unit(line_dir)
    rel = p - np.asarray(line_point, dtype=float)
    perp = rel - np.outer(rel @ d, d)
    return np.linalg.norm(perp, axis=1)


__all__ = [
    "RigidTransform",
    "ScrewParams",
    "apply_transform",
    "canonical_direction",
    "joint_transform",
    "kabsch_fit",
    "point_line_distance",
    "rotation_about_axis",
    "screw_from_transform",
    "transform_from_screw",
    "unit",
    "EXACT_TOL",
    "UNIT_TOL",
    "MIN_ROTATION",
]
