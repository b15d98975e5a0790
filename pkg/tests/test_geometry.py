import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.spatial.transform import Rotation

from oksm.errors import DegenerateConfiguration, NullMotion, ValidationError
from oksm.geometry import (
    RigidTransform,
    ScrewParams,
    apply_transform,
    canonical_direction,
    kabsch_fit,
    point_line_distance,
    screw_from_transform,
    transform_from_screw,
)


def random_screw(rng, angle_lo=1e-3, angle_hi=np.pi - 1e-3):
    d = rng.normal(size=3)
    d /= np.linalg.norm(d)
    p = rng.normal(size=3)
    p -= np.dot(p, d) * d
    return ScrewParams(d, p, rng.uniform(angle_lo, angle_hi), rng.uniform(-0.5, 0.5))


def reference_transform(rotvec, translation):
    """Oracle transform built on scipy, independent of the package's Rodrigues."""
    return RigidTransform(Rotation.from_rotvec(rotvec).as_matrix(), translation)


# --- apply_transform ---------------------------------------------------------

def test_apply_identity():
    t = RigidTransform.identity()
    assert_allclose(apply_transform(t, [(1.0, 2.0, 3.0)]), [[1.0, 2.0, 3.0]])


def test_apply_rotation_90_about_z():
    R = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    t = RigidTransform(R, np.zeros(3))
    assert_allclose(apply_transform(t, [(1.0, 0.0, 0.0)]), [[0.0, 1.0, 0.0]], atol=1e-15)


def test_apply_pure_translation():
    t = RigidTransform(np.eye(3), [0.0, 0.0, 0.05])
    assert_allclose(apply_transform(t, [(0.0, 0.0, 0.0)]), [[0.0, 0.0, 0.05]])


def test_rigid_transform_rejects_improper_rotation():
    with pytest.raises(ValidationError):
        RigidTransform(np.diag([1.0, 1.0, -1.0]), np.zeros(3))
    with pytest.raises(ValidationError):
        RigidTransform(np.eye(3) * 1.001, np.zeros(3))


# --- kabsch_fit ---------------------------------------------------------------

def test_kabsch_identity_on_equal_sets():
    pts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)
    fit = kabsch_fit(pts, pts)
    assert_allclose(fit.rotation, np.eye(3), atol=1e-12)
    assert_allclose(fit.translation, np.zeros(3), atol=1e-12)


def test_kabsch_recovers_known_transform():
    rng = np.random.default_rng(3)
    src = rng.normal(size=(50, 3))
    true = reference_transform(rng.normal(size=3), rng.normal(size=3))
    fit = kabsch_fit(src, apply_transform(true, src))
    assert_allclose(fit.rotation, true.rotation, atol=1e-9)
    assert_allclose(fit.translation, true.translation, atol=1e-9)


def test_kabsch_noise_residual_bound():
    # RMS residual stays below 3 sigma at sigma = 1 mm.
    sigma = 1e-3
    for seed in range(100):
        rng = np.random.default_rng(seed)
        src = rng.normal(size=(60, 3)) * 0.3
        true = reference_transform(rng.normal(size=3), rng.normal(size=3))
        dst = apply_transform(true, src) + rng.normal(0.0, sigma, size=src.shape)
        fit = kabsch_fit(src, dst)
        res = apply_transform(fit, src) - dst
        rms = np.sqrt(np.mean(np.sum(res**2, axis=1)))
        assert rms <= 3 * sigma


def test_kabsch_degenerate_inputs():
    line = np.outer(np.linspace(0, 1, 10), [1.0, 2.0, 3.0])
    with pytest.raises(DegenerateConfiguration):
        kabsch_fit(line, line)
    two = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    with pytest.raises(DegenerateConfiguration):
        kabsch_fit(two, two)
    with pytest.raises(DegenerateConfiguration):
        kabsch_fit(np.zeros((4, 3)), np.zeros((5, 3)))


def test_kabsch_optimality_under_perturbation():
    # Any small rotation away from the fit strictly increases the residual.
    rng = np.random.default_rng(9)
    src = rng.normal(size=(40, 3))
    true = reference_transform(rng.normal(size=3), rng.normal(size=3))
    dst = apply_transform(true, src) + rng.normal(0.0, 1e-3, size=src.shape)
    fit = kabsch_fit(src, dst)

    def residual(R):
        t = dst.mean(axis=0) - R @ src.mean(axis=0)
        return np.sum((src @ R.T + t - dst) ** 2)

    base = residual(fit.rotation)
    for _ in range(20):
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        Rp = Rotation.from_rotvec(1e-3 * axis).as_matrix() @ fit.rotation
        assert residual(Rp) > base


def test_kabsch_proper_rotation_on_near_planar_reflection():
    # The unconstrained optimum reflects; the fit must stay a rotation.
    rng = np.random.default_rng(21)
    for _ in range(100):
        src = rng.normal(size=(30, 3))
        src[:, 2] *= 1e-8
        dst = src.copy()
        dst[:, 2] = -dst[:, 2]
        fit = kabsch_fit(src, dst)
        assert np.linalg.det(fit.rotation) > 0.999999999


# --- screw decomposition -------------------------------------------------------

def test_screw_pure_translation():
    s = screw_from_transform(RigidTransform(np.eye(3), [0.01, 0.0, 0.0]))
    assert_allclose(s.direction, [1.0, 0.0, 0.0])
    assert s.angle == 0.0
    assert_allclose(s.slide, 0.01)
    assert_allclose(s.point, np.zeros(3))


def test_screw_rotation_about_offset_axis():
    # 30 degrees about the z axis through (1, 0, 0), built with the oracle.
    axis_point = np.array([1.0, 0.0, 0.0])
    rotvec = np.deg2rad(30.0) * np.array([0.0, 0.0, 1.0])
    R = Rotation.from_rotvec(rotvec).as_matrix()
    t = RigidTransform(R, (np.eye(3) - R) @ axis_point)
    s = screw_from_transform(t)
    assert_allclose(s.angle, np.deg2rad(30.0), atol=1e-12)
    assert_allclose(s.direction, [0.0, 0.0, 1.0], atol=1e-12)
    assert point_line_distance(s.point, axis_point, [0, 0, 1])[0] < 1e-9
    assert abs(s.slide) < 1e-12


def test_screw_rotation_with_slide():
    rotvec = np.deg2rad(10.0) * np.array([0.0, 1.0, 0.0])
    R = Rotation.from_rotvec(rotvec).as_matrix()
    t = RigidTransform(R, 0.02 * np.array([0.0, 1.0, 0.0]))
    s = screw_from_transform(t)
    assert_allclose(s.angle, np.deg2rad(10.0), atol=1e-12)
    assert_allclose(s.slide, 0.02, atol=1e-12)
    assert_allclose(s.direction, [0.0, 1.0, 0.0], atol=1e-12)


def test_screw_null_motion():
    with pytest.raises(NullMotion):
        screw_from_transform(RigidTransform.identity())


def test_null_screw_gives_identity():
    t = transform_from_screw(ScrewParams([1, 0, 0], [0, 0, 0], 0.0, 0.0))
    assert_allclose(t.rotation, np.eye(3))
    assert_allclose(t.translation, np.zeros(3))


def test_prismatic_screw_transform():
    t = transform_from_screw(ScrewParams([1, 0, 0], [0, 0, 0], 0.0, 0.03))
    assert_allclose(t.rotation, np.eye(3))
    assert_allclose(t.translation, [0.03, 0.0, 0.0])


def test_screw_round_trip_1000():
    rng = np.random.default_rng(42)
    for _ in range(1000):
        s = random_screw(rng)
        r = screw_from_transform(transform_from_screw(s))
        assert_allclose(r.direction, s.direction, atol=1e-9)
        assert_allclose(r.point, s.point, atol=1e-9)
        assert abs(r.angle - s.angle) < 1e-9
        assert abs(r.slide - s.slide) < 1e-9


def test_screw_round_trip_near_pi():
    rng = np.random.default_rng(5)
    for _ in range(200):
        s = random_screw(rng, angle_lo=np.pi - 1e-2, angle_hi=np.pi - 1e-3)
        r = screw_from_transform(transform_from_screw(s))
        assert_allclose(r.direction, s.direction, atol=1e-9)
        assert_allclose(r.point, s.point, atol=1e-9)
        assert abs(r.angle - s.angle) < 1e-9


def test_screw_params_validation():
    with pytest.raises(ValidationError):
        ScrewParams([2, 0, 0], [0, 0, 0], 0.1, 0.0)        # non-unit
    with pytest.raises(ValidationError):
        ScrewParams([1, 0, 0], [0.5, 0, 0], 0.1, 0.0)      # point not min-norm
    with pytest.raises(ValidationError):
        ScrewParams([1, 0, 0], [0, 0, 0], -0.5, 0.0)       # angle out of range


# --- canonical direction --------------------------------------------------------

def test_canonical_direction_idempotent_and_sign_invariant():
    rng = np.random.default_rng(17)
    for _ in range(200):
        d = rng.normal(size=3)
        d /= np.linalg.norm(d)
        c1, _ = canonical_direction(d)
        c2, _ = canonical_direction(-d)
        assert_allclose(c1, c2)
        again, sign = canonical_direction(c1)
        assert sign == 1.0
        assert_allclose(again, c1)


def test_canonical_direction_skips_tiny_leading_component():
    d = np.array([1e-12, -1.0, 0.0])
    c, sign = canonical_direction(d)
    assert sign == -1.0
    assert c[1] == 1.0
