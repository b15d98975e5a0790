import numpy as np
import pytest
from numpy.testing import assert_allclose

from oksm.core import JointType
from oksm.errors import InvalidScript, UnknownCategory
from oksm.geometry import apply_transform, canonical_direction, joint_transform
from oksm.synthgen import (
    CATEGORIES,
    DemoSequence,
    GenConfig,
    MotionScript,
    generate_dataset,
    load_manifest,
    make_template,
    plan_manifest,
    random_script,
    read_sample,
    read_sample_ground_truth,
    render_sequence,
    sample_camera_pose,
    sample_surface,
    write_sample,
)

DRAWER_SCRIPT = MotionScript(order=(0,), windows=((2, 10),), targets=(0.2,),
                             total_frames=12)


def joint_inventory(tpl):
    return sorted(link.joint_type.value for link in tpl.links)


# --- templates -------------------------------------------------------------------

def test_microwave_has_single_revolute_link():
    tpl = make_template("microwave", rng_seed=1)
    assert joint_inventory(tpl) == ["revolute"]


def test_fridge_has_two_revolute_and_one_prismatic():
    tpl = make_template("fridge", rng_seed=1)
    assert joint_inventory(tpl) == ["prismatic", "revolute", "revolute"]


def test_dishwasher_has_one_revolute_and_one_prismatic():
    tpl = make_template("dishwasher", rng_seed=1)
    assert joint_inventory(tpl) == ["prismatic", "revolute"]


def test_unknown_category_raises():
    with pytest.raises(UnknownCategory):
        make_template("hovercraft", rng_seed=1)


def test_template_jitter_stays_within_quarter():
    base = make_template("drawer", rng_seed=0).base_extents
    for seed in range(20):
        ext = make_template("drawer", rng_seed=seed).base_extents
        assert (ext > 0).all()
    defaults = np.array([0.50, 0.45, 0.70])
    ratio = base / defaults
    assert ((ratio >= 0.75) & (ratio <= 1.25)).all()


def test_every_category_builds():
    assert len(CATEGORIES) == 8
    for c in CATEGORIES:
        tpl = make_template(c, rng_seed=3)
        assert 1 <= len(tpl.links) <= 3


# --- surface sampling ---------------------------------------------------------------

def test_sample_surface_counts():
    tpl = make_template("microwave", rng_seed=2)
    pts, labels, corr = sample_surface(tpl, points_per_link=100, rng_seed=0)
    assert pts.shape == (200, 3)
    assert set(np.unique(labels)) == {0, 1}
    assert np.array_equal(corr, np.arange(200))


def test_sample_surface_deterministic():
    tpl = make_template("laptop", rng_seed=2)
    a = sample_surface(tpl, points_per_link=128, rng_seed=9)[0]
    b = sample_surface(tpl, points_per_link=128, rng_seed=9)[0]
    assert np.array_equal(a, b)


def test_sample_surface_density_proportional_to_area():
    tpl = make_template("drawer", rng_seed=5)
    pts, labels, _ = sample_surface(tpl, points_per_link=10000, rng_seed=1)
    base = pts[labels == 0]
    ext = tpl.base_extents
    areas = np.array([ext[1] * ext[2], ext[1] * ext[2],
                      ext[0] * ext[2], ext[0] * ext[2],
                      ext[0] * ext[1], ext[0] * ext[1]])
    counts = np.zeros(6)
    for i, (axis, sign) in enumerate([(0, 1), (0, -1), (1, 1), (1, -1), (2, 1), (2, -1)]):
        counts[i] = np.sum(np.abs(base[:, axis] - sign * ext[axis] / 2) < 1e-9)
    assert counts.sum() == len(base)
    expected = areas / areas.sum() * len(base)
    assert (np.abs(counts - expected) / expected < 0.10).all()


# --- motion scripts -------------------------------------------------------------------

def test_script_rejects_overlapping_windows():
    with pytest.raises(InvalidScript):
        MotionScript(order=(0, 1), windows=((2, 6), (5, 9)), targets=(0.1, 0.1),
                     total_frames=12)


def test_script_rejects_bad_bounds():
    with pytest.raises(InvalidScript):
        MotionScript(order=(0,), windows=((0, 4),), targets=(0.1,), total_frames=12)
    with pytest.raises(InvalidScript):
        MotionScript(order=(0,), windows=((2, 12),), targets=(0.1,), total_frames=12)


def test_script_back_to_back_windows_allowed():
    s = MotionScript(order=(0, 1), windows=((2, 5), (5, 9)), targets=(0.1, 0.2),
                     total_frames=12)
    assert s.state_at(0, 5) == 0.1
    assert s.state_at(1, 5) == 0.0


def test_random_script_valid_for_all_categories():
    for c in CATEGORIES:
        tpl = make_template(c, rng_seed=0)
        for seed in range(10):
            script = random_script(tpl, 12, seed)
            assert script.total_frames == 12
            for k, (lo, hi) in enumerate(link.motion_range for link in tpl.links):
                assert lo < script.targets[k] <= hi


# --- rendering -------------------------------------------------------------------------

def test_drawer_displacement_per_transition():
    # 0.2 m over frames 2..10 is 0.025 m per transition along the camera-frame
    # joint direction; checked against the plain transform oracle.
    tpl = make_template("drawer", rng_seed=3)
    seq = render_sequence(tpl, DRAWER_SCRIPT, camera_seed=7, noise_sigma=0.0,
                          rng_seed=11, points_per_link=100)
    d_cam = seq.camera_pose.rotation @ tpl.links[0].joint_direction
    drawer = seq.labels == 1
    for t in range(2, 10):
        step = seq.frames[t + 1][drawer] - seq.frames[t][drawer]
        assert_allclose(step, np.tile(0.025 * d_cam, (drawer.sum(), 1)), atol=1e-12)
    static = np.concatenate([seq.frames[t + 1][drawer] - seq.frames[t][drawer]
                             for t in list(range(0, 2)) + list(range(10, 11))])
    assert np.abs(static).max() < 1e-15


def test_drawer_motion_matches_apply_transform_oracle():
    tpl = make_template("drawer", rng_seed=3)
    seq = render_sequence(tpl, DRAWER_SCRIPT, camera_seed=7, noise_sigma=0.0,
                          rng_seed=11, points_per_link=100)
    rest_obj, labels, _ = sample_surface(tpl, 100, rng_seed=11)
    link = tpl.links[0]
    for t in (5, 11):
        q = DRAWER_SCRIPT.state_at(0, t)
        moved = apply_transform(
            joint_transform(link.joint_direction, link.joint_position, q, True),
            rest_obj[labels == 1],
        )
        expected = apply_transform(seq.camera_pose, moved)
        assert_allclose(seq.frames[t][seq.labels == 1], expected, atol=1e-12)


def test_zero_motion_script_gives_identical_frames():
    tpl = make_template("microwave", rng_seed=1)
    script = MotionScript(order=(0,), windows=((2, 6),), targets=(0.0,),
                          total_frames=12)
    seq = render_sequence(tpl, script, camera_seed=2, noise_sigma=0.0, rng_seed=4,
                          points_per_link=80)
    for t in range(1, 12):
        assert np.array_equal(seq.frames[t], seq.frames[0])


def test_ground_truth_direction_is_camera_rotated():
    tpl = make_template("fridge", rng_seed=6)
    script = random_script(tpl, 12, 1)
    seq = render_sequence(tpl, script, camera_seed=3, noise_sigma=0.0, rng_seed=5,
                          points_per_link=80)
    for slot, k in enumerate(script.order):
        expected, _ = canonical_direction(
            seq.camera_pose.rotation @ tpl.links[k].joint_direction
        )
        assert_allclose(seq.ground_truth.nodes[slot].direction, expected, atol=1e-12)


def test_ground_truth_states_follow_script():
    tpl = make_template("microwave", rng_seed=1)
    script = MotionScript(order=(0,), windows=((3, 7),), targets=(0.5,),
                          total_frames=12)
    seq = render_sequence(tpl, script, camera_seed=2, noise_sigma=0.0, rng_seed=4,
                          points_per_link=80)
    node = seq.ground_truth.nodes[0]
    signed = np.array([script.state_at(0, f) for f in range(12)])
    got = np.asarray(node.states)
    assert_allclose(np.abs(got), np.abs(signed), atol=1e-15)
    assert node.states[0] == 0.0
    assert len(node.states) == 12


def test_rigidity_of_link_points():
    tpl = make_template("dishwasher", rng_seed=2)
    script = random_script(tpl, 12, 3)
    seq = render_sequence(tpl, script, camera_seed=1, noise_sigma=0.0, rng_seed=2,
                          points_per_link=60)
    rng = np.random.default_rng(0)
    for lid in (1, 2):
        rows = np.nonzero(seq.labels == lid)[0]
        pairs = rng.choice(rows, size=(40, 2))
        d0 = np.linalg.norm(seq.frames[0][pairs[:, 0]] - seq.frames[0][pairs[:, 1]], axis=1)
        for t in range(1, 12):
            dt = np.linalg.norm(seq.frames[t][pairs[:, 0]] - seq.frames[t][pairs[:, 1]], axis=1)
            assert np.abs(dt - d0).max() < 1e-9


def test_sequentiality_only_one_link_moves():
    tpl = make_template("fridge", rng_seed=9)
    script = random_script(tpl, 12, 4)
    seq = render_sequence(tpl, script, camera_seed=5, noise_sigma=0.0, rng_seed=6,
                          points_per_link=60)
    for k, (s, e) in enumerate(script.windows):
        others = (seq.labels != 0) & (seq.labels != k + 1)
        for t in range(s, e):
            step = seq.frames[t + 1][others] - seq.frames[t][others]
            assert np.abs(step).max() < 1e-12


def test_camera_pose_faces_object():
    for seed in range(25):
        cam = sample_camera_pose(seed)
        origin_in_cam = apply_transform(cam, np.zeros(3))[0]
        assert 1.5 - 1e-9 <= origin_in_cam[2] <= 2.5 + 1e-9
        assert abs(origin_in_cam[0]) < 1e-9 and abs(origin_in_cam[1]) < 1e-9


def test_render_deterministic_with_noise():
    tpl = make_template("box", rng_seed=2)
    script = random_script(tpl, 12, 7)
    a = render_sequence(tpl, script, 3, 0.002, 8, points_per_link=60)
    b = render_sequence(tpl, script, 3, 0.002, 8, points_per_link=60)
    assert np.array_equal(a.frames, b.frames)


# --- sample files and datasets ----------------------------------------------------------

def test_sample_file_round_trip(tmp_path):
    tpl = make_template("laptop", rng_seed=4)
    script = random_script(tpl, 12, 2)
    seq = render_sequence(tpl, script, 1, 0.002, 3, points_per_link=64)
    path = tmp_path / "laptop_0000.oksmpc"
    write_sample(path, seq)
    back = read_sample(path)
    assert back.num_frames == 12 and back.num_points == seq.num_points
    # Geometry survives the float32 store to within float32 resolution.
    assert np.abs(back.frames - seq.frames).max() < 1e-6
    assert np.array_equal(back.labels, seq.labels)
    assert np.array_equal(back.corr_ids, seq.corr_ids)
    assert back.ground_truth == seq.ground_truth
    assert read_sample_ground_truth(path) == seq.ground_truth


def test_sample_file_layout(tmp_path):
    tpl = make_template("drawer", rng_seed=4)
    seq = render_sequence(tpl, DRAWER_SCRIPT, 1, 0.0, 3, points_per_link=50)
    path = tmp_path / "s.oksmpc"
    write_sample(path, seq)
    blob = path.read_bytes()
    n, t = seq.num_points, 12
    assert blob.startswith(f"OKSMPC v1 {n} {t}\n".encode())
    header_len = len(f"OKSMPC v1 {n} {t}\n")
    floats = np.frombuffer(blob, dtype="<f4", count=t * n * 3, offset=header_len)
    assert_allclose(floats.reshape(t, n, 3)[0], seq.frames[0].astype(np.float32))
    trailer = blob[header_len + t * n * 3 * 4 + 2 * n * 4:]
    assert trailer.lstrip().startswith(b"{")


def test_generate_dataset_counts_and_manifest(tmp_path):
    config = GenConfig(categories=("microwave", "drawer", "laptop"),
                       samples_per_category=4, seed=5, noise_sigma=0.0,
                       points_per_link=50, holdout=())
    manifest = generate_dataset(config, tmp_path)
    files = sorted(p.name for p in tmp_path.glob("*.oksmpc"))
    assert len(files) == 12
    assert len(manifest.samples) == 12
    loaded = load_manifest(tmp_path / "manifest.json")
    assert loaded == manifest
    seeds = [e.seed for e in manifest.samples]
    assert len(set(seeds)) == len(seeds)


def test_generate_dataset_byte_identical(tmp_path):
    config = GenConfig(categories=("microwave", "drawer"), samples_per_category=2,
                       seed=9, points_per_link=50)
    m1 = generate_dataset(config, tmp_path / "a")
    m2 = generate_dataset(config, tmp_path / "b")
    assert m1 == m2
    for entry in m1.samples:
        assert (tmp_path / "a" / entry.path).read_bytes() == \
               (tmp_path / "b" / entry.path).read_bytes()
    assert (tmp_path / "a" / "manifest.json").read_bytes() == \
           (tmp_path / "b" / "manifest.json").read_bytes()


def test_parallel_generation_matches_serial(tmp_path):
    config = GenConfig(categories=("box",), samples_per_category=4, seed=2,
                       points_per_link=50)
    generate_dataset(config, tmp_path / "serial", jobs=1)
    generate_dataset(config, tmp_path / "par", jobs=2)
    for entry in plan_manifest(config).samples:
        assert (tmp_path / "serial" / entry.path).read_bytes() == \
               (tmp_path / "par" / entry.path).read_bytes()


def test_holdout_category_goes_to_test_split():
    config = GenConfig(categories=("microwave", "furniture"),
                       samples_per_category=4, seed=1, holdout=("furniture",),
                       train_fraction=0.75)
    manifest = plan_manifest(config)
    furn = [e for e in manifest.samples if e.category == "furniture"]
    assert all(e.split == "test" for e in furn)
    micro = [e for e in manifest.samples if e.category == "microwave"]
    assert sum(e.split == "train" for e in micro) == 3


def test_regeneration_from_manifest_entry(tmp_path):
    config = GenConfig(categories=("washing_machine",), samples_per_category=2,
                       seed=13, points_per_link=50)
    manifest = generate_dataset(config, tmp_path)
    from oksm.synthgen import render_from_entry
    entry = manifest.samples[1]
    seq = render_from_entry(config, entry.category, entry.seed)
    write_sample(tmp_path / "regen.oksmpc", seq)
    assert (tmp_path / "regen.oksmpc").read_bytes() == \
           (tmp_path / entry.path).read_bytes()
