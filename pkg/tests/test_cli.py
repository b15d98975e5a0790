import hashlib
import json
from pathlib import Path

import numpy as np
import pytest

from oksm.cli import build_parser, main, parse_quantity, parse_state_change
from oksm.core import JointNode, JointType, Oksm, load_oksm, save_oksm


def run(argv):
    try:
        return main(argv)
    except SystemExit as e:        # argparse usage errors
        return e.code


def tree_digest(root):
    digest = {}
    for p in sorted(Path(root).rglob("*")):
        if p.is_file():
            digest[str(p.relative_to(root))] = hashlib.sha256(p.read_bytes()).hexdigest()
    return digest


def test_unit_parsing():
    assert parse_quantity("90deg", "angle") == pytest.approx(np.pi / 2)
    assert parse_quantity("1.5rad", "angle") == 1.5
    assert parse_quantity("5cm", "length") == pytest.approx(0.05)
    assert parse_quantity("2mm", "length") == pytest.approx(0.002)
    assert parse_quantity("0.25m", "length") == 0.25
    assert parse_quantity("0", "length") == 0.0
    assert parse_state_change("45deg") == pytest.approx(np.pi / 4)
    assert parse_state_change("20cm") == pytest.approx(0.2)


def test_gen_counts(tmp_path):
    out = tmp_path / "d"
    assert run(["gen", "--categories", "microwave", "--n", "5", "--seed", "7",
                "--points-per-link", "50", "--out", str(out)]) == 0
    files = list(out.glob("*.oksmpc"))
    assert len(files) == 5
    assert (out / "manifest.json").exists()
    assert (out / "run_config.json").exists()


def test_pipeline_gen_estimate_eval(tmp_path):
    data = tmp_path / "data"
    pred = tmp_path / "pred"
    rep = tmp_path / "rep"
    assert run(["gen", "--categories", "microwave,drawer", "--n", "3",
                "--seed", "3", "--noise-sigma", "0", "--points-per-link", "50",
                "--holdout", "", "--train-fraction", "0.34",
                "--out", str(data)]) == 0
    assert run(["estimate", "--data", str(data), "--out", str(pred)]) == 0
    assert len(list(pred.glob("*.json"))) >= 6   # predictions + echoed config
    assert run(["eval", "--data", str(data), "--pred", str(pred),
                "--out", str(rep)]) == 0
    report = json.loads((rep / "report.json").read_text())
    for cat in report["categories"]:
        assert cat["order_accuracy"] == 1.0
        assert cat["dof_accuracy"] == 1.0
        for axis in cat["axes"]:
            assert axis["mean_direction_deg"] < 0.1
    assert (rep / "report.txt").read_text().startswith("Object")


def test_estimate_output_is_valid_document(tmp_path):
    data = tmp_path / "data"
    pred = tmp_path / "pred"
    run(["gen", "--categories", "laptop", "--n", "1", "--seed", "1",
         "--noise-sigma", "0", "--points-per-link", "50", "--out", str(data)])
    run(["estimate", "--data", str(data), "--out", str(pred)])
    doc = (pred / "laptop_0000.json").read_text()
    model = load_oksm(doc)
    assert len(model.nodes) == 1


def test_plan_90_waypoints(tmp_path):
    node = JointNode(joint_type=JointType.REVOLUTE,
                     direction=np.array([0.0, 0.0, 1.0]),
                     position=np.array([0.4, 0.3, 0.9]),
                     states=(0.0, 1.0))
    doc_path = tmp_path / "o.json"
    doc_path.write_text(save_oksm(Oksm([node])))
    out = tmp_path / "plan.txt"
    assert run(["plan", "--oksm", str(doc_path), "--grasp", "0.4,0.1,0.9",
                "--delta", "90deg", "--node", "0", "--out", str(out)]) == 0
    lines = [l for l in out.read_text().splitlines() if l]
    assert len(lines) == 90


def test_plan_all_nodes(tmp_path):
    nodes = [
        JointNode(joint_type=JointType.REVOLUTE,
                  direction=np.array([0.0, 0.0, 1.0]),
                  position=np.array([0.4, 0.3, 0.0]), states=(0.0, 1.0)),
        JointNode(joint_type=JointType.PRISMATIC,
                  direction=np.array([0.0, 1.0, 0.0]),
                  position=np.zeros(3), states=(0.0, 0.2)),
    ]
    doc_path = tmp_path / "o.json"
    doc_path.write_text(save_oksm(Oksm(nodes)))
    out = tmp_path / "plan.txt"
    assert run(["plan", "--oksm", str(doc_path), "--node", "all",
                "--grasp", "0.8,0.3,0.0", "--grasp", "0.0,0.1,0.0",
                "--delta", "30deg", "--delta", "5cm", "--out", str(out)]) == 0
    assert len((tmp_path / "plan_node0.txt").read_text().splitlines()) == 30
    assert len((tmp_path / "plan_node1.txt").read_text().splitlines()) == 5


def test_usage_error_exit_code():
    assert run(["frobnicate"]) == 2
    assert run([]) == 2


def test_domain_error_exit_code(tmp_path):
    node = JointNode(joint_type=JointType.REVOLUTE,
                     direction=np.array([0.0, 0.0, 1.0]),
                     position=np.zeros(3), states=(0.0, 1.0))
    doc_path = tmp_path / "o.json"
    doc_path.write_text(save_oksm(Oksm([node])))
    # Grasp on the axis is a domain error, not a usage error.
    assert run(["plan", "--oksm", str(doc_path), "--grasp", "0,0,0.5",
                "--delta", "90deg", "--node", "0",
                "--out", str(tmp_path / "p.txt")]) == 1
    # Unknown category likewise.
    assert run(["gen", "--categories", "zeppelin", "--n", "1",
                "--out", str(tmp_path / "z")]) == 1


def test_end_to_end_determinism(tmp_path, monkeypatch):
    argv_tail = ["--categories", "microwave,fridge", "--n", "2", "--seed", "11",
                 "--points-per-link", "50", "--out", "data"]
    for d in ("one", "two"):
        work = tmp_path / d
        work.mkdir()
        monkeypatch.chdir(work)
        assert run(["gen", *argv_tail]) == 0
        assert run(["estimate", "--data", "data", "--out", "pred"]) == 0
        assert run(["eval", "--data", "data", "--pred", "pred", "--out", "rep"]) == 0
    assert tree_digest(tmp_path / "one") == tree_digest(tmp_path / "two")


def test_parallel_estimate_matches_serial(tmp_path):
    data = tmp_path / "data"
    run(["gen", "--categories", "dishwasher", "--n", "3", "--seed", "2",
         "--points-per-link", "50", "--out", str(data)])
    run(["estimate", "--data", str(data), "--out", str(tmp_path / "p1"),
         "--jobs", "1"])
    run(["estimate", "--data", str(data), "--out", str(tmp_path / "p2"),
         "--jobs", "2"])
    assert tree_digest(tmp_path / "p1") == tree_digest(tmp_path / "p2")


def test_jobs_default_from_environment(monkeypatch):
    monkeypatch.setenv("OKSM_JOBS", "3")
    parser = build_parser()
    args = parser.parse_args(["gen", "--out", "x"])
    assert args.jobs == 3


def test_selftest_passes():
    assert run(["selftest", "--seeds", "1"]) == 0
