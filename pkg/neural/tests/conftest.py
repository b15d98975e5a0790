import subprocess
import sys

import pytest

GEN_ARGS = [
    "--categories", "microwave,drawer", "--n", "100", "--seed", "77",
    "--noise-sigma", "2mm", "--points-per-link", "256",
    "--train-fraction", "0.85", "--holdout", "",
]


def run_oksm(args, check=True):
    """Invoke the geometric toolkit's CLI; the only way we touch it."""
    proc = subprocess.run(
        [sys.executable, "-m", "oksm.cli", *args],
        capture_output=True, text=True,
    )
    if check and proc.returncode != 0:
        raise AssertionError(f"oksm {args} failed:\n{proc.stdout}\n{proc.stderr}")
    return proc


@pytest.fixture(scope="session")
def dataset_dir(tmp_path_factory):
    """200 demonstration samples (170 train / 30 test), generated on demand."""
    root = tmp_path_factory.mktemp("toy_dataset")
    run_oksm(["gen", *GEN_ARGS, "--out", str(root)])
    return root


@pytest.fixture(scope="session")
def small_dataset_dir(tmp_path_factory):
    """A handful of samples for fast data-layer tests."""
    root = tmp_path_factory.mktemp("small_dataset")
    run_oksm(["gen", "--categories", "fridge,drawer", "--n", "3", "--seed", "5",
              "--noise-sigma", "0", "--points-per-link", "64",
              "--train-fraction", "0.4", "--holdout", "", "--out", str(root)])
    return root
