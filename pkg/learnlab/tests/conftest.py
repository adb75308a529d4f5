import subprocess

import pytest


def generate_dataset(path, n=6, episodes=80, max_len=12, seed=5):
    subprocess.run(
        [
            "f2c", "gen-data",
            "--n-qubits", str(n),
            "--episodes", str(episodes),
            "--max-len", str(max_len),
            "--seed", str(seed),
            "--jobs", "2",
            "--out", str(path),
        ],
        check=True,
        capture_output=True,
    )
    return path


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory):
    return generate_dataset(tmp_path_factory.mktemp("data") / "small.jsonl")
