import json

from legendre_betti.cli import run
from legendre_betti.manifest import RunManifest, digest, replay


def test_round_trip(tmp_path):
    _, _, m, _ = run(["multiples", "--n", "3"])
    path = tmp_path / "m.json"
    m.write(str(path))
    again = RunManifest.load(str(path))
    assert again == m
    assert json.loads(path.read_text())["versions"]["python-flint"]


def test_replay_reproduces_digest():
    _, _, m, _ = run(["--threads", "2", "height-integral", "--eps", "1e-2", "--tol", "1e-2", "--region", "disk"])
    code, same = replay(m)
    assert code == 0 and same


def test_digest_is_order_independent():
    assert digest({"a": 1, "b": [1, 2]}) == digest({"b": [1, 2], "a": 1})


def test_missing_fields_rejected():
    import pytest
    with pytest.raises(ValueError):
        RunManifest.from_json({"command": "x"})
