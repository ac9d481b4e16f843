import json

import numpy as np
import pytest

from qkcurv import tensorio
from qkcurv.cli import main
from qkcurv.curvature import build_r0, decompose, random_r1


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def r1_file(q2, r1_seed7):
    return tensorio.TensorFile(2, "curvature", r1_seed7.ravel(), np.stack(q2.ops).ravel(), {"name": "r", "role": "r1", "kappa": 1.0})


@pytest.mark.parametrize("fmt", ["json", "bin"])
def test_round_trip_is_bit_exact(tmp_path, r1_file, fmt):
    path = tmp_path / f"t.{fmt}"
    tensorio.write(r1_file, path, fmt)
    back = tensorio.read(path)
    assert np.array_equal(back.payload, r1_file.payload)
    assert np.array_equal(back.structure, r1_file.structure)
    assert back.metadata["role"] == "r1"
    assert back.header() == r1_file.header()


def test_model_round_trip(tmp_path, gr2):
    tf = tensorio.from_model(gr2)
    for fmt in ("json", "bin"):
        path = tmp_path / f"gr.{fmt}"
        tensorio.write(tf, path)
        back = tensorio.read(path)
        assert np.array_equal(back.tensor(), gr2.R)
        Q = back.quaternionic_structure()
        assert np.array_equal(Q.K, gr2.Q.K)
        assert back.metadata["kappa"] == 1.0 and back.metadata["name"] == "gr2c"


def test_binary_header_layout(r1_file):
    data = tensorio.to_bytes(r1_file)
    assert data[:4] == tensorio.MAGIC
    assert len(data) == 64 + 8 * (8**4 + 3 * 64)


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d.update(payload=d["payload"][:-1]),
        lambda d: d["payload"].__setitem__(0, "nan"),
        lambda d: d["header"].update(dim=12),
        lambda d: d["header"].update(format_version=2),
        lambda d: d["header"].update(kind="vector"),
        lambda d: d.pop("payload"),
    ],
)
def test_malformed_json_rejected(r1_file, mutate):
    doc = json.loads(tensorio.to_json(r1_file))
    mutate(doc)
    with pytest.raises(tensorio.TensorFileError):
        tensorio.from_json(json.dumps(doc))


def test_nonfinite_rejected(r1_file):
    bad = tensorio.TensorFile(2, "curvature", r1_file.payload.copy())
    bad.payload[3] = np.inf
    with pytest.raises(tensorio.TensorFileError):
        bad.validate()


def test_truncated_binary_rejected(r1_file):
    data = tensorio.to_bytes(r1_file)
    for cut in (10, len(data) - 8, len(data) - 3):
        with pytest.raises(tensorio.TensorFileError):
            tensorio.from_bytes(data[:cut])


def test_cmd_model_hp(tmp_path, capsys):
    path = tmp_path / "hp2.json"
    code, _, _ = run(capsys, "model", "hp", 2, "--kappa", 1, "-o", path)
    assert code == 0
    tf = tensorio.read(path)
    assert np.all(np.mod(tf.payload * 4, 1) == 0)
    assert np.array_equal(tf.tensor(), build_r0(tf.quaternionic_structure()))


def test_cmd_model_gr2c(tmp_path, capsys):
    path = tmp_path / "gr.bin"
    assert run(capsys, "model", "gr2c", 2, "-o", path, "--format", "bin")[0] == 0
    tf = tensorio.read(path)
    assert tf.metadata["kappa"] == 1.0
    assert decompose(tf.tensor(), tf.quaternionic_structure()).kappa == pytest.approx(1.0)


@pytest.mark.parametrize(
    "argv",
    [
        ["model", "gr2c", 1],
        ["model", "hp", 7],
        ["model", "hp", "two"],
        ["model", "cp", 2],
        ["model", "hp", 2, "--kappa", -1],
        ["gen", "--m", 9, "-o", "x.json"],
        ["verify"],
        ["verify", "a.json", "--model", "hp", 2],
        ["mu", "--model", "hp", 2, "--restarts", 0],
        ["frobnicate"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert "error" in err


def test_verify_missing_and_corrupt_files(tmp_path, capsys):
    assert run(capsys, "verify", tmp_path / "missing.json")[0] == 2
    path = tmp_path / "hp.json"
    run(capsys, "model", "hp", 2, "-o", path)
    doc = json.loads(path.read_text())
    doc["payload"] = doc["payload"][:-1]
    path.write_text(json.dumps(doc))
    assert run(capsys, "verify", path)[0] == 2
    path.write_bytes(b"\xff\xfe\x00garbage")
    assert run(capsys, "verify", path)[0] == 2


def test_verify_hp(capsys):
    code, out, _ = run(capsys, "verify", "--model", "hp", 2, "--tol", "1e-9", "--json")
    assert code == 0
    reports = json.loads(out)
    assert [r["name"] for r in reports] == sorted(r["name"] for r in reports)
    assert max(r["max_residual"] for r in reports) < 1e-12


def test_verify_text_output(capsys):
    code, out, _ = run(capsys, "verify", "--model", "hp", 2)
    assert code == 0
    lines = out.strip().splitlines()
    assert all(line.split()[-1] == "pass" for line in lines)


def test_verify_grassmannian(capsys):
    assert run(capsys, "verify", "--model", "gr2c", 2, "--tol", "1e-8", "--seed", 42)[0] == 0


def test_verify_failure_exit_1(tmp_path, capsys, q2):
    # a structure-free tensor violating the hyper-Kaehler symmetry
    T = np.random.default_rng(0).standard_normal((8,) * 4)
    tf = tensorio.TensorFile(2, "curvature", T.ravel(), None, {"role": "r1"})
    path = tmp_path / "bad.json"
    tensorio.write(tf, path)
    code, out, _ = run(capsys, "verify", path)
    assert code == 1
    assert "FAIL" in out


def test_gen_then_verify(tmp_path, capsys):
    path = tmp_path / "r1.json"
    assert run(capsys, "gen", "--m", 2, "--seed", 7, "-o", path)[0] == 0
    code, out, _ = run(capsys, "verify", path, "--tol", "1e-9", "--json")
    assert code == 0
    names = {r["name"] for r in json.loads(out)}
    assert {"four_trace", "hk_symmetry", "bianchi", "ricci_r1_zero"} <= names


def test_gen_matches_library_and_scale_zero(tmp_path, capsys, q2):
    a, b, z = tmp_path / "a.bin", tmp_path / "b.bin", tmp_path / "z.json"
    run(capsys, "gen", "--m", 2, "--seed", 7, "-o", a)
    run(capsys, "gen", "--m", 2, "--seed", 7, "-o", b)
    assert a.read_bytes() == b.read_bytes()
    assert np.array_equal(tensorio.read(a).tensor(), random_r1(q2, 7))
    run(capsys, "gen", "--m", 2, "--seed", 1, "--scale", 0, "-o", z)
    assert not tensorio.read(z).payload.any()


def test_gen_projection_failure_exit_3(tmp_path, capsys, monkeypatch):
    from qkcurv import cli
    from qkcurv.curvature import ProjectionError

    def boom(*args, **kwargs):
        raise ProjectionError(5, {"hk": 1.0})

    monkeypatch.setattr(cli, "random_r1", boom)
    assert run(capsys, "gen", "--m", 2, "-o", tmp_path / "x.json")[0] == 3


def test_model_construction_failure_exit_3(capsys, monkeypatch):
    from qkcurv import cli
    from qkcurv.models import ModelConstructionError

    def boom(*args, **kwargs):
        raise ModelConstructionError("einstein", 0.5)

    monkeypatch.setattr(cli, "make_model", boom)
    code, _, err = run(capsys, "model", "gr2c", 2)
    assert code == 3
    assert "5.000e-01" in err


def test_mu_hp(capsys):
    code, out, _ = run(capsys, "mu", "--model", "hp", 2, "--json")
    assert code == 0
    rep = json.loads(out)
    assert rep["mu_hat"] == 0.0 and rep["dichotomy_verdict"] == "zero"


def test_mu_grassmannian_deterministic(capsys, monkeypatch):
    argv = ("mu", "--model", "gr2c", 2, "--restarts", 64, "--seed", 7, "--json")
    code, first, _ = run(capsys, *argv)
    assert code == 0
    assert json.loads(first)["dichotomy_verdict"] == "kappa"
    monkeypatch.setenv("THREADS", "4")
    assert run(capsys, *argv)[1] == first


def test_mu_from_file(tmp_path, capsys):
    path = tmp_path / "gr.json"
    run(capsys, "model", "gr2c", 2, "-o", path)
    code, out, _ = run(capsys, "mu", path, "--restarts", 8)
    assert code == 0
    assert "dichotomy_verdict: kappa" in out
