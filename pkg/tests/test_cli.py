import numpy as np
import pytest

from stratlearn.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_generate_to_stdout(capsys):
    code, out, _ = run(capsys, "generate", "--shape", "cross", "--spacing", "0.25")
    rows = out.strip().splitlines()
    assert code == 0 and len(rows) == 17 and len(rows[0].split(",")) == 2


def test_generate_3d_and_sampled(capsys, tmp_path):
    code, out, _ = run(capsys, "generate", "--shape", "two-planes", "--spacing", "0.5")
    assert code == 0 and len(out.splitlines()[0].split(",")) == 3
    f = tmp_path / "s.csv"
    assert run(capsys, "generate", "--shape", "segment", "--n", "10", "--seed", "3", "--out", str(f))[0] == 0
    a = np.loadtxt(f, delimiter=",")
    run(capsys, "generate", "--shape", "segment", "--n", "10", "--seed", "3", "--out", str(f))
    assert a.shape == (10, 2) and np.array_equal(a, np.loadtxt(f, delimiter=","))


def test_invalid_shape_is_usage_error(capsys):
    with pytest.raises(SystemExit) as e:
        main(["generate", "--shape", "torus"])
    assert e.value.code == 1


def test_bound(capsys):
    code, out, _ = run(capsys, "bound", "--shape", "cross", "--rho", "0.3", "--xi", "0.05")
    assert code == 0 and "n_min: 2805" in out
    assert run(capsys, "bound", "--shape", "cross", "--rho", "0.3", "--xi", "1.5")[0] == 1


def _index(pts, x, y):
    return str(int(np.argmin(np.linalg.norm(pts - [x, y], axis=1))))


@pytest.fixture()
def cross_file(tmp_path, cross_grid):
    _, U, _ = cross_grid
    f = tmp_path / "cross.csv"
    np.savetxt(f, U.points, delimiter=",")
    return f, U.points


def test_pair_verdicts(capsys, tmp_path, cross_file):
    f, pts = cross_file
    base = ["--shape", "cross", "--extent", "1.5", "--radius", "0.4", "--out", str(tmp_path / "o")]
    code, out, _ = run(capsys, "pair", _index(pts, 0.7, 0), _index(pts, 1.0, 0), *base)
    assert code == 0 and "equivalent: true" in out
    code, out, _ = run(capsys, "pair", _index(pts, 0, 0), _index(pts, 0.6, 0), *base, "--svg")
    assert code == 0 and "equivalent: false" in out
    names = {p.name for p in (tmp_path / "o").iterdir()}
    i, j = _index(pts, 0, 0), _index(pts, 0.6, 0)
    assert {f"ker_{i}_{j}.csv", f"cok_{j}_{i}.csv", f"ker_{i}_{j}.svg"} <= names


def test_pair_errors(capsys, cross_file):
    f, _ = cross_file
    code, _, err = run(capsys, "pair", "0", "999", "--input", str(f), "--radius", "0.4", "--epsilon", "0.05")
    assert code == 2 and "out of range" in err
    assert run(capsys, "pair", "0", "1", "--input", str(f), "--radius", "0.4")[0] == 1
    assert run(capsys, "pair", "0", "1", "--input", str(f) + ".missing", "--radius", "0.4",
               "--epsilon", "0.05")[0] == 2


def test_infer_writes_outputs(capsys, tmp_path, cross_file):
    f, pts = cross_file
    arm = [_index(pts, x, 0) for x in (0.7, 0.8, 0.9)]
    out_dir = tmp_path / "inf"
    code, out, _ = run(capsys, "infer", "--input", str(f), "--radius", "0.4", "--epsilon", "0.05",
                       "--pairs", f"{arm[0]}-{arm[1]},{arm[1]}-{arm[2]}", "--out", str(out_dir),
                       "--spectral")
    assert code == 0 and f"clusters: {len(pts) - 2}" in out
    labels = (out_dir / "labels.csv").read_text().splitlines()
    assert labels[0] == "point_index,label" and len(labels) == len(pts) + 1
    assert (out_dir / "weights.csv").read_text().count("\n") == 3
    assert "lambda1:" in (out_dir / "summary.txt").read_text()


def test_env_override(capsys, monkeypatch):
    monkeypatch.setenv("STRATLEARN_SPACING", "0.5")
    code, out, _ = run(capsys, "generate", "--shape", "cross")
    assert code == 0 and len(out.strip().splitlines()) == 9
    code, out, _ = run(capsys, "generate", "--shape", "cross", "--spacing", "0.25")
    assert len(out.strip().splitlines()) == 17


def test_bad_pairs_spec(capsys, cross_file):
    f, _ = cross_file
    assert run(capsys, "infer", "--input", str(f), "--radius", "0.4", "--epsilon", "0.05",
               "--pairs", "1:2")[0] == 1
