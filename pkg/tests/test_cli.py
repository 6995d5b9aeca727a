import json
import os
import subprocess
import sys

import numpy as np
import pytest

from infbeltrami import DiskGrid, evaluate, field_from_doc
from infbeltrami.cli import main
from infbeltrami.serialize import write_json

UNIT = {"cx": 0.0, "cy": 0.0, "r": 1.0}
SMALL = ["--n-rad", "24", "--n-ang", "64"]


@pytest.fixture
def files(tmp_path):
    docs = {
        "zbar": {"kind": "PolyZZbar", "domain": UNIT, "coefficients": [[0, 1, 1.0, 0.0]]},
        "c03": {"kind": "Constant", "domain": UNIT, "value": [0.3, 0.0]},
        "c0": {"kind": "Constant", "domain": UNIT, "value": [0.0, 0.0]},
    }
    out = {}
    for k, d in docs.items():
        out[k] = tmp_path / f"{k}.json"
        write_json(out[k], d)
    return out


def run(args, tmp_path, name="out.json"):
    out = tmp_path / name
    code = main(list(args) + ["--out", str(out)])
    return code, json.loads(out.read_text())


def test_verify_class_identical(files, tmp_path):
    code, rep = run(["verify-class", "--a", str(files["zbar"]), "--b", str(files["zbar"])],
                    tmp_path)
    assert code == 0 and rep["pairing"]["max_abs"] == 0.0
    assert rep["config"]["subcommand"] == "verify-class" and rep["grid"]["n_rad"] == 64


def test_verify_class_mismatch_exit_2(files, tmp_path):
    code, rep = run(["verify-class", "--a", str(files["c03"]), "--b", str(files["c0"])],
                    tmp_path)
    assert code == 2 and rep["equal"] is False


def test_construct_trivial_report(files, tmp_path):
    code, rep = run(["construct-trivial", "--input", str(files["zbar"]), "--radius", "0.5"],
                    tmp_path)
    assert code == 0
    assert rep["pairing"]["max_abs"] <= 1e-10 and rep["sign"] == -1
    assert abs(rep["field"]["moments"]["values"][1][0] - np.pi / 32) < 1e-14


def test_emitted_field_round_trips(files, tmp_path):
    code, rep = run(["construct-trivial", "--input", str(files["zbar"]), "--radius", "0.5"],
                    tmp_path)
    f = field_from_doc(rep["field"])
    from infbeltrami import construct_trivial
    from conftest import zbar
    g = DiskGrid(n_rad=64, n_ang=256)
    ref = construct_trivial(zbar(), 0.5, 8, g).field
    nodes = DiskGrid(n_rad=40, n_ang=96, offset=0.3).nodes
    assert np.array_equal(evaluate(f, nodes), evaluate(ref, nodes))


def test_localize(files, tmp_path):
    code, rep = run(["localize", "--input", str(files["c03"]), "--alpha", str(files["c0"]),
                     "--center", "0,0", "--eps", "0.1"], tmp_path)
    assert code == 0
    assert rep["checks"]["in_class"] and rep["checks"]["equals_alpha_on_inner"]
    assert rep["checks"]["ess_sup_outside"] <= 0.4 + 1e-9


def test_norm_bound(files, tmp_path):
    code, rep = run(["norm-bound", "--input", str(files["c03"]), "--degree", "3",
                     "--restarts", "2"] + SMALL, tmp_path)
    assert code == 0 and abs(rep["value"] - 0.3) < 1e-3
    assert {"value", "phi", "restarts", "converged"} <= rep.keys()


def test_check_dominate(files, tmp_path):
    code, rep = run(["check-dominate", "--a", str(files["c0"]), "--b", str(files["c03"])],
                    tmp_path)
    assert code == 0 and rep["dominated"]
    code, rep = run(["check-dominate", "--a", str(files["c03"]), "--b", str(files["zbar"])],
                    tmp_path)
    assert code == 2 and rep["offending"]


def test_zero_on_disk_and_bad_witness(files, tmp_path):
    code, rep = run(["construct-trivial", "--input", str(files["zbar"]), "--radius", "0.5"],
                    tmp_path, "chi.json")
    chi = tmp_path / "chi.json"
    code, rep = run(["zero-on-disk", "--chi", str(chi), "--eta", str(files["c0"]),
                     "--disk", "0.3,0,0.1", "--delta", "0.1"], tmp_path)
    assert code == 0 and rep["pairing"]["max_abs"] <= 1e-8
    code, rep = run(["zero-on-disk", "--chi", str(files["c03"]), "--eta", str(files["c0"]),
                     "--disk", "0,0,0.1", "--delta", "0.1"], tmp_path)
    assert code == 2 and rep["error"] == "PreconditionError"


def test_greedy_and_render_dir(files, tmp_path):
    run(["construct-trivial", "--input", str(files["zbar"]), "--radius", "0.5"] + SMALL,
        tmp_path, "chi.json")
    code, rep = run(["greedy", "--chi", str(tmp_path / "chi.json"), "--max-steps", "2",
                     "--render-dir", str(tmp_path / "img"), "--res", "16"] + SMALL, tmp_path)
    assert code == 0 and rep["steps"] == 2
    assert sorted(p.name for p in (tmp_path / "img").iterdir()) == ["step_000.ppm",
                                                                  "step_001.ppm"]


def test_greedy_file_strategy_needs_witness(files, tmp_path):
    code, rep = run(["greedy", "--chi", str(files["c03"]), "--strategy", "file"], tmp_path)
    assert code == 2


def test_render_constant_uniform(files, tmp_path):
    img = tmp_path / "c.ppm"
    code = main(["render", "--input", str(files["c03"]), "--out", str(img), "--res", "32",
                 "--report", str(tmp_path / "r.json")])
    assert code == 0
    data = img.read_bytes().split(b"\n", 3)[3]
    px = np.frombuffer(data, dtype=np.uint8).reshape(-1, 3)
    inside = px[np.any(px != 0, axis=1)]
    assert len(np.unique(inside, axis=0)) == 1


def test_error_exit_codes(files, tmp_path):
    code, rep = run(["verify-class", "--a", str(tmp_path / "missing.json"),
                     "--b", str(files["c0"])], tmp_path)
    assert code == 2 and "missing" in rep["message"]
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "Constant", "domain": {"cx": 0, "cy": 0, "r": -1}, "value": 1}')
    code, rep = run(["verify-class", "--a", str(bad), "--b", str(files["c0"])], tmp_path)
    assert code == 2
    assert main(["verify-class", "--a", "x", "--b", "y", "--n-rad", "0"]) == 2


def test_construction_invalid_exit_3(files, tmp_path):
    # a single radial node cannot reproduce the moments used for sign calibration
    code, rep = run(["construct-trivial", "--input", str(files["zbar"]), "--radius", "0.5",
                     "--n-rad", "1"], tmp_path)
    assert code == 3 and rep["error"] == "ConstructionInvalidError"


def test_accuracy_exit_4(files, tmp_path, monkeypatch):
    from infbeltrami import cli
    from infbeltrami.errors import AccuracyError

    def boom(cfg):
        raise AccuracyError("no convergence", achieved=1e-3)

    monkeypatch.setitem(cli.COMMANDS, "render", boom)
    code = main(["render", "--input", str(files["c03"]), "--out", str(tmp_path / "x.ppm"),
                 "--report", str(tmp_path / "r.json")])
    assert code == 4


def _cli(args, threads, cwd):
    env = dict(os.environ, BELTRAMI_THREADS=str(threads))
    subprocess.run([sys.executable, "-m", "infbeltrami", *args], cwd=cwd, env=env,
                   check=True, capture_output=True)


def test_outputs_identical_across_thread_counts(files, tmp_path):
    outs = []
    for t in (1, 4):
        d = tmp_path / f"t{t}"
        d.mkdir()
        _cli(["norm-bound", "--input", str(files["zbar"]), "--degree", "3", "--restarts", "4",
              "--out", "n.json"] + SMALL, t, d)
        _cli(["render", "--input", str(files["zbar"]), "--out", "z.ppm", "--res", "32",
              "--report", "r.json"] + SMALL, t, d)
        outs.append([(d / n).read_bytes() for n in ("n.json", "z.ppm", "r.json")])
    assert outs[0] == outs[1]
