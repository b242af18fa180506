import json
import subprocess
import sys

import numpy as np
import pytest

from hypervol.cli import main


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(path)


def run(tmp_path, command, doc=None, *extra):
    out = tmp_path / f"{command}.out.json"
    argv = ["--command", command, "--output", str(out), *extra]
    if doc is not None:
        argv += ["--input", write(tmp_path, f"{command}.in.json", doc)]
    code = main(argv)
    return code, json.loads(out.read_text())


SMALL = {"n": 2, "entries": [[[2, 0, 0, 0], [0, 1, 0, 0]], [[0, -1, 0, 0], [3, 0, 0, 0]]]}


def test_moore_det_closed_form(tmp_path):
    code, rep = run(tmp_path, "moore-det", SMALL)
    assert code == 0 and rep["status"] == "ok"
    assert rep["results"]["value"] == pytest.approx(5.0)
    assert rep["inputs"]["document"] == SMALL
    assert rep["seed"] == 0 and "tolerances" in rep


def test_malformed_json_exit_2(tmp_path):
    code, rep = run(tmp_path, "moore-det", "{not json")
    assert code == 2 and rep["status"] == "invalid_input"


def test_non_hyperhermitian_exit_2(tmp_path):
    bad = {"n": 2, "entries": [[[2, 0, 0, 0], [0, 1, 0, 0]], [[0, 1, 0, 0], [3, 0, 0, 0]]]}
    code, _ = run(tmp_path, "moore-det", bad)
    assert code == 2


def test_missing_input_exit_2(tmp_path):
    code, rep = run(tmp_path, "mixed-disc")
    assert code == 2


CUBE = {"generator": "box", "lo": [0, 0, 0, 0], "hi": [1, 1, 1, 1], "ambient": ["quaternionic", 1]}


def test_invalid_blocki_options_exit_2(tmp_path):
    assert run(tmp_path, "blocki", {"p": 3, "n": 2})[0] == 2


def test_nonconvex_union_exit_2(tmp_path):
    code, rep = run(tmp_path, "additivity", {"k1": CUBE, "k2": dict(CUBE, lo=[1, 1, 0, 0], hi=[2, 2, 1, 1])})
    assert code == 2 and rep["status"] == "invalid_input"


def test_failed_check_exit_3(tmp_path):
    # a declared union larger than the two pieces breaks additivity
    doc = {"k1": dict(CUBE, hi=[0.5, 1, 1, 1]), "k2": dict(CUBE, lo=[0.5, 0, 0, 0]), "union": dict(CUBE, hi=[2, 1, 1, 1])}
    code, rep = run(tmp_path, "additivity", doc, "--samples", "2000")
    assert code == 3 and rep["status"] == "check_failed"
    assert "exceeds" in rep["error"]


def test_same_seed_byte_identical(tmp_path):
    doc = {"vertices": np.random.default_rng(0).standard_normal((5, 4)).tolist(), "ambient": ["quaternionic", 1]}
    inp = write(tmp_path, "poly.json", doc)
    texts = []
    for i in range(2):
        out = tmp_path / f"r{i}.json"
        assert main(["--command", "pseudovolume", "--input", inp, "--seed", "4", "--samples", "5000", "--output", str(out)]) == 0
        texts.append(out.read_bytes())
    assert texts[0] == texts[1]
    out = tmp_path / "r2.json"
    main(["--command", "pseudovolume", "--input", inp, "--seed", "5", "--samples", "5000", "--output", str(out)])
    assert out.read_bytes() != texts[0]


QUAD = {"type": "quadratic", "B": np.eye(4).tolist()}


@pytest.mark.parametrize(
    "command,doc,check",
    [
        ("mixed-disc", {"matrices": [SMALL, SMALL]}, lambda r: r["value"] == pytest.approx(5.0)),
        ("gram-rank", {"n": 2, "k": 1}, lambda r: r["rank"] == r["expected"]),
        (
            "positivity",
            {"form": {"n": 2, "k": 1, "terms": [{"coef": 1.0, "factors": [{"n": 2, "entries": [[[1, 0, 0, 0], [0, 0, 0, 0]], [[0, 0, 0, 0], [1, 0, 0, 0]]]}]}]}},
            lambda r: r["kind"] == "strong",
        ),
        ("hessian", {"model": {"type": "norm_squared", "n": 1}, "point": [0.1, 0.2, 0.3, 0.4]}, lambda r: r["hessians"][0]["entries"][0][0][0] == pytest.approx(8.0)),
        ("ma-density", {"model": QUAD, "points": [[0, 0, 0, 0], [1, 1, 1, 1]]}, lambda r: np.allclose(r["values"], r["values"][0])),
        (
            "current-pair",
            {"models": [{"type": "norm_squared", "n": 1}], "density": {"profile": {"type": "bump", "center": [0, 0, 0, 0], "radius": 0.5}}},
            lambda r: r["value"] > 0 and r["cells"] > 0,
        ),
        ("blocki", {"p": 4}, lambda r: r["symbolic"] is True),
        ("kazarnovskii", {"vertices": [[0, 0], [3, 4]], "ambient": {"kind": "complex", "n": 1}}, lambda r: r["value"] == pytest.approx(5.0)),
        (
            "support-measure",
            {"polytope": {"vertices": [[0, 0, 0, 0], [1, 0, 0, 0]], "ambient": ["quaternionic", 1]}, "bumps": [{"center": [0, 0.1, 0, 0], "radius": 0.3}]},
            lambda r: r["variant"] == "proof" and r["pairings"][0] > 0,
        ),
        (
            "additivity",
            {
                "k1": {"generator": "box", "lo": [0, 0, 0, 0], "hi": [0.5, 1, 1, 1], "ambient": ["quaternionic", 1]},
                "k2": {"generator": "box", "lo": [0.5, 0, 0, 0], "hi": [1, 1, 1, 1], "ambient": ["quaternionic", 1]},
            },
            lambda r: r["gap"] <= r["bound"],
        ),
    ],
)
def test_commands_on_small_inputs(tmp_path, command, doc, check):
    extra = ["--grid-spacing", "0.1"] if command in ("current-pair", "support-measure") else ["--samples", "2000"]
    code, rep = run(tmp_path, command, doc, *extra)
    assert code == 0, rep.get("error")
    assert check(rep["results"])


def test_thread_limit_env(tmp_path):
    script = (
        "import json, sys\n"
        "import threadpoolctl\n"
        "from hypervol import cli\n"
        "seen = []\n"
        "orig = cli._thread_limit\n"
        "def spy():\n"
        "    ctx = orig()\n"
        "    seen.append(type(ctx).__name__)\n"
        "    return ctx\n"
        "cli._thread_limit = spy\n"
        "cli.main(sys.argv[1:])\n"
        "print(json.dumps(seen), file=sys.stderr)\n"
    )
    inp = write(tmp_path, "m.json", SMALL)
    proc = subprocess.run(
        [sys.executable, "-c", script, "--command", "moore-det", "--input", inp],
        capture_output=True, text=True, env={"HYPERVOL_THREADS": "1", "PATH": "/usr/bin:/bin"},
    )
    assert proc.returncode == 0, proc.stderr
    assert "threadpool_limits" in proc.stderr
    assert json.loads(proc.stdout)["status"] == "ok"
    assert "wall time" in proc.stderr


def test_console_script_exit_code(tmp_path):
    inp = write(tmp_path, "bad.json", "[")
    proc = subprocess.run([sys.executable, "-m", "hypervol.cli", "--command", "moore-det", "--input", inp], capture_output=True, text=True)
    assert proc.returncode == 2
    assert json.loads(proc.stdout)["status"] == "invalid_input"


def test_verify_all_reports_criteria(tmp_path, monkeypatch, capsys):
    from hypervol import verify

    orig = verify.run_all
    monkeypatch.setattr(verify, "run_all", lambda **kw: orig(**kw, only=["AC-1", "AC-3"]))
    code, rep = run(tmp_path, "verify-all")
    assert code == 0
    assert [c["id"] for c in rep["results"]["criteria"]] == ["AC-1", "AC-3"]
    assert "AC-1 PASS" in capsys.readouterr().err
