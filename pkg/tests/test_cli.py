import json
import subprocess
import sys

import pytest

from posetkit.cli import run
from posetkit.cutspace import fragment_from_json
from posetkit.lattice import lattice_from_json
from posetkit.poset import from_json

from .cli_cases import all_commands, write_inputs


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    return write_inputs(tmp_path_factory.mktemp("cli"))


def call(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out)


def shell(*argv, stdin=None):
    return subprocess.run([sys.executable, "-m", "posetkit", *argv], input=stdin,
                          capture_output=True, text=True, timeout=120)


def test_components(capsys, files):
    code, rep = call(capsys, "poset", "components", "--in", files["two_chains"])
    assert code == 0 and rep["verdict"] == "info"
    assert rep["details"]["components"] == 2
    assert set(rep) == {"command", "inputs", "verdict", "details", "witnesses"}


def test_gen_pipe_verify():
    gen = shell("gen", "P", "--depth", "1", "--width", "2")
    assert gen.returncode == 0
    res = shell("poset", "verify-P", stdin=gen.stdout)
    assert res.returncode == 0, res.stdout
    assert json.loads(res.stdout)["verdict"] == "pass"


def test_spectrum_m3_fails(capsys, files):
    code, rep = call(capsys, "lattice", "spectrum", "--in", files["m3"])
    assert code == 1 and rep["verdict"] == "fail"
    assert rep["details"]["error"] == "NotDistributive"
    assert ["a", "b", "c"] in rep["witnesses"]


def test_check_m3_lists_violations(capsys, files):
    code, rep = call(capsys, "lattice", "check", "--in", files["m3"])
    assert code == 1
    assert ["a", "b", "c"] in rep["witnesses"]


def test_cones_and_interval(capsys, files):
    _, rep = call(capsys, "poset", "downset", "--in", files["chain3"], "--ids", "y")
    assert rep["details"]["set"] == ["x", "y"]
    _, rep = call(capsys, "poset", "interval", "--in", files["chain3"], "--x", "x", "--y", "z")
    assert rep["details"]["set"] == ["x", "y", "z"]


def test_iso(capsys, files):
    code, rep = call(capsys, "poset", "iso", "--in", files["chain3"], "--other", files["chain3b"])
    assert code == 0
    assert rep["details"]["mapping"] == {"x": "t", "y": "s", "z": "r"}


def test_priestley_verdicts(capsys, files):
    assert call(capsys, "topo", "priestley", "--in", files["chain3"])[0] == 0
    code, rep = call(capsys, "topo", "priestley", "--in", files["chain3"], "--topology", "indiscrete")
    assert code == 1 and rep["verdict"] == "fail"


def test_cover_certify(capsys, files):
    code, rep = call(capsys, "topo", "cover-certify", "--in", files["two_chains"], "--A", "a1,b1")
    assert code == 0 and rep["details"]["kind"] == "cross-component"


def test_union_subbase(capsys, files):
    code, rep = call(capsys, "topo", "union-subbase", "--in", files["union"], "--k", "0", "--x", "y")
    assert code == 0 and rep["verdict"] == "pass"


def test_separate(capsys):
    code, rep = call(capsys, "cutspace", "separate", "--depth", "1", "--width", "2",
                     "--u", "x[1,0]", "--v", "x")
    assert code == 0
    assert rep["details"] == {"case": "root-v", "u_in": True, "v_in": False, "decreasing": True}


def test_separate_precondition(capsys):
    code, rep = call(capsys, "cutspace", "separate", "--depth", "1", "--width", "2",
                     "--u", "x[0]", "--v", "x")
    assert code == 2 and rep["details"]["error"] == "NotSeparablePrecondition"
    assert rep["inputs"]["u"] == "x[0]"


def test_sweep_passes(capsys):
    code, rep = call(capsys, "cutspace", "sweep", "--depth", "2", "--width", "2")
    assert code == 0 and rep["details"]["failure_count"] == 0


# -- round trips -------------------------------------------------------------

def test_poset_json_round_trip(capsys):
    _, rep = call(capsys, "gen", "P", "--depth", "2", "--width", "2")
    P = from_json(rep["details"]["poset"])
    assert from_json(P.to_json()) == P and len(P) == 15


def test_lattice_json_round_trip(capsys, files):
    L = lattice_from_json(json.load(open(files["bool4"])))
    assert lattice_from_json(json.loads(json.dumps(L.to_json()))) == L


def test_fragment_json_round_trip(capsys, tmp_path):
    _, rep = call(capsys, "cutspace", "build", "--depth", "2", "--width", "2", "--seed", "4")
    F = fragment_from_json(rep["details"]["fragment"])
    assert F.to_json() == rep["details"]["fragment"]
    # a build report feeds straight back in
    path = tmp_path / "frag.json"
    path.write_text(json.dumps(rep))
    code, again = call(capsys, "cutspace", "iso", "--in", str(path))
    assert code == 0 and again["inputs"]["seed"] == 4


# -- output options and errors -------------------------------------------------

def test_pretty(capsys, files):
    code = run(["poset", "components", "--in", files["two_chains"], "--pretty"])
    out = capsys.readouterr().out
    assert code == 0 and out.startswith("poset components: INFO")


def test_out_file(capsys, files, tmp_path):
    target = tmp_path / "r.json"
    assert run(["poset", "components", "--in", files["two_chains"], "--out", str(target)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(target.read_text())["details"]["components"] == 2


def test_unknown_id(capsys, files):
    code, rep = call(capsys, "poset", "downset", "--in", files["chain3"], "--ids", "nope")
    assert code == 2 and rep["verdict"] == "error"
    assert rep["inputs"]["ids"] == "nope"


def test_bad_json(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, rep = call(capsys, "poset", "components", "--in", str(bad))
    assert code == 2 and rep["details"]["error"] == "InputError"


def test_cap(capsys, files):
    code, rep = call(capsys, "gen", "P", "--depth", "4", "--width", "4", "--cap", "50")
    assert code == 2 and rep["details"]["error"] == "CapExceeded"


def test_usage_error():
    res = shell("poset", "components", "--bogus")
    assert res.returncode == 2 and "--bogus" in res.stderr


def test_every_command_deterministic(capsys, files):
    for argv in all_commands(files):
        outs = set()
        for _ in range(3):
            run(argv)
            outs.add(capsys.readouterr().out)
        assert len(outs) == 1, argv
