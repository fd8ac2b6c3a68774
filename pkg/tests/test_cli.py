import json
import subprocess
import sys

import pytest

from hovelkit.cli import parse_model, run


def lines(capsys, argv):
    code = run(argv)
    out = capsys.readouterr().out.splitlines()
    return code, out


def test_classify(capsys):
    code, out = lines(capsys, ["classify", "--matrix", "[[2,-1],[-1,2]]"])
    assert code == 0
    assert out[0].startswith("# config ")
    assert out[1] == "finite (A2-shape block)"


def test_roots_count(capsys):
    code, out = lines(capsys, ["roots", "--matrix", "aff_a1", "--cap", "5", "--kind", "real"])
    assert code == 0 and out[-1] == "# 12 roots"


def test_json_stream_is_sorted_and_parseable(capsys):
    code, out = lines(capsys, ["--format", "json", "weyl", "--matrix", "b2", "--length", "8"])
    assert code == 0
    records = [json.loads(line) for line in out]
    assert "config" in records[0]
    assert records[-1] == {"count": 8, "order": 8}


def test_enclose_interval(capsys):
    code, out = lines(capsys, ["enclose", "--model", "a1,Z", "--spec", "cl_phi", "--shape", "point:0.3"])
    assert code == 0 and out[1] == "[0,1]"


def test_enclose_half_integers(capsys):
    code, out = lines(capsys, ["enclose", "--model", "a1,1/2Z", "--shape", "point:0.3"])
    assert out[1] == "[0,1/2]"


def test_parse_model_variants():
    assert parse_model("a2,R", None).value_step is None
    assert parse_model("[[2,-1],[-1,2]],Z", None).dim == 2
    assert parse_model("b2", 3).height_cap == 3


def test_usage_errors_exit_2(capsys):
    assert run(["classify", "--matrix", "[[2,1],[-1,2]]"]) == 2
    assert run(["nonsense"]) == 2
    assert run(["project", "--model", "a2,Z", "--point", "1,2", "--source", "+:J=0", "--target", "+:J=1"]) == 2
    assert run(["check-parahoric", "--instance", "loop_sl2"]) == 2
    assert run(["tree", "--depth", "9"]) == 2
    capsys.readouterr()


def test_check_commands_pass(capsys):
    assert run(["check-valuation", "--instance", "sl2", "--samples", "30"]) == 0
    assert run(["check-rd", "--instance", "sl3", "--samples", "30"]) == 0
    assert run(["check-mao", "--trials", "5"]) == 0
    out = capsys.readouterr().out
    assert "fail " not in out


def test_residue_and_facade(capsys):
    code, out = lines(capsys, ["residue", "--model", "a2,Z", "--point", "0,0"])
    assert code == 0 and out[-1] == "special True"
    code, out = lines(capsys, ["facade", "--model", "a2,Z", "--direction", "+:J=0"])
    assert json.loads(out[1])["dim"] == 1


def test_tree_output_is_deterministic_across_threads(tmp_path, monkeypatch, capsys):
    dots = []
    for threads in ("1", "3"):
        monkeypatch.setenv("HOVELKIT_THREADS", threads)
        path = tmp_path / f"t{threads}.dot"
        code, out = lines(capsys, ["tree", "--p", "2", "--depth", "4", "--dot", str(path)])
        assert code == 0 and out[1] == "spheres 1 3 6 12 24"
        dots.append(path.read_text())
    assert dots[0] == dots[1]


@pytest.mark.parametrize("argv", [["--help"], ["classify", "--help"]])
def test_help_exits_cleanly(argv, capsys):
    assert run(argv) == 0
    capsys.readouterr()


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "hovelkit", "classify", "--matrix", "g2"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.splitlines()[1] == "finite (G2-shape block)"
