import contextlib
import glob
import io
import json
import os
import shutil
import subprocess
import sys

import pytest

from conftest import FIXTURES, fixture_path
from janetwb.cli import COMMANDS, main

GOLDEN = sorted(glob.glob(os.path.join(FIXTURES, "*.expected.json")))


def run(argv, stdin=None, env=None):
    """In-process run: (exit, stdout, stderr)."""
    so, se = io.StringIO(), io.StringIO()
    saved_env = dict(os.environ)
    saved_in = sys.stdin
    try:
        if env:
            os.environ.update(env)
        if stdin is not None:
            sys.stdin = io.StringIO(stdin)
        with contextlib.redirect_stdout(so), contextlib.redirect_stderr(se):
            code = main(argv)
    finally:
        os.environ.clear()
        os.environ.update(saved_env)
        sys.stdin = saved_in
    return code, so.getvalue(), se.getvalue()


def cli(*args, **kw):
    return subprocess.run([sys.executable, "-m", "janetwb.cli", *args], capture_output=True,
                          text=True, timeout=300, **kw)


def test_every_fixture_has_a_golden():
    stems = {os.path.basename(p)[: -len(".sys")] for p in glob.glob(os.path.join(FIXTURES, "*.sys"))}
    assert stems == {os.path.basename(p)[: -len(".expected.json")] for p in GOLDEN}


@pytest.mark.parametrize("path", GOLDEN, ids=lambda p: os.path.basename(p).split(".")[0])
def test_reports_match_golden_files(path):
    with open(path) as fh:
        golden = json.load(fh)
    src = path.replace(".expected.json", ".sys")
    assert set(golden) == set(COMMANDS)
    for cmd, want in golden.items():
        code, out, err = run([cmd, "--input", src])
        if "exit" in want and "error" in want and code:
            assert (json.loads(err)["error"], code) == (want["error"], want["exit"]), cmd
        else:
            assert code == 0, (cmd, err)
            assert json.loads(out) == want, cmd


def test_janet_dims_on_cubic_example():
    code, out, _ = run(["janet", "--input", fixture_path("ex28")])
    rep = json.loads(out)
    assert code == 0 and rep["dims"] == [1, 4, 4, 1] and rep["euler"] == 0
    code, out, _ = run(["janet", "--input", fixture_path("ex28"), "--route", "short"])
    assert json.loads(out)["dims"] == [1, 2, 1]


def test_purity_report_shape():
    code, out, _ = run(["purity", "--input", fixture_path("ex11")])
    rep = json.loads(out)
    assert code == 0
    assert rep["pure"] is False and rep["cd"] == 1
    assert [f["generators"] for f in rep["filtration"]] == [["y1"], ["d2 y1"], []]


def test_not_pure_is_a_mathematical_error():
    code, out, err = run(["parametrize", "--input", fixture_path("ex11")])
    assert code == 2 and out == ""
    body = json.loads(err)
    assert body["error"] == "not_pure" and body["partial"]["pure"] is False


def test_text_errors_for_non_json_formats():
    code, _, err = run(["parametrize", "--input", fixture_path("ex11"), "--format", "text"])
    assert code == 2 and err.startswith("janetwb: not_pure:")


@pytest.mark.parametrize("argv", [
    [],
    ["complete"],
    ["frobnicate", "--input", "x.sys"],
    ["janet", "--input", "x.sys", "--route", "grobner"],
    ["complete", "--input", "/nonexistent/file.sys"],
])
def test_usage_errors_exit_one(argv):
    assert run(argv)[0] == 1


def test_syntax_error_reports_position():
    code, out, err = run(["complete", "--input", "-"], stdin="vars 2 unknowns 1\nd1 y1 + = 0\n")
    assert code == 1 and out == ""
    body = json.loads(err)
    assert body["error"] == "syntax_error" and "line 2" in body["message"]


def test_stdin_input():
    with open(fixture_path("ex12")) as fh:
        text = fh.read()
    a = run(["characters", "--input", "-"], stdin=text)
    b = run(["characters", "--input", fixture_path("ex12")])
    assert a == b and a[0] == 0


def test_order_bound_from_command_line():
    text = "vars 2 unknowns 1\nd11 y1 = 0\nd22 y1 = 0\n"
    code, _, err = run(["complete", "--input", "-", "--max-order", "2"], stdin=text)
    assert code == 2
    assert json.loads(err)["partial"]["order"] == 2


def test_seed_environment_override():
    base = run(["complete", "--input", fixture_path("ex28"), "--seed", "5"])
    env = run(["complete", "--input", fixture_path("ex28"), "--seed", "1"], env={"JANETWB_SEED": "5"})
    assert base == env and base[0] == 0
    code, _, err = run(["complete", "--input", fixture_path("ex28")], env={"JANETWB_SEED": "five"})
    assert code == 1 and "JANETWB_SEED" in err


def test_formats():
    code, out, _ = run(["complete", "--input", fixture_path("ex216"), "--format", "latex"])
    assert code == 0 and "\\fbox{ $ \\begin{array}{ll}" in out and "1 & \\bullet" in out
    code, out, _ = run(["complete", "--input", fixture_path("ex216"), "--format", "text"])
    assert code == 0 and out.startswith("q: ")


def test_sections_of_third_order_ode():
    code, out, _ = run(["sections", "--input", fixture_path("ex38")])
    rep = json.loads(out)
    assert code == 0 and rep["order"] == 3
    images = {(a["i"], a["section"]): a["image"] for a in rep["spencer"]}
    assert images == {(1, "f1"): "0", (1, "f2"): "-f1 - f3", (1, "f3"): "-f2"}


@pytest.mark.parametrize("cmd,name", [("complete", "ex29"), ("ext", "ex42"), ("purity", "ex316"),
                                      ("parametrize", "ex511"), ("embed", "ex42")])
def test_output_is_byte_identical_across_processes(cmd, name):
    a = cli(cmd, "--input", fixture_path(name))
    b = cli(cmd, "--input", fixture_path(name))
    assert a.returncode == 0, a.stderr
    assert a.stdout == b.stdout and a.stdout


def test_console_script():
    exe = shutil.which("janetwb")
    if exe is None:
        pytest.skip("console script not installed")
    p = subprocess.run([exe, "characters", "--input", fixture_path("ex28")], capture_output=True,
                       text=True, timeout=300)
    assert p.returncode == 0
    assert json.loads(p.stdout)["alpha"] == [2, 0, 0]

