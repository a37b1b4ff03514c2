"""Regenerate fixtures/exNN.expected.json from the current build.

Each file maps a command to its JSON report, or to ``{"error", "exit"}``
when the command fails with a mathematical error.
"""

import contextlib
import glob
import io
import json
import os
import sys

from janetwb.cli import COMMANDS, main

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def golden_for(path):
    out = {}
    for cmd in COMMANDS:
        so, se = io.StringIO(), io.StringIO()
        with contextlib.redirect_stdout(so), contextlib.redirect_stderr(se):
            code = main([cmd, "--input", path])
        if code == 0:
            out[cmd] = json.loads(so.getvalue())
        else:
            out[cmd] = {"error": json.loads(se.getvalue())["error"], "exit": code}
    return out


def main_(names):
    paths = sorted(glob.glob(os.path.join(ROOT, "fixtures", "*.sys")))
    for path in paths:
        stem = os.path.splitext(os.path.basename(path))[0]
        if names and stem not in names:
            continue
        with open(os.path.join(ROOT, "fixtures", stem + ".expected.json"), "w") as fh:
            json.dump(golden_for(path), fh, indent=2)
            fh.write("\n")
        print(stem)


if __name__ == "__main__":
    main_(sys.argv[1:])
