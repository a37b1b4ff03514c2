"""JSON, LaTeX and plain-text renderings of pipeline results."""

import json
import re

from .ore import form_text

FORMATS = ("json", "latex", "text")


class Report:
    """Stage outputs of one pipeline command, keyed by step name.

    ``payload`` holds only JSON-ready values (exact numbers already as
    strings); ``boards`` and ``systems`` feed the LaTeX renderer.
    """

    def __init__(self, command, payload, systems=None, boards=None):
        self.command = command
        self.payload = payload
        self.systems = systems or {}
        self.boards = boards or {}

    def render(self, fmt="json"):
        if fmt == "json":
            return to_json(self.payload)
        if fmt == "latex":
            return to_latex(self)
        if fmt == "text":
            return to_text(self.payload)
        raise ValueError(f"unknown format {fmt!r}")


def jsonable(v):
    """Recursively turn exact values into strings; containers keep their shape."""
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    if v is None or isinstance(v, (bool, int, str)):
        return v
    return str(v)


def to_json(payload):
    return json.dumps(jsonable(payload), indent=2) + "\n"


def to_text(payload, indent=0):
    pad = "  " * indent
    out = []
    for key, v in payload.items():
        if isinstance(v, dict):
            out.append(f"{pad}{key}:")
            out.append(to_text(v, indent + 1).rstrip("\n"))
        elif isinstance(v, list) and v and all(isinstance(x, str) and " " not in x for x in v):
            out.append(f"{pad}{key}: {_inline(v)}")
        elif isinstance(v, list) and v and all(isinstance(x, str) for x in v):
            out.append(f"{pad}{key}:")
            out.extend(f"{pad}  {x}" for x in v)
        elif isinstance(v, list) and v and all(isinstance(x, dict) for x in v):
            out.append(f"{pad}{key}:")
            for x in v:
                out.append(f"{pad}  - " + ", ".join(f"{a}={_inline(b)}" for a, b in x.items()))
        else:
            out.append(f"{pad}{key}: {_inline(v)}")
    return "\n".join(out) + "\n"


def _inline(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_inline(x) for x in v) + "]"
    if v is None:
        return "none"
    return str(v)


# -- LaTeX -------------------------------------------------------------------

_JET = re.compile(r"\b([a-z]+)(\d*)_(\d+)\b|\b([a-z]+)(\d+)\b")


def latex_jet_text(s):
    """``y1_13 - x2*y2`` -> ``y^{1}_{13} - x_{2}\\,y^{2}``."""

    def sub(mt):
        if mt.group(1):
            name, k, mu = mt.group(1), mt.group(2), mt.group(3)
            up = f"^{{{k}}}" if k else ""
            return f"{name}{up}_{{{mu}}}"
        name, k = mt.group(4), mt.group(5)
        if name in ("x", "d", "chi"):
            sym = "\\chi" if name == "chi" else name
            return f"{sym}_{{{k}}}"
        return f"{name}^{{{k}}}"

    return _JET.sub(sub, s).replace("*", "\\,")


def board_latex(board, n):
    """The multiplicative board as an ``\\fbox`` array, one line per equation."""
    lines = []
    for row in board:
        cells = [str(i) if i in row["mult"] else "\\bullet" for i in range(1, n + 1)]
        lines.append(" & ".join(cells))
    body = " \\\\\n".join(lines)
    return f"\\fbox{{ $ \\begin{{array}}{{{'l' * n}}}\n{body}\n\\end{{array}} $ }}"


def board_rows_text(board, n):
    """``1 2 3 4 / 1 2 3 • / ...`` with bullets for non-multiplicative indices."""
    return " / ".join(" ".join(str(i) if i in row["mult"] else "\u2022" for i in range(1, n + 1))
                      for row in board)


def render_board(I, fmt="latex"):
    """The multiplicative board of an involutive system, rows in echelon order."""
    board = I.board()
    if fmt == "latex":
        return board_latex(board, I.n)
    if fmt == "json":
        return to_json(board)
    if fmt == "text":
        return board_rows_text(board, I.n)
    raise ValueError(f"unknown format {fmt!r}")


def system_latex(rows, board=None, n=None):
    eqs = " \\\\\n".join(f"{latex_jet_text(r)} &=0" for r in rows)
    out = f"\\left\\{{ \\begin{{array}}{{ll}}\n{eqs}\n\\end{{array}} \\right."
    if board is not None:
        out += " " + board_latex(board, n)
    return f"\\[ {out} \\]"


def to_latex(rep: Report):
    parts = []
    for name, rows in rep.systems.items():
        board, n = rep.boards.get(name, (None, None))
        parts.append(f"% {name}")
        parts.append(system_latex(rows, board, n))
    rest = {k: v for k, v in rep.payload.items() if k not in rep.systems}
    if rest:
        parts.append("% " + to_text(rest).rstrip("\n").replace("\n", "\n% "))
    return "\n".join(parts) + "\n"


# -- shared renderers --------------------------------------------------------

def rows_text(R, rows, names=None, style="jet"):
    return [form_text(R, r, names, style) for r in rows]


def involutive_payload(I, names=None):
    return {
        "q": I.q,
        "frame": [[str(c) for c in row] for row in I.frame],
        "identity_frame": I.is_identity_frame(),
        "system": I.text(),
        "board": I.board(),
    }
