import os

import pytest

from janetwb.dsl import load_system

# criterion number -> (passed, title), filled by test_acceptance
ACCEPTANCE = {}

FIXTURES = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "fixtures")


def fixture_path(name):
    return os.path.join(FIXTURES, f"{name}.sys")


def spec_of(name):
    return load_system(fixture_path(name))


def pres(name, **cfg):
    return spec_of(name).presentation(spec_of(name).config(**cfg) if cfg else None)


@pytest.fixture
def load():
    return pres


def brute_dim(P, order, patience=4):
    """dim R_order by brute force: prolong the raw rows one step at a time and project
    back to ``order`` until the count has held for ``patience`` steps."""
    from janetwb.jets import JetSystem, project, prolong

    T = JetSystem(P.ring, P.m, [r for r in P.matrix.rows if r])
    if T.q < order:
        T = prolong(T, order - T.q)
    last, held = None, 0
    while held < patience:
        d = project(T, order).dim()
        held = held + 1 if d == last else 0
        last = d
        T = prolong(T, 1)
    return last


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, title = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {title}")
