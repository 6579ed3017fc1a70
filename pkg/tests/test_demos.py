import py_compile
import runpy
from pathlib import Path

import pytest

DEMOS = sorted((Path(__file__).parent.parent / "demos").glob("*.py"))


@pytest.mark.parametrize("path", DEMOS, ids=lambda p: p.name)
def test_demo_compiles(path):
    py_compile.compile(str(path), doraise=True)


def test_dark_state_demo_runs(monkeypatch, tmp_path, capsys):
    monkeypatch.chdir(tmp_path)
    runpy.run_path(str(next(p for p in DEMOS if p.name.startswith("02"))), run_name="__main__")
    assert "moves 10;0->a1;0" in capsys.readouterr().out
