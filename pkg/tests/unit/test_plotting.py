"""
Tests for convergence figures
"""

import pytest

from randfa.models import IterationTrace
from randfa.services.plotting import emit_convergence_plots

pytestmark = pytest.mark.unit


def test_writes_both_figures(strong_fit, tmp_path):
    pytest.importorskip("matplotlib")
    paths = emit_convergence_plots(strong_fit.trace, tmp_path / "out" / "fit", k=2, p=10, plot_format="svg")
    assert [path.name for path in paths] == ["fit_tail_sum.svg", "fit_min_psi2.svg"]
    assert all(path.stat().st_size > 0 for path in paths)


def test_identical_traces_give_identical_files(strong_fit, tmp_path):
    pytest.importorskip("matplotlib")
    first = emit_convergence_plots(strong_fit.trace, tmp_path / "a", k=2, p=10, plot_format="svg")
    second = emit_convergence_plots(strong_fit.trace, tmp_path / "b", k=2, p=10, plot_format="svg")
    assert [path.read_bytes() for path in first] == [path.read_bytes() for path in second]


def test_empty_trace_is_skipped(tmp_path, mocker):
    mocker.patch("randfa.services.plotting._pyplot", return_value=mocker.Mock())
    assert emit_convergence_plots(IterationTrace(), tmp_path / "fit", k=1, p=3) == []
