import pandas as pd
import pytest

from src.errors import StreamFormatError
from src.io_formats import CCC_SCHEMA, ROC_SCHEMA, write_table
from src.plotting import PlotOptions, plot_csvs


@pytest.fixture
def curves(tmp_path):
    ccc = tmp_path / "ccc.csv"
    write_table(pd.DataFrame({"dt_us": [2_000, 4_000, 6_000], "c_avg": [10.0, 30.0, 20.0]}), ccc, CCC_SCHEMA)
    roc = tmp_path / "roc.csv"
    write_table(pd.DataFrame({"threshold": [float("inf"), 0.5, 0.0], "fpr": [0.0, 0.2, 1.0],
                              "tpr": [0.0, 0.8, 1.0]}), roc, ROC_SCHEMA, footer={"auc": 0.8})
    return ccc, roc


def test_svg_is_deterministic(curves, tmp_path):
    ccc, _ = curves
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    plot_csvs([ccc], a, PlotOptions(title="contrast"))
    plot_csvs([ccc], b, PlotOptions(title="contrast"))
    assert a.read_bytes() == b.read_bytes()
    assert b"<svg" in a.read_bytes()


def test_roc_plot(curves, tmp_path):
    _, roc = curves
    out = tmp_path / "roc.svg"
    plot_csvs([roc, roc], out, PlotOptions(labels=("first", "second")))
    assert "second" in out.read_text()


def test_mixed_kinds(curves, tmp_path):
    with pytest.raises(StreamFormatError):
        plot_csvs(list(curves), tmp_path / "x.svg")


def test_unknown_schema(tmp_path):
    path = tmp_path / "events.csv"
    write_table(pd.DataFrame({"t_us": [0], "x": [0], "y": [0], "p": [1]}), path, "aocc-events/1")
    with pytest.raises(StreamFormatError):
        plot_csvs([path], tmp_path / "x.svg")


def test_label_count_mismatch(curves, tmp_path):
    with pytest.raises(ValueError):
        plot_csvs([curves[0]], tmp_path / "x.svg", PlotOptions(labels=("a", "b")))
