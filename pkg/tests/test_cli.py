"""End-to-end runs of the command-line entry point."""

import pytest

from src.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, RunConfig, build_parser, main
from src.io_formats import read_stream, read_table, write_stream
from src.models import EventStream, SensorGeometry


GRID = ["--grid-ms", "2:40:2"]


@pytest.fixture
def scene(tmp_path):
    path = tmp_path / "scene.csv"
    assert main(["synth", "--width", "16", "--height", "16", "--duration-ms", "200", "--seed", "1",
                 "-o", str(path)]) == EXIT_OK
    return path


@pytest.fixture
def noisy(tmp_path, scene):
    path = tmp_path / "noisy.csv"
    assert main(["inject", str(scene), "--rate", "3", "--seed", "7", "-o", str(path)]) == EXIT_OK
    return path


class TestUsage:

    def test_missing_argument(self, capsys):
        assert main(["ccc"]) == EXIT_USAGE
        assert "error=usage type=ArgumentError" in capsys.readouterr().err

    def test_bad_grid(self, capsys, scene):
        assert main(["ccc", str(scene), "--grid-ms", "5:x:1", "-o", "out.csv"]) == EXIT_USAGE
        assert "error=usage" in capsys.readouterr().err

    def test_eval_needs_a_metric(self, capsys, scene):
        assert main(["eval", str(scene)]) == EXIT_USAGE
        line = capsys.readouterr().err.strip().splitlines()[-1]
        assert line.startswith("error=usage type=UsageError message=")

    def test_threshold_needs_scores(self, capsys, noisy, tmp_path):
        args = ["denoise", str(noisy), "--method", "threshold", "-o", str(tmp_path / "out.csv")]
        assert main(args) == EXIT_USAGE

    @pytest.mark.parametrize("tau", ["1.5", "-0.1", "nan", "half"])
    def test_tau_outside_unit_interval(self, capsys, noisy, tmp_path, tau):
        args = ["denoise", str(noisy), "--method", "threshold", "--oracle-sigma", "0.1", "--tau", tau,
                "-o", str(tmp_path / "out.csv")]
        assert main(args) == EXIT_USAGE
        assert "error=usage" in capsys.readouterr().err
        assert not (tmp_path / "out.csv").exists()

    def test_run_config_is_read_only(self):
        cfg = RunConfig.from_namespace(build_parser().parse_args(["roc", "in.csv", "-o", "out.csv"]))
        assert cfg.command == "roc"
        assert cfg.oracle_sigma is None
        with pytest.raises(TypeError):
            cfg.options["seed"] = 3
        with pytest.raises(AttributeError):
            cfg.no_such_option


class TestDataErrors:

    def test_missing_file(self, capsys, tmp_path):
        assert main(["eval", str(tmp_path / "nope.csv"), "--esr"]) == EXIT_DATA
        assert "error=io type=FileNotFoundError" in capsys.readouterr().err

    def test_frame_out_of_range(self, capsys, scene, tmp_path):
        args = ["frame", str(scene), "--t0-us", "0", "--t1-us", "999999999", "-o", str(tmp_path / "f.pgm")]
        assert main(args) == EXIT_DATA
        assert "type=StreamRangeError" in capsys.readouterr().err

    def test_labels_required(self, capsys, scene, tmp_path):
        assert main(["eval", str(scene), "--labeled", "-o", str(tmp_path / "e.csv")]) == EXIT_DATA
        assert "type=MissingLabelError" in capsys.readouterr().err


class TestCommands:

    def test_synth_and_frame(self, scene, tmp_path):
        stream = read_stream(scene)
        assert (stream.geometry.width, stream.geometry.height) == (16, 16)
        assert (stream.t_start, stream.t_end) == (0, 200_000)
        pgm = tmp_path / "f.pgm"
        assert main(["frame", str(scene), "--t0-us", "0", "--t1-us", "20000", "-o", str(pgm)]) == EXIT_OK
        assert pgm.read_bytes().startswith(b"P5\n16 16\n255\n")

    def test_passthrough_eval(self, noisy, tmp_path):
        out = tmp_path / "eval.csv"
        assert main(["eval", str(noisy), "--labeled", "-o", str(out)]) == EXIT_OK
        meta, df = read_table(out)
        assert meta["schema"] == "aocc-eval/1"
        assert df.loc[0, "nerr"] == 0.0
        assert df.loc[0, "verr"] == 0.0
        assert df.loc[0, "fp"] > 0

    def test_eval_to_stdout(self, capsys, noisy):
        assert main(["eval", str(noisy), "--labeled", "--esr"]) == EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith("# schema=aocc-eval/1")
        assert "ntss,ln,esr" in out

    def test_two_event_esr(self, tmp_path):
        src = tmp_path / "two.csv"
        write_stream(EventStream.from_arrays(SensorGeometry(3, 3), [0, 1], [0, 2], [0, 2], [1, 1]), src)
        out = tmp_path / "esr.csv"
        assert main(["eval", str(src), "--esr", "-o", str(out)]) == EXIT_OK
        meta, df = read_table(out)
        assert list(df.columns) == ["ntss", "ln", "esr"]
        assert (df.loc[0, "ntss"], df.loc[0, "ln"], df.loc[0, "esr"]) == (0.0, 2.0, 0.0)
        assert meta["m_ref"] == "N"

    def test_ccc_file(self, scene, tmp_path):
        out = tmp_path / "ccc.csv"
        assert main(["ccc", str(scene), *GRID, "-o", str(out)]) == EXIT_OK
        assert out.read_text().startswith("# schema=aocc-ccc/1 grid=custom")
        meta, df = read_table(out)
        assert list(df.columns) == ["dt_us", "c_avg"]
        assert len(df) == 20
        assert float(meta["aocc_sum"]) == pytest.approx(df["c_avg"].sum())

    def test_reruns_are_byte_identical(self, scene, noisy, tmp_path):
        again = tmp_path / "noisy2.csv"
        assert main(["inject", str(scene), "--rate", "3", "--seed", "7", "-o", str(again)]) == EXIT_OK
        assert again.read_bytes() == noisy.read_bytes()
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["ccc", str(noisy), *GRID, "-o", str(a)]) == EXIT_OK
        assert main(["ccc", str(noisy), *GRID, "-o", str(b)]) == EXIT_OK
        assert a.read_bytes() == b.read_bytes()

    def test_binary_round_trip_through_cli(self, scene, tmp_path):
        binary = tmp_path / "scene.bin"
        assert main(["inject", str(scene), "--rate", "0", "-o", str(binary)]) == EXIT_OK
        assert len(read_stream(binary)) == len(read_stream(scene))

    def test_reinjection_labels(self, noisy, tmp_path):
        fresh, layered = tmp_path / "fresh.csv", tmp_path / "layered.csv"
        assert main(["inject", str(noisy), "--rate", "0", "-o", str(fresh)]) == EXIT_OK
        assert main(["inject", str(noisy), "--rate", "0", "--keep-labels", "-o", str(layered)]) == EXIT_OK
        assert (read_stream(fresh).labels == 1).all()
        assert (read_stream(layered).labels == read_stream(noisy).labels).all()

    def test_denoise_dwf(self, noisy, tmp_path):
        out = tmp_path / "kept.csv"
        assert main(["denoise", str(noisy), "--radius", "2", "--buffer", "20", "-o", str(out)]) == EXIT_OK
        assert len(read_stream(out)) <= len(read_stream(noisy))
        score = tmp_path / "score.csv"
        assert main(["eval", str(noisy), "--kept", str(out), "--labeled", "-o", str(score)]) == EXIT_OK
        _, df = read_table(score)
        assert df.loc[0, "tp"] + df.loc[0, "fp"] == len(read_stream(out))

    def test_threshold_denoise_writes_scores(self, noisy, tmp_path):
        out, scores = tmp_path / "kept.csv", tmp_path / "scores.csv"
        args = ["denoise", str(noisy), "--method", "threshold", "--oracle-sigma", "0", "--tau", "0.5",
                "--write-scores", str(scores), "-o", str(out)]
        assert main(args) == EXIT_OK
        kept = read_stream(out)
        assert (kept.labels == 1).all()
        assert read_table(scores)[0]["schema"] == "aocc-scores/1"

    def test_sweep_summary_and_curves(self, noisy, tmp_path):
        out, curves = tmp_path / "sweep.csv", tmp_path / "curves"
        args = ["sweep", str(noisy), "--radii", "1,2,3", "--buffer", "20", "--labeled", "--esr", *GRID,
                "--curves-dir", str(curves), "-o", str(out)]
        assert main(args) == EXIT_OK
        meta, df = read_table(out)
        assert meta["schema"] == "aocc-sweep/1"
        assert df["param"].tolist() == [1, 2, 3]
        assert int(meta["best_param"]) == int(df.loc[df["aocc_sum"].idxmax(), "param"])
        assert {"aocc_sum", "aocc_trapezoid", "nerr", "verr", "esr"} <= set(df.columns)
        assert sorted(p.name for p in curves.iterdir()) == ["ccc_dwf_1.csv", "ccc_dwf_2.csv", "ccc_dwf_3.csv"]

    def test_sweep_windowed_esr(self, noisy, tmp_path):
        out = tmp_path / "sweep.csv"
        args = ["sweep", str(noisy), "--radii", "2,4", "--buffer", "20", "--esr", "--esr-m", "5",
                "--esr-window-ms", "20", *GRID, "-o", str(out)]
        assert main(args) == EXIT_OK
        meta, df = read_table(out)
        assert (meta["m_ref"], int(meta["esr_window_us"])) == ("5", 20_000)
        assert df["esr"].notna().all()

    def test_roc_footer(self, noisy, tmp_path):
        out = tmp_path / "roc.csv"
        assert main(["roc", str(noisy), "--oracle-sigma", "0.3", "--seed", "2", "-o", str(out)]) == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0].startswith("# schema=aocc-roc/1")
        assert lines[-1].startswith("# auc=")
        meta, df = read_table(out)
        assert 0.5 < float(meta["auc"]) <= 1.0
        assert (df.iloc[0]["fpr"], df.iloc[0]["tpr"]) == (0.0, 0.0)

    def test_plot(self, scene, noisy, tmp_path):
        a, b = tmp_path / "clean.csv", tmp_path / "noisy_ccc.csv"
        main(["ccc", str(scene), *GRID, "-o", str(a)])
        main(["ccc", str(noisy), *GRID, "-o", str(b)])
        svg = tmp_path / "ccc.svg"
        assert main(["plot", str(a), str(b), "--title", "CCC", "-o", str(svg)]) == EXIT_OK
        assert "<svg" in svg.read_text()
