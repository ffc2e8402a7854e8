import json
import xml.etree.ElementTree as ET

import pytest

from moclab.cli import main
from moclab.harness import read_csv
from moclab import svgplot


def run_cli(args):
    return main([str(a) for a in args])


class TestSimulate:
    def test_prints_stats(self, capsys):
        assert run_cli(["simulate", "--lx", "6", "--ly", "4", "--nt", "2",
                        "--ns", "3", "--pj", "0", "--pk", "1"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["s_topo_mean"] == -1.0
        assert out["n_s"] == 3


class TestScan:
    def test_writes_csv(self, tmp_path, capsys):
        out = tmp_path / "cut_vi.csv"
        assert run_cli(["scan", "--cut", "vi", "--pmin", "0.2", "--pmax", "0.8",
                        "--pstep", "0.3", "--sizes", "6x4", "--nt", "2",
                        "--ns", "3", "--out", out, "--workers", "1"]) == 0
        rows = read_csv(str(out))
        assert len(rows) == 3
        assert all(r.p_j == 1.0 for r in rows)

    def test_needs_cut_or_grid(self):
        with pytest.raises(SystemExit):
            run_cli(["scan", "--pmin", "0", "--pmax", "1"])


class TestConfigFile:
    def test_flags_override_config(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("lx=6\nly=4\nnt=2\nns=2\npj=0\npk=1\n")
        assert run_cli(["simulate", "--config", cfg, "--ns", "5"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["n_s"] == 5          # flag wins
        assert out["lx"] == 6           # config applies

    def test_bad_config_line(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("lx 6\n")
        with pytest.raises(ValueError):
            run_cli(["simulate", "--config", cfg])


class TestAnalysisCommands:
    def test_collapse_on_scan_output(self, tmp_path, capsys):
        out = tmp_path / "scan.csv"
        run_cli(["scan", "--cut", "i", "--pmin", "0.1", "--pmax", "0.5",
                 "--pstep", "0.1", "--sizes", "6x4,8x5,10x6", "--nt", "2",
                 "--ns", "6", "--out", out, "--workers", "2"])
        capsys.readouterr()
        res = tmp_path / "collapse.json"
        assert run_cli(["collapse", "--csv", out, "--pmin", "0.1", "--pmax",
                        "0.5", "--out", res]) == 0
        payload = json.loads(res.read_text())
        assert set(payload) >= {"p_c", "nu", "objective"}

    def test_fit_kappa_from_table(self, tmp_path, capsys):
        table = tmp_path / "mi.csv"
        table.write_text("d,I,Ierr\n" + "\n".join(
            f"{d},{0.5 / d ** 0.7},{0.01}" for d in range(3, 10)))
        assert run_cli(["fit-kappa", "--csv", table]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["kappa"] == pytest.approx(0.7, abs=1e-9)

    def test_percolation_writes_json_and_curve(self, tmp_path, capsys):
        out = tmp_path / "perc.json"
        assert run_cli(["percolation", "--dim", "2", "--sizes", "8,12",
                        "--trials", "40", "--out", out, "--pmin", "0.45",
                        "--pmax", "0.55", "--pstep", "0.05"]) == 0
        payload = json.loads(out.read_text())
        assert 0.3 < payload["p_hat"] < 0.7
        curve = (tmp_path / "perc_curve.csv").read_text().splitlines()
        assert curve[0] == "p,spanning_probability"
        assert len(curve) >= 3


class TestRbhCheck:
    def test_emits_table(self, tmp_path, capsys):
        out = tmp_path / "rbh.csv"
        assert run_cli(["rbh-check", "--lx", "3", "--ly", "3", "--lz", "2",
                        "--pks", "0.5", "--ns", "8", "--out", out,
                        "--workers", "1"]) == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 2
        assert "entropy_zscore" in lines[0]


class TestPlot:
    def _scan(self, tmp_path):
        out = tmp_path / "scan.csv"
        run_cli(["scan", "--cut", "vi", "--pmin", "0.2", "--pmax", "0.8",
                 "--pstep", "0.2", "--sizes", "6x4,8x5", "--nt", "2",
                 "--ns", "3", "--out", out, "--workers", "2"])
        return out

    def test_curves_svg_is_wellformed(self, tmp_path, capsys):
        csv_path = self._scan(tmp_path)
        svg = tmp_path / "curves.svg"
        assert run_cli(["plot", "--csv", csv_path, "--kind", "curves",
                        "--value", "bmi_mean", "--out", svg]) == 0
        root = ET.parse(svg).getroot()
        assert root.tag.endswith("svg")

    def test_heatmap_svg(self, tmp_path, capsys):
        out = tmp_path / "grid.csv"
        run_cli(["scan", "--grid", "--pmin", "0", "--pmax", "1", "--pstep",
                 "0.5", "--sizes", "6x4", "--nt", "2", "--ns", "2",
                 "--out", out, "--workers", "2"])
        svg = tmp_path / "grid.svg"
        assert run_cli(["plot", "--csv", out, "--kind", "heatmap",
                        "--value", "s_topo_mean", "--out", svg]) == 0
        text = svg.read_text()
        assert text.startswith("<svg") and "rect" in text
        ET.parse(svg)

    def test_collapse_overlay_needs_parameters(self, tmp_path, capsys):
        csv_path = self._scan(tmp_path)
        with pytest.raises(SystemExit):
            run_cli(["plot", "--csv", csv_path, "--kind", "collapse"])
        svg = tmp_path / "collapse.svg"
        assert run_cli(["plot", "--csv", csv_path, "--kind", "collapse",
                        "--value", "bmi_mean", "--pc", "0.5", "--nu", "1.0",
                        "--out", svg]) == 0
        ET.parse(svg)


class TestSvgUnit:
    def test_empty_inputs_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            svgplot.heatmap([], str(tmp_path / "x.svg"))
        with pytest.raises(ValueError):
            svgplot.curves({}, str(tmp_path / "x.svg"), "x", "y")

    def test_heatmap_contains_diagonal_guide(self, tmp_path):
        path = tmp_path / "h.svg"
        svgplot.heatmap([(0.0, 0.0, 0.0), (1.0, 1.0, 1.0)], str(path))
        assert "polyline" in path.read_text()
