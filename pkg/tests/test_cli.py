import json
import warnings
from pathlib import Path

import pytest
from click.testing import CliRunner

from atwood.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


def invoke(runner, out_dir, args):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return runner.invoke(main, ["--out", str(out_dir)] + args, catch_exceptions=False)


class TestScan:
    def test_scan_3(self, runner, tmp_path):
        result = invoke(runner, tmp_path, ["scan", "3"])
        assert result.exit_code == 0
        lines = (tmp_path / "admissible.csv").read_text().splitlines()
        assert lines[0].startswith("# ")
        assert lines[1] == "k,r,mass_ratio"
        assert lines[2] == "3,4,14"
        assert len(lines) == 3

    def test_scan_19_contains_15(self, runner, tmp_path):
        result = invoke(runner, tmp_path, ["scan", "19"])
        assert result.exit_code == 0
        body = (tmp_path / "admissible.csv").read_text()
        assert "19,26,15" in body

    def test_scan_1_empty_ok(self, runner, tmp_path):
        result = invoke(runner, tmp_path, ["scan", "1"])
        assert result.exit_code == 0
        lines = (tmp_path / "admissible.csv").read_text().splitlines()
        assert len(lines) == 2  # header comment + column row


class TestExpand:
    def test_symbolic_artifact_matches_published(self, runner, tmp_path):
        result = invoke(
            runner, tmp_path,
            ["expand", "--family", "kr", "--k", "3", "--r", "4", "--N", "8"],
        )
        assert result.exit_code == 0
        art = json.loads((tmp_path / "expand.json").read_text())
        from atwood.exactnum import GaussianRational, PuiseuxSeries
        from fractions import Fraction

        xp = PuiseuxSeries.from_json_dict(art["series"]["x_plus"])
        # leading coefficient 10 i d1^2 / 9 and the identically-zero next order
        names = ("c1", "c2", "d1")
        assert xp.coeffs[0].terms == {(0, 0, 2): GaussianRational(0, Fraction(10, 9))}
        assert xp.coeffs[1].is_zero()

    def test_determinism(self, runner, tmp_path):
        args = ["expand", "--family", "integrable", "--N", "10"]
        invoke(runner, tmp_path / "a", args)
        invoke(runner, tmp_path / "b", args)
        a = (tmp_path / "a" / "expand.json").read_bytes()
        b = (tmp_path / "b" / "expand.json").read_bytes()
        assert a == b

    def test_bad_pair_exit_3(self, runner, tmp_path):
        result = invoke(
            runner, tmp_path,
            ["expand", "--family", "kr", "--k", "4", "--r", "5", "--N", "8"],
        )
        assert result.exit_code == 3

    def test_obstruction_exit_2(self, runner, tmp_path, monkeypatch):
        from atwood.kowalevski import ObstructionError

        def boom(*args, **kwargs):
            raise ObstructionError(4, "forced")

        monkeypatch.setattr("atwood.service.kowalevski.expand", boom)
        result = invoke(
            runner, tmp_path,
            ["expand", "--family", "kr", "--k", "3", "--r", "4", "--N", "8"],
        )
        assert result.exit_code == 2


class TestPipeline:
    def test_expand_diagnose_round_trip(self, runner, tmp_path):
        invoke(
            runner, tmp_path,
            ["expand", "--family", "kr", "--k", "3", "--r", "4", "--N", "60",
             "--c1", "1", "--c2", "2", "--d1", "1"],
        )
        result = invoke(
            runner, tmp_path, ["diagnose", "--input", str(tmp_path / "coeffs.csv")]
        )
        assert result.exit_code == 0
        # round trip: reloaded CSV equals the in-process pipeline exactly
        from atwood.diagnostics import dalembert, series_to_coeffs
        from atwood.kowalevski import expand as kexpand, leading_balance

        bal = next(b for b in leading_balance(14) if b.family == "q2")
        sol = kexpand(bal, bal.machine_params(), 60, sigma={"c1": "1", "c2": "2", "d1": "1"})
        seq = dalembert(series_to_coeffs(sol.x_plus))
        summary = json.loads((tmp_path / "diagnose.json").read_text())
        assert summary["ratio_limits"]["x_plus"]["limit"] == seq.limit
        # guides embedded for the plots layer
        assert summary["config"]["guides"] == [2.0, -4 / 3, 1 - 4 / 6, -2.0]

    def test_pade_pipeline(self, runner, tmp_path):
        invoke(
            runner, tmp_path,
            ["expand", "--family", "kr", "--k", "3", "--r", "4", "--N", "46",
             "--c1", "1", "--c2", "2", "--d1", "1"],
        )
        result = invoke(
            runner, tmp_path,
            ["pade", "--input", str(tmp_path / "expand.json"), "--M", "20"],
        )
        assert result.exit_code == 0
        lines = (tmp_path / "singularities.csv").read_text().splitlines()
        assert lines[1] == "re_pole,im_pole,re_residue,im_residue,class"
        classes = {line.split(",")[-1] for line in lines[2:]}
        assert "true_branch_point" in classes and "zero" in classes

    def test_exact_command(self, runner, tmp_path):
        result = invoke(runner, tmp_path, ["exact", "--K", "2", "--E", "0.5", "--n-grid", "8"])
        assert result.exit_code == 0
        bridge = json.loads((tmp_path / "bridge.json").read_text())
        assert abs(bridge["t_inf"][1] - 8 / 3) < 1e-12
        grid = (tmp_path / "grid.csv").read_text().splitlines()
        assert len(grid) == 2 + 8

    def test_poisson_command(self, runner, tmp_path):
        result = invoke(
            runner, tmp_path,
            ["poisson", "--family", "integrable", "--b1", "2", "--c1", "1/3", "--d1", "5/7"],
        )
        assert result.exit_code == 0
        table = json.loads((tmp_path / "brackets.json").read_text())
        assert table["matches_closed_form"] is True
        assert table["hamiltonian_brackets"]["t0"] == "1"

    def test_poisson_requires_sigma(self, runner, tmp_path):
        result = invoke(runner, tmp_path, ["poisson", "--family", "integrable"])
        assert result.exit_code == 3

    def test_integrate_command(self, runner, tmp_path):
        result = invoke(
            runner, tmp_path,
            ["integrate", "--family", "kr", "--k", "3", "--r", "4",
             "--c1", "1", "--c2", "2", "--d1", "1",
             "--t-start", "0.02", "--t-end", "0.04", "--N", "80"],
        )
        assert result.exit_code == 0
        lines = (tmp_path / "trajectory.csv").read_text().splitlines()
        assert lines[1].split(",")[:2] == ["t_re", "t_im"]
        assert len(lines) > 3

    def test_integrate_bad_time_exit_3(self, runner, tmp_path):
        result = invoke(
            runner, tmp_path,
            ["integrate", "--family", "kr", "--k", "3", "--r", "4",
             "--c1", "1", "--c2", "2", "--d1", "1",
             "--t-start", "soon", "--t-end", "later"],
        )
        assert result.exit_code == 3
