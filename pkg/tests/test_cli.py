import json

import pytest

from src.cli import _bench_config, build_parser, main
from src.utils.settings import Settings


class TestParser:

    def test_published_baselines_flag(self):
        args = build_parser().parse_args(["bench", "--published-baselines"])

        assert args.published_baselines is True

    def test_paper_baselines_alias(self):
        args = build_parser().parse_args(["bench", "--paper-baselines"])

        assert args.published_baselines is True

    def test_lists(self):
        args = build_parser().parse_args(["bench", "--graphs", "fork, chain", "--gammas", "0,0.4"])

        assert args.graphs == ["fork", "chain"]
        assert args.gammas == [0.0, 0.4]

    def test_requires_command(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])


class TestBenchConfig:

    def test_precedence(self, tmp_path):
        config_file = tmp_path / "bench.json"
        config_file.write_text(json.dumps({"seeds": 3, "n_obs": 800, "discovery": {"mmd_agg": "max"}}))
        args = build_parser().parse_args(
            ["bench", "--config", str(config_file), "--seeds", "2", "--tau-scale", "0.2"]
        )

        config = _bench_config(args, Settings(workers=4, base_seed=9))

        assert config.seeds == 2
        assert config.n_obs == 800
        assert (config.workers, config.base_seed) == (4, 9)
        assert config.discovery.mmd_agg == "max"
        assert config.discovery.tau_scale == 0.2


class TestMain:

    def test_sei(self, capsys):
        assert main(["sei"]) == 0

        assert "theta_lumo" in capsys.readouterr().out

    def test_missing_file(self, tmp_path, capsys):
        code = main(["discover", "--obs", str(tmp_path / "x.csv"), "--int-dir", str(tmp_path)])

        assert code == 1
        assert "not found" in capsys.readouterr().err

    def test_discover_writes_json(self, csv_inputs, tmp_path, capsys):
        obs, int_dir = csv_inputs
        out = tmp_path / "result.json"

        code = main(["discover", "--obs", str(obs), "--int-dir", str(int_dir), "--out", str(out)])

        assert code == 0
        assert json.loads(out.read_text())["graph"]["d"] == 5
        assert "edges:" in capsys.readouterr().out

    def test_invalid_grid(self, capsys):
        assert main(["bench", "--gammas", "-0.5"]) == 1

    def test_diagnose_without_flow(self, csv_inputs, tmp_path):
        obs, int_dir = csv_inputs
        report = tmp_path / "report.json"

        code = main(
            ["diagnose", "--obs", str(obs), "--int-dir", str(int_dir), "--report", str(report), "--no-flow"]
        )

        assert code == 0
        assert "flow" not in json.loads(report.read_text())
