import numpy as np
import pytest

from mmwavesim.channel import export_channels
from mmwavesim.cli import (ConfigError, main, parse_config, resolve_config,
                           write_manifest)
from mmwavesim.montecarlo import SimulationConfig, run_drop, synthesize_channels
from mmwavesim.topology import NetworkLayout, deploy_grid_bs, deploy_uniform_ues

TINY = """
# small network for fast end-to-end runs
network.grid_rows = 1
network.grid_cols = 2
network.n_ue = 3
network.quota = 2
antenna.bs_rows = 2
antenna.bs_cols = 2
antenna.ue_rows = 2
antenna.ue_cols = 1
antenna.n_streams = 2
channel.n_clusters = 2
channel.n_subpaths = 3
run.drops = 4
run.seed = 3
"""


def write_tiny(tmp_path, extra=""):
    path = tmp_path / "sim.cfg"
    path.write_text(TINY + extra)
    return str(path)


class TestParseConfig:
    def test_empty_file_gives_defaults(self, tmp_path):
        path = tmp_path / "empty.cfg"
        path.write_text("")
        cfg = parse_config(path)
        assert cfg == SimulationConfig()
        assert cfg.n_bs == 4 and cfg.n_ue == 16 and cfg.drops == 500
        assert cfg.frequency_hz == 28e9 and cfg.bs_power_dbm == 30.0

    def test_values_echoed(self, tmp_path):
        path = tmp_path / "sim.cfg"
        path.write_text("run.drops = 100\nrun.seed = 7\n")
        cfg = parse_config(path)
        assert cfg.drops == 100 and cfg.seed == 7

    def test_comments_and_blanks(self, tmp_path):
        path = tmp_path / "sim.cfg"
        path.write_text("\n# comment\nrun.drops = 9  # trailing\n\n")
        assert parse_config(path).drops == 9

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "sim.cfg"
        path.write_text("run.dropz = 5\n")
        with pytest.raises(ConfigError, match="run.dropz"):
            parse_config(path)

    def test_type_mismatch_names_key(self, tmp_path):
        path = tmp_path / "sim.cfg"
        path.write_text("run.drops = many\n")
        with pytest.raises(ConfigError, match="run.drops"):
            parse_config(path)

    def test_malformed_line(self, tmp_path):
        path = tmp_path / "sim.cfg"
        path.write_text("run.drops 5\n")
        with pytest.raises(ConfigError, match="key = value"):
            parse_config(path)

    def test_wcs_quota_infeasibility_at_parse(self, tmp_path):
        path = tmp_path / "sim.cfg"
        path.write_text("association.scheme = wcs\nnetwork.quota = 3\n")
        with pytest.raises(ConfigError, match="quota"):
            parse_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            parse_config(tmp_path / "absent.cfg")

    def test_flags_override_file(self, tmp_path):
        path = tmp_path / "sim.cfg"
        path.write_text("run.drops = 10\nrun.seed = 1\n")
        cfg = resolve_config(path, {"drops": 5})
        assert cfg.drops == 5 and cfg.seed == 1

    def test_manifest_round_trip(self, tmp_path):
        cfg = SimulationConfig(drops=17, seed=23, association_scheme="wcs",
                               interference="bim", utility="log", subpath_phase=False,
                               area_side=123.5)
        path = tmp_path / "manifest.cfg"
        write_manifest(path, cfg)
        assert parse_config(path) == cfg


class TestMainEndToEnd:
    def run_main(self, tmp_path, *extra_args, config=None, out="out"):
        args = ["--out", str(tmp_path / out)]
        if config is not None:
            args += ["--config", config]
        return main(args + list(extra_args)), tmp_path / out

    def test_writes_bundle(self, tmp_path):
        status, out = self.run_main(tmp_path, config=write_tiny(tmp_path))
        assert status == 0
        names = {p.name for p in out.iterdir()}
        assert {"manifest.cfg", "rates.csv", "inp_power.csv", "dropped.csv",
                "summary.csv", "drops.jsonl"} <= names
        assert {"cdf_rate_max-sinr_oim.csv", "cdf_rate_max-sinr_bim.csv",
                "cdf_inp_max-sinr_oim.csv", "cdf_inp_max-sinr_bim.csv",
                "cdf_dropped_max-sinr.csv"} <= names
        # 4 drops x 3 UEs x 2 models plus header
        assert len((out / "rates.csv").read_text().splitlines()) == 1 + 4 * 3 * 2
        assert len((out / "dropped.csv").read_text().splitlines()) == 1 + 4

    def test_served_rows_match(self, tmp_path):
        status, out = self.run_main(tmp_path, config=write_tiny(tmp_path))
        assert status == 0
        rate_rows = [line.split(",") for line in
                     (out / "rates.csv").read_text().splitlines()[1:]]
        served = sum(int(r[5]) for r in rate_rows)
        inp_rows = (out / "inp_power.csv").read_text().splitlines()[1:]
        assert served == len(inp_rows)

    def test_byte_identical_reruns(self, tmp_path):
        cfgpath = write_tiny(tmp_path)
        status1, out1 = self.run_main(tmp_path, config=cfgpath, out="a")
        status2, out2 = self.run_main(tmp_path, config=cfgpath, out="b")
        assert status1 == status2 == 0
        for p1 in sorted(out1.iterdir()):
            assert p1.read_bytes() == (out2 / p1.name).read_bytes()

    def test_rerun_from_manifest_reproduces(self, tmp_path):
        status, out = self.run_main(tmp_path, config=write_tiny(tmp_path))
        assert status == 0
        status2, out2 = self.run_main(tmp_path, config=str(out / "manifest.cfg"),
                                      out="again")
        assert status2 == 0
        for p in sorted(out.iterdir()):
            assert p.read_bytes() == (out2 / p.name).read_bytes()

    def test_flags_reach_outputs(self, tmp_path):
        status, out = self.run_main(tmp_path, "--association", "wcs",
                                    "--interference", "bim", "--drops", "2",
                                    config=write_tiny(tmp_path))
        assert status == 0
        names = {p.name for p in out.iterdir()}
        assert "cdf_rate_wcs_bim.csv" in names
        assert "cdf_rate_wcs_oim.csv" not in names
        rates = (out / "rates.csv").read_text().splitlines()
        assert len(rates) == 1 + 2 * 3
        assert all(",wcs,bim," in line for line in rates[1:])

    def test_parallel_workers_byte_identical(self, tmp_path):
        # result files must not depend on the worker count; the manifest
        # legitimately differs (it records run.workers)
        cfgpath = write_tiny(tmp_path)
        _, serial = self.run_main(tmp_path, "--workers", "1", config=cfgpath, out="s")
        _, parallel = self.run_main(tmp_path, "--workers", "2", config=cfgpath, out="p")
        for p1 in sorted(serial.iterdir()):
            if p1.name == "manifest.cfg":
                continue
            assert p1.read_bytes() == (parallel / p1.name).read_bytes()

    def test_bad_config_nonzero_exit(self, tmp_path, capsys):
        path = tmp_path / "sim.cfg"
        path.write_text("network.n_ue = 0\n")
        status, _ = self.run_main(tmp_path, config=str(path))
        assert status == 1
        assert "error" in capsys.readouterr().err

    def test_import_without_file_fails(self, tmp_path, capsys):
        status, _ = self.run_main(tmp_path, "--channel", "import",
                                  config=write_tiny(tmp_path))
        assert status == 1
        assert "channel_file" in capsys.readouterr().err

    def test_malformed_channel_file_names_link(self, tmp_path, capsys):
        cfg = SimulationConfig(grid_rows=1, grid_cols=2, n_ue=3, quota=2, bs_rows=2,
                               bs_cols=2, ue_rows=2, ue_cols=1, n_streams=2,
                               n_clusters=2, n_subpaths=3, drops=1, seed=3)
        bs = deploy_grid_bs(cfg.area_side, 1, 2)
        rng = np.random.default_rng(0)
        layout = NetworkLayout(area_side=cfg.area_side, bs_positions=bs,
                               ue_positions=deploy_uniform_ues(cfg.area_side, 3, rng))
        channels = synthesize_channels(cfg, layout, 0)
        del channels[(2, 1)]
        chpath = tmp_path / "links.jsonl"
        export_channels(chpath, channels)
        status, _ = self.run_main(tmp_path, "--channel", "import",
                                  "--channels", str(chpath),
                                  config=write_tiny(tmp_path))
        assert status == 1
        assert "ue=2, bs=1" in capsys.readouterr().err

    def test_import_round_trip_runs(self, tmp_path):
        cfg = SimulationConfig(grid_rows=1, grid_cols=2, n_ue=3, quota=2, bs_rows=2,
                               bs_cols=2, ue_rows=2, ue_cols=1, n_streams=2,
                               n_clusters=2, n_subpaths=3, drops=1, seed=3)
        drop = run_drop(cfg, 0)
        bs = deploy_grid_bs(cfg.area_side, 1, 2)
        layout = NetworkLayout(area_side=cfg.area_side, bs_positions=bs,
                               ue_positions=drop.ue_positions)
        chpath = tmp_path / "links.jsonl"
        export_channels(chpath, synthesize_channels(cfg, layout, 0))
        status, out = self.run_main(tmp_path, "--channel", "import",
                                    "--channels", str(chpath), "--drops", "1",
                                    config=write_tiny(tmp_path))
        assert status == 0
        # imported channels reproduce the synthesized drop's rates exactly
        rows = (out / "rates.csv").read_text().splitlines()[1:]
        oim = [float(r.split(",")[4]) for r in rows if ",oim," in r]
        assert oim == pytest.approx(list(drop.results[0].rates), rel=1e-15)
