"""Tests for configs, initial profiles, on-disk formats, and the run pipeline."""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from anich import ConfigError, Field, build_grid
from anich.cli import main as cli_main
from anich.config import DEFAULT_CIRCLES, PRESETS, load_preset, parse_config, resolve_config
from anich.diagnostics import DiagRecord
from anich.gridio import format_record, read_log, read_snapshot, write_log, write_snapshot
from anich.runner import EXIT_NUMERICAL, EXIT_OK, build_initial, run

MINIMAL = """
grid.dim = 1
grid.n = 32
model.epsilon = 0.2
scheme.kind = UL
scheme.theta = 0.75
steps.T = 0.01
steps.n = 10
ic.kind = abs_sin
output.dir = out
"""


class TestConfigParsing:
    def test_minimal_parses(self):
        cfg = parse_config(MINIMAL, name="mini")
        assert cfg.name == "mini"
        assert cfg.is_uniform
        assert cfg.uniform_scheme().tau == pytest.approx(1e-3)

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="epsilonn"):
            parse_config(MINIMAL + "model.epsilonn = 0.3\n")

    def test_missing_epsilon_rejected(self):
        text = MINIMAL.replace("model.epsilon = 0.2", "")
        with pytest.raises(ConfigError, match="model.epsilon"):
            parse_config(text)

    def test_parse_error_reports_line(self):
        with pytest.raises(ConfigError, match="line 2"):
            parse_config("grid.dim = 1\nthis is not a key value pair\n")

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config(MINIMAL + "grid.dim = 2\n")

    def test_scheme_regularization_consistency(self):
        text = MINIMAL.replace("scheme.kind = UL", "scheme.kind = UW")
        with pytest.raises(ConfigError, match="willmore"):
            parse_config(text)

    def test_comments_and_blanks_ignored(self):
        cfg = parse_config("# leading comment\n" + MINIMAL + "\n# trailing\n")
        assert cfg["grid.n"] == [32]

    def test_all_presets_parse(self):
        for name in PRESETS:
            cfg = load_preset(name)
            assert cfg.name == name

    def test_resolve_prefers_existing_file(self, tmp_path):
        p = tmp_path / "custom.cfg"
        p.write_text(MINIMAL)
        cfg = resolve_config(str(p))
        assert cfg.name == "custom"

    def test_resolve_unknown_raises(self):
        with pytest.raises(ConfigError, match="unknown preset"):
            resolve_config("no_such_preset")


class TestBuildInitial:
    def test_abs_sin_peak(self):
        cfg = parse_config(MINIMAL)
        grid = build_grid(1, 32)
        phi = build_initial(cfg, grid)
        x = grid.meshes[0]
        idx = np.argmin(np.abs(x - np.pi / 2))
        assert phi.values[idx] == pytest.approx(1.0, abs=1e-12)

    def test_two_circles_pointwise_oracle(self):
        text = MINIMAL.replace("grid.dim = 1", "grid.dim = 2") \
                      .replace("ic.kind = abs_sin", "ic.kind = two_circles")
        cfg = parse_config(text)
        grid = build_grid(2, 128)
        phi = build_initial(cfg, grid)
        eps = 0.2

        def reference(x, y):
            total = 1.0
            for (cx, cy, r) in DEFAULT_CIRCLES:
                total -= math.tanh((math.hypot(x - cx, y - cy) - r) / (1.2 * eps))
            return total

        X, Y = grid.meshes
        # far corner: outside both circles, the profile sits at -1
        assert reference(0.1, 0.1) == pytest.approx(-1.0, abs=1e-4)
        # circle-1 center: inside one circle only, the profile sits at +1
        cx, cy, _ = DEFAULT_CIRCLES[0]
        assert reference(cx, cy) == pytest.approx(1.0, abs=1e-4)
        for (px, py) in [(0.1, 0.1), (cx, cy), (np.pi, np.pi)]:
            ix = np.argmin(np.abs(X[0, :] - px))
            iy = np.argmin(np.abs(Y[:, 0] - py))
            assert phi.values[iy, ix] == pytest.approx(
                reference(X[0, ix], Y[iy, 0]), abs=1e-12)

    def test_random_mean(self):
        text = MINIMAL.replace("ic.kind = abs_sin",
                               "ic.kind = random_uniform\nic.mean = -0.3")
        cfg = parse_config(text.replace("grid.n = 32", "grid.n = 128"))
        grid = build_grid(1, 128)
        phi = build_initial(cfg, grid)
        assert abs(phi.values.mean() - (-0.3)) < 1e-3
        assert phi.values.min() >= -0.3
        assert phi.values.max() <= -0.299

    def test_random_seed_determinism(self):
        text = MINIMAL.replace("ic.kind = abs_sin", "ic.kind = random_uniform")
        cfg = parse_config(text)
        grid = build_grid(1, 32)
        a = build_initial(cfg, grid)
        b = build_initial(cfg, grid)
        assert np.array_equal(a.values, b.values)

    def test_expression(self):
        text = MINIMAL.replace(
            "ic.kind = abs_sin", "ic.kind = expression\nic.expression = 0.5*cos(2*x)")
        cfg = parse_config(text)
        grid = build_grid(1, 32)
        phi = build_initial(cfg, grid)
        assert np.allclose(phi.values, 0.5 * np.cos(2 * grid.meshes[0]))

    def test_dim_mismatch(self):
        text = MINIMAL.replace("ic.kind = abs_sin", "ic.kind = two_circles")
        cfg = parse_config(text)
        with pytest.raises(ConfigError):
            build_initial(cfg, build_grid(1, 32))


class TestSnapshotFormat:
    @pytest.mark.parametrize("dim,n", [(1, 32), (2, 16)])
    def test_round_trip(self, tmp_path, dim, n):
        grid = build_grid(dim, n)
        rng = np.random.default_rng(5)
        field = Field(grid, rng.standard_normal(grid.shape))
        path = tmp_path / "snap.f64grid"
        write_snapshot(path, field, 0.625)
        back, t = read_snapshot(path)
        assert t == 0.625
        assert back.grid == grid
        assert np.array_equal(back.values, field.values)

    def test_header_is_ascii(self, tmp_path):
        grid = build_grid(1, 16)
        path = tmp_path / "snap.f64grid"
        write_snapshot(path, Field.full(grid, 1.0), 0.0)
        head = path.read_bytes()[:14]
        assert head == b"magic f64grid/"

    def test_rejects_bad_magic(self, tmp_path):
        path = tmp_path / "bad.f64grid"
        path.write_bytes(b"magic nope\n1\n2\n3\n4\n")
        with pytest.raises(ValueError, match="not an f64grid/1"):
            read_snapshot(path)


class TestLogFormat:
    def test_round_trip(self, tmp_path):
        recs = [
            DiagRecord(t=0.1, mass=4.0, rel_mass_err=1e-12, energy_original=2.5,
                       energy_modified=30.0, xi=None, newton_iters=None, dt=1e-3),
            DiagRecord(t=0.2, mass=4.0, rel_mass_err=-2e-13, energy_original=2.4,
                       energy_modified=29.0, xi=1.00001, newton_iters=3, dt=2e-3),
        ]
        path = tmp_path / "log.csv"
        write_log(path, recs)
        back = read_log(path)
        assert back == recs

    def test_uniform_cells_empty(self):
        rec = DiagRecord(t=0.1, mass=4.0, rel_mass_err=0.0, energy_original=1.0,
                         energy_modified=2.0, xi=None, newton_iters=None, dt=1e-3)
        cells = format_record(rec).split(",")
        assert cells[5] == "" and cells[6] == ""

    def test_seventeen_digits(self):
        rec = DiagRecord(t=1 / 3, mass=4.0, rel_mass_err=0.0, energy_original=1.0,
                         energy_modified=2.0, xi=None, newton_iters=None, dt=1e-3)
        assert format_record(rec).startswith("0.33333333333333331,")


SMALL_RUN = """
grid.dim = 1
grid.n = 64
model.epsilon = 0.2
model.alpha = 0.05
scheme.kind = UL
scheme.theta = 0.75
steps.T = 0.02
steps.n = 20
ic.kind = abs_sin
output.snapshot_times = 0.0, 0.01, 0.02
output.dir = smallrun
"""


class TestRunPipeline:
    def test_artifacts_and_determinism(self, tmp_path):
        cfg = parse_config(SMALL_RUN, name="small")
        assert run(cfg, output_root=tmp_path / "a") == EXIT_OK
        assert run(cfg, output_root=tmp_path / "b") == EXIT_OK
        dir_a = tmp_path / "a" / "smallrun"
        dir_b = tmp_path / "b" / "smallrun"
        assert (dir_a / "log.csv").read_bytes() == (dir_b / "log.csv").read_bytes()
        meta = json.loads((dir_a / "meta.json").read_text())
        assert meta["status"] == "ok"
        snaps = sorted(p.name for p in (dir_a / "snapshots").iterdir())
        assert snaps == ["t_0.01.f64grid", "t_0.02.f64grid", "t_0.f64grid"]
        recs = read_log(dir_a / "log.csv")
        assert len(recs) == 20
        assert max(abs(r.rel_mass_err) for r in recs) < 1e-10

    def test_variable_run_writes_xi(self, tmp_path):
        text = SMALL_RUN.replace("scheme.kind = UL", "scheme.kind = VL") \
                        .replace("steps.T = 0.02", "steps.T = 0.005") \
                        .replace("output.snapshot_times = 0.0, 0.01, 0.02",
                                 "output.snapshot_times = 0.0, 0.005") \
                        .replace("output.dir = smallrun", "output.dir = vlrun")
        cfg = parse_config(text, name="vl")
        assert run(cfg, output_root=tmp_path) == EXIT_OK
        recs = read_log(tmp_path / "vlrun" / "log.csv")
        assert all(r.xi is not None and r.newton_iters is not None for r in recs)

    def test_mms_run_writes_report(self, tmp_path):
        text = """
grid.dim = 1
grid.n = 64
model.epsilon = 0.2
scheme.kind = UL
scheme.theta = 1.0
scheme.s1 = 0.0
steps.T = 0.15
ic.kind = abs_sin
mms.enabled = true
mms.tau_list = 2e-3, 1e-3
output.dir = mmsrun
"""
        cfg = parse_config(text, name="mms")
        assert run(cfg, output_root=tmp_path) == EXIT_OK
        report = (tmp_path / "mmsrun" / "report.txt").read_text().splitlines()
        assert report[0].startswith("# tau")
        assert len(report) == 3
        order = float(report[2].split()[2])
        assert 1.7 <= order <= 2.3

    def test_numerical_failure_marks_incomplete(self, tmp_path):
        text = """
grid.dim = 1
grid.n = 64
model.epsilon = 0.2
model.alpha = 0.3
scheme.kind = UL
scheme.theta = 0.75
scheme.s1 = 0.0
scheme.s2 = 0.0
steps.T = 0.75
ic.kind = abs_sin
mms.enabled = true
mms.tau_list = 1e-2
output.dir = blowup
"""
        cfg = parse_config(text, name="blow")
        assert run(cfg, output_root=tmp_path) == EXIT_NUMERICAL
        meta = json.loads((tmp_path / "blowup" / "meta.json").read_text())
        assert meta["status"] == "incomplete"


class TestCli:
    def test_presets_list(self, capsys):
        assert cli_main(["presets", "list"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "example1_UL_theta075" in out
        assert "example3_UL_twocircles" in out

    def test_run_config_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("grid.dim = 7\n")
        assert cli_main(["run", str(bad)]) == 2

    def test_run_small_config(self, tmp_path):
        p = tmp_path / "small.cfg"
        p.write_text(SMALL_RUN)
        assert cli_main(["run", str(p), "-o", str(tmp_path)]) == EXIT_OK
        assert (tmp_path / "smallrun" / "log.csv").exists()

    def test_output_root_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("ANICH_OUTPUT_ROOT", str(tmp_path))
        p = tmp_path / "small.cfg"
        p.write_text(SMALL_RUN)
        assert cli_main(["run", str(p)]) == EXIT_OK
        assert (tmp_path / "smallrun" / "log.csv").exists()

    def test_sweep_glob(self, tmp_path):
        for k in (1, 2):
            (tmp_path / f"cfg{k}.cfg").write_text(
                SMALL_RUN.replace("output.dir = smallrun", f"output.dir = out{k}"))
        code = cli_main(["sweep", str(tmp_path / "cfg*.cfg"), "-o", str(tmp_path), "-j", "2"])
        assert code == EXIT_OK
        assert (tmp_path / "out1" / "log.csv").exists()
        assert (tmp_path / "out2" / "log.csv").exists()

    def test_verify_command(self):
        assert cli_main(["verify"]) == EXIT_OK
