import csv
import io
import json
import math

import numpy as np
import pytest

from magctrb import cli, config
from magctrb.config import ConfigError


def write_config(tmp_path, **changes):
    data = json.loads(json.dumps(config.DEFAULT_CONFIG))
    for key, value in changes.items():
        if key in ("inertia", "numerics"):
            data[key] = value
        else:
            data["orbit"][key] = value
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(data))
    return path


def read_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], np.array(rows[1:], dtype=float)


class TestConfig:
    def test_defaults_materialized(self):
        cfg = config.loads(json.dumps({
            "inertia": [5, 4, 3],
            "orbit": {"semi_major_axis": 7e6, "inclination_mag": 0.5},
        }))
        d = cfg.to_dict()
        assert d["numerics"] == {"rank_tol": 1e-8, "steps_per_orbit": 10000,
                                 "gramian_nodes": 4001}
        assert d["orbit"]["dipole_strength"] == 7.9e15
        assert d["orbit"]["omega0"] == pytest.approx(math.sqrt(3.986004418e14 / 7e6**3))

    def test_round_trip(self):
        cfg = config.default()
        again = config.loads(config.dumps(cfg))
        assert again == cfg
        assert config.dumps(again) == config.dumps(cfg)

    def test_unknown_keys_rejected(self):
        data = json.loads(json.dumps(config.DEFAULT_CONFIG))
        data["orbit"]["eccentricity"] = 0.1
        with pytest.raises(ConfigError, match="orbit.eccentricity"):
            config.from_dict(data)
        data = json.loads(json.dumps(config.DEFAULT_CONFIG))
        data["extra"] = 1
        with pytest.raises(ConfigError, match="extra"):
            config.from_dict(data)

    def test_field_diagnostics(self):
        data = json.loads(json.dumps(config.DEFAULT_CONFIG))
        data["inertia"] = [5, -4, 3]
        with pytest.raises(ConfigError, match=r"inertia\.1"):
            config.from_dict(data)
        data = json.loads(json.dumps(config.DEFAULT_CONFIG))
        data["numerics"] = {"gramian_nodes": 400}
        with pytest.raises(ConfigError, match="odd"):
            config.from_dict(data)

    def test_json_syntax_diagnostics(self):
        with pytest.raises(ConfigError, match="line 2, column"):
            config.loads('{"inertia": [5, 4, 3],\n "orbit": }')
        with pytest.raises(ConfigError, match="JSON object"):
            config.loads("[1, 2]")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            config.load(tmp_path / "nope.json")

    def test_numerics_override(self):
        cfg = config.default().with_numerics(rank_tol=1e-6, gramian_nodes=None)
        assert cfg.numerics.rank_tol == 1e-6
        assert cfg.numerics.gramian_nodes == 4001
        assert config.default().with_numerics() == config.default()


class TestCommands:
    def test_check_canonical(self):
        assert cli.cmd_check(config.default()).verdict.value == "Controllable"

    def test_field_rows_and_equatorial(self, tmp_path):
        cfg = config.load(write_config(tmp_path, inclination_mag=0.0))
        rows = np.array(cli.cmd_field(cfg, samples=4, orbits=1))
        assert rows.shape == (5, 4)
        assert not rows[:, 1].any() and not rows[:, 3].any()
        assert len(cli.cmd_field(cfg, samples=10, orbits=3)) == 31

    def test_field_periodic(self):
        rows = np.array(cli.cmd_field(config.default(), samples=100))
        scale = np.abs(rows[:, 1:]).max()
        assert np.abs(rows[0, 1:] - rows[-1, 1:]).max() <= 1e-12 * scale

    def test_field_rejects_few_samples(self):
        with pytest.raises(ValueError):
            cli.cmd_field(config.default(), samples=1)

    def test_kmatrices_at_critical_time(self):
        cfg = config.default()
        (row,) = cli.cmd_kmatrices(cfg, [cfg.orbit_config.t_c])
        assert row[-1] == 6
        sv = np.array(row[1:7])
        assert np.all(sv >= 0) and np.all(np.diff(sv) <= 0)

    def test_kmatrices_equatorial_sweep(self, tmp_path):
        cfg = config.load(write_config(tmp_path, inclination_mag=0.0))
        times = cli.sweep_times(cfg, 16)
        assert times.size == 16 and times[-1] < cfg.orbit_config.period
        assert all(row[-1] <= 5 for row in cli.cmd_kmatrices(cfg, times))

    def test_gramian_json(self):
        cfg = config.default().with_numerics(gramian_nodes=401)
        out = cli.cmd_gramian(cfg)
        assert np.array(out["gramian"]).shape == (6, 6)
        assert out["ratio"] > 1e-8
        json.dumps(out)

    def test_steer_zero_state(self):
        cfg = config.default().with_numerics(steps_per_orbit=200, gramian_nodes=201)
        rows = np.array(cli.steer_rows(cli.cmd_steer(cfg, [0.0] * 6)))
        assert rows.shape == (201, 10)
        assert not rows[:, 1:].any()


class TestMain:
    def test_check_exit_and_report(self, capsys, tmp_path):
        out = tmp_path / "report.json"
        assert cli.main(["check", "--gramian-nodes", "401", "--output", str(out)]) == 0
        assert "Controllable" in capsys.readouterr().out
        report = json.loads(out.read_text())
        assert report["verdict"] == "Controllable"
        assert report["k_rank"]["rank"] == 6

    def test_check_equatorial_is_success(self, capsys, tmp_path):
        path = write_config(tmp_path, inclination_mag=0.0)
        assert cli.main(["check", "--config", str(path), "--json",
                         "--gramian-nodes", "401"]) == 0
        assert json.loads(capsys.readouterr().out)["verdict"] == "NotControllableEquatorial"

    def test_check_cond2_violation(self, capsys, tmp_path):
        path = write_config(tmp_path, inertia=[1, 2, 1])
        assert cli.main(["check", "--config", str(path), "--json",
                         "--gramian-nodes", "401"]) == 0
        assert json.loads(capsys.readouterr().out)["verdict"] == "Inconclusive"

    def test_bad_config_exit_code(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"inertia": [1, 2, 3], "orbit": {"semi_major_axis": 7e6,'
                        ' "inclination_mag": 0.3, "colour": "red"}}')
        assert cli.main(["check", "--config", str(path)]) == 1
        assert "orbit.colour" in capsys.readouterr().err

    def test_field_csv_columns(self, capsys):
        assert cli.main(["field", "--samples", "4"]) == 0
        header, data = read_csv(capsys.readouterr().out)
        assert header == ["t", "b1", "b2", "b3"]
        assert data.shape == (5, 4)

    def test_csv_bit_identical(self, capsys):
        cli.main(["kmatrices", "--sweep", "8"])
        first = capsys.readouterr().out
        cli.main(["kmatrices", "--sweep", "8"])
        assert capsys.readouterr().out == first
        header, data = read_csv(first)
        assert header == list(cli.KMATRIX_COLUMNS) and data.shape == (8, 8)

    def test_full_precision(self):
        text = cli.to_csv(("t",), [(1 / 3,)])
        assert float(text.splitlines()[1]) == 1 / 3

    def test_steer_default_summary(self, capsys, tmp_path):
        out = tmp_path / "steer.csv"
        assert cli.main(["steer", "--output", str(out)]) == 0
        summary = capsys.readouterr().out
        ratio = float(summary.split("final_norm_ratio=")[1].split()[0])
        assert ratio <= 1e-3
        header, data = read_csv(out.read_text())
        assert header == list(cli.STEER_COLUMNS)
        assert data.shape == (10_001, 10)

    def test_steer_zero_state_csv(self, capsys):
        assert cli.main(["steer", "--x0", "0,0,0,0,0,0", "--steps-per-orbit", "100",
                         "--gramian-nodes", "101"]) == 0
        captured = capsys.readouterr()
        _, data = read_csv(captured.out)
        assert not data[:, 1:].any()
        assert "final_norm_ratio=0" in captured.err

    def test_steer_equatorial_fails(self, capsys, tmp_path):
        path = write_config(tmp_path, inclination_mag=0.0)
        assert cli.main(["steer", "--config", str(path), "--steps-per-orbit", "100",
                         "--gramian-nodes", "101"]) == 1
        assert "singular" in capsys.readouterr().err.lower()

    def test_bad_x0(self):
        with pytest.raises(SystemExit):
            cli.main(["steer", "--x0", "1,2,3"])
