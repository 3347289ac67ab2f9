import csv
from pathlib import Path

import pytest

import main as main_module
from main import COUPLING_HEADER, FIELD_HEADER, JACOBIAN_HEADER, format_value, main, sidecar

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

RING = """
[ion]
mass_amu = 87.9056

[geometry]
layout = circular_ring
inner_radius_m = 1e-3
outer_radius_m = 2e-3
vertices = 256
drive_freq_hz = {drive}
"""


def read_csv(path: Path) -> list[list[str]]:
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.reader(f))


def run(subcommand: str, config_path: Path, out: Path, *extra: str) -> int:
    return main([subcommand, "--config", str(config_path), "--out", str(out), "--quiet", *extra])


@pytest.fixture
def ring_config(tmp_path):
    path = tmp_path / "ring.ini"
    path.write_text(RING.format(drive=3.5e6), encoding="utf-8")
    return path


class TestCrystal:
    def test_measured_trap(self, tmp_path, capsys):
        out = tmp_path / "crystal.csv"
        assert run("crystal", CONFIGS / "measured_trap.ini", out) == 0

        rows = read_csv(out)
        assert rows[0] == ["ion_index", "x_m", "y_m", "z_m"]
        assert len(rows) == 5

        report = read_csv(sidecar(out, ".report.csv"))
        values = dict(zip(report[0], report[1]))
        assert float(values["d_y_m"]) == pytest.approx(28.896e-6, rel=1e-4)
        assert float(values["d_x_m"]) == pytest.approx(17.568e-6, rel=1e-4)
        # measured 28 +- 3 and 17 +- 3 um
        assert abs(float(values["d_y_m"]) - 28e-6) <= 3e-6
        assert abs(float(values["d_x_m"]) - 17e-6) <= 3e-6
        assert values["planar"] == "1"
        assert sidecar(out, ".config.ini").exists()

        line = capsys.readouterr().out.strip()
        assert line.startswith("d_x_m=")
        assert "planar=1" in line

    def test_repeatable(self, tmp_path):
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run("crystal", CONFIGS / "measured_trap.ini", first, "--seed", "3") == 0
        assert run("crystal", CONFIGS / "measured_trap.ini", second, "--seed", "3") == 0
        assert first.read_text() == second.read_text()

    def test_config_echo_reproduces_run(self, tmp_path):
        out = tmp_path / "first.csv"
        assert run("crystal", CONFIGS / "measured_trap.ini", out, "--seed", "5") == 0
        again = tmp_path / "again.csv"
        assert run("crystal", sidecar(out, ".config.ini"), again) == 0
        assert again.read_text() == out.read_text()

    def test_modes(self, tmp_path):
        out = tmp_path / "modes.csv"
        assert run("modes", CONFIGS / "measured_trap.ini", out) == 0
        rows = read_csv(out)
        assert rows[0] == ["mode_index", "frequency_hz"]
        frequencies = [float(row[1]) for row in rows[1:]]
        assert len(frequencies) == 12
        assert frequencies == sorted(frequencies)
        assert frequencies[0] > 0


class TestFields:
    def test_bfield_grid(self, tmp_path):
        out = tmp_path / "field.csv"
        assert run("bfield", CONFIGS / "wire_field.ini", out) == 0
        rows = read_csv(out)
        assert rows[0] == FIELD_HEADER + JACOBIAN_HEADER
        assert len(rows) == 1 + 11 * 20
        assert all(len(row) == 15 for row in rows)

    def test_frequencies_of_ring(self, tmp_path, ring_config):
        out = tmp_path / "frequencies.csv"
        assert run("frequencies", ring_config, out) == 0
        header, row = read_csv(out)
        values = dict(zip(header, map(float, row)))
        assert values["nu_x_hz"] == pytest.approx(values["nu_y_hz"], rel=1e-3)
        assert values["nu_x_hz"] == pytest.approx(0.5 * values["nu_z_hz"], rel=1e-2)
        assert values["center_z_m"] == pytest.approx(0.98688e-3, rel=5e-3)


class TestCouplingTable:
    def test_three_rows_with_falling_rate(self, tmp_path):
        out = tmp_path / "coupling.csv"
        assert run("coupling-table", CONFIGS / "coupling_sweep.ini", out) == 0
        rows = read_csv(out)
        assert rows[0] == COUPLING_HEADER
        rates = [float(row[4]) for row in rows[1:]]
        assert len(rates) == 3
        assert rates[0] > rates[1] > rates[2]
        assert [float(row[0]) for row in rows[1:]] == pytest.approx([10e-6, 50e-6, 100e-6], rel=1e-12)
        spacings = [float(row[2]) for row in rows[1:]]
        assert spacings == pytest.approx([0.9e-6, 2.632e-6, 4.178e-6], rel=1e-3)

    def test_single_ion_is_a_config_error(self, tmp_path, capsys):
        path = tmp_path / "one.ini"
        path.write_text((CONFIGS / "coupling_sweep.ini").read_text().replace("n_ions = 4", "n_ions = 1"))
        assert run("coupling-table", path, tmp_path / "out.csv") == 1
        assert "crystal.n_ions" in capsys.readouterr().err


class TestExitCodes:
    def test_empty_config(self, tmp_path, capsys):
        path = tmp_path / "empty.ini"
        path.write_text("")
        out = tmp_path / "out.csv"
        assert run("crystal", path, out) == 1
        assert "ion.mass_amu" in capsys.readouterr().err
        assert not out.exists()

    def test_missing_config(self, tmp_path):
        assert run("crystal", tmp_path / "absent.ini", tmp_path / "out.csv") == 4

    def test_unwritable_output(self, tmp_path):
        assert run("crystal", CONFIGS / "measured_trap.ini", tmp_path / "missing" / "out.csv") == 4

    def test_frequencies_need_geometry(self, tmp_path, capsys):
        assert run("frequencies", CONFIGS / "measured_trap.ini", tmp_path / "out.csv") == 1
        assert "geometry" in capsys.readouterr().err

    def test_unreachable_tolerance(self, tmp_path):
        path = tmp_path / "strict.ini"
        path.write_text((CONFIGS / "measured_trap.ini").read_text() + "restarts = 2\nforce_tolerance_n = 1e-40\n")
        out = tmp_path / "out.csv"
        assert run("crystal", path, out) == 2
        assert not out.exists()
        assert not sidecar(out, ".config.ini").exists()

    def test_high_stability_parameter(self, tmp_path):
        path = tmp_path / "slow_drive.ini"
        path.write_text(RING.format(drive=1.5e6), encoding="utf-8")
        out = tmp_path / "out.csv"
        with pytest.warns(UserWarning):
            assert run("frequencies", path, out) == 3
        assert not out.exists()

    def test_unknown_subcommand(self, tmp_path):
        with pytest.raises(SystemExit):
            run("optimise", CONFIGS / "measured_trap.ini", tmp_path / "out.csv")

    def test_failed_sidecar_leaves_no_outputs(self, tmp_path, monkeypatch):
        mkstemp = main_module.tempfile.mkstemp
        calls = []

        def fail_on_second_file(*args, **kwargs):
            calls.append(kwargs.get("prefix"))
            if len(calls) == 2:
                raise PermissionError("read-only directory")
            return mkstemp(*args, **kwargs)

        monkeypatch.setattr(main_module.tempfile, "mkstemp", fail_on_second_file)
        out = tmp_path / "out.csv"
        assert run("modes", CONFIGS / "measured_trap.ini", out) == 4
        assert len(calls) == 2
        assert list(tmp_path.iterdir()) == []


class TestFormatting:
    def test_values(self):
        assert format_value(True) == "1"
        assert format_value(3) == "3"
        assert float(format_value(0.1)) == 0.1
        assert format_value(1.5) == "1.50000000000000000e+00"

    def test_sidecar(self):
        assert sidecar(Path("results/run.csv"), ".report.csv") == Path("results/run.report.csv")
