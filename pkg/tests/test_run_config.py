from pathlib import Path

import pytest

from crystal import HarmonicTrap
from errors import ConfigError
from run_config import RunConfig, load_run_config, parse_run_config

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

HARMONIC = """
[ion]
mass_amu = 87.9056

[harmonic]
nu_x_hz = 177e3
nu_y_hz = 141e3
nu_z_hz = 414e3
"""

GEOMETRY = """
[ion]
mass_amu = 87.9056

[geometry]
layout = circular_ring
inner_radius_m = 1e-3
outer_radius_m = 2e-3
vertices = 64

[dc:Left]
vertices_m = -4e-3 -1e-3; -3e-3 -1e-3; -3e-3 1e-3; -4e-3 1e-3
voltage_v = 2.5
"""


def config_error(text: str) -> ConfigError:
    with pytest.raises(ConfigError) as info:
        parse_run_config(text)
    return info.value


class TestParse:
    def test_harmonic_defaults(self):
        run = parse_run_config(HARMONIC)
        assert run.geometry is None
        assert run.crystal.n_ions == 4
        assert run.crystal.seed == 0
        assert run.sweep.scales == (1.0, 5.0, 10.0)
        assert run.sweep.base_spacing_m == 0.0
        assert run.harmonic_trap() == HarmonicTrap(177e3, 141e3, 414e3, run.ion.ion())

    def test_geometry_with_dc_electrode(self):
        run = parse_run_config(GEOMETRY)
        assert run.harmonic is None
        (dc,) = run.geometry.dc
        assert dc.label == "Left"
        assert dc.voltage_v == 2.5
        assert dc.vertices_m[0] == (-4e-3, -1e-3)

        layout = run.geometry.build_layout()
        assert "Left" in [polygon.label for polygon, _ in layout.dc_electrodes]

    def test_seed_override(self):
        assert parse_run_config(HARMONIC, seed_override=7).crystal.seed == 7

    def test_sample_configs_load(self):
        for path in sorted(CONFIGS.glob("*.ini")):
            assert isinstance(load_run_config(path), RunConfig)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_run_config(tmp_path / "absent.ini")


class TestEcho:
    @pytest.mark.parametrize("text", [HARMONIC, GEOMETRY])
    def test_echo_parses_back_to_same_run(self, text):
        run = parse_run_config(text + "\n[crystal]\nforce_tolerance_n = 3e-19\n")
        assert parse_run_config(run.to_ini()) == run

    def test_echo_keeps_full_precision(self):
        run = parse_run_config(HARMONIC.replace("177e3", "177123.45678901234"))
        assert parse_run_config(run.to_ini()).harmonic.nu_x_hz == run.harmonic.nu_x_hz

    def test_echo_is_fully_resolved(self):
        text = parse_run_config(HARMONIC).to_ini()
        for section in ("[ion]", "[harmonic]", "[crystal]", "[wires]", "[bfield]", "[sweep]"):
            assert section in text


class TestErrors:
    def test_empty_file_names_first_required_key(self):
        assert config_error("").key == "ion.mass_amu"

    def test_needs_exactly_one_trap_description(self):
        assert config_error("[ion]\nmass_amu = 88\n").key == "harmonic"
        both = HARMONIC + "\n[geometry]\nlayout = circular_ring\n"
        assert config_error(both).key == "harmonic"

    @pytest.mark.parametrize("extra,key", [
        ("[crystal]\nn_ions = 0\n", "crystal.n_ions"),
        ("[crystal]\nn_ions = four\n", "crystal.n_ions"),
        ("[crystal]\nrestarts = 0\n", "crystal.restarts"),
        ("[crystal]\nforce_tolerance_n = -1\n", "crystal.force_tolerance_n"),
        ("[crystal]\nspeed = 3\n", "crystal.speed"),
        ("[wires]\nmoment_direction = 0 0 0\n", "wires.moment_direction"),
        ("[wires]\nmoment_direction = 0 1\n", "wires.moment_direction"),
        ("[bfield]\nz_m = 1e-4 2e-3 2.5\n", "bfield.z_m"),
        ("[bfield]\ninclude_jacobian = maybe\n", "bfield.include_jacobian"),
        ("[sweep]\nscales = 1 10 5\n", "sweep.scales"),
        ("[sweep]\nnu_rule = fastest\n", "sweep.nu_rule"),
        ("[sweep]\nkappa = nan\n", "sweep.kappa"),
        ("[sweep]\nbase_spacing_m = -1e-6\n", "sweep.base_spacing_m"),
        ("[output]\npath = x.csv\n", "output"),
    ])
    def test_invalid_values_name_the_key(self, extra, key):
        error = config_error(HARMONIC + "\n" + extra)
        assert error.key == key
        assert str(error).startswith(key)

    def test_invalid_harmonic_frequency(self):
        assert config_error(HARMONIC.replace("141e3", "-141e3")).key == "harmonic.nu_y_hz"

    def test_invalid_geometry(self):
        assert config_error(GEOMETRY.replace("circular_ring", "hexagon")).key == "geometry.layout"
        assert config_error(GEOMETRY.replace("vertices = 64", "vertices = 2")).key == "geometry.vertices"
        assert config_error(GEOMETRY.replace("voltage_v = 2.5", "")).key == "dc:Left.voltage_v"

    def test_malformed_dc_vertices(self):
        broken = GEOMETRY.replace("-4e-3 1e-3\n", "-4e-3\n")
        assert config_error(broken).key == "dc:Left.vertices_m"

    def test_unreadable_file(self):
        assert config_error("mass_amu = 88\n").key == "file"
