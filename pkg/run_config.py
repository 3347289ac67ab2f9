"""
Run configuration files.

A run is described by one INI file. Units are part of the key names
(`_m`, `_hz`, `_v`, `_a`, `_n`, `_amu`, `_e`). Exactly one of [harmonic]
or [geometry] describes the trap; every other section is optional and
falls back to the defaults in config.py.

    [ion]
    mass_amu = 87.9056

    [harmonic]
    nu_x_hz = 177e3
    nu_y_hz = 141e3
    nu_z_hz = 414e3

`RunConfig.to_ini()` writes the fully resolved configuration back out in the
same format, so the echo can be fed in again.
"""

import configparser
import dataclasses
import io
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import config
from coupling import FREQUENCY_SCALINGS, NU_RULES, WireSpec
from crystal import HarmonicTrap
from errors import ConfigError
from magnetics import MagneticMoment
from trap_model import (ElectrodeLayout, ElectrodePolygon, Ion, RfDrive, circular_ring_layout,
                        elliptical_ring_layout, stretched_ring_layout)

logger = logging.getLogger(__name__)

LAYOUTS = ("circular_ring", "elliptical_ring", "stretched_ring")


@dataclass(frozen=True)
class IonSection:
    mass_amu: float
    charge_e: float = config.ION_CHARGE_E

    def ion(self) -> Ion:
        return Ion.from_amu(self.mass_amu, self.charge_e)


@dataclass(frozen=True)
class HarmonicSection:
    nu_x_hz: float
    nu_y_hz: float
    nu_z_hz: float


@dataclass(frozen=True)
class DcSection:
    label: str
    vertices_m: tuple[tuple[float, float], ...]
    voltage_v: float


@dataclass(frozen=True)
class GeometrySection:
    layout: str = "stretched_ring"
    inner_radius_m: float = config.RING_INNER_RADIUS_M
    outer_radius_m: float = config.RING_OUTER_RADIUS_M
    inner_semi_x_m: float = config.CENTER_SEMI_X_M
    inner_semi_y_m: float = config.CENTER_SEMI_Y_M
    outer_semi_x_m: float = config.OUTER_SEMI_X_M
    outer_semi_x_prime_m: float = config.OUTER_SEMI_X_PRIME_M
    outer_semi_y_m: float = config.OUTER_SEMI_Y_M
    vertices: int = config.ELLIPSE_VERTICES
    v_rf_v: float = config.RF_AMPLITUDE_V
    drive_freq_hz: float = config.RF_DRIVE_FREQUENCY_HZ
    center_v: float = 0.0
    dc: tuple[DcSection, ...] = ()

    def build_layout(self) -> ElectrodeLayout:
        drive = RfDrive.from_hz(self.v_rf_v, self.drive_freq_hz)
        if self.layout == "circular_ring":
            layout = circular_ring_layout(self.inner_radius_m, self.outer_radius_m, self.vertices,
                                          drive, self.center_v)
        elif self.layout == "elliptical_ring":
            layout = elliptical_ring_layout(self.inner_semi_x_m, self.inner_semi_y_m, self.outer_semi_x_m,
                                            self.outer_semi_y_m, self.vertices, drive, self.center_v)
        else:
            layout = stretched_ring_layout(self.inner_semi_x_m, self.inner_semi_y_m, self.outer_semi_x_m,
                                           self.outer_semi_x_prime_m, self.outer_semi_y_m, self.vertices,
                                           drive, self.center_v)
        extra = tuple((ElectrodePolygon(dc.vertices_m, dc.label), dc.voltage_v) for dc in self.dc)
        if not extra:
            return layout
        return ElectrodeLayout(layout.rf_electrodes, layout.dc_electrodes + extra, drive)


@dataclass(frozen=True)
class CrystalSection:
    n_ions: int = config.SWEEP_IONS
    seed: int = 0
    restarts: int = config.CRYSTAL_RESTARTS
    force_tolerance_n: float = config.CRYSTAL_FORCE_TOLERANCE_N
    planarity_epsilon: float = config.PLANARITY_EPSILON


@dataclass(frozen=True)
class WiresSection:
    n_loops: int = config.WIRE_LOOPS
    inner_half_side_m: float = config.WIRE_INNER_HALF_SIDE_M
    pitch_m: float = config.WIRE_PITCH_M
    height_m: float = config.WIRE_HEIGHT_M
    current_a: float = config.WIRE_CURRENT_A
    moment_direction: tuple[float, float, float] = config.MOMENT_DIRECTION
    moment_bohr_magnetons: float = config.MOMENT_BOHR_MAGNETONS

    def spec(self) -> WireSpec:
        return WireSpec(self.n_loops, self.inner_half_side_m, self.pitch_m, self.height_m, self.current_a)

    def moment(self) -> MagneticMoment:
        return MagneticMoment.bohr(self.moment_direction, self.moment_bohr_magnetons)


@dataclass(frozen=True)
class BfieldSection:
    # each axis is (start, stop, count)
    x_m: tuple[float, float, int] = (0.0, 0.0, 1)
    y_m: tuple[float, float, int] = (0.0, 0.0, 1)
    z_m: tuple[float, float, int] = (1e-4, 2e-3, 20)
    include_jacobian: bool = False


@dataclass(frozen=True)
class SweepSection:
    reference_height_m: float = config.REFERENCE_ION_HEIGHT_M
    base_height_m: float = config.SWEEP_BASE_HEIGHT_M
    scales: tuple[float, ...] = config.SWEEP_SCALES
    kappa: float = config.KAPPA
    nu_rule: str = config.NU_RULE
    frequency_scaling: str = config.FREQUENCY_SCALING
    base_spacing_m: float = config.SWEEP_BASE_SPACING_M


@dataclass(frozen=True)
class RunConfig:
    ion: IonSection
    harmonic: Optional[HarmonicSection] = None
    geometry: Optional[GeometrySection] = None
    crystal: CrystalSection = CrystalSection()
    wires: WiresSection = WiresSection()
    bfield: BfieldSection = BfieldSection()
    sweep: SweepSection = SweepSection()

    def harmonic_trap(self) -> HarmonicTrap:
        h = self.harmonic
        return HarmonicTrap(h.nu_x_hz, h.nu_y_hz, h.nu_z_hz, self.ion.ion())

    def with_seed(self, seed: int) -> "RunConfig":
        return dataclasses.replace(self, crystal=dataclasses.replace(self.crystal, seed=seed))

    def to_ini(self) -> str:
        """Fully resolved configuration in the input format."""
        parser = configparser.ConfigParser(interpolation=None)
        sections = {"ion": self.ion, "harmonic": self.harmonic, "geometry": self.geometry,
                    "crystal": self.crystal, "wires": self.wires, "bfield": self.bfield, "sweep": self.sweep}
        for name, section in sections.items():
            if section is None:
                continue
            parser[name] = {f.name: _format(getattr(section, f.name))
                            for f in dataclasses.fields(section) if f.name != "dc"}
        for dc in (self.geometry.dc if self.geometry else ()):
            parser[f"dc:{dc.label}"] = {
                "vertices_m": "; ".join(f"{x!r} {y!r}" for x, y in dc.vertices_m),
                "voltage_v": _format(dc.voltage_v),
            }
        buffer = io.StringIO()
        parser.write(buffer)
        return buffer.getvalue()


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return " ".join(_format(v) for v in value)
    return repr(value) if isinstance(value, float) else str(value)


class _SectionReader:
    """Typed access to one INI section; every error names section.key."""

    def __init__(self, parser: configparser.ConfigParser, name: str):
        self.name = name
        self.values = dict(parser[name]) if parser.has_section(name) else {}
        self.used: set[str] = set()

    def _raw(self, key: str, required: bool):
        self.used.add(key)
        if key not in self.values:
            if required:
                raise ConfigError(f"{self.name}.{key}", "required key is missing")
            return None
        return self.values[key].strip()

    def _error(self, key: str, message: str) -> ConfigError:
        return ConfigError(f"{self.name}.{key}", message)

    def getfloat(self, key: str, default=None, positive: bool = False, nonzero: bool = False) -> float:
        raw = self._raw(key, default is None)
        if raw is None:
            return default
        try:
            value = float(raw)
        except ValueError:
            raise self._error(key, f"'{raw}' is not a number") from None
        if not math.isfinite(value):
            raise self._error(key, f"'{raw}' is not finite")
        if positive and value <= 0:
            raise self._error(key, f"must be positive, got {raw}")
        if nonzero and value == 0:
            raise self._error(key, "must be non-zero")
        return value

    def getint(self, key: str, default=None, minimum: Optional[int] = None) -> int:
        raw = self._raw(key, default is None)
        if raw is None:
            return default
        try:
            value = int(raw)
        except ValueError:
            raise self._error(key, f"'{raw}' is not an integer") from None
        if minimum is not None and value < minimum:
            raise self._error(key, f"must be >= {minimum}, got {value}")
        return value

    def getchoice(self, key: str, default: str, choices) -> str:
        raw = self._raw(key, False)
        value = default if raw is None else raw
        if value not in choices:
            raise self._error(key, f"'{value}' is not one of {', '.join(choices)}")
        return value

    def getboolean(self, key: str, default: bool) -> bool:
        raw = self._raw(key, False)
        if raw is None:
            return default
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise self._error(key, f"'{raw}' is not a boolean")

    def getfloats(self, key: str, default: tuple, count: Optional[int] = None) -> tuple[float, ...]:
        raw = self._raw(key, False)
        if raw is None:
            return default
        try:
            values = tuple(float(v) for v in raw.replace(",", " ").split())
        except ValueError:
            raise self._error(key, f"'{raw}' is not a list of numbers") from None
        if not values or (count is not None and len(values) != count):
            raise self._error(key, f"expected {count or 'at least one'} numbers, got '{raw}'")
        return values

    def getgrid(self, key: str, default: tuple) -> tuple[float, float, int]:
        values = self.getfloats(key, default, count=3)
        count = values[2]
        if count < 1 or count != int(count):
            raise self._error(key, f"point count must be a positive integer, got {count}")
        return (float(values[0]), float(values[1]), int(count))

    def finish(self) -> None:
        unknown = sorted(set(self.values) - self.used)
        if unknown:
            raise self._error(unknown[0], "unknown key")


def _read_dc(parser: configparser.ConfigParser, name: str) -> DcSection:
    reader = _SectionReader(parser, name)
    raw = reader._raw("vertices_m", True)
    try:
        vertices = tuple(tuple(float(v) for v in pair.split()) for pair in raw.split(";") if pair.strip())
    except ValueError:
        raise reader._error("vertices_m", f"'{raw}' is not a list of 'x y' pairs") from None
    if len(vertices) < 3 or any(len(v) != 2 for v in vertices):
        raise reader._error("vertices_m", "need at least three 'x y' pairs separated by ';'")
    voltage = reader.getfloat("voltage_v")
    reader.finish()
    return DcSection(name.split(":", 1)[1], vertices, voltage)


def parse_run_config(text: str, seed_override: Optional[int] = None) -> RunConfig:
    """
    Parse and validate a run configuration.

    Raises:
        ConfigError: Missing or invalid key, named as section.key
    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise ConfigError("file", f"unreadable INI: {e}") from None

    known = {"ion", "harmonic", "geometry", "crystal", "wires", "bfield", "sweep"}
    for name in parser.sections():
        if name not in known and not name.startswith("dc:"):
            raise ConfigError(name, "unknown section")

    reader = _SectionReader(parser, "ion")
    ion = IonSection(reader.getfloat("mass_amu", positive=True),
                     reader.getfloat("charge_e", config.ION_CHARGE_E, nonzero=True))
    reader.finish()

    has_harmonic, has_geometry = parser.has_section("harmonic"), parser.has_section("geometry")
    if has_harmonic == has_geometry:
        raise ConfigError("harmonic", "exactly one of [harmonic] or [geometry] is required")

    harmonic = geometry = None
    if has_harmonic:
        reader = _SectionReader(parser, "harmonic")
        harmonic = HarmonicSection(*(reader.getfloat(f"nu_{axis}_hz", positive=True) for axis in "xyz"))
        reader.finish()
    else:
        reader = _SectionReader(parser, "geometry")
        d = GeometrySection()
        geometry = GeometrySection(
            layout=reader.getchoice("layout", d.layout, LAYOUTS),
            inner_radius_m=reader.getfloat("inner_radius_m", d.inner_radius_m, positive=True),
            outer_radius_m=reader.getfloat("outer_radius_m", d.outer_radius_m, positive=True),
            inner_semi_x_m=reader.getfloat("inner_semi_x_m", d.inner_semi_x_m, positive=True),
            inner_semi_y_m=reader.getfloat("inner_semi_y_m", d.inner_semi_y_m, positive=True),
            outer_semi_x_m=reader.getfloat("outer_semi_x_m", d.outer_semi_x_m, positive=True),
            outer_semi_x_prime_m=reader.getfloat("outer_semi_x_prime_m", d.outer_semi_x_prime_m, positive=True),
            outer_semi_y_m=reader.getfloat("outer_semi_y_m", d.outer_semi_y_m, positive=True),
            vertices=reader.getint("vertices", d.vertices, minimum=3),
            v_rf_v=reader.getfloat("v_rf_v", d.v_rf_v, positive=True),
            drive_freq_hz=reader.getfloat("drive_freq_hz", d.drive_freq_hz, positive=True),
            center_v=reader.getfloat("center_v", d.center_v),
            dc=tuple(_read_dc(parser, name) for name in parser.sections() if name.startswith("dc:")),
        )
        reader.finish()

    reader = _SectionReader(parser, "crystal")
    d = CrystalSection()
    crystal = CrystalSection(
        n_ions=reader.getint("n_ions", d.n_ions, minimum=1),
        seed=reader.getint("seed", d.seed),
        restarts=reader.getint("restarts", d.restarts, minimum=1),
        force_tolerance_n=reader.getfloat("force_tolerance_n", d.force_tolerance_n, positive=True),
        planarity_epsilon=reader.getfloat("planarity_epsilon", d.planarity_epsilon, positive=True),
    )
    reader.finish()

    reader = _SectionReader(parser, "wires")
    d = WiresSection()
    wires = WiresSection(
        n_loops=reader.getint("n_loops", d.n_loops, minimum=1),
        inner_half_side_m=reader.getfloat("inner_half_side_m", d.inner_half_side_m, positive=True),
        pitch_m=reader.getfloat("pitch_m", d.pitch_m, positive=True),
        height_m=reader.getfloat("height_m", d.height_m),
        current_a=reader.getfloat("current_a", d.current_a),
        moment_direction=reader.getfloats("moment_direction", d.moment_direction, count=3),
        moment_bohr_magnetons=reader.getfloat("moment_bohr_magnetons", d.moment_bohr_magnetons, positive=True),
    )
    if not any(wires.moment_direction):
        raise ConfigError("wires.moment_direction", "must be a non-zero vector")
    reader.finish()

    reader = _SectionReader(parser, "bfield")
    d = BfieldSection()
    bfield = BfieldSection(
        x_m=reader.getgrid("x_m", d.x_m),
        y_m=reader.getgrid("y_m", d.y_m),
        z_m=reader.getgrid("z_m", d.z_m),
        include_jacobian=reader.getboolean("include_jacobian", d.include_jacobian),
    )
    reader.finish()

    reader = _SectionReader(parser, "sweep")
    d = SweepSection()
    sweep = SweepSection(
        reference_height_m=reader.getfloat("reference_height_m", d.reference_height_m, positive=True),
        base_height_m=reader.getfloat("base_height_m", d.base_height_m, positive=True),
        scales=reader.getfloats("scales", d.scales),
        kappa=reader.getfloat("kappa", d.kappa, positive=True),
        nu_rule=reader.getchoice("nu_rule", d.nu_rule, NU_RULES),
        frequency_scaling=reader.getchoice("frequency_scaling", d.frequency_scaling, FREQUENCY_SCALINGS),
        base_spacing_m=reader.getfloat("base_spacing_m", d.base_spacing_m),
    )
    if any(s <= 0 for s in sweep.scales) or any(b <= a for a, b in zip(sweep.scales, sweep.scales[1:])):
        raise ConfigError("sweep.scales", "must be positive and strictly ascending")
    if sweep.base_spacing_m < 0:
        raise ConfigError("sweep.base_spacing_m", f"must be zero or positive, got {sweep.base_spacing_m}")
    reader.finish()

    run = RunConfig(ion, harmonic, geometry, crystal, wires, bfield, sweep)
    if seed_override is not None:
        run = run.with_seed(seed_override)
    return run


def load_run_config(path: Path, seed_override: Optional[int] = None) -> RunConfig:
    """Read a run configuration file; OSError propagates to the caller."""
    text = Path(path).read_text(encoding="utf-8")
    run = parse_run_config(text, seed_override)
    logger.debug(f"Loaded run configuration from {path}")
    return run
