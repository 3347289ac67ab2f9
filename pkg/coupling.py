"""
Simulated spin-spin coupling rates and the trap-scale sweep.

The rate of the effective spin-spin interaction between neighbouring ions
pushed by a state-dependent force F is

    hbar J = kappa e^2 F^2 / (64 pi^5 eps0 m^2 nu^4 d^3)

with nu an ordinary frequency in hertz. The sweep scales the whole trap,
wires included, at fixed wire current.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from tqdm import tqdm

import config
from constants import EPSILON_0, HBAR
from crystal import HarmonicTrap, IonCrystal, crystal_spacings, solve_equilibrium
from magnetics import MagneticMoment, WireSet, make_concentric_squares, spin_forces
from trap_model import SR88, ElectrodeLayout, Ion, secular_frequencies

logger = logging.getLogger(__name__)

NU_RULES = ("force_axis", "x", "y", "z", "min")
FREQUENCY_SCALINGS = ("inverse", "inverse_square")
SOLVABLE = ("kappa", "force", "nu", "d", "mass")


@dataclass(frozen=True)
class CouplingScenario:
    kappa: float
    force: float  # N
    nu: float  # Hz
    d: float  # m
    ion: Ion = SR88

    def __post_init__(self):
        if not (self.kappa > 0 and self.force >= 0 and self.nu > 0 and self.d > 0):
            raise ValueError(f"Invalid coupling scenario: {self}")


@dataclass(frozen=True)
class ScaleRow:
    height: float  # H, m
    scale: float
    d: float  # m
    force: float  # N
    rate: float  # J, 1/s
    nu: float = 0.0  # Hz, the frequency that entered J


def _rate_prefactor(ion: Ion) -> float:
    return ion.charge**2 / (64.0 * math.pi**5 * EPSILON_0 * HBAR)


def j_rate(scenario: CouplingScenario) -> float:
    """Coupling rate J in 1/s."""
    ion = scenario.ion
    return (scenario.kappa * _rate_prefactor(ion) * scenario.force**2
            / (ion.mass**2 * scenario.nu**4 * scenario.d**3))


def solve_for(variable: str, rate: float, scenario: CouplingScenario) -> float:
    """
    Back-solve one quantity so that j_rate equals the given rate.

    Args:
        variable: One of kappa, force, nu, d, mass; the scenario's own value is ignored
        rate: Target J in 1/s (> 0)
        scenario: Supplies every other quantity

    Returns:
        The solved value in SI units
    """
    if variable not in SOLVABLE:
        raise ValueError(f"Cannot solve for '{variable}', choose from {SOLVABLE}")
    if rate <= 0:
        raise ValueError(f"Rate must be positive, got {rate}")

    ion = scenario.ion
    prefactor = _rate_prefactor(ion)
    kappa, force, nu, d, mass = scenario.kappa, scenario.force, scenario.nu, scenario.d, ion.mass
    if variable != "force" and force == 0:
        raise ValueError("A zero force admits no finite solution")

    if variable == "kappa":
        return rate * mass**2 * nu**4 * d**3 / (prefactor * force**2)
    if variable == "force":
        return math.sqrt(rate * mass**2 * nu**4 * d**3 / (kappa * prefactor))
    if variable == "nu":
        return (kappa * prefactor * force**2 / (rate * mass**2 * d**3)) ** 0.25
    if variable == "d":
        return (kappa * prefactor * force**2 / (rate * mass**2 * nu**4)) ** (1.0 / 3.0)
    return math.sqrt(kappa * prefactor * force**2 / (rate * nu**4 * d**3))


@dataclass(frozen=True)
class WireSpec:
    """Concentric square loops in the trap plane, centred under the ions."""

    n_loops: int = config.WIRE_LOOPS
    inner_half_side: float = config.WIRE_INNER_HALF_SIDE_M
    pitch: float = config.WIRE_PITCH_M
    height: float = config.WIRE_HEIGHT_M
    current: float = config.WIRE_CURRENT_A

    def build(self, scale: float = 1.0) -> WireSet:
        return make_concentric_squares(self.n_loops, self.inner_half_side * scale, self.pitch * scale,
                                       self.height * scale, self.current)

    def scaled(self, scale: float) -> "WireSpec":
        return dataclasses.replace(self, inner_half_side=self.inner_half_side * scale,
                                   pitch=self.pitch * scale, height=self.height * scale)


@dataclass(frozen=True, eq=False)
class CouplingBase:
    """
    Everything the sweep needs at scale 1.

    The ions sit at their crystal positions shifted up to `height` above the
    centre of the wire loops.
    """

    trap: HarmonicTrap
    height: float
    wires: WireSpec
    moment: MagneticMoment
    n_ions: int = config.SWEEP_IONS
    kappa: float = config.KAPPA
    nu_rule: str = config.NU_RULE
    frequency_scaling: str = config.FREQUENCY_SCALING
    seed: int = 0
    restarts: int = config.CRYSTAL_RESTARTS

    def __post_init__(self):
        if self.height <= 0:
            raise ValueError(f"Ion height must be positive, got {self.height}")
        if self.n_ions < 2:
            raise ValueError("Coupling needs at least two ions")
        if self.nu_rule not in NU_RULES:
            raise ValueError(f"Unknown nu rule '{self.nu_rule}', choose from {NU_RULES}")
        if self.frequency_scaling not in FREQUENCY_SCALINGS:
            raise ValueError(f"Unknown frequency scaling '{self.frequency_scaling}'")

    @classmethod
    def from_reference(cls, trap: HarmonicTrap, reference_height: float = config.REFERENCE_ION_HEIGHT_M,
                       height: float = config.SWEEP_BASE_HEIGHT_M, wires: Optional[WireSpec] = None,
                       moment: Optional[MagneticMoment] = None, **kwargs) -> "CouplingBase":
        """
        Shrink a trap described at one ion height down to the sweep base height.

        Args:
            trap: Frequencies of the reference trap
            reference_height: Ion height of the reference trap (m)
            height: Ion height at scale 1 of the sweep (m)
            wires: Wire loops at the reference scale (config defaults when None)
            moment: Magnetic moment (one Bohr magneton along y when None)
            **kwargs: Remaining CouplingBase fields
        """
        shrink = height / reference_height
        rule = kwargs.get("frequency_scaling", config.FREQUENCY_SCALING)
        exponent = 2 if rule == "inverse_square" else 1
        if moment is None:
            moment = MagneticMoment.bohr(config.MOMENT_DIRECTION, config.MOMENT_BOHR_MAGNETONS)
        return cls(trap.scaled(shrink ** -exponent), height, (wires or WireSpec()).scaled(shrink), moment, **kwargs)

    @classmethod
    def default(cls, height: float = config.SWEEP_BASE_HEIGHT_M, ion: Ion = SR88, **kwargs) -> "CouplingBase":
        """Measured millimetre-trap frequencies and the default wires, shrunk to `height`."""
        return cls.from_reference(HarmonicTrap(*config.MEASURED_FREQUENCIES_HZ, ion), height=height, **kwargs)

    @classmethod
    def from_geometry(cls, layout: ElectrodeLayout, ion: Ion, height: float = config.SWEEP_BASE_HEIGHT_M,
                      **kwargs) -> "CouplingBase":
        """Base built from the secular frequencies of an electrode layout, shrunk so its null sits at `height`."""
        modes = secular_frequencies(layout, ion)
        logger.info(f"Geometry base: null at {modes.center[2]:.4e} m")
        return cls.from_reference(modes.harmonic_trap(ion), modes.center[2], height, **kwargs)

    def with_spacing(self, spacing: float) -> "CouplingBase":
        """
        Same base with every frequency multiplied by one factor so that the
        solved crystal's mean nearest-neighbour distance at scale 1 is `spacing`.

        Crystal coordinates scale as nu^(-2/3), so the factor is
        (d_solved / spacing)^(3/2) and one solve fixes it.
        """
        if not spacing > 0:
            raise ValueError(f"Spacing must be positive, got {spacing}")
        crystal = solve_equilibrium(self.trap, self.n_ions, seed=self.seed, restarts=self.restarts)
        solved = crystal_spacings(crystal).d_mean
        factor = (solved / spacing) ** 1.5
        logger.info(f"Base frequencies x{factor:.6f} for d = {spacing * 1e6:.3f} um "
                    f"(was {solved * 1e6:.4f} um)")
        return dataclasses.replace(self, trap=self.trap.scaled(factor))


@dataclass(frozen=True, eq=False)
class ScaledScenario:
    scale: float
    height: float
    trap: HarmonicTrap
    wires: WireSet
    crystal: IonCrystal
    forces: np.ndarray  # (N, 3), newtons
    scenario: CouplingScenario


def _select_nu(trap: HarmonicTrap, rule: str, mean_force: np.ndarray) -> float:
    if rule == "min":
        return float(np.min(trap.frequencies))
    if rule == "force_axis":
        return float(trap.frequencies[int(np.argmax(np.abs(mean_force)))])
    return float(trap.frequencies["xyz".index(rule)])


def scaled_scenario(base: CouplingBase, scale: float) -> ScaledScenario:
    """
    Geometry multiplied by scale at fixed current, frequencies divided by
    scale (or its square), crystal re-solved, force evaluated at the ions.
    """
    if scale <= 0:
        raise ValueError(f"Scale must be positive, got {scale}")
    exponent = 2 if base.frequency_scaling == "inverse_square" else 1
    trap = base.trap if scale == 1 else base.trap.scaled(scale ** -exponent)
    height = base.height * scale

    crystal = solve_equilibrium(trap, base.n_ions, seed=base.seed, restarts=base.restarts)
    d = crystal_spacings(crystal).d_mean
    wires = base.wires.build(scale)
    points = crystal.positions + np.array([0.0, 0.0, height])
    forces = spin_forces(points, wires, base.moment)

    force = float(np.mean(np.linalg.norm(forces, axis=1)))
    nu = _select_nu(trap, base.nu_rule, forces.mean(axis=0))
    scenario = CouplingScenario(base.kappa, force, nu, d, trap.ion)
    return ScaledScenario(scale, height, trap, wires, crystal, forces, scenario)


def scaling_table(base: CouplingBase, scales: Sequence[float] = config.SWEEP_SCALES) -> list[ScaleRow]:
    """One ScaleRow per scale, in the given (ascending) order."""
    scales = list(scales)
    if not scales or any(s <= 0 for s in scales):
        raise ValueError(f"Scales must be positive, got {scales}")
    if any(b <= a for a, b in zip(scales, scales[1:])):
        raise ValueError(f"Scales must be strictly ascending, got {scales}")

    rows = []
    for scale in tqdm(scales, desc="Coupling sweep", unit="scale", disable=not config.SHOW_PROGRESS):
        scaled = scaled_scenario(base, scale)
        sc = scaled.scenario
        row = ScaleRow(scaled.height, scale, sc.d, sc.force, j_rate(sc), sc.nu)
        logger.info(f"H = {row.height * 1e6:.2f} um: d = {row.d * 1e6:.3f} um, "
                    f"F = {row.force:.3e} N, nu = {row.nu:.4e} Hz, J = {row.rate:.4e} 1/s")
        rows.append(row)
    return rows


def loop_gain(base: CouplingBase, n_loops: int) -> float:
    """J with n_loops concentric loops relative to J with the base loop count."""
    more = dataclasses.replace(base, wires=dataclasses.replace(base.wires, n_loops=n_loops))
    return j_rate(scaled_scenario(more, 1.0).scenario) / j_rate(scaled_scenario(base, 1.0).scenario)
