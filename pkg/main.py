#!/usr/bin/env python3
"""
Elliptical surface-trap design toolkit

Batch command line for the trap model, crystal solver, wire magnetics and
coupling sweep. Every run reads one INI configuration, writes one CSV (plus
sidecars) and exits with a status that says what went wrong:

    0 success, 1 configuration error, 2 solver did not converge,
    3 unstable trap, 4 I/O failure
"""

import argparse
import csv
import io
import logging
import os
import sys
import tempfile
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

import config
from coupling import CouplingBase, scaling_table
from crystal import HarmonicTrap, crystal_spacings, is_planar, normal_modes, solve_equilibrium
from errors import ConfigError, TrapDesignError, UnstableTrapError
from magnetics import field_map
from run_config import RunConfig, load_run_config
from trap_model import SecularModes, secular_frequencies

logger = logging.getLogger(__name__)

SUBCOMMANDS = ("frequencies", "crystal", "bfield", "modes", "coupling-table")

FREQUENCY_HEADER = ["nu_x_hz", "nu_y_hz", "nu_z_hz", "q_x", "q_y", "q_z", "center_x_m", "center_y_m", "center_z_m"]
POSITION_HEADER = ["ion_index", "x_m", "y_m", "z_m"]
REPORT_HEADER = ["d_x_m", "d_y_m", "d_mean_m", "z_extent_m", "planar", "energy_j", "residual_force_n"]
FIELD_HEADER = ["x_m", "y_m", "z_m", "bx_t", "by_t", "bz_t"]
JACOBIAN_HEADER = [f"db{a}_d{b}_t_per_m" for a in "xyz" for b in "xyz"]
MODE_HEADER = ["mode_index", "frequency_hz"]
COUPLING_HEADER = ["H_m", "scale", "d_m", "F_N", "J_per_s"]


def format_value(value) -> str:
    """Locale-independent, full-precision rendering of one CSV cell."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return config.CSV_FLOAT_FORMAT.format(float(value))


def write_outputs(outputs: dict[Path, str]) -> None:
    """
    Stage every file next to its destination, then move them all into place.

    A failure while staging leaves every destination untouched.
    """
    staged: list[tuple[str, Path]] = []
    try:
        for path, text in outputs.items():
            path = Path(path)
            fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
            staged.append((tmp_name, path))
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
                f.write(text)
        for tmp_name, path in staged:
            os.replace(tmp_name, path)
            logger.info(f"Wrote {path}")
    except BaseException:
        for tmp_name, _ in staged:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
        raise


def render_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buffer.getvalue()


def sidecar(out: Path, suffix: str) -> Path:
    """`results/run.csv` -> `results/run<suffix>`"""
    return out.with_name(out.stem + suffix)


class TrapDesignRunner:
    """
    Runs one subcommand against a resolved configuration.

    Each `run_*` method returns the outputs as {path: text}; nothing is written
    until the whole computation has succeeded.
    """

    def __init__(self, run: RunConfig, out: Path):
        self.run = run
        self.out = Path(out)
        self.ion = run.ion.ion()

    def _layout(self):
        if self.run.geometry is None:
            raise ConfigError("geometry", "this subcommand needs a [geometry] section")
        try:
            return self.run.geometry.build_layout()
        except ValueError as e:
            raise ConfigError("geometry", str(e)) from None

    def secular_modes(self) -> SecularModes:
        modes = secular_frequencies(self._layout(), self.ion)
        if modes.unstable:
            raise UnstableTrapError(f"Stability parameter above {config.STABILITY_Q_LIMIT}: q = {modes.q}")
        return modes

    def harmonic_trap(self) -> HarmonicTrap:
        if self.run.harmonic is not None:
            return self.run.harmonic_trap()
        return self.secular_modes().harmonic_trap(self.ion)

    def solve_crystal(self):
        settings = self.run.crystal
        return solve_equilibrium(self.harmonic_trap(), settings.n_ions, seed=settings.seed,
                                 restarts=settings.restarts, force_tolerance=settings.force_tolerance_n)

    def run_frequencies(self) -> dict[Path, str]:
        modes = self.secular_modes()
        row = [*modes.frequencies, *modes.q, *modes.center]
        return {self.out: render_csv(FREQUENCY_HEADER, [row])}

    def run_crystal(self) -> dict[Path, str]:
        crystal = self.solve_crystal()
        report = crystal_spacings(crystal)
        planar = is_planar(crystal, self.run.crystal.planarity_epsilon)
        values = [report.d_x, report.d_y, report.d_mean, report.z_extent, planar,
                  crystal.energy, crystal.residual_force]

        print(" ".join(f"{name}={format_value(v)}" for name, v in zip(REPORT_HEADER, values)))
        positions = [[i, *position] for i, position in enumerate(crystal.positions)]
        return {
            self.out: render_csv(POSITION_HEADER, positions),
            sidecar(self.out, ".report.csv"): render_csv(REPORT_HEADER, [values]),
        }

    def run_bfield(self) -> dict[Path, str]:
        grid = self.run.bfield
        axes = [np.linspace(start, stop, count) for start, stop, count in (grid.x_m, grid.y_m, grid.z_m)]
        points = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
        fields, jacobians = field_map(points, self.run.wires.spec().build(), grid.include_jacobian)

        header = FIELD_HEADER + (JACOBIAN_HEADER if grid.include_jacobian else [])
        rows = []
        for k, point in enumerate(points):
            row = [*point, *fields[k]]
            if grid.include_jacobian:
                row.extend(jacobians[k].ravel())
            rows.append(row)
        logger.info(f"Field map: {len(points)} points")
        return {self.out: render_csv(header, rows)}

    def run_modes(self) -> dict[Path, str]:
        spectrum = normal_modes(self.solve_crystal())
        rows = [[i, nu] for i, nu in enumerate(spectrum.frequencies)]
        return {self.out: render_csv(MODE_HEADER, rows)}

    def run_coupling_table(self) -> dict[Path, str]:
        run = self.run
        if run.crystal.n_ions < 2:
            raise ConfigError("crystal.n_ions", f"coupling needs at least two ions, got {run.crystal.n_ions}")

        options = dict(n_ions=run.crystal.n_ions, kappa=run.sweep.kappa, nu_rule=run.sweep.nu_rule,
                       frequency_scaling=run.sweep.frequency_scaling, seed=run.crystal.seed,
                       restarts=run.crystal.restarts)
        if run.harmonic is not None:
            trap, reference_height = run.harmonic_trap(), run.sweep.reference_height_m
        else:
            modes = self.secular_modes()
            trap, reference_height = modes.harmonic_trap(self.ion), modes.center[2]
        base = CouplingBase.from_reference(trap, reference_height, run.sweep.base_height_m, run.wires.spec(),
                                           run.wires.moment(), **options)
        if run.sweep.base_spacing_m > 0:
            base = base.with_spacing(run.sweep.base_spacing_m)

        rows = [[row.height, row.scale, row.d, row.force, row.rate] for row in scaling_table(base, run.sweep.scales)]
        return {self.out: render_csv(COUPLING_HEADER, rows)}

    def execute(self, subcommand: str) -> None:
        handler = getattr(self, "run_" + subcommand.replace("-", "_"))
        outputs = handler()
        outputs[sidecar(self.out, ".config.ini")] = self.run.to_ini()
        write_outputs(outputs)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Elliptical surface-trap design toolkit")
    parser.add_argument("subcommand", choices=SUBCOMMANDS, help="Computation to run")
    parser.add_argument("--config", required=True, type=Path, help="Run configuration (INI)")
    parser.add_argument("--out", required=True, type=Path, help="Output CSV path")
    parser.add_argument("--seed", type=int, help="Override [crystal] seed")
    parser.add_argument("--quiet", action="store_true", help="Only warnings and errors, no progress bars")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run one subcommand and return the exit status."""
    args = build_parser().parse_args(argv)
    config.setup_logging(quiet=args.quiet)
    config.SHOW_PROGRESS = not args.quiet

    try:
        run = load_run_config(args.config, args.seed)
        logger.info(f"Running '{args.subcommand}' with {args.config}")
        TrapDesignRunner(run, args.out).execute(args.subcommand)
    except TrapDesignError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"Error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        logger.error(f"I/O failure: {e}")
        print(f"Error: {e}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
