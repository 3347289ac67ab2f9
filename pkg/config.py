"""
Configuration settings for the elliptical trap design toolkit
"""

import logging
import logging.handlers
from pathlib import Path
from typing import Optional

# Base directory for the application
BASE_DIR = Path(__file__).parent

# Ion defaults (88Sr+)
ION_MASS_AMU = 87.9056
ION_CHARGE_E = 1.0

# rf drive used for the measurements
RF_AMPLITUDE_V = 150.0
RF_DRIVE_FREQUENCY_HZ = 3.5e6

# Electrode geometry (meters). Outer rf dimensions are not published;
# these defaults bracket the centre electrode and are non-authoritative.
CENTER_SEMI_X_M = 0.71e-3
CENTER_SEMI_Y_M = 0.94e-3
OUTER_SEMI_X_M = 1.4e-3  # A, on the -x side
OUTER_SEMI_X_PRIME_M = 1.8e-3  # A', widened +x side
OUTER_SEMI_Y_M = 2.0e-3  # B
ELLIPSE_VERTICES = 256

# Circular reference ring
RING_INNER_RADIUS_M = 1.0e-3
RING_OUTER_RADIUS_M = 2.0e-3

# Measured (compensated) secular frequencies
MEASURED_FREQUENCIES_HZ = (177e3, 141e3, 414e3)

# Pseudopotential / null search
NULL_SCAN_POINTS = 400
NULL_SCAN_RANGE = (0.01, 10.0)  # multiples of the rf electrode diameter
NULL_MAX_ITERATIONS = 200
NULL_GRADIENT_TOLERANCE = 1e-12  # fraction of e_c * V_rf per meter
NULL_STAGNATION_FRACTION = 1e-9  # of the largest vertical force on the scan
HESSIAN_STEP_FRACTION = 1e-4  # of the null height
STABILITY_Q_LIMIT = 0.9

# Crystal solver
CRYSTAL_RESTARTS = 16
CRYSTAL_FORCE_TOLERANCE_N = 1e-18
CRYSTAL_MAX_EVALUATIONS = 100_000
CRYSTAL_REDUCED_GRADIENT_TOLERANCE = 1e-10
SADDLE_TOLERANCE = 1e-6
PLANARITY_EPSILON = 1e-3
PLANAR_TRANSITION_RESOLUTION_HZ = 1e3

# Wire geometry at the millimetre trap scale (non-authoritative defaults
# inscribing three squares in the centre ellipse)
WIRE_LOOPS = 3
WIRE_INNER_HALF_SIDE_M = 0.15e-3
WIRE_PITCH_M = 0.15e-3
WIRE_HEIGHT_M = 0.0
WIRE_CURRENT_A = 1.0
MOMENT_DIRECTION = (0.0, 1.0, 0.0)
MOMENT_BOHR_MAGNETONS = 1.0

# Coupling sweep
REFERENCE_ION_HEIGHT_M = 1.0e-3  # ion height of the millimetre-scale trap
SWEEP_BASE_HEIGHT_M = 10e-6
SWEEP_SCALES = (1.0, 5.0, 10.0)
SWEEP_IONS = 4
SWEEP_BASE_SPACING_M = 0.0  # > 0 retunes the base frequencies to this mean ion spacing
KAPPA = 1.0
NU_RULE = "force_axis"  # force_axis | x | y | z | min
FREQUENCY_SCALING = "inverse"  # inverse (fixed q) | inverse_square (fixed drive)

# Output
SHOW_PROGRESS = True  # tqdm bars; --quiet turns them off
CSV_FLOAT_FORMAT = "{:.17e}"

# Logging configuration
LOG_LEVEL = "INFO"
LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"
LOG_FILE: Optional[Path] = None  # set to a path to also log to a rotating file
MAX_LOG_SIZE_MB = 50
LOG_BACKUP_COUNT = 5


def setup_logging(quiet: bool = False, log_file: Optional[Path] = LOG_FILE) -> None:
    """Configure the root logger: stderr always, a rotating file when configured."""
    handlers: list[logging.Handler] = [logging.StreamHandler()]
    if log_file is not None:
        handlers.append(logging.handlers.RotatingFileHandler(
            log_file,
            maxBytes=MAX_LOG_SIZE_MB * 1024 * 1024,
            backupCount=LOG_BACKUP_COUNT,
        ))

    logging.basicConfig(
        level=logging.WARNING if quiet else getattr(logging, LOG_LEVEL),
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )
