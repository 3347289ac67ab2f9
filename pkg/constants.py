"""
Physical constants used throughout the toolkit (SI, CODATA 2018).

Every module imports its constants from here so that the whole code base
agrees on one table. Exact SI-defined constants come from scipy; measured
ones are pinned to the 2018 adjustment so results do not drift with the
installed scipy release.
"""

import math

import scipy.constants as const

ELEMENTARY_CHARGE = const.e  # C, exact
HBAR = const.hbar  # J s, exact
ATOMIC_MASS = 1.66053906660e-27  # kg
EPSILON_0 = 8.8541878128e-12  # F/m
MU_0 = 1.25663706212e-6  # N/A^2
BOHR_MAGNETON = 9.2740100783e-24  # J/T

COULOMB_CONSTANT = 1.0 / (4.0 * math.pi * EPSILON_0)

SR88_MASS_AMU = 87.9056
