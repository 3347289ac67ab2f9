"""
Coulomb crystals in a three-dimensional harmonic trap.

Equilibria are found by minimising

    U = sum_i (m/2) sum_a w_a^2 r_ia^2 + sum_{i<j} e^2 / (4 pi eps0 |r_i - r_j|)

in reduced units: lengths in l0 = (k e^2 / (m w0^2))^(1/3) with w0 the
weakest trap frequency, energies in m w0^2 l0^2. The reduced problem is
well scaled for any trap size, which matters because the coupling sweep
spans micron- and millimetre-scale crystals.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import eigh
from scipy.optimize import minimize
from scipy.spatial import cKDTree
from tqdm import tqdm

import config
from constants import COULOMB_CONSTANT
from errors import NotConvergedError, SaddleRejectedError, UnstableTrapError
from trap_model import SR88, Ion

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
MIN_ION_SEPARATION_M = 1e-9


@dataclass(frozen=True)
class HarmonicTrap:
    """Secular frequencies in hertz (ordinary, not angular) and the trapped species."""

    nu_x: float
    nu_y: float
    nu_z: float
    ion: Ion = SR88

    def __post_init__(self):
        if not all(nu > 0 and math.isfinite(nu) for nu in (self.nu_x, self.nu_y, self.nu_z)):
            raise ValueError(f"Trap frequencies must be positive, got {self.frequencies}")

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([self.nu_x, self.nu_y, self.nu_z])

    @property
    def angular_frequencies(self) -> np.ndarray:
        return TWO_PI * self.frequencies

    def scaled(self, factor: float) -> "HarmonicTrap":
        """All frequencies multiplied by factor."""
        return HarmonicTrap(self.nu_x * factor, self.nu_y * factor, self.nu_z * factor, self.ion)

    def with_nu_z(self, nu_z: float) -> "HarmonicTrap":
        return HarmonicTrap(self.nu_x, self.nu_y, nu_z, self.ion)


@dataclass(frozen=True, eq=False)
class IonCrystal:
    positions: np.ndarray  # (N, 3), meters
    trap: HarmonicTrap
    energy: float  # joules
    residual_force: float  # newtons, max over ions
    converged: bool
    restarts_used: int  # restarts that met the force tolerance

    @property
    def n_ions(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class SpacingReport:
    d_x: float
    d_y: float
    d_mean: float
    z_extent: float


@dataclass(frozen=True, eq=False)
class ModeSpectrum:
    frequencies: np.ndarray  # (3N,), hertz, ascending
    vectors: np.ndarray  # (3N, 3N), columns are modes; ion-major ordering (x1, y1, z1, x2, ...)


class _ReducedUnits:
    """Length, energy and force scales for one trap."""

    def __init__(self, trap: HarmonicTrap):
        omega = trap.angular_frequencies
        self.omega0 = float(np.min(omega))
        self.w2 = (omega / self.omega0) ** 2
        coupling = COULOMB_CONSTANT * trap.ion.charge**2
        self.length = (coupling / (trap.ion.mass * self.omega0**2)) ** (1.0 / 3.0)
        self.energy = coupling / self.length
        self.force = self.energy / self.length


def _pair_terms(r: np.ndarray):
    # dif_ijk = r_ik - r_jk
    dif = r[:, np.newaxis, :] - r[np.newaxis, :, :]
    dist = np.sqrt(np.sum(dif**2, axis=2))
    np.fill_diagonal(dist, 1.0)
    invdist = 1.0 / dist
    np.fill_diagonal(invdist, 0.0)
    return dif, invdist


def reduced_energy(flat: np.ndarray, w2: np.ndarray) -> float:
    r = flat.reshape(-1, 3)
    _, invdist = _pair_terms(r)
    return 0.5 * float(np.sum(w2 * r**2)) + 0.5 * float(np.sum(invdist))


def reduced_gradient(flat: np.ndarray, w2: np.ndarray) -> np.ndarray:
    r = flat.reshape(-1, 3)
    dif, invdist = _pair_terms(r)
    coulomb = -np.sum(dif * (invdist**3)[:, :, np.newaxis], axis=1)
    return (w2 * r + coulomb).ravel()


def reduced_hessian(flat: np.ndarray, w2: np.ndarray) -> np.ndarray:
    r = flat.reshape(-1, 3)
    n = len(r)
    dif, invdist = _pair_terms(r)
    hess = -3.0 * dif[:, :, :, np.newaxis] * dif[:, :, np.newaxis, :] * (invdist**5)[:, :, np.newaxis, np.newaxis]
    hess[:, :, range(3), range(3)] += (invdist**3)[:, :, np.newaxis]
    hess[range(n), range(n), :, :] = -np.sum(hess, axis=1)
    for a in range(3):
        hess[range(n), range(n), a, a] += w2[a]
    return np.swapaxes(hess, 1, 2).reshape(3 * n, 3 * n)


def _max_force(gradient: np.ndarray) -> float:
    return float(np.max(np.linalg.norm(gradient.reshape(-1, 3), axis=1)))


def _hexagonal_sites(n_ions: int) -> np.ndarray:
    """The n sites of a unit triangular lattice closest to the origin, in a fixed order."""
    k = int(math.ceil(math.sqrt(n_ions))) + 2
    i, j = np.meshgrid(np.arange(-k, k + 1), np.arange(-k, k + 1), indexing="ij")
    x = (i + 0.5 * j).ravel().astype(float)
    y = (0.5 * math.sqrt(3.0) * j).ravel()
    radius = np.round(np.hypot(x, y), 9)
    angle = np.round(np.arctan2(y, x), 9)
    order = np.lexsort((angle, radius))[:n_ions]
    return np.column_stack([x[order], y[order]])


def initial_configuration(units: _ReducedUnits, n_ions: int, seed: int, restart: int) -> np.ndarray:
    """
    Jittered planar lattice in the plane of the two weakest trap axes.

    Returns:
        Reduced positions, shape (N, 3), centre of mass at the origin
    """
    weak = np.argsort(units.w2, kind="stable")
    spacing = (2.0 / np.mean(units.w2[weak[:2]])) ** (1.0 / 3.0)

    positions = np.zeros((n_ions, 3))
    sites = _hexagonal_sites(n_ions) * spacing
    positions[:, weak[0]] = sites[:, 0]
    positions[:, weak[1]] = sites[:, 1]

    rng = np.random.default_rng([seed, restart])
    positions += rng.normal(scale=0.1 * spacing, size=positions.shape)
    return positions - positions.mean(axis=0)


def _newton_polish(flat: np.ndarray, w2: np.ndarray, tolerance: float, max_steps: int = 50) -> np.ndarray:
    """Newton steps with a pseudo-inverse Hessian; soft rotation modes are cut off."""
    gradient = reduced_gradient(flat, w2)
    for _ in range(max_steps):
        if _max_force(gradient) < tolerance:
            break
        step = -np.linalg.pinv(reduced_hessian(flat, w2), rcond=1e-9, hermitian=True) @ gradient
        damping = 1.0
        while damping > 1e-6:
            candidate = flat + damping * step
            candidate_gradient = reduced_gradient(candidate, w2)
            if np.linalg.norm(candidate_gradient) < np.linalg.norm(gradient):
                break
            damping *= 0.5
        else:
            break
        flat, gradient = candidate, candidate_gradient
    return flat


def _relax(x0: np.ndarray, w2: np.ndarray, max_evaluations: int) -> np.ndarray:
    result = minimize(reduced_energy, x0.ravel(), args=(w2,), jac=reduced_gradient, method="BFGS",
                      options={"gtol": config.CRYSTAL_REDUCED_GRADIENT_TOLERANCE, "maxiter": max_evaluations})
    logger.debug(f"BFGS: {result.message} after {result.nfev} evaluations")
    return _newton_polish(result.x, w2, config.CRYSTAL_REDUCED_GRADIENT_TOLERANCE)


def _is_saddle(flat: np.ndarray, w2: np.ndarray) -> bool:
    eigenvalues = np.linalg.eigvalsh(reduced_hessian(flat, w2))
    return bool(eigenvalues[0] < -config.SADDLE_TOLERANCE * eigenvalues[-1])


def solve_equilibrium(trap: HarmonicTrap, n_ions: int, seed: int = 0,
                      restarts: int = config.CRYSTAL_RESTARTS,
                      force_tolerance: float = config.CRYSTAL_FORCE_TOLERANCE_N,
                      max_evaluations: int = config.CRYSTAL_MAX_EVALUATIONS) -> IonCrystal:
    """
    Lowest-energy equilibrium found from several seeded starting lattices.

    Args:
        trap: Harmonic trap
        n_ions: Number of ions (>= 1)
        seed: Seed for the deterministic lattice jitter
        restarts: Number of starting configurations
        force_tolerance: Largest acceptable per-ion net force (N)
        max_evaluations: Quasi-Newton iteration cap per restart

    Returns:
        IonCrystal of the lowest-energy stable restart (ties go to the lower restart index)

    Raises:
        NotConvergedError: No restart met the force tolerance
        SaddleRejectedError: Every converged restart was a saddle point
    """
    if n_ions < 1:
        raise ValueError(f"Need at least one ion, got {n_ions}")
    if restarts < 1:
        raise ValueError(f"Need at least one restart, got {restarts}")

    if n_ions == 1:
        return IonCrystal(np.zeros((1, 3)), trap, 0.0, 0.0, True, 1)

    units = _ReducedUnits(trap)
    best = None
    converged_count = saddles = 0

    for restart in tqdm(range(restarts), desc=f"Solving {n_ions}-ion crystal", unit="restart",
                        disable=not config.SHOW_PROGRESS):
        x0 = initial_configuration(units, n_ions, seed, restart)
        flat = _relax(x0, units.w2, max_evaluations)
        residual = _max_force(reduced_gradient(flat, units.w2)) * units.force
        positions = flat.reshape(-1, 3) * units.length

        _, invdist = _pair_terms(positions)
        if residual >= force_tolerance or np.max(invdist) > 1.0 / MIN_ION_SEPARATION_M:
            logger.debug(f"Restart {restart}: residual force {residual:.3e} N, not converged")
            continue
        converged_count += 1
        if _is_saddle(flat, units.w2):
            saddles += 1
            logger.warning(f"Restart {restart} ended on a saddle point, rejected")
            continue

        energy = reduced_energy(flat, units.w2) * units.energy
        if best is None or energy < best[0]:
            best = (energy, residual, positions)

    if best is None:
        if converged_count:
            raise SaddleRejectedError(f"All {saddles} converged restarts for N={n_ions} were saddle points")
        raise NotConvergedError(
            f"No restart for N={n_ions} reached a residual force below {force_tolerance:.1e} N")

    energy, residual, positions = best
    logger.info(f"N={n_ions}: energy {energy:.6e} J, residual force {residual:.3e} N "
                f"({converged_count}/{restarts} restarts converged)")
    return IonCrystal(positions, trap, energy, residual, True, converged_count)


def two_ion_spacing(trap: HarmonicTrap) -> float:
    """
    Analytic separation of two ions along the weaker in-plane axis.

    When nu_x == nu_y the pair orientation is degenerate; only the distance is
    meaningful and the solver's convention puts the pair along y.
    """
    omega_weak = TWO_PI * min(trap.nu_x, trap.nu_y)
    return (COULOMB_CONSTANT * trap.ion.charge**2 * 2.0 / (trap.ion.mass * omega_weak**2)) ** (1.0 / 3.0)


def _nearest_neighbour_distances(positions: np.ndarray) -> np.ndarray:
    if len(positions) < 2:
        return np.zeros(0)
    distances, _ = cKDTree(positions).query(positions, k=2)
    return distances[:, 1]


def crystal_spacings(crystal: IonCrystal) -> SpacingReport:
    """Extreme-pair extents along x and y, mean nearest-neighbour distance and z extent."""
    positions = crystal.positions
    extent = positions.max(axis=0) - positions.min(axis=0)
    neighbours = _nearest_neighbour_distances(positions)
    d_mean = float(neighbours.mean()) if neighbours.size else 0.0
    return SpacingReport(float(extent[0]), float(extent[1]), d_mean, float(extent[2]))


def spacing_uniformity(crystal: IonCrystal) -> float:
    """Coefficient of variation of the nearest-neighbour distances (0 for N < 2)."""
    neighbours = _nearest_neighbour_distances(crystal.positions)
    if neighbours.size == 0:
        return 0.0
    return float(np.std(neighbours) / np.mean(neighbours))


def planarity_threshold(n_ions: int, nu_plane: float) -> float:
    """
    Minimum nu_z for a planar crystal, (70 N / pi^3)^(1/4) * nu_plane.

    For anisotropic in-plane traps pass max(nu_x, nu_y). This large-N
    criterion overestimates the transition for very small crystals; use
    `planar_transition` for the numerical value.
    """
    if n_ions < 1 or nu_plane <= 0:
        raise ValueError(f"Need N >= 1 and nu_plane > 0, got N={n_ions}, nu_plane={nu_plane}")
    return (70.0 * n_ions / math.pi**3) ** 0.25 * nu_plane


def is_planar(crystal: IonCrystal, epsilon: float = config.PLANARITY_EPSILON) -> bool:
    """True when the z extent is below epsilon * d_mean; a single ion counts as planar."""
    if crystal.n_ions < 2:
        return True
    report = crystal_spacings(crystal)
    return report.z_extent < epsilon * report.d_mean


def normal_modes(crystal: IonCrystal) -> ModeSpectrum:
    """
    Normal modes from the mass-scaled Hessian of U at the equilibrium.

    Raises:
        UnstableTrapError: An eigenvalue is below -1e-6 of the largest
    """
    units = _ReducedUnits(crystal.trap)
    flat = (crystal.positions / units.length).ravel()
    eigenvalues, vectors = eigh(reduced_hessian(flat, units.w2))
    if eigenvalues[0] < -config.SADDLE_TOLERANCE * eigenvalues[-1]:
        raise UnstableTrapError(f"Unstable configuration: lowest curvature {eigenvalues[0]:.3e} (reduced units)")
    frequencies = units.omega0 * np.sqrt(np.clip(eigenvalues, 0.0, None)) / TWO_PI
    return ModeSpectrum(frequencies, vectors)


def out_of_plane_modes(spectrum: ModeSpectrum, weight: float = 0.5) -> np.ndarray:
    """Frequencies of modes whose displacement is mostly along z."""
    z_weight = np.sum(spectrum.vectors[2::3, :] ** 2, axis=0)
    return spectrum.frequencies[z_weight > weight]


def planar_transition(n_ions: int, nu_x: float, nu_y: float, ion: Ion = SR88,
                      resolution: float = config.PLANAR_TRANSITION_RESOLUTION_HZ,
                      seed: int = 0, restarts: int = config.CRYSTAL_RESTARTS,
                      upper: Optional[float] = None) -> float:
    """
    Smallest nu_z (to within resolution) that still gives a planar crystal.

    Bisects on `is_planar` of the solved crystal between min(nu_x, nu_y) / 2
    and twice the continuum threshold.
    """
    low = 0.5 * min(nu_x, nu_y)
    high = upper if upper is not None else 2.0 * planarity_threshold(n_ions, max(nu_x, nu_y))
    in_plane = HarmonicTrap(nu_x, nu_y, high, ion)

    def planar_at(nu_z: float) -> bool:
        return is_planar(solve_equilibrium(in_plane.with_nu_z(nu_z), n_ions, seed=seed, restarts=restarts))

    if planar_at(low) or not planar_at(high):
        raise NotConvergedError(
            f"Planar transition for N={n_ions} not bracketed by [{low:.1f}, {high:.1f}] Hz")

    steps = 0
    while high - low > resolution:
        middle = 0.5 * (low + high)
        if planar_at(middle):
            high = middle
        else:
            low = middle
        steps += 1
    logger.info(f"N={n_ions}: planar above nu_z = {high / 1e3:.3f} kHz ({steps} bisection steps)")
    return high
