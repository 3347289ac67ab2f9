"""
Surface-electrode trap model in the gapless-plane approximation.

Every electrode is a planar polygon in z = 0; the remainder of the plane is
grounded. The potential of an electrode held at 1 V is the solid angle it
subtends divided by 2 pi, evaluated exactly by fan triangulation. Gradients
and Hessians use closed-form per-edge line integrals (the same kernel as a
Biot-Savart segment), so the rf pseudopotential and its gradient are analytic;
only the trap-frequency Hessian is taken by finite differences.
"""

import itertools
import logging
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import eigh

import config
from constants import ATOMIC_MASS, ELEMENTARY_CHARGE, SR88_MASS_AMU
from errors import NoNullFoundError, NotConvergedError, SingularityError, StabilityWarning, UnstableTrapError
from magnetics import edge_kernel, edge_kernel_jacobian

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


def _signed_area(vertices: np.ndarray) -> float:
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _segments_cross(p1, p2, q1, q2) -> np.ndarray:
    """Proper (strict) intersection test for arrays of 2-D segments."""
    def orient(a, b, c):
        return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0])

    d1 = orient(q1, q2, p1)
    d2 = orient(q1, q2, p2)
    d3 = orient(p1, p2, q1)
    d4 = orient(p1, p2, q2)
    return (d1 * d2 < 0) & (d3 * d4 < 0)


def _points_in_polygon(points: np.ndarray, vertices: np.ndarray) -> np.ndarray:
    """Even-odd ray casting; points is (P, 2)."""
    x, y = points[:, 0:1], points[:, 1:2]
    x1, y1 = vertices[:, 0], vertices[:, 1]
    x2, y2 = np.roll(x1, -1), np.roll(y1, -1)
    straddles = (y1 > y) != (y2 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_cross = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
    return np.sum(straddles & (x < x_cross), axis=1) % 2 == 1


@dataclass(frozen=True, eq=False)
class ElectrodePolygon:
    """
    Planar electrode outline in z = 0 (meters), optionally with holes.

    Vertices are stored counter-clockwise as seen from +z. A ring electrode is
    one outline with the inner boundary given as a hole.
    """

    vertices: np.ndarray
    label: str = ""
    holes: tuple["ElectrodePolygon", ...] = ()

    def __post_init__(self):
        vertices = np.asarray(self.vertices, dtype=float)
        if vertices.ndim != 2 or vertices.shape[1] != 2 or len(vertices) < 3:
            raise ValueError(f"Electrode '{self.label}' needs at least 3 two-dimensional vertices")
        if not np.all(np.isfinite(vertices)):
            raise ValueError(f"Electrode '{self.label}' has non-finite vertices")
        if not self._is_simple(vertices):
            raise ValueError(f"Electrode '{self.label}' outline self-intersects")
        area = _signed_area(vertices)
        if area == 0.0:
            raise ValueError(f"Electrode '{self.label}' is degenerate (zero area)")
        if area < 0:
            vertices = vertices[::-1].copy()
        vertices.setflags(write=False)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "holes", tuple(self.holes))

    @staticmethod
    def _is_simple(vertices: np.ndarray) -> bool:
        n = len(vertices)
        starts, ends = vertices, np.roll(vertices, -1, axis=0)
        i, j = np.triu_indices(n, k=2)
        # the first and last edges share a vertex
        keep = ~((i == 0) & (j == n - 1))
        i, j = i[keep], j[keep]
        return not np.any(_segments_cross(starts[i], ends[i], starts[j], ends[j]))

    @property
    def area(self) -> float:
        return _signed_area(self.vertices) - sum(hole.area for hole in self.holes)

    @property
    def centroid(self) -> np.ndarray:
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        cross = x * np.roll(y, -1) - np.roll(x, -1) * y
        area = 0.5 * np.sum(cross)
        cx = np.sum((x + np.roll(x, -1)) * cross) / (6.0 * area)
        cy = np.sum((y + np.roll(y, -1)) * cross) / (6.0 * area)
        return np.array([cx, cy])

    @property
    def diameter(self) -> float:
        """Largest vertex-to-vertex distance of the outline."""
        diff = self.vertices[:, None, :] - self.vertices[None, :, :]
        return float(np.sqrt(np.max(np.sum(diff**2, axis=-1))))

    def contains(self, points: np.ndarray) -> np.ndarray:
        """True for 2-D points inside the outline and outside every hole."""
        points = np.atleast_2d(points)
        inside = _points_in_polygon(points, self.vertices)
        for hole in self.holes:
            inside &= ~_points_in_polygon(points, hole.vertices)
        return inside

    def interior_samples(self) -> np.ndarray:
        """Points just inside the region, next to each outline edge midpoint."""
        starts, ends = self.vertices, np.roll(self.vertices, -1, axis=0)
        mid = 0.5 * (starts + ends)
        direction = ends - starts
        inward = np.stack([-direction[:, 1], direction[:, 0]], axis=1)
        inward /= np.linalg.norm(inward, axis=1, keepdims=True)
        return mid + 1e-6 * self.diameter * inward

    def edges(self):
        """Closed outline edges (start, end) including holes, each hole reversed."""
        loops = [self.vertices] + [hole.vertices[::-1] for hole in self.holes]
        for loop in loops:
            yield loop, np.roll(loop, -1, axis=0)

    def scaled(self, scale: float) -> "ElectrodePolygon":
        return ElectrodePolygon(self.vertices * scale, self.label,
                                tuple(hole.scaled(scale) for hole in self.holes))


@dataclass(frozen=True)
class RfDrive:
    amplitude: float  # V_rf, volts
    angular_frequency: float  # Omega, rad/s

    def __post_init__(self):
        if not (self.amplitude > 0 and self.angular_frequency > 0):
            raise ValueError(f"rf drive needs V_rf > 0 and Omega > 0, got {self}")

    @classmethod
    def from_hz(cls, amplitude: float, frequency_hz: float) -> "RfDrive":
        return cls(amplitude, TWO_PI * frequency_hz)


@dataclass(frozen=True)
class Ion:
    mass: float  # kg
    charge: float  # C

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError(f"Ion mass must be positive, got {self.mass}")
        if self.charge == 0 or not math.isfinite(self.charge):
            raise ValueError(f"Ion charge must be non-zero, got {self.charge}")

    @classmethod
    def from_amu(cls, mass_amu: float = SR88_MASS_AMU, charge_e: float = 1.0) -> "Ion":
        return cls(mass_amu * ATOMIC_MASS, charge_e * ELEMENTARY_CHARGE)


SR88 = Ion.from_amu()


@dataclass(frozen=True, eq=False)
class ElectrodeLayout:
    rf_electrodes: tuple[ElectrodePolygon, ...]
    dc_electrodes: tuple[tuple[ElectrodePolygon, float], ...]
    drive: RfDrive

    def __post_init__(self):
        object.__setattr__(self, "rf_electrodes", tuple(self.rf_electrodes))
        object.__setattr__(self, "dc_electrodes", tuple((p, float(v)) for p, v in self.dc_electrodes))
        polygons = list(self.rf_electrodes) + [p for p, _ in self.dc_electrodes]
        for first, second in itertools.combinations(polygons, 2):
            if _regions_overlap(first, second):
                raise ValueError(f"Electrodes '{first.label}' and '{second.label}' overlap")

    @property
    def characteristic_size(self) -> float:
        return max(p.diameter for p in self.rf_electrodes)

    @property
    def rf_centroid(self) -> np.ndarray:
        weights = np.array([p.area for p in self.rf_electrodes])
        centroids = np.array([p.centroid for p in self.rf_electrodes])
        return weights @ centroids / weights.sum()

    def scaled(self, scale: float) -> "ElectrodeLayout":
        return ElectrodeLayout(
            tuple(p.scaled(scale) for p in self.rf_electrodes),
            tuple((p.scaled(scale), v) for p, v in self.dc_electrodes),
            self.drive,
        )

    def with_drive(self, drive: RfDrive) -> "ElectrodeLayout":
        return ElectrodeLayout(self.rf_electrodes, self.dc_electrodes, drive)


def _regions_overlap(first: ElectrodePolygon, second: ElectrodePolygon) -> bool:
    for a_loop, _ in first.edges():
        for b_loop, _ in second.edges():
            a_start, a_end = a_loop, np.roll(a_loop, -1, axis=0)
            b_start, b_end = b_loop, np.roll(b_loop, -1, axis=0)
            if np.any(_segments_cross(a_start[:, None], a_end[:, None], b_start[None], b_end[None])):
                return True
    return bool(np.any(second.contains(first.interior_samples()))
                or np.any(first.contains(second.interior_samples())))


# ---------------------------------------------------------------------------
# Basis functions


def _relative(points: np.ndarray, vertices: np.ndarray) -> np.ndarray:
    """Vertices relative to each field point, shape (P, n, 3)."""
    if np.any(points[:, 2] <= 0):
        raise SingularityError("Gapless-plane potential is undefined for z <= 0")
    rel = np.empty((len(points), len(vertices), 3))
    rel[..., 0] = vertices[None, :, 0] - points[:, None, 0]
    rel[..., 1] = vertices[None, :, 1] - points[:, None, 1]
    rel[..., 2] = -points[:, None, 2]
    return rel


def _loop_solid_angle(points: np.ndarray, vertices: np.ndarray) -> np.ndarray:
    """Signed solid angle of a counter-clockwise loop by fan triangulation."""
    rel = _relative(points, vertices)
    r0 = rel[:, :1, :]
    r1 = rel[:, 1:-1, :]
    r2 = rel[:, 2:, :]
    n0 = np.linalg.norm(r0, axis=-1)
    n1 = np.linalg.norm(r1, axis=-1)
    n2 = np.linalg.norm(r2, axis=-1)
    triple = np.sum(r0 * np.cross(r1, r2), axis=-1)
    denom = (n0 * n1 * n2 + np.sum(r0 * r1, axis=-1) * n2
             + np.sum(r0 * r2, axis=-1) * n1 + np.sum(r1 * r2, axis=-1) * n0)
    # counter-clockwise loops below the point give a negative triple product
    return -2.0 * np.sum(np.arctan2(triple, denom), axis=-1)


def _polygon_terms(points: np.ndarray, polygon: ElectrodePolygon, order: int):
    """
    Potential (order 0), gradient (1) or Hessian (2) of one electrode.

    Holes enter with reversed orientation, so the same edge sum covers them.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    if order == 0:
        total = _loop_solid_angle(points, polygon.vertices)
        for hole in polygon.holes:
            total = total - _loop_solid_angle(points, hole.vertices)
        return total / TWO_PI

    result = 0.0
    for starts, ends in polygon.edges():
        a = _relative(points, starts)
        b = _relative(points, ends)
        kernel = edge_kernel(a, b) if order == 1 else edge_kernel_jacobian(a, b)
        result = result + np.sum(kernel, axis=1)
    return -result / TWO_PI


def basis_potential(point, polygon: ElectrodePolygon) -> float:
    """
    Potential at a point above the plane with this electrode at 1 V.

    Args:
        point: 3-D point in meters with z > 0
        polygon: Electrode outline

    Returns:
        Solid angle / (2 pi), in [0, 1]
    """
    return float(_polygon_terms(point, polygon, 0)[0])


def basis_gradient(point, polygon: ElectrodePolygon) -> np.ndarray:
    """Analytic gradient of `basis_potential` (1/m)."""
    return _polygon_terms(point, polygon, 1)[0]


def basis_hessian(point, polygon: ElectrodePolygon) -> np.ndarray:
    """Analytic Hessian of `basis_potential` (1/m^2), symmetric."""
    return _polygon_terms(point, polygon, 2)[0]


# ---------------------------------------------------------------------------
# Pseudopotential


def _rf_prefactor(layout: ElectrodeLayout, ion: Ion) -> float:
    drive = layout.drive
    return ion.charge**2 * drive.amplitude**2 / (4.0 * ion.mass * drive.angular_frequency**2)


def layout_potential(points, layout: ElectrodeLayout, rf_volts: Optional[float] = None) -> np.ndarray:
    """Static electrode potential (V), rf electrodes at rf_volts (default 0)."""
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    total = np.zeros(len(points))
    if rf_volts:
        for polygon in layout.rf_electrodes:
            total += rf_volts * _polygon_terms(points, polygon, 0)
    for polygon, voltage in layout.dc_electrodes:
        if voltage:
            total += voltage * _polygon_terms(points, polygon, 0)
    return total


def _pseudopotential(points, layout: ElectrodeLayout, ion: Ion) -> np.ndarray:
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    rf_gradient = sum(_polygon_terms(points, p, 1) for p in layout.rf_electrodes)
    energy = _rf_prefactor(layout, ion) * np.sum(rf_gradient**2, axis=-1)
    return energy + ion.charge * layout_potential(points, layout)


def _pseudopotential_gradient(points, layout: ElectrodeLayout, ion: Ion) -> np.ndarray:
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    rf_gradient = sum(_polygon_terms(points, p, 1) for p in layout.rf_electrodes)
    rf_hessian = sum(_polygon_terms(points, p, 2) for p in layout.rf_electrodes)
    gradient = 2.0 * _rf_prefactor(layout, ion) * np.einsum("pij,pj->pi", rf_hessian, rf_gradient)
    for polygon, voltage in layout.dc_electrodes:
        if voltage:
            gradient = gradient + ion.charge * voltage * _polygon_terms(points, polygon, 1)
    return gradient


def pseudopotential_energy(point, layout: ElectrodeLayout, ion: Ion) -> float:
    """
    Total effective potential energy (J): rf pseudopotential plus static dc energy.

        Phi = e^2 V_rf^2 |grad phi_rf|^2 / (4 m Omega^2) + e sum V_dc phi_dc
    """
    return float(_pseudopotential(point, layout, ion)[0])


def pseudopotential_map(points, layout: ElectrodeLayout, ion: Ion) -> np.ndarray:
    """`pseudopotential_energy` over an array of points, shape (P,)."""
    return _pseudopotential(points, layout, ion)


def pseudopotential_gradient(point, layout: ElectrodeLayout, ion: Ion) -> np.ndarray:
    """Analytic gradient of `pseudopotential_energy` (N)."""
    return _pseudopotential_gradient(point, layout, ion)[0]


def _gradient_jacobian(gradient: Callable[[np.ndarray], np.ndarray], point: np.ndarray, step: float) -> np.ndarray:
    """Central differences of an analytic gradient, Richardson-extrapolated once, symmetrized."""
    def central(h):
        stencil = np.concatenate([point + h * np.eye(3), point - h * np.eye(3)])
        values = gradient(stencil)
        return ((values[:3] - values[3:]) / (2.0 * h)).T

    hessian = (4.0 * central(step) - central(2.0 * step)) / 3.0
    return 0.5 * (hessian + hessian.T)


def pseudopotential_hessian(point, layout: ElectrodeLayout, ion: Ion, step: Optional[float] = None) -> np.ndarray:
    """Hessian of the total effective potential (J/m^2)."""
    point = np.asarray(point, dtype=float).reshape(3)
    if step is None:
        step = config.HESSIAN_STEP_FRACTION * point[2]
    return _gradient_jacobian(lambda p: _pseudopotential_gradient(p, layout, ion), point, step)


def find_rf_null(layout: ElectrodeLayout, ion: Ion,
                 max_iterations: int = config.NULL_MAX_ITERATIONS,
                 tolerance: float = config.NULL_GRADIENT_TOLERANCE) -> np.ndarray:
    """
    Locate the trapping point above the surface.

    A log-spaced vertical scan above the rf centroid brackets the minimum of
    the vertical potential; damped Newton iterations then refine the point in
    three dimensions using the analytic gradient.

    Args:
        layout: Electrode layout with a ring-like rf electrode
        ion: Trapped ion
        max_iterations: Newton iteration cap
        tolerance: Gradient tolerance as a fraction of e_c * V_rf per meter

    Returns:
        Trap center (meters)
    """
    size = layout.characteristic_size
    cx, cy = layout.rf_centroid
    low, high = config.NULL_SCAN_RANGE
    heights = np.geomspace(low * size, high * size, config.NULL_SCAN_POINTS)
    column = np.column_stack([np.full_like(heights, cx), np.full_like(heights, cy), heights])

    vertical = _pseudopotential_gradient(column, layout, ion)[:, 2]
    minima = np.flatnonzero((vertical[:-1] < 0) & (vertical[1:] >= 0))
    if minima.size == 0:
        raise NoNullFoundError(
            f"No null found: vertical force never changes sign between "
            f"{heights[0]:.3e} m and {heights[-1]:.3e} m")
    energies = _pseudopotential(column[minima], layout, ion)
    start = minima[int(np.argmin(energies))]

    # linear interpolation of the sign change
    z0, z1 = heights[start], heights[start + 1]
    g0, g1 = vertical[start], vertical[start + 1]
    point = np.array([cx, cy, z0 - g0 * (z1 - z0) / (g1 - g0)])
    logger.debug(f"Vertical scan bracketed the null at z = {point[2]:.6e} m")

    gradient_tolerance = tolerance * abs(ion.charge) * layout.drive.amplitude / 1.0
    gradient_of = lambda p: _pseudopotential_gradient(p, layout, ion)
    gradient = gradient_of(point)[0]
    # round-off floor, relative to the largest vertical force along the scan
    stagnation_limit = max(gradient_tolerance, config.NULL_STAGNATION_FRACTION * np.max(np.abs(vertical)))

    for iteration in range(max_iterations):
        norm = np.linalg.norm(gradient)
        if norm < gradient_tolerance:
            logger.info(f"rf null at {point} m after {iteration} Newton steps")
            return point

        hessian = _gradient_jacobian(gradient_of, point, config.HESSIAN_STEP_FRACTION * point[2])
        eigenvalues, eigenvectors = eigh(hessian)
        # push non-positive curvature to a positive floor so the step descends
        floor = 1e-6 * max(np.max(np.abs(eigenvalues)), np.finfo(float).tiny)
        step = -eigenvectors @ ((eigenvectors.T @ gradient) / np.maximum(np.abs(eigenvalues), floor))

        damping = 1.0
        while True:
            candidate = point + damping * step
            if candidate[2] > 0:
                candidate_gradient = gradient_of(candidate)[0]
                if np.linalg.norm(candidate_gradient) < norm:
                    break
            damping *= 0.5
            if damping < 1e-12:
                break

        if damping < 1e-12 or np.linalg.norm(damping * step) <= 4 * np.finfo(float).eps * point[2]:
            if norm > stagnation_limit:
                raise NotConvergedError(
                    f"rf null search stalled at {point} m with |grad| = {norm:.3e} N "
                    f"(limit {stagnation_limit:.3e} N)")
            logger.info(f"rf null at {point} m after {iteration} Newton steps "
                        f"(round-off limited, |grad| = {norm:.3e} N)")
            return point

        point, gradient = candidate, candidate_gradient

    raise NotConvergedError(f"rf null search not converged after {max_iterations} iterations")


# ---------------------------------------------------------------------------
# Secular frequencies


@dataclass(frozen=True, eq=False)
class SecularModes:
    """
    Harmonic description of the trap at its center.

    frequencies and q are ordered (x, y, z): each principal axis is assigned to
    the lab axis it is most aligned with. axes[k] is the principal axis for
    lab axis k.
    """

    frequencies: np.ndarray  # hertz
    axes: np.ndarray  # (3, 3), rows are orthonormal principal axes
    center: np.ndarray  # meters
    q: np.ndarray
    unstable: bool = False

    @property
    def nu_x(self) -> float:
        return float(self.frequencies[0])

    @property
    def nu_y(self) -> float:
        return float(self.frequencies[1])

    @property
    def nu_z(self) -> float:
        return float(self.frequencies[2])

    @property
    def tilt_deg(self) -> float:
        """Angle between the out-of-plane principal axis and the surface normal."""
        return math.degrees(math.acos(min(1.0, abs(float(self.axes[2, 2])))))

    def harmonic_trap(self, ion: Ion):
        from crystal import HarmonicTrap
        return HarmonicTrap(self.nu_x, self.nu_y, self.nu_z, ion)


def _assign_axes(eigenvectors: np.ndarray) -> tuple[int, ...]:
    """Permutation mapping lab axis k to an eigenvector column, maximising alignment."""
    overlap = np.abs(eigenvectors)
    return max(itertools.permutations(range(3)),
               key=lambda perm: sum(overlap[k, perm[k]] for k in range(3)))


def secular_frequencies(layout: ElectrodeLayout, ion: Ion) -> SecularModes:
    """
    Secular frequencies, principal axes and Mathieu q at the trap center.

    Raises:
        UnstableTrapError: Any curvature eigenvalue is non-positive.
    """
    center = find_rf_null(layout, ion)
    hessian = pseudopotential_hessian(center, layout, ion)
    eigenvalues, eigenvectors = eigh(hessian)
    if np.any(eigenvalues <= 0):
        raise UnstableTrapError(f"Unstable trap: curvature eigenvalues {eigenvalues} J/m^2")

    perm = _assign_axes(eigenvectors)
    eigenvalues = eigenvalues[list(perm)]
    axes = eigenvectors[:, list(perm)].T
    frequencies = np.sqrt(eigenvalues / ion.mass) / TWO_PI
    q = 2.0 * math.sqrt(2.0) * TWO_PI * frequencies / layout.drive.angular_frequency

    unstable = bool(np.any(q > config.STABILITY_Q_LIMIT))
    if unstable:
        message = f"Stability warning: q = {q} exceeds {config.STABILITY_Q_LIMIT}"
        logger.warning(message)
        warnings.warn(message, StabilityWarning, stacklevel=2)

    modes = SecularModes(frequencies, axes, center, q, unstable)
    logger.info(f"Secular frequencies (x, y, z) = {frequencies / 1e3} kHz, "
                f"q = {q}, tilt = {modes.tilt_deg:.3f} deg")
    return modes


def discretization_check(builder: Callable[[int], ElectrodeLayout], ion: Ion,
                         vertices: int = config.ELLIPSE_VERTICES) -> float:
    """Largest relative frequency change between `vertices` and twice as many."""
    coarse = secular_frequencies(builder(vertices), ion).frequencies
    fine = secular_frequencies(builder(2 * vertices), ion).frequencies
    change = float(np.max(np.abs(fine - coarse) / fine))
    logger.info(f"Discretization {vertices} -> {2 * vertices} vertices: max change {change:.3e}")
    return change


# ---------------------------------------------------------------------------
# Layout builders


def ellipse_polygon(semi_x: float, semi_y: float, vertices: int = config.ELLIPSE_VERTICES,
                    label: str = "", semi_x_negative: Optional[float] = None,
                    center: Sequence[float] = (0.0, 0.0)) -> ElectrodePolygon:
    """
    Polygonal ellipse, optionally with a different semi-axis on the -x side.

    Args:
        semi_x: Semi-axis along +x (meters)
        semi_y: Semi-axis along y (meters)
        vertices: Number of polygon vertices
        label: Electrode label
        semi_x_negative: Semi-axis along -x; defaults to semi_x
        center: Ellipse center in the plane
    """
    if semi_x_negative is None:
        semi_x_negative = semi_x
    if min(semi_x, semi_y, semi_x_negative) <= 0:
        raise ValueError("Ellipse semi-axes must be positive")
    theta = TWO_PI * np.arange(vertices) / vertices
    cos, sin = np.cos(theta), np.sin(theta)
    x = np.where(cos >= 0, semi_x, semi_x_negative) * cos + center[0]
    y = semi_y * sin + center[1]
    return ElectrodePolygon(np.column_stack([x, y]), label)


def _ring_layout(outer: ElectrodePolygon, inner: ElectrodePolygon, drive: RfDrive,
                 center_voltage: float) -> ElectrodeLayout:
    rf = ElectrodePolygon(outer.vertices, "rf", (inner,))
    center = ElectrodePolygon(inner.vertices, "center")
    return ElectrodeLayout((rf,), ((center, center_voltage),), drive)


def default_drive() -> RfDrive:
    return RfDrive.from_hz(config.RF_AMPLITUDE_V, config.RF_DRIVE_FREQUENCY_HZ)


def circular_ring_layout(inner_radius: float = config.RING_INNER_RADIUS_M,
                         outer_radius: float = config.RING_OUTER_RADIUS_M,
                         vertices: int = config.ELLIPSE_VERTICES,
                         drive: Optional[RfDrive] = None,
                         center_voltage: float = 0.0) -> ElectrodeLayout:
    """Circular rf ring around a grounded (or dc) center disc."""
    return elliptical_ring_layout(inner_radius, inner_radius, outer_radius, outer_radius,
                                  vertices, drive, center_voltage)


def elliptical_ring_layout(inner_semi_x: float = config.CENTER_SEMI_X_M,
                           inner_semi_y: float = config.CENTER_SEMI_Y_M,
                           outer_semi_x: float = 0.5 * (config.OUTER_SEMI_X_M + config.OUTER_SEMI_X_PRIME_M),
                           outer_semi_y: float = config.OUTER_SEMI_Y_M,
                           vertices: int = config.ELLIPSE_VERTICES,
                           drive: Optional[RfDrive] = None,
                           center_voltage: float = 0.0) -> ElectrodeLayout:
    """Mirror-symmetric elliptical rf ring."""
    outer = ellipse_polygon(outer_semi_x, outer_semi_y, vertices)
    inner = ellipse_polygon(inner_semi_x, inner_semi_y, vertices)
    return _ring_layout(outer, inner, drive or default_drive(), center_voltage)


def stretched_ring_layout(center_semi_x: float = config.CENTER_SEMI_X_M,
                          center_semi_y: float = config.CENTER_SEMI_Y_M,
                          outer_a: float = config.OUTER_SEMI_X_M,
                          outer_a_prime: float = config.OUTER_SEMI_X_PRIME_M,
                          outer_b: float = config.OUTER_SEMI_Y_M,
                          vertices: int = config.ELLIPSE_VERTICES,
                          drive: Optional[RfDrive] = None,
                          center_voltage: float = 0.0) -> ElectrodeLayout:
    """
    Elliptical rf ring widened on the +x side (semi-axis A' instead of A).

    The semimajor axis B lies along y, the weak in-plane direction.
    """
    outer = ellipse_polygon(outer_a_prime, outer_b, vertices, semi_x_negative=outer_a)
    inner = ellipse_polygon(center_semi_x, center_semi_y, vertices)
    return _ring_layout(outer, inner, drive or default_drive(), center_voltage)


def scale_layout(layout: ElectrodeLayout, scale: float) -> ElectrodeLayout:
    """Whole geometry multiplied by scale; voltages and drive unchanged."""
    if scale <= 0:
        raise ValueError(f"Scale must be positive, got {scale}")
    return layout.scaled(scale)
