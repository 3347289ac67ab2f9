"""
Magnetic fields of straight current segments.

The field of a finite straight segment is evaluated with the closed-form
Biot-Savart result

    B = mu0 I / (4 pi) * (a x b) (|a| + |b|) / (|a||b| (|a||b| + a.b))

with a = start - p and b = end - p. The same edge kernel is the gradient of
the solid angle subtended by a planar polygon, which is why `trap_model`
imports it from here.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from constants import BOHR_MAGNETON, MU_0
from errors import SingularityError

logger = logging.getLogger(__name__)

ON_WIRE_DISTANCE_M = 1e-12
CLOSURE_TOLERANCE_M = 1e-15


def _as_vector(value) -> np.ndarray:
    vector = np.asarray(value, dtype=float).reshape(3)
    if not np.all(np.isfinite(vector)):
        raise ValueError(f"Non-finite coordinates: {vector}")
    return vector


def _kernel_sum(alpha: np.ndarray, beta: np.ndarray, dot: np.ndarray, cross: np.ndarray) -> np.ndarray:
    """|a||b| + a.b without cancellation when a and b are nearly antiparallel."""
    ab = alpha * beta
    cross_sq = np.sum(cross**2, axis=-1)
    if np.ndim(dot) > np.ndim(cross_sq):
        cross_sq = cross_sq[..., None]
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(dot < 0.0, cross_sq / (ab - dot), ab + dot)


def edge_kernel(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    Closed-form line integral of dl x r / |r|^3 along the straight edge a -> b.

    Args:
        a: Start points relative to the field point, shape (..., 3)
        b: End points relative to the field point, shape (..., 3)

    Returns:
        Kernel vectors with the same shape as a
    """
    alpha = np.linalg.norm(a, axis=-1)
    beta = np.linalg.norm(b, axis=-1)
    dot = np.sum(a * b, axis=-1)
    cross = np.cross(a, b)
    factor = (alpha + beta) / (alpha * beta * _kernel_sum(alpha, beta, dot, cross))
    return cross * factor[..., None]


def edge_kernel_jacobian(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    Derivative of `edge_kernel` with respect to the field point.

    Returns:
        Array of shape (..., 3, 3) with [i, j] = d kernel_i / d p_j
    """
    alpha = np.linalg.norm(a, axis=-1)[..., None]
    beta = np.linalg.norm(b, axis=-1)[..., None]
    dot = np.sum(a * b, axis=-1)[..., None]
    cross = np.cross(a, b)

    ab = alpha * beta
    total = _kernel_sum(alpha, beta, dot, cross)
    denom = ab * total
    factor = (alpha + beta) / denom

    unit_a = a / alpha
    unit_b = b / beta
    # gradients with respect to p, where a = start - p and b = end - p
    grad_ab = -(beta * unit_a + alpha * unit_b)
    grad_total = -(alpha + beta) * (unit_a + unit_b)
    grad_denom = total * grad_ab + ab * grad_total
    grad_factor = -(unit_a + unit_b) / denom - (alpha + beta) * grad_denom / denom**2

    # d(a x b)/dp_j = e_j x (a - b)
    c = a - b
    zero = np.zeros_like(c[..., 0])
    cross_jacobian = np.stack([
        np.stack([zero, c[..., 2], -c[..., 1]], axis=-1),
        np.stack([-c[..., 2], zero, c[..., 0]], axis=-1),
        np.stack([c[..., 1], -c[..., 0], zero], axis=-1),
    ], axis=-2)

    return factor[..., None] * cross_jacobian + cross[..., :, None] * grad_factor[..., None, :]


@dataclass(frozen=True, eq=False)
class WireSegment:
    """Straight current segment; positive current flows from start to end."""

    start: np.ndarray
    end: np.ndarray
    current: float

    def __post_init__(self):
        object.__setattr__(self, "start", _as_vector(self.start))
        object.__setattr__(self, "end", _as_vector(self.end))
        if np.array_equal(self.start, self.end):
            raise ValueError("Wire segment has zero length")
        if not math.isfinite(self.current):
            raise ValueError(f"Non-finite current: {self.current}")


@dataclass(frozen=True, eq=False)
class WireSet:
    """Ordered collection of wire segments; field sums follow this order."""

    segments: tuple[WireSegment, ...]
    starts: np.ndarray = field(init=False, repr=False, compare=False)
    ends: np.ndarray = field(init=False, repr=False, compare=False)
    currents: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        segments = tuple(self.segments)
        object.__setattr__(self, "segments", segments)
        object.__setattr__(self, "starts", np.array([s.start for s in segments]).reshape(-1, 3))
        object.__setattr__(self, "ends", np.array([s.end for s in segments]).reshape(-1, 3))
        object.__setattr__(self, "currents", np.array([s.current for s in segments], dtype=float))

    def __len__(self) -> int:
        return len(self.segments)

    def scaled(self, scale: float) -> "WireSet":
        """All coordinates multiplied by scale, currents unchanged."""
        return WireSet(tuple(WireSegment(s.start * scale, s.end * scale, s.current)
                             for s in self.segments))

    def with_current_factor(self, factor: float) -> "WireSet":
        return WireSet(tuple(WireSegment(s.start, s.end, s.current * factor)
                             for s in self.segments))

    def __add__(self, other: "WireSet") -> "WireSet":
        return WireSet(self.segments + other.segments)


@dataclass(frozen=True, eq=False)
class MagneticMoment:
    """Laboratory-frame magnetic moment (J/T), held fixed by a bias field."""

    vector: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vector", _as_vector(self.vector))

    @classmethod
    def bohr(cls, direction: Sequence[float] = (0.0, 1.0, 0.0), magnetons: float = 1.0) -> "MagneticMoment":
        """Moment of the given size in Bohr magnetons along a (normalised) direction."""
        unit = _as_vector(direction)
        norm = np.linalg.norm(unit)
        if norm == 0.0:
            raise ValueError("Moment direction must be non-zero")
        return cls(unit / norm * magnetons * BOHR_MAGNETON)


def _check_off_wire(points: np.ndarray, wires: WireSet) -> None:
    """Raise SingularityError if any point lies within ON_WIRE_DISTANCE_M of a segment."""
    if len(wires) == 0:
        return
    lengths = wires.ends - wires.starts
    rel = points[:, None, :] - wires.starts[None, :, :]
    t = np.sum(rel * lengths[None], axis=-1) / np.sum(lengths * lengths, axis=-1)[None]
    t = np.clip(t, 0.0, 1.0)
    closest = wires.starts[None] + t[..., None] * lengths[None]
    distance = np.linalg.norm(points[:, None, :] - closest, axis=-1)
    hits = np.argwhere(distance < ON_WIRE_DISTANCE_M)
    if hits.size:
        point_index, segment_index = hits[0]
        raise SingularityError(
            f"On-wire singularity: point {points[point_index]} lies on segment {segment_index}")


def _field_and_jacobian(points: np.ndarray, wires: WireSet, with_jacobian: bool):
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    if not np.all(np.isfinite(points)):
        raise ValueError("Non-finite field point")
    _check_off_wire(points, wires)

    prefactor = MU_0 / (4.0 * math.pi) * wires.currents
    a = wires.starts[None, :, :] - points[:, None, :]
    b = wires.ends[None, :, :] - points[:, None, :]

    field_ = np.einsum("m,pmi->pi", prefactor, edge_kernel(a, b))
    if not with_jacobian:
        return field_, None
    jacobian = np.einsum("m,pmij->pij", prefactor, edge_kernel_jacobian(a, b))
    return field_, jacobian


def segment_field(point, segment: WireSegment) -> np.ndarray:
    """Magnetic field (T) of one finite straight segment at a point."""
    return total_field(point, WireSet((segment,)))


def total_field(point, wires: WireSet) -> np.ndarray:
    """Superposed field (T) of all segments at a point."""
    field_, _ = _field_and_jacobian(point, wires, with_jacobian=False)
    return field_[0]


def field_jacobian(point, wires: WireSet) -> np.ndarray:
    """Field Jacobian J[a, b] = dB_a/dx_b (T/m), analytic."""
    _, jacobian = _field_and_jacobian(point, wires, with_jacobian=True)
    return jacobian[0]


def spin_force(point, wires: WireSet, moment: MagneticMoment) -> np.ndarray:
    """
    State-dependent force F = -grad(mu . B) for a fixed moment.

    Returns:
        Force vector in newtons, F_b = -sum_a mu_a dB_a/dx_b
    """
    return -moment.vector @ field_jacobian(point, wires)


def spin_forces(points, wires: WireSet, moment: MagneticMoment) -> np.ndarray:
    """Forces at several points, shape (P, 3)."""
    _, jacobian = _field_and_jacobian(points, wires, with_jacobian=True)
    return -np.einsum("a,pab->pb", moment.vector, jacobian)


def field_map(points, wires: WireSet, with_jacobian: bool = False):
    """
    Evaluate B (and optionally its Jacobian) on a set of points.

    Args:
        points: Array-like of shape (P, 3)
        wires: Current segments
        with_jacobian: Also return the (P, 3, 3) Jacobians

    Returns:
        (fields, jacobians) where jacobians is None unless requested
    """
    return _field_and_jacobian(points, wires, with_jacobian)


def square_loop(half_side: float, current: float, height: float = 0.0,
                center: Iterable[float] = (0.0, 0.0)) -> WireSet:
    """Counter-clockwise (seen from +z) square loop of four segments."""
    cx, cy = center
    corners = [
        (cx - half_side, cy - half_side, height),
        (cx + half_side, cy - half_side, height),
        (cx + half_side, cy + half_side, height),
        (cx - half_side, cy + half_side, height),
    ]
    return WireSet(tuple(WireSegment(corners[k], corners[(k + 1) % 4], current) for k in range(4)))


def make_concentric_squares(n_loops: int, inner_half_side: float, pitch: float,
                            height: float = 0.0, current: float = 1.0) -> WireSet:
    """
    Concentric coplanar square loops with half-sides a0 + k * pitch.

    Args:
        n_loops: Number of loops (>= 1)
        inner_half_side: Half-side of the innermost loop in meters
        pitch: Half-side increment between loops in meters
        height: z of the loop plane (0 is the trap surface)
        current: Current in every loop, same circulation sense

    Returns:
        WireSet with 4 * n_loops segments
    """
    if n_loops < 1:
        raise ValueError(f"n_loops must be >= 1, got {n_loops}")
    if inner_half_side <= 0 or pitch <= 0:
        raise ValueError(f"Wire dimensions must be positive (a0={inner_half_side}, pitch={pitch})")

    wires = WireSet(())
    for k in range(n_loops):
        wires = wires + square_loop(inner_half_side + k * pitch, current, height)
    logger.debug(f"Built {n_loops} concentric square loops ({len(wires)} segments)")
    return wires


def loops_closed(wires: WireSet, segments_per_loop: int = 4) -> bool:
    """True when every consecutive group of segments forms a closed cycle."""
    if len(wires) % segments_per_loop:
        return False
    for first in range(0, len(wires), segments_per_loop):
        loop = wires.segments[first:first + segments_per_loop]
        for k, segment in enumerate(loop):
            following = loop[(k + 1) % len(loop)]
            if np.linalg.norm(segment.end - following.start) > CLOSURE_TOLERANCE_M:
                return False
    return True
