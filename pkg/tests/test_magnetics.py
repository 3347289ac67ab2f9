import math

import numpy as np
import pytest

from constants import BOHR_MAGNETON, MU_0
from errors import SingularityError
from magnetics import (MagneticMoment, WireSegment, WireSet, field_jacobian, field_map, loops_closed,
                       make_concentric_squares, segment_field, spin_force, spin_forces, square_loop, total_field)


def square_axis_field(half_side, current, z):
    """Bz on the axis of a square loop of half-side h."""
    h2 = half_side**2
    return 2.0 * MU_0 * current * h2 / (math.pi * (h2 + z**2) * math.sqrt(2.0 * h2 + z**2))


@pytest.fixture
def wires():
    return make_concentric_squares(3, 0.15e-3, 0.15e-3, height=0.0, current=1.0)


@pytest.fixture
def field_points():
    rng = np.random.default_rng(11)
    xy = rng.uniform(-0.8e-3, 0.8e-3, size=(100, 2))
    z = rng.uniform(0.05e-3, 1e-3, size=(100, 1))
    return np.hstack([xy, z])


class TestSegmentField:
    def test_finite_segment(self):
        half_length, r, current = 2.0, 0.5, 3.0
        segment = WireSegment((-half_length, 0, 0), (half_length, 0, 0), current)
        expected = MU_0 * current / (4 * math.pi * r) * 2 * half_length / math.hypot(half_length, r)
        np.testing.assert_allclose(segment_field((0, 0, r), segment), [0.0, -expected, 0.0],
                                   rtol=1e-13, atol=1e-25)

    def test_long_segment_matches_infinite_wire(self):
        r = 1e-3
        segment = WireSegment((-1e5 * r, 0, 0), (1e5 * r, 0, 0), 1.0)
        field = segment_field((0, 0, r), segment)
        assert -field[1] == pytest.approx(MU_0 / (2 * math.pi * r), rel=1e-9)

    def test_collinear_point_sees_no_field(self):
        segment = WireSegment((-1.0, 0, 0), (1.0, 0, 0), 1.0)
        np.testing.assert_array_equal(segment_field((3.0, 0, 0), segment), np.zeros(3))

    def test_current_reversal(self):
        forward = WireSegment((0, 0, 0), (1e-3, 2e-4, 0), 0.7)
        backward = WireSegment((1e-3, 2e-4, 0), (0, 0, 0), 0.7)
        point = (3e-4, -1e-4, 5e-4)
        np.testing.assert_allclose(segment_field(point, backward), -segment_field(point, forward), rtol=1e-13)

    def test_zero_length_segment(self):
        with pytest.raises(ValueError):
            WireSegment((1, 2, 3), (1, 2, 3), 1.0)

    def test_point_on_wire(self):
        segment = WireSegment((-1.0, 0, 0), (1.0, 0, 0), 1.0)
        with pytest.raises(SingularityError):
            segment_field((0.25, 0, 0), segment)
        with pytest.raises(SingularityError):
            segment_field((1.0, 0, 0), segment)

    def test_non_finite_point(self):
        with pytest.raises(ValueError):
            total_field((np.nan, 0, 1), square_loop(1.0, 1.0))


class TestSquareLoops:
    def test_center_field(self):
        field = total_field((0, 0, 0), square_loop(1.0, 1.0))
        np.testing.assert_allclose(field, [0.0, 0.0, math.sqrt(2) * MU_0 / math.pi], rtol=1e-13, atol=1e-20)

    @pytest.mark.parametrize("z", [1e-4, 3e-4, 1e-3, 5e-3])
    def test_axis_field(self, z):
        h = 0.15e-3
        field = total_field((0, 0, z), square_loop(h, 2.0))
        assert field[2] == pytest.approx(square_axis_field(h, 2.0, z), rel=1e-12)
        assert abs(field[0]) < 1e-12 * field[2] and abs(field[1]) < 1e-12 * field[2]

    def test_concentric_squares(self, wires):
        assert len(wires) == 12
        assert loops_closed(wires)
        z = 1e-3
        expected = sum(square_axis_field(0.15e-3 * (k + 1), 1.0, z) for k in range(3))
        assert total_field((0, 0, z), wires)[2] == pytest.approx(expected, rel=1e-12)

    def test_open_chain_is_not_closed(self):
        segments = (WireSegment((0, 0, 0), (1, 0, 0), 1.0), WireSegment((1, 0, 0), (1, 1, 0), 1.0),
                    WireSegment((1, 1, 0), (0, 1, 0), 1.0), WireSegment((0, 1, 0), (0, 0.5, 0), 1.0))
        assert not loops_closed(WireSet(segments))
        assert not loops_closed(WireSet(segments[:3]))

    @pytest.mark.parametrize("n_loops,inner,pitch", [(0, 1e-4, 1e-4), (2, 0.0, 1e-4), (2, 1e-4, -1e-4)])
    def test_invalid_dimensions(self, n_loops, inner, pitch):
        with pytest.raises(ValueError):
            make_concentric_squares(n_loops, inner, pitch)


class TestFieldJacobian:
    def test_divergence_and_curl_free(self, wires, field_points):
        _, jacobians = field_map(field_points, wires, with_jacobian=True)
        for jacobian in jacobians:
            size = np.abs(jacobian).max()
            assert abs(np.trace(jacobian)) < 1e-9 * size
            np.testing.assert_allclose(jacobian, jacobian.T, atol=1e-9 * size)

    def test_matches_five_point_differences(self, wires, field_points):
        h = 1e-7
        for point in field_points:
            numeric = np.column_stack([
                (-total_field(point + 2 * h * e, wires) + 8 * total_field(point + h * e, wires)
                 - 8 * total_field(point - h * e, wires) + total_field(point - 2 * h * e, wires)) / (12 * h)
                for e in np.eye(3)
            ])
            analytic = field_jacobian(point, wires)
            np.testing.assert_allclose(analytic, numeric, rtol=1e-7, atol=1e-7 * np.abs(analytic).max())

    def test_long_segment_gradient_matches_infinite_wire(self):
        r = 1e-3
        segment = WireSet((WireSegment((-1e5 * r, 0, 0), (1e5 * r, 0, 0), 1.0),))
        jacobian = field_jacobian((0, 0, r), segment)
        expected = MU_0 / (2 * math.pi * r**2)
        assert jacobian[1, 2] == pytest.approx(expected, rel=1e-9)
        assert jacobian[2, 1] == pytest.approx(expected, rel=1e-9)

    def test_field_map_shapes(self, wires, field_points):
        fields, jacobians = field_map(field_points, wires)
        assert fields.shape == (100, 3)
        assert jacobians is None
        np.testing.assert_allclose(fields[7], total_field(field_points[7], wires), rtol=1e-14)


class TestSpinForce:
    def test_axis_force_from_field_gradient(self):
        h, z, dz = 0.15e-3, 0.4e-3, 1e-8
        moment = MagneticMoment.bohr((0, 1, 0))
        force = spin_force((0, 0, z), square_loop(h, 1.0), moment)
        dbz_dz = (square_axis_field(h, 1.0, z + dz) - square_axis_field(h, 1.0, z - dz)) / (2 * dz)
        assert force[1] == pytest.approx(0.5 * BOHR_MAGNETON * dbz_dz, rel=1e-6)

    def test_zero_current(self, field_points):
        wires = make_concentric_squares(2, 1e-4, 1e-4, current=0.0)
        forces = spin_forces(field_points, wires, MagneticMoment.bohr())
        np.testing.assert_array_equal(forces, np.zeros_like(forces))

    def test_force_is_linear_in_current(self, wires, field_points):
        moment = MagneticMoment.bohr((1, 1, 0))
        single = spin_forces(field_points, wires, moment)
        double = spin_forces(field_points, wires.with_current_factor(2.0), moment)
        np.testing.assert_allclose(double, 2.0 * single, rtol=1e-14)

    def test_matches_pointwise_force(self, wires, field_points):
        moment = MagneticMoment.bohr((0, 0, 1), magnetons=2.0)
        forces = spin_forces(field_points[:5], wires, moment)
        for point, force in zip(field_points[:5], forces):
            np.testing.assert_allclose(force, spin_force(point, wires, moment), rtol=1e-14)

    def test_bohr_moment(self):
        moment = MagneticMoment.bohr((0, 3, 4))
        np.testing.assert_allclose(moment.vector, [0, 0.6 * BOHR_MAGNETON, 0.8 * BOHR_MAGNETON], rtol=1e-15)
        with pytest.raises(ValueError):
            MagneticMoment.bohr((0, 0, 0))


class TestWireSetInvariants:
    def test_superposition(self, field_points):
        inner = square_loop(1e-4, 1.0)
        outer = square_loop(3e-4, -0.5, height=-2e-5)
        for point in field_points[:10]:
            combined = total_field(point, inner + outer)
            np.testing.assert_allclose(combined, total_field(point, inner) + total_field(point, outer),
                                       rtol=1e-12, atol=1e-14 * np.abs(combined).max())

    def test_refined_segment_gives_same_field(self):
        start, end = np.array([-1e-3, -2e-4, 0.0]), np.array([1e-3, 3e-4, 0.0])
        knots = start + np.linspace(0.0, 1.0, 1001)[:, None] * (end - start)
        pieces = WireSet(tuple(WireSegment(knots[k], knots[k + 1], 1.5) for k in range(1000)))
        point = (1e-4, 5e-4, 2e-4)
        np.testing.assert_allclose(total_field(point, pieces), segment_field(point, WireSegment(start, end, 1.5)),
                                   rtol=1e-9)

    @pytest.mark.parametrize("scale", [3.0, 1e-3])
    def test_geometric_scaling(self, wires, field_points, scale):
        bigger = wires.scaled(scale)
        moment = MagneticMoment.bohr((0, 1, 0))
        for point in field_points[:10]:
            field = total_field(point, wires)
            np.testing.assert_allclose(total_field(scale * point, bigger), field / scale,
                                       rtol=1e-12, atol=1e-12 * np.abs(field).max() / scale)
            jacobian = field_jacobian(point, wires)
            np.testing.assert_allclose(field_jacobian(scale * point, bigger), jacobian / scale**2,
                                       rtol=1e-12, atol=1e-12 * np.abs(jacobian).max() / scale**2)
            force = spin_force(point, wires, moment)
            np.testing.assert_allclose(spin_force(scale * point, bigger, moment), force / scale**2,
                                       rtol=1e-12, atol=1e-12 * np.abs(force).max() / scale**2)

    def test_empty_wire_set(self):
        np.testing.assert_array_equal(total_field((0, 0, 1), WireSet(())), np.zeros(3))
