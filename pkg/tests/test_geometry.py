import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geopca.geometry import (CLASSES, GeometryClassSpec, cuboid_template, generate,
                             generate_cuboid, generate_fan_blade, generate_helix,
                             generate_rectangle, generate_simplified_helix, generate_tube,
                             rectangle_template, rounded_rectangle_radius, sample_parameters)

dims = st.floats(min_value=0.0, max_value=10.0, allow_nan=False)
coef = st.floats(min_value=0.0, max_value=3.0, allow_nan=False)


# ---------------------------------------------------------------- sampling

def test_sample_parameters_in_range():
    spec = CLASSES["rectangle"]
    P = sample_parameters(spec, 7, 2000)
    assert P.shape == (2000, 2)
    assert np.all(P >= 0.0) and np.all(P < 10.0)


@pytest.mark.parametrize("name", list(CLASSES))
def test_sample_parameters_respects_every_class_range(name):
    spec = CLASSES[name]
    P = sample_parameters(spec, 3, 500)
    assert all(spec.contains(p) for p in P)


def test_sample_parameters_deterministic():
    spec = CLASSES["helix"]
    np.testing.assert_array_equal(sample_parameters(spec, 11, 1), sample_parameters(spec, 11, 1))


def test_sample_parameters_is_pure_in_index():
    spec = CLASSES["tube"]
    np.testing.assert_array_equal(sample_parameters(spec, 5, 10)[:4], sample_parameters(spec, 5, 4))
    assert not np.array_equal(sample_parameters(spec, 5, 4), sample_parameters(spec, 6, 4))


def test_sample_parameters_rejects_bad_arguments():
    with pytest.raises(ValueError):
        sample_parameters(CLASSES["rectangle"], 1, 0)
    with pytest.raises(ValueError):
        sample_parameters(CLASSES["rectangle"], -1, 3)


def test_degenerate_range_rejected():
    with pytest.raises(ValueError):
        GeometryClassSpec("bad", ("a",), ((1.0, 1.0),))
    with pytest.raises(ValueError):
        GeometryClassSpec("bad", ("a", "b"), ((0.0, 1.0),))
    with pytest.raises(ValueError):
        GeometryClassSpec("bad", ("a",), ((0.0, 1.0),), n_points=3)


# ---------------------------------------------------------------- rectangle

def test_rectangle_degenerate_is_origin():
    np.testing.assert_array_equal(generate_rectangle(0, 0, 200), np.zeros((200, 3)))


def test_rectangle_perimeter_bounds():
    G = generate_rectangle(2, 4, 200)
    assert np.all(np.abs(G[:, 0]) <= 1) and np.all(np.abs(G[:, 1]) <= 2)
    assert np.all(G[:, 2] == 0)
    on_edge = np.isclose(np.abs(G[:, 0]), 1) | np.isclose(np.abs(G[:, 1]), 2)
    assert on_edge.all()


def test_rectangle_eight_points_hand_enumerated():
    # corners and edge midpoints, counterclockwise from (-1, -1)
    expected = np.array([
        [-1, -1, 0], [0, -1, 0], [1, -1, 0], [1, 0, 0],
        [1, 1, 0], [0, 1, 0], [-1, 1, 0], [-1, 0, 0],
    ], dtype=float)
    np.testing.assert_array_equal(generate_rectangle(2, 2, 8), expected)


def test_rectangle_rejects_bad_input():
    with pytest.raises(ValueError):
        generate_rectangle(-1, 1, 8)
    with pytest.raises(ValueError):
        generate_rectangle(1, 1, 10)


# ---------------------------------------------------------------- cuboid

@pytest.mark.parametrize("n", [6, 7, 200, 203])
def test_unit_cuboid_on_surface(n):
    G = generate_cuboid(1, 1, 1, n)
    assert G.shape == (n, 3)
    np.testing.assert_allclose(np.max(np.abs(G), axis=1), 0.5, rtol=0, atol=0)


def test_cuboid_axis_scaling():
    G1 = generate_cuboid(1.5, 2.0, 3.0)
    G2 = generate_cuboid(3.0, 2.0, 3.0)
    np.testing.assert_array_equal(G2[:, 0], 2 * G1[:, 0])
    np.testing.assert_array_equal(G2[:, 1:], G1[:, 1:])


def test_cuboid_negative_rejected():
    with pytest.raises(ValueError):
        generate_cuboid(1, -2, 1)


# ---------------------------------------------------------------- helix

def test_helix_first_point():
    np.testing.assert_allclose(generate_helix(1, 0, 1, 10)[0], [1, 0, 0], atol=0)


def test_helix_zero_radius_on_axis():
    G = generate_helix(0, 5, 3.3, 50)
    assert np.all(G[:, :2] == 0)
    assert G[:, 2].min() == 0 and G[:, 2].max() == 5


def test_helix_quarter_point_hand_evaluated():
    # s = 1/4 is index 1 of 5 points: (cos(pi/2), sin(pi/2), 4/4)
    np.testing.assert_allclose(generate_helix(1, 4, 1, 5)[1], [0, 1, 1], atol=1e-15)


def test_simplified_helix_is_five_turns():
    np.testing.assert_array_equal(generate_simplified_helix(2.5, 7.0), generate_helix(2.5, 7.0, 5))


def test_simplified_helix_radius_scaling():
    G1, G2 = generate_simplified_helix(1.25, 3.0), generate_simplified_helix(2.5, 3.0)
    np.testing.assert_array_equal(G2[:, :2], 2 * G1[:, :2])
    np.testing.assert_array_equal(G2[:, 2], G1[:, 2])


# ---------------------------------------------------------------- linearity

@settings(max_examples=40, deadline=None)
@given(p1=st.tuples(dims, dims, dims), p2=st.tuples(dims, dims, dims), a=coef, b=coef,
       name=st.sampled_from(["rectangle", "cuboid", "simplified_helix"]))
def test_linear_classes(p1, p2, a, b, name):
    spec = CLASSES[name]
    p1, p2 = np.array(p1[:spec.k]), np.array(p2[:spec.k])
    lhs = generate(spec, a * p1 + b * p2)
    rhs = a * generate(spec, p1) + b * generate(spec, p2)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


def test_correspondence_at_canonical_parameters():
    np.testing.assert_array_equal(generate_rectangle(1, 1), rectangle_template(200))
    np.testing.assert_array_equal(generate_cuboid(1, 1, 1), cuboid_template(200))


# ---------------------------------------------------------------- tube

def _tube(**kw):
    base = dict(circle_x=0.0, circle_y=0.0, circle_z=0.0, radius=1.5, rect_dx=0.0, rect_dy=0.0,
                width=3.0, height=3.0, corner_radius=1.5, length=10.0, bend_x=0.0, bend_y=0.0,
                twist=0.0, rect_rotation=0.0)
    base.update(kw)
    return np.array(list(base.values()))


def test_rounded_rectangle_radius_limits():
    phi = np.linspace(0, 2 * np.pi, 37)
    np.testing.assert_allclose(rounded_rectangle_radius(phi, 2.0, 2.0, 1.0), 1.0, rtol=1e-14)
    # sharp square: axis directions hit the sides, diagonals the corners
    np.testing.assert_allclose(rounded_rectangle_radius(np.array([0.0, np.pi / 4]), 2.0, 2.0, 0.0),
                               [1.0, np.sqrt(2)], rtol=1e-14)
    # long rectangle: along y the half-height
    np.testing.assert_allclose(rounded_rectangle_radius(np.array([np.pi / 2]), 6.0, 2.0, 0.5), [1.0])


def test_tube_cylinder_limit():
    G = generate_tube(_tube()).reshape(10, 20, 3)
    for ring in G:
        np.testing.assert_allclose(ring[:, :2], G[0, :, :2], atol=1e-13)
    np.testing.assert_allclose(np.hypot(G[..., 0], G[..., 1]), 1.5, rtol=1e-13)


def test_tube_zero_length_coplanar():
    G = generate_tube(_tube(length=0.0, circle_z=1.2, bend_x=1.0, twist=0.7))
    assert np.all(G[:, 2] == 1.2)


def test_tube_deterministic():
    p = sample_parameters(CLASSES["tube"], 1, 1)[0]
    np.testing.assert_array_equal(generate_tube(p), generate_tube(p))


@pytest.mark.parametrize("kw", [dict(radius=0.0), dict(width=-1.0), dict(height=0.0),
                                dict(corner_radius=2.0)])
def test_tube_domain_errors(kw):
    with pytest.raises(ValueError):
        generate_tube(_tube(**kw))


# ---------------------------------------------------------------- fan blade

def _blade(**kw):
    base = dict(root_chord=3.0, tip_chord=3.0, root_thickness=0.1, tip_thickness=0.1,
                root_camber=0.04, tip_camber=0.04, root_twist=0.0, tip_twist=0.0,
                span=8.0, sweep=0.0, lean=0.0, hub_radius=1.0)
    base.update(kw)
    return np.array(list(base.values()))


def test_fan_blade_prismatic_limit():
    G = generate_fan_blade(_blade()).reshape(10, 20, 3)
    for j, sec in enumerate(G):
        np.testing.assert_array_equal(sec[:, :2], G[0, :, :2])
        np.testing.assert_allclose(sec[:, 2], 1.0 + 8.0 * j / 9, rtol=1e-15)


def test_fan_blade_zero_span_coplanar():
    G = generate_fan_blade(_blade(span=0.0, tip_twist=0.5, sweep=0.3))
    assert np.all(G[:, 2] == 1.0)


def test_fan_blade_deterministic():
    p = sample_parameters(CLASSES["fan_blade"], 2, 1)[0]
    np.testing.assert_array_equal(generate_fan_blade(p), generate_fan_blade(p))


@pytest.mark.parametrize("kw", [dict(root_chord=0.0), dict(tip_chord=-1.0), dict(span=-0.5)])
def test_fan_blade_domain_errors(kw):
    with pytest.raises(ValueError):
        generate_fan_blade(_blade(**kw))


@pytest.mark.parametrize("name", list(CLASSES))
def test_every_class_yields_finite_clouds(name):
    spec = CLASSES[name]
    for p in sample_parameters(spec, 9, 20):
        G = generate(spec, p)
        assert G.shape == (spec.n_points, 3) and np.all(np.isfinite(G))
