"""Parametric geometry classes sampled as point clouds with fixed point correspondence.

Every generator places point ``i`` at the same location of a normalized
template, so that vectorized clouds of one class can be compared entry by
entry.  All generators are pure functions of their arguments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

__all__ = [
    "GeometryClassSpec",
    "GeometrySample",
    "CLASSES",
    "get_class",
    "sample_parameters",
    "generate",
    "generate_rectangle",
    "generate_cuboid",
    "generate_helix",
    "generate_simplified_helix",
    "generate_tube",
    "generate_fan_blade",
]

DEFAULT_N_POINTS = 200
SIMPLIFIED_HELIX_TURNS = 5.0


@dataclass(frozen=True)
class GeometryClassSpec:
    """Static description of one geometry class.

    ``ranges`` holds one half-open interval ``[lo, hi)`` per generating
    parameter.  ``fixed_constants`` carries class constants that are not
    sampled (the simplified helix turn count, for instance).
    """

    name: str
    param_names: tuple[str, ...]
    ranges: tuple[tuple[float, float], ...]
    n_points: int = DEFAULT_N_POINTS
    fixed_constants: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.ranges) != len(self.param_names):
            raise ValueError(
                f"{self.name}: {len(self.ranges)} ranges for {len(self.param_names)} parameters"
            )
        for pname, (lo, hi) in zip(self.param_names, self.ranges):
            if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
                raise ValueError(f"{self.name}: degenerate range for {pname}: [{lo}, {hi})")
        if self.n_points < 4:
            raise ValueError(f"{self.name}: n_points must be >= 4, got {self.n_points}")

    @property
    def k(self) -> int:
        return len(self.param_names)

    def with_points(self, n_points: int) -> "GeometryClassSpec":
        return GeometryClassSpec(
            self.name, self.param_names, self.ranges, n_points, dict(self.fixed_constants)
        )

    def contains(self, params: Sequence[float]) -> bool:
        p = np.asarray(params, dtype=np.float64)
        if p.shape != (self.k,):
            return False
        lo, hi = np.array(self.ranges).T
        return bool(np.all((p >= lo) & (p < hi)))


@dataclass(frozen=True)
class GeometrySample:
    cloud: np.ndarray  # (n, 3)
    params: np.ndarray  # (k,)


def _as_nonneg(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise ValueError(f"{name} must be a finite non-negative number, got {value}")
    return value


def _check_n(n: int) -> int:
    if int(n) != n or n < 4:
        raise ValueError(f"point count must be an integer >= 4, got {n}")
    return int(n)


# --------------------------------------------------------------------------
# parameter sampling
# --------------------------------------------------------------------------

def sample_parameters(spec: GeometryClassSpec, seed: int, count: int) -> np.ndarray:
    """Draw ``count`` parameter vectors uniformly from the class ranges.

    Draw ``i`` is generated from its own stream keyed by ``(seed, i)``, so a
    coordinate depends only on ``(seed, i, j)`` and not on ``count``.
    Returns an array of shape ``(count, k)``.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    seed = _check_seed(seed)
    lo, hi = np.array(spec.ranges, dtype=np.float64).T
    out = np.empty((count, spec.k), dtype=np.float64)
    for i in range(count):
        u = np.random.default_rng([seed, i]).random(spec.k)
        out[i] = lo + (hi - lo) * u
    # lo + (hi - lo) * u may round up onto hi
    return np.minimum(out, np.nextafter(hi, lo))


def _check_seed(seed: int) -> int:
    if int(seed) != seed or not 0 <= seed < 2**64:
        raise ValueError(f"seed must be an integer in [0, 2**64), got {seed}")
    return int(seed)


# --------------------------------------------------------------------------
# templates
# --------------------------------------------------------------------------

def rectangle_template(n: int) -> np.ndarray:
    """Perimeter of the unit square centered at the origin, counterclockwise from (-1/2, -1/2)."""
    n = _check_n(n)
    if n % 4:
        raise ValueError(f"rectangle point count must be divisible by 4, got {n}")
    per_edge = n // 4
    t = np.arange(per_edge) / per_edge
    corners = np.array([[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]])
    edges = [corners[e] + t[:, None] * (corners[(e + 1) % 4] - corners[e]) for e in range(4)]
    xy = np.concatenate(edges)
    return np.column_stack([xy, np.zeros(n)])


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def cuboid_template(n: int) -> np.ndarray:
    """Surface of the unit cube centered at the origin.

    Points are split over the six faces as evenly as possible (earlier faces
    take the remainder) and laid out on a rank-1 lattice inside each face.
    """
    n = _check_n(n)
    counts = [n // 6 + (1 if f < n % 6 else 0) for f in range(6)]
    blocks = []
    for face, c in enumerate(counts):
        if c == 0:
            continue
        i = np.arange(c)
        u = (i + 0.5) / c - 0.5
        v = np.mod(i * _GOLDEN + 0.5 / c, 1.0) - 0.5
        axis, sign = divmod(face, 2)
        pts = np.empty((c, 3))
        pts[:, axis] = 0.5 if sign == 0 else -0.5
        others = [a for a in range(3) if a != axis]
        pts[:, others[0]] = u
        pts[:, others[1]] = v
        blocks.append(pts)
    return np.concatenate(blocks)


def _ring_layout(n: int) -> tuple[int, int]:
    """Split ``n`` into ``rings * per_ring`` with ``rings`` the largest divisor <= sqrt(n)."""
    rings = max(d for d in range(1, math.isqrt(n) + 1) if n % d == 0)
    return rings, n // rings


# --------------------------------------------------------------------------
# simple classes (linear in their parameters)
# --------------------------------------------------------------------------

def generate_rectangle(a: float, b: float, n: int = DEFAULT_N_POINTS) -> np.ndarray:
    a = _as_nonneg("a", a)
    b = _as_nonneg("b", b)
    return rectangle_template(n) * np.array([a, b, 0.0])


def generate_cuboid(a: float, b: float, c: float, n: int = DEFAULT_N_POINTS) -> np.ndarray:
    scale = np.array([_as_nonneg("a", a), _as_nonneg("b", b), _as_nonneg("c", c)])
    return cuboid_template(n) * scale


def generate_helix(r: float, h: float, turns: float, n: int = DEFAULT_N_POINTS) -> np.ndarray:
    """Helix ``(r cos 2*pi*turns*s, r sin 2*pi*turns*s, h*s)`` sampled at ``s = i/(n-1)``."""
    r = _as_nonneg("r", r)
    h = _as_nonneg("h", h)
    turns = _as_nonneg("turns", turns)
    n = _check_n(n)
    s = np.arange(n) / (n - 1)
    angle = 2.0 * np.pi * turns * s
    return np.column_stack([r * np.cos(angle), r * np.sin(angle), h * s])


def generate_simplified_helix(r: float, h: float, n: int = DEFAULT_N_POINTS) -> np.ndarray:
    return generate_helix(r, h, SIMPLIFIED_HELIX_TURNS, n)


# --------------------------------------------------------------------------
# tube surrogate
# --------------------------------------------------------------------------

TUBE_PARAMS = (
    "circle_x", "circle_y", "circle_z", "radius",
    "rect_dx", "rect_dy", "width", "height", "corner_radius",
    "length", "bend_x", "bend_y", "twist", "rect_rotation",
)


def rounded_rectangle_radius(phi: np.ndarray, width: float, height: float, corner: float) -> np.ndarray:
    """Distance from the center to a rounded-rectangle boundary along direction ``phi``."""
    half_w, half_h = width / 2.0, height / 2.0
    inner_w, inner_h = half_w - corner, half_h - corner
    c = np.abs(np.cos(phi))
    s = np.abs(np.sin(phi))
    with np.errstate(divide="ignore", invalid="ignore"):
        t_side = np.where(c > 0, half_w / c, np.inf)
        t_top = np.where(s > 0, half_h / s, np.inf)
    on_side = t_side * s <= inner_h
    on_top = t_top * c <= inner_w
    proj = inner_w * c + inner_h * s
    disc = np.maximum(proj**2 - (inner_w**2 + inner_h**2 - corner**2), 0.0)
    t_corner = proj + np.sqrt(disc)
    return np.where(on_side, t_side, np.where(on_top, t_top, t_corner))


def generate_tube(params: Sequence[float], n: int = DEFAULT_N_POINTS) -> np.ndarray:
    """Loft from a circle to a rounded rectangle along a bent, twisted spine.

    Parameters, in order (see ``TUBE_PARAMS``):

    * ``circle_x, circle_y, circle_z``: center of the circular end.
    * ``radius``: circle radius.
    * ``rect_dx, rect_dy``: lateral offset of the rectangular end from the circle.
    * ``width, height, corner_radius``: rounded-rectangle section.
    * ``length``: axial distance between the ends (along z).
    * ``bend_x, bend_y``: mid-span lateral spine displacement (quadratic bump).
    * ``twist``: wall rotation accumulated from the circular to the rectangular end.
    * ``rect_rotation``: in-plane orientation of the rectangular section.

    Rings are sampled at equal spine fractions, each with the same number of
    points at equal polar angles.
    """
    p = np.asarray(params, dtype=np.float64)
    if p.shape != (14,):
        raise ValueError(f"tube expects 14 parameters, got shape {p.shape}")
    cx, cy, cz, radius, dx, dy, width, height, corner, length, bx, by, twist, rot = p
    if radius <= 0 or width <= 0 or height <= 0:
        raise ValueError("tube radius, width and height must be positive")
    if corner < 0 or corner > min(width, height) / 2:
        raise ValueError("tube corner radius must lie in [0, min(width, height)/2]")
    if length < 0:
        raise ValueError("tube length must be non-negative")
    n = _check_n(n)
    rings, per_ring = _ring_layout(n)

    s = np.arange(rings) / max(rings - 1, 1)
    phi = 2.0 * np.pi * np.arange(per_ring) / per_ring
    circle = np.column_stack([radius * np.cos(phi), radius * np.sin(phi)])
    rho = rounded_rectangle_radius(phi - rot, width, height, corner)
    rect = np.column_stack([rho * np.cos(phi), rho * np.sin(phi)])

    bump = 4.0 * s * (1.0 - s)
    centers = np.column_stack([cx + dx * s + bx * bump, cy + dy * s + by * bump, cz + length * s])
    out = np.empty((rings, per_ring, 3))
    for j in range(rings):
        section = (1.0 - s[j]) * circle + s[j] * rect
        ca, sa = math.cos(twist * s[j]), math.sin(twist * s[j])
        out[j, :, 0] = centers[j, 0] + ca * section[:, 0] - sa * section[:, 1]
        out[j, :, 1] = centers[j, 1] + sa * section[:, 0] + ca * section[:, 1]
        out[j, :, 2] = centers[j, 2]
    return out.reshape(n, 3)


# --------------------------------------------------------------------------
# fan blade surrogate
# --------------------------------------------------------------------------

FAN_BLADE_PARAMS = (
    "root_chord", "tip_chord", "root_thickness", "tip_thickness",
    "root_camber", "tip_camber", "root_twist", "tip_twist",
    "span", "sweep", "lean", "hub_radius",
)


def _half_thickness(u: np.ndarray) -> np.ndarray:
    # 4-digit airfoil thickness law with closed trailing edge, unit thickness ratio
    return 5.0 * (0.2969 * np.sqrt(u) - 0.1260 * u - 0.3516 * u**2 + 0.2843 * u**3 - 0.1036 * u**4)


def generate_fan_blade(params: Sequence[float], n: int = DEFAULT_N_POINTS) -> np.ndarray:
    """Stack of cambered airfoil sections between hub and tip.

    Parameters, in order (see ``FAN_BLADE_PARAMS``): root/tip chord,
    root/tip thickness ratio, root/tip camber ratio, root/tip twist angle,
    span, sweep offset (x at the tip), lean offset (y at the tip) and hub
    radius (z of the root section).  Section properties vary linearly from
    root to tip; sweep and lean grow quadratically with the span fraction.
    """
    p = np.asarray(params, dtype=np.float64)
    if p.shape != (12,):
        raise ValueError(f"fan blade expects 12 parameters, got shape {p.shape}")
    c0, c1, t0, t1, m0, m1, w0, w1, span, sweep, lean, hub = p
    if c0 <= 0 or c1 <= 0:
        raise ValueError("fan blade chords must be positive")
    if span < 0:
        raise ValueError("fan blade span must be non-negative")
    n = _check_n(n)
    sections, per_section = _ring_layout(n)

    beta = 2.0 * np.pi * np.arange(per_section) / per_section
    u = 0.5 * (1.0 + np.cos(beta))
    side = np.sign(np.sin(beta))
    s_all = np.arange(sections) / max(sections - 1, 1)
    out = np.empty((sections, per_section, 3))
    for j, s in enumerate(s_all):
        chord = c0 + (c1 - c0) * s
        thick = t0 + (t1 - t0) * s
        camber = m0 + (m1 - m0) * s
        twist = w0 + (w1 - w0) * s
        x = (u - 0.5) * chord
        y = chord * (4.0 * camber * u * (1.0 - u) + side * thick * _half_thickness(u))
        ca, sa = math.cos(twist), math.sin(twist)
        out[j, :, 0] = ca * x - sa * y + sweep * s * s
        out[j, :, 1] = sa * x + ca * y + lean * s * s
        out[j, :, 2] = hub + span * s
    return out.reshape(n, 3)


# --------------------------------------------------------------------------
# registry
# --------------------------------------------------------------------------

_GENERATORS: dict[str, Callable[[np.ndarray, int], np.ndarray]] = {
    "rectangle": lambda p, n: generate_rectangle(p[0], p[1], n),
    "cuboid": lambda p, n: generate_cuboid(p[0], p[1], p[2], n),
    "simplified_helix": lambda p, n: generate_simplified_helix(p[0], p[1], n),
    "helix": lambda p, n: generate_helix(p[0], p[1], p[2], n),
    "fan_blade": lambda p, n: generate_fan_blade(p, n),
    "tube": lambda p, n: generate_tube(p, n),
}

_TEN = (0.0, 10.0)

CLASSES: dict[str, GeometryClassSpec] = {
    "rectangle": GeometryClassSpec("rectangle", ("a", "b"), (_TEN, _TEN)),
    "cuboid": GeometryClassSpec("cuboid", ("a", "b", "c"), (_TEN, _TEN, _TEN)),
    "simplified_helix": GeometryClassSpec(
        "simplified_helix", ("r", "h"), (_TEN, _TEN),
        fixed_constants={"turns": SIMPLIFIED_HELIX_TURNS},
    ),
    "helix": GeometryClassSpec("helix", ("r", "h", "turns"), (_TEN, _TEN, (0.0, 5.0))),
    "fan_blade": GeometryClassSpec(
        "fan_blade",
        FAN_BLADE_PARAMS,
        (
            (2.0, 4.0), (1.0, 2.5), (0.08, 0.15), (0.04, 0.10),
            (0.0, 0.08), (0.0, 0.06), (0.0, 0.6), (0.4, 1.2),
            (5.0, 10.0), (-1.0, 1.0), (-1.0, 1.0), (0.5, 2.0),
        ),
    ),
    "tube": GeometryClassSpec(
        "tube",
        TUBE_PARAMS,
        (
            (-2.0, 2.0), (-2.0, 2.0), (-2.0, 2.0), (1.0, 3.0),
            (-2.0, 2.0), (-2.0, 2.0), (2.0, 6.0), (2.0, 6.0), (0.1, 1.0),
            (5.0, 15.0), (-2.0, 2.0), (-2.0, 2.0), (0.0, np.pi / 2), (0.0, np.pi / 4),
        ),
    ),
}

FIRST_SET = ("rectangle", "cuboid", "simplified_helix")
SECOND_SET = ("helix", "fan_blade", "tube")


def get_class(name: str) -> GeometryClassSpec:
    try:
        return CLASSES[name]
    except KeyError:
        raise KeyError(f"unknown geometry class {name!r}; known: {', '.join(CLASSES)}") from None


def generate(spec: GeometryClassSpec, params: Sequence[float]) -> np.ndarray:
    """Point cloud of shape ``(spec.n_points, 3)`` for one parameter vector."""
    p = np.asarray(params, dtype=np.float64)
    if p.shape != (spec.k,):
        raise ValueError(f"{spec.name} expects {spec.k} parameters, got shape {p.shape}")
    return _GENERATORS[spec.name](p, spec.n_points)
