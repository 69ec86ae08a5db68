import math

import numpy as np
import pytest

from knotenergy.catalog import build, circle
from knotenergy.geometry import PolyKnot, normalize_length, resample_arclength
from knotenergy.mm import (
    MmProfile,
    blowup_probe,
    check_obtuse,
    distance_profile,
    e_mm,
    f_mm,
    f_mm_polyline,
)

from conftest import random_rotation


def perturbed_circle(rng, m=32, amp=0.02):
    t = np.arange(m) * (2 * np.pi / m)
    pts = np.c_[np.cos(t), np.sin(t), np.zeros(m)] + amp * rng.normal(size=(m, 3))
    return PolyKnot(pts)


def dense_f(knot, vertex, per_edge=4000):
    """f_Mm at a vertex from a densely sampled profile (oracle)."""
    v = np.roll(knot.vertices, -vertex, axis=0)
    nxt = np.roll(v, -1, axis=0)
    s = np.arange(per_edge) / per_edge
    pts = (v[:, None, :] + s[None, :, None] * (nxt - v)[:, None, :]).reshape(-1, 3)
    rho = np.linalg.norm(pts - v[0], axis=1)[1:]
    inner = rho[1:-1]
    is_max = (inner > rho[:-2]) & (inner >= rho[2:])
    is_min = (inner < rho[:-2]) & (inner <= rho[2:])
    return 2 / rho.max() + np.sum(1 / inner[is_min]) - np.sum(1 / inner[is_max])


def test_circle_value():
    assert e_mm(circle(512)).value == pytest.approx(math.pi, abs=1e-3)
    curve = resample_arclength(circle(4096), 512)
    assert e_mm(curve).value == pytest.approx(math.pi, abs=1e-3)


def test_profile_matches_dense_sampling():
    rng = np.random.default_rng(11)
    for _ in range(5):
        knot = perturbed_circle(rng, 12, 0.05)
        assert check_obtuse(knot).valid
        for vert in (0, 5):
            exact = f_mm(distance_profile(knot, vert))
            assert exact == pytest.approx(dense_f(knot, vert), rel=1e-4)


def test_vectorized_matches_profile():
    rng = np.random.default_rng(12)
    knot = perturbed_circle(rng, 20, 0.08)
    cum = np.concatenate([[0.0], np.cumsum(knot.edge_lengths)])
    base = cum[:-1] + 0.37 * knot.edge_lengths
    vec = f_mm_polyline(knot, base)
    one = [f_mm(distance_profile(knot, (i, 0.37))) for i in range(20)]
    np.testing.assert_allclose(vec, one, rtol=1e-12)


def test_profile_structure():
    rng = np.random.default_rng(13)
    knot = normalize_length(build("torus(2,3)", 64))[0]
    for i in range(0, 64, 7):
        prof = distance_profile(knot, i)
        kinds = [x.kind for x in prof.extrema]
        assert kinds.count("min") == kinds.count("max")
        assert all(a != b for a, b in zip(kinds, kinds[1:] + kinds[:1]))
        assert all(x.value <= knot.length / 2 + 1e-9 for x in prof.extrema)
        assert prof.extrema[0].value == 0.0 and prof.extrema[0].position == pytest.approx(prof.base)
        assert f_mm(prof) >= 1 / prof.global_max - 1e-12


def test_circle_profile_single_antipodal_max():
    curve = resample_arclength(circle(1024), 64)
    prof = distance_profile(curve, 0)
    assert [x.kind for x in prof.extrema] == ["min", "max"]
    assert prof.extrema[0].value == 0.0
    assert prof.extrema[1].position == pytest.approx(np.pi, abs=1e-9)
    assert f_mm(prof) == pytest.approx(1 / prof.global_max)


def test_square_plateau_midpoint():
    # base at a square's corner: the profile is maximal at the opposite corner only
    sq = PolyKnot([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]])
    prof = distance_profile(sq, 0)
    assert len(prof.extrema) == 2 and prof.extrema[1].value == pytest.approx(math.sqrt(2))
    # rectangle from an edge midpoint: the far edge is a flat minimum plateau reported at its midpoint
    rect = PolyKnot([[0, 0, 0], [2, 0, 0], [2, 1, 0], [0, 1, 0]])
    prof = distance_profile(rect, (0, 0.5))
    mins = [x for x in prof.extrema[1:] if x.kind == "min"]
    assert len(mins) == 1
    assert mins[0].value == pytest.approx(1.0)
    assert mins[0].position == pytest.approx(4.0)


def test_obtuse_checks():
    hexagon = PolyKnot([[math.cos(a), math.sin(a), 0] for a in np.arange(6) * np.pi / 3])
    assert check_obtuse(hexagon).valid
    square = PolyKnot([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]])
    rep = check_obtuse(square)
    assert not rep.valid and rep.violations == [0, 1, 2, 3]
    rng = np.random.default_rng(0)
    reg = np.arange(32) * 2 * np.pi / 32 + rng.uniform(-0.02, 0.02, 32)
    assert check_obtuse(PolyKnot(np.c_[np.cos(reg), np.sin(reg), np.zeros(32)])).valid


def test_acute_knot_flagged():
    tri = PolyKnot([[0, 0, 0], [1, 0, 0], [0, 1, 0]])
    rep = e_mm(tri, 30)
    assert not rep.validity and rep.obtuse.violations


def test_lower_bound_on_random_perturbations():
    rng = np.random.default_rng(21)
    for _ in range(20):
        knot = perturbed_circle(rng, 24, 0.03)
        assert e_mm(knot, 96).value >= 2.0


def test_homothety_and_rigid_motion():
    knot = build("figure-eight", 48)
    base = e_mm(knot).value
    assert e_mm(knot.scaled(3.0)).value == pytest.approx(base, rel=1e-9)
    rot = random_rotation(np.random.default_rng(8))
    assert e_mm(knot.transformed(rot, (1.0, 2.0, -3.0))).value == pytest.approx(base, abs=1e-9)


def test_threads_do_not_change_result():
    knot = build("torus(2,5)", 64)
    a = e_mm(knot, 1024, workers=1, chunk=100)
    b = e_mm(knot, 1024, workers=3, chunk=100)
    assert a.value == b.value
    assert e_mm(knot, 1024).value == a.value


@pytest.mark.parametrize("name", ["circle", "torus(2,3)", "figure-eight", "5_2"])
def test_grid_robustness(name):
    knot = build(name, 128)
    a = e_mm(knot, 512).value
    b = e_mm(knot, 1024).value
    assert abs(a - b) / b < 5e-3


def test_blowup_growth():
    gaps = (0.2, 0.1, 0.05, 0.025)
    vals = blowup_probe(gaps)
    inc = np.diff(vals)
    assert np.all(inc > 0)
    assert np.all(inc >= 4 * math.log(2) - 0.5)
    # constant fixed at the widest gap, with the same slack allowed per halving
    c = 4 * math.log(2 / gaps[0]) - vals[0] + 0.5
    for g, v in zip(gaps, vals):
        assert v > 4 * math.log(2 / g) - c
