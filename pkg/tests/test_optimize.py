import math

import numpy as np
import pytest

from knotenergy.catalog import build, circle
from knotenergy.geometry import KnotError, PolyKnot, normalize_length, resample_arclength, segment_distance_matrix
from knotenergy.kernels import kernel_arc3_chord2
from knotenergy.mm import check_obtuse
from knotenergy.optimize import (
    AnnealConfig,
    Objective,
    _sweep_crosses,
    anneal,
    default_clearance,
    descend,
)
from knotenergy.variation import residual_field


def test_config_invariants():
    for bad in (dict(cooling=1.0), dict(cooling=0.0), dict(step_scale=0.0), dict(step_scale=0.6), dict(min_clearance=0.0)):
        with pytest.raises(ValueError):
            AnnealConfig(**bad)


def test_config_text_round_trip():
    cfg = AnnealConfig.from_text("iterations = 123\n# comment\nobjective=charged  # trailing\nmin_clearance=none\n")
    assert cfg.iterations == 123 and cfg.objective == "charged" and cfg.min_clearance is None
    assert AnnealConfig.from_text(cfg.to_text()) == cfg
    with pytest.raises(ValueError):
        AnnealConfig.from_text("colling=0.9\n")
    with pytest.raises(ValueError):
        AnnealConfig.from_text("iterations=many\n")


def test_anneal_deterministic_and_consistent():
    start = build("trefoil", 24)
    cfg = AnnealConfig(iterations=1500, trace_every=50, seed=7)
    a = anneal(start, cfg)
    b = anneal(start, cfg)
    assert a.trace == b.trace and a.accepted_moves == b.accepted_moves
    np.testing.assert_array_equal(a.best_knot.vertices, b.best_knot.vertices)
    assert a.best_energy < a.trace[0][1]
    obj = Objective("mm", 24, base_per_edge=cfg.base_per_edge)
    assert obj(a.best_knot.vertices) == pytest.approx(a.best_energy, abs=1e-9)
    best = [t[2] for t in a.trace]
    assert all(x >= y for x, y in zip(best, best[1:]))
    assert a.best_knot.length == pytest.approx(2 * math.pi, rel=1e-9)
    assert segment_distance_matrix(a.best_knot.vertices).min() >= default_clearance(24)
    assert check_obtuse(a.best_knot).valid
    c = anneal(start, AnnealConfig(iterations=1500, trace_every=50, seed=8))
    assert c.trace != a.trace


def test_anneal_kernel_objective():
    start = normalize_length(PolyKnot(np.c_[np.cos(np.arange(32) * np.pi / 16), 0.7 * np.sin(np.arange(32) * np.pi / 16), np.zeros(32)]))[0]
    res = anneal(start, AnnealConfig(iterations=200, objective="arc3-chord2", samples=64, trace_every=20))
    assert res.best_energy <= res.trace[0][1]
    assert Objective("arc3-chord2", 32, samples=64)(res.best_knot.vertices) == pytest.approx(res.best_energy, abs=1e-9)


def test_anneal_rejects_bad_starts():
    square = PolyKnot([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]])
    with pytest.raises(KnotError):
        anneal(square, AnnealConfig(iterations=10))
    with pytest.raises(KnotError):
        anneal(circle(32), AnnealConfig(iterations=10, min_clearance=1.0))


def test_sweep_detects_strand_passage():
    # a square loop with a vertex dragged across the opposite side
    v = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0.5, 1.2, 0.0], [0, 1, 0]], dtype=float)
    v[:, 2] = [0.0, 0.0, 0.0, 0.05, 0.0]
    assert not _sweep_crosses(v, 3, np.array([0.5, 0.8, 0.05]))
    # edge 0 (y=0 side) lies in the path of vertex 3 moving to y=-0.5 while the neighbours stay at y=1
    assert _sweep_crosses(v, 3, np.array([0.5, -0.5, 0.0]))


def test_anneal_keeps_knot_topology():
    # a hot chain on a coarse trefoil must never pass one strand through another
    start = build("trefoil", 16)
    cfg = AnnealConfig(iterations=3000, initial_temperature=2.0, step_scale=0.5, trace_every=100)
    res = anneal(start, cfg)
    assert res.best_energy > 8.0


def test_descend_reduces_ellipse_defect():
    t = np.arange(64) * (2 * np.pi / 64)
    ell = normalize_length(PolyKnot(np.c_[np.cos(t), 0.8 * np.sin(t), 0 * t]))[0]
    k = kernel_arc3_chord2()
    before = residual_field(resample_arclength(ell, 128), k).defect
    res = descend(ell, k, steps=4, rate=1e-3)
    after = residual_field(resample_arclength(res.best_knot, 128), k).defect
    assert after < before
    energies = [e for _, e, _ in res.trace]
    assert all(x >= y for x, y in zip(energies, energies[1:]))
    assert res.best_knot.length == pytest.approx(2 * math.pi, rel=1e-9)


def test_descend_circle_is_stationary():
    # 128 vertices resampled at 128 points: the samples are the vertices
    res = descend(circle(128), kernel_arc3_chord2(), steps=2, rate=1e-3)
    energies = np.array([e for _, e, _ in res.trace])
    assert np.all(np.abs(np.diff(energies)) < 1e-6)


def test_descend_rejects_clearance_violation():
    with pytest.raises(KnotError):
        descend(circle(32), kernel_arc3_chord2(), steps=1, min_clearance=1.0)
