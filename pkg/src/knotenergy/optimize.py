"""Energy minimization over polyline knots of fixed length 2*pi.

The length constraint is enforced by rescaling after every move. Two guards
stand in for topology preservation: a move is rejected if the triangle swept
by a moving edge is pierced by another edge, or if two non-adjacent edges end
up closer than a distance threshold.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .energy import total_energy
from .geometry import (
    TWO_PI,
    KnotError,
    PolyKnot,
    normalize_length,
    resample_arclength,
    segment_distance_matrix,
    segment_distances,
)
from .kernels import EnergyKernel, get_kernel
from .mm import check_obtuse, f_mm_polyline

log = logging.getLogger(__name__)


TEMPERATURE_FRACTION = 0.002


@dataclass
class AnnealConfig:
    iterations: int = 50_000
    initial_temperature: float | None = None  # None: TEMPERATURE_FRACTION of the start energy
    cooling: float = 0.995
    cooling_interval: int = 100  # proposals between temperature updates
    step_scale: float = 0.2  # fraction of the mean edge length
    seed: int = 0
    min_clearance: float | None = None  # None: 0.02 * 2*pi / vertex count
    objective: str = "mm"
    samples: int = 128  # resampling size for pairwise-kernel objectives
    base_per_edge: int = 8  # Mm base points per edge
    trace_every: int = 100

    def __post_init__(self):
        if not 0.0 < self.cooling < 1.0:
            raise ValueError("cooling must lie in (0, 1)")
        if not 0.0 < self.step_scale <= 0.5:
            raise ValueError("step_scale must lie in (0, 0.5]")
        if self.min_clearance is not None and not self.min_clearance > 0:
            raise ValueError("min_clearance must be positive")
        if self.iterations < 0 or self.cooling_interval < 1 or self.trace_every < 1:
            raise ValueError("iterations, cooling_interval and trace_every must be positive")
        if self.initial_temperature is not None and not self.initial_temperature > 0:
            raise ValueError("initial_temperature must be positive")

    @classmethod
    def from_text(cls, text: str) -> "AnnealConfig":
        """Parse ``key=value`` lines; ``#`` starts a comment."""
        types = {f.name: f.type for f in fields(cls)}
        kw = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line {lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in types:
                raise ValueError(f"config line {lineno}: unknown key {key!r}")
            kw[key] = _coerce(types[key], value, lineno)
        return cls(**kw)

    @classmethod
    def from_file(cls, path) -> "AnnealConfig":
        return cls.from_text(Path(path).read_text())

    def to_text(self) -> str:
        return "".join(f"{k}={'none' if v is None else v}\n" for k, v in asdict(self).items())


def _coerce(type_name: str, value: str, lineno: int):
    if value.lower() == "none" and "None" in type_name:
        return None
    try:
        if type_name.startswith("int"):
            return int(value)
        if type_name.startswith("float"):
            return float(value)
    except ValueError:
        raise ValueError(f"config line {lineno}: bad value {value!r}") from None
    return value


@dataclass
class OptimResult:
    best_knot: PolyKnot
    best_energy: float
    trace: list = field(default_factory=list)
    accepted_moves: int = 0
    config: AnnealConfig | None = None


class Objective:
    """Energy of a vertex array; scale-free objectives are evaluated as given."""

    def __init__(self, name: str, m: int, samples: int = 128, base_per_edge: int = 8):
        self.name = name
        self.m = m
        if name == "mm":
            self.kernel = None
            self.n_base = base_per_edge * m
        else:
            self.kernel = get_kernel(name)
            if not math.isfinite(self.kernel.diagonal_limit):
                raise ValueError(f"kernel {name} has no finite diagonal limit")
            self.samples = samples

    def __call__(self, vertices: np.ndarray) -> float:
        knot = PolyKnot(vertices)
        if self.kernel is None:
            # E_Mm is invariant under scaling; base points sit on a uniform arc-length grid
            f = f_mm_polyline(knot, np.arange(self.n_base) * (knot.length / self.n_base))
            return float(knot.length / self.n_base * np.sum(f))
        knot, _ = normalize_length(knot)
        return total_energy(resample_arclength(knot, self.samples), self.kernel).value


def default_clearance(m: int) -> float:
    return 0.02 * TWO_PI / m


def _polygon_length(vertices: np.ndarray) -> float:
    return float(np.linalg.norm(np.roll(vertices, -1, axis=0) - vertices, axis=1).sum())


def _nonadjacent_mask(m: int) -> np.ndarray:
    k = np.abs(np.arange(m)[:, None] - np.arange(m)[None, :])
    return np.minimum(k, m - k) > 1


def _edge_rows(v: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Distances from each edge in ``edges`` to every edge of the polygon ``v``."""
    m = len(v)
    nxt = np.roll(v, -1, axis=0)
    a0 = v[edges][:, None, :]
    a1 = nxt[edges][:, None, :]
    out = segment_distances(a0, a1, v[None, :, :], nxt[None, :, :])
    k = np.abs(edges[:, None] - np.arange(m)[None, :])
    out[np.minimum(k, m - k) <= 1] = np.inf
    return out


def _segments_hit_triangle(s0, s1, tri) -> np.ndarray:
    """Whether each segment [s0, s1] passes through the interior of triangle ``tri`` (3x3)."""
    a, b, c = tri
    e1, e2 = b - a, c - a
    d = s1 - s0
    pvec = np.cross(d, e2)
    det = pvec @ e1
    ok = np.abs(det) > 1e-300  # parallel segments never cross the sweep
    inv = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
    tvec = s0 - a
    u = np.einsum("ij,ij->i", tvec, pvec) * inv
    qvec = np.cross(tvec, e1)
    v = np.einsum("ij,ij->i", qvec, d) * inv
    w = (qvec @ e2) * inv
    return ok & (u >= 0) & (v >= 0) & (u + v <= 1) & (w >= 0) & (w <= 1)


def _sweep_crosses(v: np.ndarray, j: int, new_point: np.ndarray) -> bool:
    """True if moving vertex j to ``new_point`` drags edge j-1 or edge j through another edge.

    Each moving edge sweeps the triangle (fixed end, old position, new position);
    edges sharing a vertex with the moving edge are skipped.
    """
    m = len(v)
    nxt = np.roll(v, -1, axis=0)
    p = v[j]
    for fixed, first_skipped in ((v[(j - 1) % m], j - 2), (v[(j + 1) % m], j - 1)):
        others = (first_skipped + 3 + np.arange(m - 3)) % m
        if _segments_hit_triangle(v[others], nxt[others], np.array([fixed, p, new_point])).any():
            return True
    return False


def anneal(start: PolyKnot, cfg: AnnealConfig | None = None) -> OptimResult:
    """Metropolis annealing with single-vertex Gaussian moves.

    Each proposal moves one vertex by ``step_scale`` times the mean edge length,
    rescales the polygon to length 2*pi and is rejected outright if a moving
    edge sweeps through another edge, if two non-adjacent edges come closer
    than ``min_clearance`` or, for the Mm
    objective, a vertex angle stops being obtuse. Deterministic given the seed.
    """
    cfg = cfg or AnnealConfig()
    knot, _ = normalize_length(start)
    v = np.array(knot.vertices)
    m = len(v)
    clearance = cfg.min_clearance if cfg.min_clearance is not None else default_clearance(m)
    seg = segment_distance_matrix(v)
    if seg.min() < clearance:
        raise KnotError(f"start knot violates the clearance {clearance:g} (min distance {seg.min():g})")
    if cfg.objective == "mm":
        rep = check_obtuse(knot)
        if not rep.valid:
            raise KnotError(f"start knot has non-obtuse vertex angles at {rep.violations[:5]}")
    objective = Objective(cfg.objective, m, cfg.samples, cfg.base_per_edge)

    rng = np.random.default_rng(cfg.seed)
    energy = objective(v)
    if not math.isfinite(energy):
        raise KnotError("objective is not finite on the start knot")
    temperature = cfg.initial_temperature if cfg.initial_temperature is not None else TEMPERATURE_FRACTION * energy
    best_v, best = v.copy(), energy
    trace = [(0, energy, best)]
    accepted = 0
    nonadj = _nonadjacent_mask(m)
    mean_edge = TWO_PI / m

    for it in range(1, cfg.iterations + 1):
        j = int(rng.integers(m))
        step = rng.normal(size=3) * (cfg.step_scale * mean_edge)
        u = rng.random()
        cand = v.copy()
        cand[j] += step
        scale = TWO_PI / _polygon_length(cand)
        cand *= scale
        ok = not _sweep_crosses(v, j, v[j] + step)
        if ok and cfg.objective == "mm":
            near = np.array([(j - 1) % m, j, (j + 1) % m])
            ok = bool(np.all(_local_cos(cand, near) < -1e-12))
        if ok:
            moved = np.array([(j - 1) % m, j])
            rows = _edge_rows(cand, moved)
            cand_seg = seg * scale
            cand_seg[moved, :] = rows
            cand_seg[:, moved] = rows.T
            ok = bool(cand_seg[nonadj].min() >= clearance)
        if ok:
            e_new = objective(cand)
            delta = e_new - energy
            if delta <= 0 or u < math.exp(-delta / temperature):
                v, energy, seg = cand, e_new, cand_seg
                accepted += 1
                if energy < best:
                    best_v, best = v.copy(), energy
        if it % cfg.cooling_interval == 0:
            temperature *= cfg.cooling
        if it % cfg.trace_every == 0 or it == cfg.iterations:
            trace.append((it, energy, best))
    log.info("anneal %s: best %.9g after %d iterations, %d accepted", cfg.objective, best, cfg.iterations, accepted)
    return OptimResult(PolyKnot(best_v, start.label), best, trace, accepted, cfg)


def _local_cos(v: np.ndarray, idx: np.ndarray) -> np.ndarray:
    m = len(v)
    a = v[(idx - 1) % m] - v[idx]
    b = v[(idx + 1) % m] - v[idx]
    return np.sum(a * b, axis=1) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))


def _energy_of(vertices: np.ndarray, kernel: EnergyKernel, samples: int) -> float:
    knot, _ = normalize_length(PolyKnot(vertices))
    return total_energy(resample_arclength(knot, samples), kernel).value


def descend(
    start: PolyKnot,
    kernel: EnergyKernel,
    steps: int = 100,
    rate: float = 1e-3,
    samples: int = 128,
    min_clearance: float | None = None,
    max_halvings: int = 20,
) -> OptimResult:
    """Finite-difference gradient descent of E_f at fixed length 2*pi.

    The gradient uses central differences of step 1e-5 * mean edge in every
    vertex coordinate. Each step moves the vertices by ``-rate * grad``,
    rescales to length 2*pi and applies the clearance guard of :func:`anneal`.
    A step that would raise the energy or break the guard is halved until it
    does not; after ``max_halvings`` failures the iterate is kept.
    """
    if not math.isfinite(kernel.diagonal_limit):
        raise ValueError(f"kernel {kernel.name} has no finite diagonal limit")
    if steps < 0 or not rate > 0:
        raise ValueError("steps must be >= 0 and rate positive")
    knot, _ = normalize_length(start)
    v = np.array(knot.vertices)
    m = len(v)
    clearance = min_clearance if min_clearance is not None else default_clearance(m)
    if segment_distance_matrix(v).min() < clearance:
        raise KnotError(f"start knot violates the clearance {clearance:g}")
    mean_edge = TWO_PI / m
    fd = 1e-5 * mean_edge
    energy = _energy_of(v, kernel, samples)
    trace = [(0, energy, energy)]
    accepted = 0
    for it in range(1, steps + 1):
        grad = np.zeros_like(v)
        for j in range(m):
            for c in range(3):
                vp = v.copy()
                vp[j, c] += fd
                vm = v.copy()
                vm[j, c] -= fd
                grad[j, c] = (_energy_of(vp, kernel, samples) - _energy_of(vm, kernel, samples)) / (2 * fd)
        move = -rate * grad
        for _ in range(max_halvings):
            cand = v + move
            cand *= TWO_PI / _polygon_length(cand)
            if segment_distance_matrix(cand).min() >= clearance:
                e_new = _energy_of(cand, kernel, samples)
                if e_new <= energy:
                    v, energy = cand, e_new
                    accepted += 1
                    break
            move *= 0.5
        trace.append((it, energy, energy))
    cfg = AnnealConfig(iterations=steps, objective=kernel.name, samples=samples, min_clearance=clearance)
    return OptimResult(PolyKnot(v, start.label), energy, trace, accepted, cfg)
