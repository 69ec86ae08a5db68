"""Mm-energy: alternating reciprocal extrema of chordal distance profiles.

For a base point t0 the profile rho_t0(t) = |tau(t) - tau(t0)| is followed
once around the curve. With its global maximum value M, local minima m_i
(other than t0 itself) and the remaining local maxima M_j::

    f_Mm(t0) = 1/M + sum(1/m_i) - sum(1/M_j)

and E_Mm is the integral of f_Mm over t0 in arc length.

On a polyline the profile is piecewise convex: along each edge the distance
to a fixed point is convex in the edge parameter. So the profile is monotone
between consecutive "knots" of the sequence (vertices and interior feet of
perpendiculars), and the extrema of that finite sequence are exactly the
extrema of the profile. Sampled curves use the sample grid as the sequence.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import ArcCurve, KnotError, PolyKnot, normalize_length

# extremum pairs closer than this fraction of the global max are merged away
PAIR_RTOL = 1e-9
# interior-foot tolerance on the edge parameter
FOOT_EPS = 1e-12


class ProfileError(KnotError):
    pass


@dataclass(frozen=True)
class Extremum:
    position: float
    kind: str  # "min" | "max"
    value: float


@dataclass(frozen=True)
class MmProfile:
    """Extrema of one distance profile in order along the curve.

    ``extrema[0]`` is the base point itself (a minimum of value 0), so kinds
    alternate cyclically and minima and maxima come in equal numbers.
    """

    base: float
    extrema: tuple
    global_max_index: int

    @property
    def global_max(self) -> float:
        return self.extrema[self.global_max_index].value


@dataclass
class ObtuseReport:
    valid: bool
    violations: list = field(default_factory=list)
    min_angle: float = np.pi


@dataclass
class MmReport:
    value: float
    per_point: list
    validity: bool
    obtuse: ObtuseReport | None = None


def _vertex_cos(vertices: np.ndarray) -> np.ndarray:
    v = np.asarray(vertices, dtype=float)
    a = np.roll(v, 1, axis=0) - v
    b = np.roll(v, -1, axis=0) - v
    return np.sum(a * b, axis=1) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))


def vertex_angles(vertices: np.ndarray) -> np.ndarray:
    """Interior angle at each vertex between the incoming and outgoing edges (pi = straight)."""
    return np.arccos(np.clip(_vertex_cos(vertices), -1.0, 1.0))


def check_obtuse(knot: PolyKnot) -> ObtuseReport:
    """Every vertex angle must exceed pi/2 strictly; exactly 90 degrees (to rounding) is invalid."""
    cos = _vertex_cos(knot.vertices)
    bad = np.flatnonzero(cos >= -1e-12)
    angles = np.arccos(np.clip(cos, -1.0, 1.0))
    return ObtuseReport(bad.size == 0, bad.tolist(), float(angles.min()))


# ---------------------------------------------------------------------------
# sequence machinery shared by the profile and the vectorized energy


def _extremum_masks(seq: np.ndarray):
    """Local max/min masks of each row of ``seq`` (rows start and end at the base value 0).

    Steps smaller than PAIR_RTOL * row max count as flat; a flat step inherits the
    direction of the previous step, so a plateau or a negligible wiggle yields no
    extremum pair.
    """
    d = np.diff(seq, axis=1)
    tol = PAIR_RTOL * seq.max(axis=1, keepdims=True)
    sg = np.where(d > tol, 1, np.where(d < -tol, -1, 0)).astype(np.int8)
    sg[:, 0] = 1
    cols = np.arange(sg.shape[1])
    last = np.maximum.accumulate(np.where(sg != 0, cols, 0), axis=1)
    filled = np.take_along_axis(sg, last, axis=1)
    prev, nxt = filled[:, :-1], filled[:, 1:]
    is_max = np.zeros(seq.shape, dtype=bool)
    is_min = np.zeros(seq.shape, dtype=bool)
    is_max[:, 1:-1] = (prev > 0) & (nxt < 0)
    is_min[:, 1:-1] = (prev < 0) & (nxt > 0)
    return is_max, is_min


def _f_rows(seq: np.ndarray) -> np.ndarray:
    is_max, is_min = _extremum_masks(seq)
    gmax = seq.max(axis=1)
    with np.errstate(divide="ignore"):
        inv = 1.0 / seq
    inv_min = np.where(is_min, inv, 0.0).sum(axis=1)
    inv_max = np.where(is_max, inv, 0.0).sum(axis=1)
    if np.any(~is_max.any(axis=1)):
        raise ProfileError("no isolated extrema")
    return 2.0 / gmax + inv_min - inv_max


# ---------------------------------------------------------------------------
# polyline profiles


def _pl_sequences(knot: PolyKnot, base_t: np.ndarray, with_params: bool = False):
    """Profile sequences for base points at arc parameters ``base_t``.

    Each row is [0, v_1, foot_1, v_2, ..., foot_{m-1}, v_m, 0]: v_k is the vertex
    k steps after the base's edge and foot_k the foot of the perpendicular on the
    edge leaving it. Non-interior feet are filled with the neighbours' mean, which
    keeps the row monotone there (their params are NaN).
    """
    v = knot.vertices
    m = len(v)
    e = knot.edge_vectors
    elen2 = np.einsum("ij,ij->i", e, e)
    lens = np.sqrt(elen2)
    cum = np.concatenate([[0.0], np.cumsum(lens)])
    L = cum[-1]
    base_t = np.mod(base_t, L)
    seg = np.clip(np.searchsorted(cum, base_t, side="right") - 1, 0, m - 1)
    frac = (base_t - cum[seg]) / lens[seg]
    p = v[seg] + frac[:, None] * e[seg]
    B = len(base_t)
    rows = np.arange(B)

    diff = p[:, None, :] - v[None, :, :]
    d2 = np.einsum("bmj,bmj->bm", diff, diff)
    vval = np.sqrt(d2)
    vval[rows, seg] = np.where(frac == 0.0, 0.0, vval[rows, seg])
    lam = np.einsum("bmj,mj->bm", diff, e) / elen2
    interior = (lam > FOOT_EPS) & (lam < 1.0 - FOOT_EPS)
    fval = np.sqrt(np.maximum(d2 - lam * lam * elen2, 0.0))
    fval = np.where(interior, fval, 0.5 * (vval + np.roll(vval, -1, axis=1)))

    natural = np.empty((B, 2 * m))
    natural[:, 0::2] = vval
    natural[:, 1::2] = fval
    own = 2 * seg + 1
    natural[rows, own] = 0.0
    order = (own[:, None] + np.arange(2 * m)[None, :]) % (2 * m)
    vals = np.zeros((B, 2 * m + 1))
    vals[:, :-1] = np.take_along_axis(natural, order, axis=1)
    if not with_params:
        return vals, None, L

    npar = np.empty((B, 2 * m))
    npar[:, 0::2] = cum[:-1][None, :]
    npar[:, 1::2] = np.where(interior, cum[:-1][None, :] + lam * lens[None, :], np.nan)
    npar = np.mod(npar - base_t[:, None], L)
    pars = np.full((B, 2 * m + 1), L)
    pars[:, :-1] = np.take_along_axis(npar, order, axis=1)
    pars[:, 0] = 0.0
    pars[:, 1:-1] = np.where(pars[:, 1:-1] == 0.0, L, pars[:, 1:-1])
    return vals, pars, L


def _curve_sequence(curve: ArcCurve, i0: int):
    n = curve.n
    order = (i0 + np.arange(1, n)) % n
    rho = np.linalg.norm(curve.positions[order] - curve.positions[i0], axis=1)
    vals = np.concatenate([[0.0], rho, [0.0]])
    pars = np.arange(n + 1) * curve.spacing
    return vals, pars


def _profile_from_sequence(vals: np.ndarray, pars: np.ndarray, base: float, period: float) -> MmProfile:
    is_max, is_min = _extremum_masks(vals[None, :])
    is_max, is_min = is_max[0], is_min[0]
    tol = PAIR_RTOL * vals.max()
    d = np.diff(vals)
    flat = np.abs(d) <= tol
    # the base point itself is the zero minimum that closes the cycle
    extrema = [Extremum(float(base) % period, "min", 0.0)]
    for q in np.flatnonzero(is_max | is_min):
        # the mask marks the last sample of a plateau; report its midpoint
        r = q
        while r > 0 and flat[r - 1]:
            r -= 1
        span = pars[r : q + 1]
        span = span[~np.isnan(span)]
        pos = float((span[0] + span[-1]) / 2.0) if span.size else float(pars[q])
        extrema.append(Extremum((base + pos) % period, "max" if is_max[q] else "min", float(vals[q])))
    if len(extrema) == 1:
        raise ProfileError("no isolated extrema")
    values = np.array([x.value for x in extrema])
    kinds = np.array([x.kind for x in extrema])
    maxima = np.flatnonzero(kinds == "max")
    # ties resolved towards the smallest parameter
    top = maxima[values[maxima] >= values[maxima].max() - tol]
    gidx = int(min(top, key=lambda i: extrema[i].position))
    return MmProfile(float(base), tuple(extrema), gidx)


def distance_profile(obj, t0) -> MmProfile:
    """Chord-length profile from base ``t0`` with its classified extrema.

    ``obj`` is an :class:`ArcCurve` (``t0`` a sample index) or a
    :class:`PolyKnot` (``t0`` a vertex index or a ``(segment, fraction)`` pair).
    """
    if isinstance(obj, ArcCurve):
        i0 = int(t0) % obj.n
        vals, pars = _curve_sequence(obj, i0)
        return _profile_from_sequence(vals, pars, i0 * obj.spacing, obj.total_length)
    knot = obj if isinstance(obj, PolyKnot) else PolyKnot(obj)
    cum = np.concatenate([[0.0], np.cumsum(knot.edge_lengths)])
    if isinstance(t0, tuple):
        seg, frac = t0
        if not 0.0 <= frac < 1.0:
            raise ValueError("fraction must lie in [0, 1)")
        base = cum[int(seg) % len(knot)] + frac * knot.edge_lengths[int(seg) % len(knot)]
    else:
        base = cum[int(t0) % len(knot)]
    vals, pars, L = _pl_sequences(knot, np.array([base]), with_params=True)
    return _profile_from_sequence(vals[0], pars[0], base, L)


def f_mm(profile: MmProfile) -> float:
    g = profile.global_max_index
    total = 1.0 / profile.extrema[g].value
    for i, x in enumerate(profile.extrema[1:], start=1):
        if x.kind == "min":
            total += 1.0 / x.value
        elif i != g:
            total -= 1.0 / x.value
    return total


def f_mm_polyline(knot: PolyKnot, base_t: np.ndarray) -> np.ndarray:
    """f_Mm at arc parameters ``base_t`` of a polyline, vectorized over base points."""
    vals, _, _ = _pl_sequences(knot, np.asarray(base_t, dtype=float))
    return _f_rows(vals)


def f_mm_curve(curve: ArcCurve) -> np.ndarray:
    n = curve.n
    rho = curve.chord_matrix()
    order = (np.arange(n)[:, None] + np.arange(1, n)[None, :]) % n
    seq = np.zeros((n, n + 1))
    seq[:, 1:-1] = np.take_along_axis(rho, order, axis=1)
    return _f_rows(seq)


def _chunked(func, base_t: np.ndarray, chunk: int, workers: int | None):
    pieces = [base_t[i : i + chunk] for i in range(0, len(base_t), chunk)]
    if workers and workers > 1 and len(pieces) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(func, pieces))
    else:
        parts = [func(p) for p in pieces]
    return np.concatenate(parts)


def e_mm(obj, n_base: int | None = None, workers: int | None = None, chunk: int = 512) -> MmReport:
    """Mm-energy by the periodic trapezoid rule over ``n_base`` equally spaced base points.

    Polylines use exact per-edge extrema; an acute or right vertex angle makes
    the result formally undefined and is flagged via ``validity``. Per-point
    values do not depend on ``workers`` or ``chunk``, so neither does the sum.
    """
    if isinstance(obj, ArcCurve):
        if n_base not in (None, obj.n):
            raise ValueError("for sampled curves every sample is a base point")
        f = f_mm_curve(obj)
        t = obj.params
        h = obj.spacing
        obtuse = None
        valid = True
    else:
        knot = obj if isinstance(obj, PolyKnot) else PolyKnot(obj)
        if n_base is None:
            n_base = 4 * len(knot)
        L = knot.length
        h = L / n_base
        t = np.arange(n_base) * h
        f = _chunked(lambda part: f_mm_polyline(knot, part), t, chunk, workers)
        obtuse = check_obtuse(knot)
        valid = obtuse.valid
    value = float(h * np.sum(f))
    return MmReport(value, list(zip(t.tolist(), f.tolist())), valid, obtuse)


# ---------------------------------------------------------------------------
# double-crossing blow-up


def crossing_family(gap: float, m: int = 512) -> PolyKnot:
    """Lemniscate-shaped loop, length 2*pi, whose two strands cross with vertical separation ``gap``.

    The strands meet the crossing nearly straight and perpendicular in projection.
    """
    if m % 4:
        raise ValueError("vertex count must be a multiple of 4")
    t = np.arange(m) * (2.0 * np.pi / m)
    amp = gap
    for _ in range(50):
        pts = np.column_stack([np.cos(t), np.sin(t) * np.cos(t), 0.5 * amp * np.sin(t)])
        knot, scale = normalize_length(PolyKnot(pts, f"crossing gap={gap:g}"))
        new = gap / scale
        if abs(new - amp) <= 1e-14 * amp:
            break
        amp = new
    return knot


def blowup_probe(gaps=(0.2, 0.1, 0.05, 0.025), m: int = 512, n_base: int = 4096) -> list[float]:
    """E_Mm of the crossing family as the strand separation shrinks."""
    return [e_mm(crossing_family(g, m), n_base).value for g in gaps]
