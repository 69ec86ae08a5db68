"""Closed polyline knots, uniform arc-length resampling and the chord angle functions.

A :class:`PolyKnot` is what users store and edit. Everything that integrates over
the curve works on an :class:`ArcCurve`, a uniform arc-length resampling carrying
discrete tangents and second derivatives.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi


class KnotError(ValueError):
    """Invalid or degenerate curve data."""


class NumericalError(ArithmeticError):
    """Evaluation hit a non-finite value, usually a near double point."""


@dataclass(frozen=True)
class PolyKnot:
    """Closed polyline in 3-space. The edge from the last vertex back to the first is implicit."""

    vertices: np.ndarray
    label: str = ""

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 3:
            raise KnotError(f"vertices must have shape (m, 3), got {v.shape}")
        if len(v) < 3:
            raise KnotError("a closed knot needs at least 3 vertices")
        if not np.all(np.isfinite(v)):
            raise KnotError("vertices must be finite")
        edges = np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)
        total = edges.sum()
        if not total > 0:
            raise KnotError("total length must be positive")
        short = np.flatnonzero(edges <= 1e-12 * total)
        if short.size:
            raise KnotError(f"consecutive vertices coincide at index {int(short[0])}")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    def __len__(self):
        return len(self.vertices)

    @property
    def edge_vectors(self) -> np.ndarray:
        return np.roll(self.vertices, -1, axis=0) - self.vertices

    @property
    def edge_lengths(self) -> np.ndarray:
        return np.linalg.norm(self.edge_vectors, axis=1)

    @property
    def length(self) -> float:
        return float(self.edge_lengths.sum())

    def scaled(self, factor: float) -> "PolyKnot":
        return PolyKnot(self.vertices * factor, self.label)

    def transformed(self, rotation, translation=(0.0, 0.0, 0.0)) -> "PolyKnot":
        r = np.asarray(rotation, dtype=float)
        return PolyKnot(self.vertices @ r.T + np.asarray(translation, dtype=float), self.label)


def normalize_length(knot: PolyKnot, target: float = TWO_PI) -> tuple[PolyKnot, float]:
    """Scale ``knot`` about the origin so its length is ``target``; returns the knot and the factor."""
    factor = target / knot.length
    return knot.scaled(factor), factor


@dataclass(frozen=True)
class ArcCurve:
    """Uniform arc-length samples of a closed curve with discrete derivative data."""

    total_length: float
    positions: np.ndarray
    tangents: np.ndarray
    second_derivs: np.ndarray
    curvatures: np.ndarray
    label: str = ""
    _chords: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def n(self) -> int:
        return len(self.positions)

    @property
    def spacing(self) -> float:
        return self.total_length / self.n

    @property
    def params(self) -> np.ndarray:
        return np.arange(self.n) * self.spacing

    @property
    def curvature_threshold(self) -> float:
        # below this kappa the tau'' = 0 branch of psi/phi applies
        return 1e-6 * TWO_PI / self.total_length

    def chord_matrix(self) -> np.ndarray:
        """All pairwise chord lengths, cached."""
        if self._chords is None:
            p = self.positions
            diff = p[:, None, :] - p[None, :, :]
            chords = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
            object.__setattr__(self, "_chords", chords)
        return self._chords

    def arc_matrix(self) -> np.ndarray:
        """All pairwise arc distances D(t_i, t_j) on the sample grid."""
        idx = np.arange(self.n)
        k = np.abs(idx[:, None] - idx[None, :])
        return np.minimum(k, self.n - k) * self.spacing


def resample_arclength(knot: PolyKnot, n: int) -> ArcCurve:
    """Resample ``knot`` at ``n`` points equally spaced in arc length.

    Positions come from linear interpolation along the polyline. Tangents are
    normalized centered differences; second derivatives are centered second
    differences smoothed by a cyclic 3-point moving average, and the curvature
    is the norm of the smoothed vector.
    """
    if n < 16:
        raise KnotError(f"need at least 16 samples, got {n}")
    if not isinstance(knot, PolyKnot):
        knot = PolyKnot(knot)
    v = knot.vertices
    closed = np.vstack([v, v[:1]])
    cum = np.concatenate([[0.0], np.cumsum(knot.edge_lengths)])
    total = float(cum[-1])
    h = total / n
    t = np.arange(n) * h
    pos = np.column_stack([np.interp(t, cum, closed[:, k]) for k in range(3)])

    fwd = np.roll(pos, -1, axis=0)
    bwd = np.roll(pos, 1, axis=0)
    tan = (fwd - bwd) / (2.0 * h)
    tnorm = np.linalg.norm(tan, axis=1)
    if np.any(tnorm <= 0):
        raise KnotError("resampled curve has a cusp (zero centered difference)")
    tan = tan / tnorm[:, None]
    second = (fwd - 2.0 * pos + bwd) / h**2
    second = (np.roll(second, 1, axis=0) + second + np.roll(second, -1, axis=0)) / 3.0
    kappa = np.linalg.norm(second, axis=1)
    return ArcCurve(total, pos, tan, second, kappa, knot.label)


def arc_distance(t1, t2, total_length):
    """Length of the shorter arc between parameters ``t1`` and ``t2`` (vectorizes)."""
    d = np.mod(np.abs(np.asarray(t1, dtype=float) - np.asarray(t2, dtype=float)), total_length)
    out = np.minimum(d, total_length - d)
    return float(out) if np.ndim(out) == 0 else out


def chord_length(curve: ArcCurve, i: int, j: int) -> float:
    return float(np.linalg.norm(curve.positions[i] - curve.positions[j]))


def _frame(curve: ArcCurve, i0: int):
    tdir = curve.tangents[i0] / np.linalg.norm(curve.tangents[i0])
    if curve.curvatures[i0] <= curve.curvature_threshold:
        return tdir, None
    return tdir, curve.second_derivs[i0] / curve.curvatures[i0]


def _unit_chords(curve: ArcCurve, i0: int, idx: np.ndarray) -> np.ndarray:
    chords = curve.positions[idx] - curve.positions[i0]
    return chords / np.linalg.norm(chords, axis=1)[:, None]


def psi_row(curve: ArcCurve, i0: int, idx=None) -> np.ndarray:
    """Psi(t_i0, t_i) for all ``idx`` (default every sample except i0)."""
    idx = _other_indices(curve, i0) if idx is None else np.asarray(idx)
    u = _unit_chords(curve, i0, idx)
    tdir, ndir = _frame(curve, i0)
    if ndir is None:
        return u @ tdir
    # mixed product (tdir, ndir, u) = u . (tdir x ndir)
    return u @ np.cross(tdir, ndir)


def phi_row(curve: ArcCurve, i0: int, idx=None) -> np.ndarray:
    """Phi(t_i0, t_i) for all ``idx`` (default every sample except i0)."""
    idx = _other_indices(curve, i0) if idx is None else np.asarray(idx)
    tdir, ndir = _frame(curve, i0)
    if ndir is None:
        return np.zeros(len(idx))
    u = _unit_chords(curve, i0, idx)
    # (tdir, u, tdir x ndir) = u . ((tdir x ndir) x tdir)
    b = np.cross(tdir, ndir)
    return u @ np.cross(b, tdir)


def _other_indices(curve: ArcCurve, i0: int) -> np.ndarray:
    idx = np.arange(curve.n)
    return idx[idx != i0]


def _check_pair(curve: ArcCurve, i0: int, i: int):
    if i % curve.n == i0 % curve.n:
        raise KnotError("chord undefined for coincident samples")


def psi(curve: ArcCurve, i0: int, i: int) -> float:
    """Sine of the angle between the chord from t_i0 to t_i and the osculating plane at t_i0."""
    _check_pair(curve, i0, i)
    return float(psi_row(curve, i0, [i])[0])


def phi(curve: ArcCurve, i0: int, i: int) -> float:
    """Sine of the angle between the chord from t_i0 to t_i and the rectifying plane at t_i0."""
    _check_pair(curve, i0, i)
    return float(phi_row(curve, i0, [i])[0])


def segment_distances(a0, a1, b0, b1) -> np.ndarray:
    """Minimum distance between segments [a0, a1] and [b0, b1], broadcasting over leading axes."""
    d1 = a1 - a0
    d2 = b1 - b0
    r = a0 - b0
    a = np.sum(d1 * d1, axis=-1)
    e = np.sum(d2 * d2, axis=-1)
    f = np.sum(d2 * r, axis=-1)
    c = np.sum(d1 * r, axis=-1)
    b = np.sum(d1 * d2, axis=-1)
    denom = a * e - b * b
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(denom > 1e-300, np.clip((b * f - c * e) / denom, 0.0, 1.0), 0.0)
        t = (b * s + f) / e
        s = np.where(t < 0.0, np.clip(-c / a, 0.0, 1.0), s)
        s = np.where(t > 1.0, np.clip((b - c) / a, 0.0, 1.0), s)
    t = np.clip(t, 0.0, 1.0)
    p = a0 + s[..., None] * d1
    q = b0 + t[..., None] * d2
    return np.linalg.norm(p - q, axis=-1)


def segment_distance_matrix(vertices: np.ndarray) -> np.ndarray:
    """Pairwise distances between the edges of a closed polyline; adjacent pairs set to inf."""
    v = np.asarray(vertices, dtype=float)
    m = len(v)
    a0 = v[:, None, :]
    a1 = np.roll(v, -1, axis=0)[:, None, :]
    out = segment_distances(a0, a1, v[None, :, :], np.roll(v, -1, axis=0)[None, :, :])
    k = np.abs(np.arange(m)[:, None] - np.arange(m)[None, :])
    out[np.minimum(k, m - k) <= 1] = np.inf
    return out


def min_clearance(knot: PolyKnot) -> float:
    """Smallest distance between non-adjacent edges."""
    return float(segment_distance_matrix(knot.vertices).min())
