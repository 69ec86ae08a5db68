"""Extremality residuals V1(t0), V2(t0) of a closed curve under a pairwise energy.

A point t0 is locally extremal when both residuals vanish; the defect
h * sum(V1**2 + V2**2) vanishes for a locally extremal knot.

All double sums share the grid and diagonal-band rule of :mod:`knotenergy.energy`.
The middle double-sum integrand pairs the chord with df/drho and the arc with
df/dalpha: 2 f + rho f_rho + alpha f_alpha.

The A-term sums over ordered pairs (t1, t2) whose shorter arc passes through
t0. With t1 = t0 - a*h and t2 = t0 + b*h that is the triangle a, b >= 0,
a + b <= n/2 (twice, for both orders). It is integrated with the composite
trapezoid rule in (k = a + b, a): half weight on a = 0, a = k and k = n/2.
Plain indicator counting of the same cells is only first-order accurate.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .energy import BAND, kernel_grid, require_normalized
from .geometry import ArcCurve, KnotError, arc_distance
from .kernels import EnergyKernel


class StraightSampleError(KnotError):
    """Curvature at the base point is below threshold; 1/R is undefined there."""


def in_A(t1, t2, t0, L, tol) -> bool:
    """True when the shorter arc between t1 and t2 passes through t0 (within ``tol``)."""
    gap = arc_distance(t1, t2, L) - arc_distance(t1, t0, L) - arc_distance(t0, t2, L)
    return bool(abs(gap) <= tol)


@dataclass(frozen=True)
class Integrand:
    """The pieces of V1/V2 for one energy, as functions of (rho, alpha[, R, Phi | Psi])."""

    name: str
    term1: object  # (rho, alpha, R, Phi) -> f + R Phi f_rho
    middle: object  # (rho, alpha) -> 2 f + rho f_rho + alpha f_alpha
    a_term: object  # (rho, alpha) -> 2 f_alpha
    v2: object  # (rho, alpha, Psi) -> f_rho Psi
    term1_band: float
    middle_band: float
    a_band: float


def generic_integrand(k: EnergyKernel) -> Integrand:
    if not k.has_finite_variation:
        raise ValueError(f"the variation of the {k.name} energy is infinite; V1/V2 are undefined")
    if k.d_alpha_diagonal_limit is None:
        raise ValueError(f"kernel {k.name} needs a finite diagonal limit of df/dalpha")
    return Integrand(
        name=k.name,
        term1=lambda r, a, R, Phi: k.eval(r, a) + R * Phi * k.d_rho(r, a),
        middle=lambda r, a: 2.0 * k.eval(r, a) + r * k.d_rho(r, a) + a * k.d_alpha(r, a),
        a_term=lambda r, a: 2.0 * k.d_alpha(r, a),
        v2=lambda r, a, Psi: k.d_rho(r, a) * Psi,
        term1_band=k.diagonal_limit,
        middle_band=2.0 * k.diagonal_limit,
        a_band=2.0 * k.d_alpha_diagonal_limit,
    )


def closed_form_integrand() -> Integrand:
    """The arc3-chord2 energy D**3/rho**2 with its derivatives substituted by hand."""
    return Integrand(
        name="arc3-chord2 (closed form)",
        term1=lambda r, a, R, Phi: a**3 / r**2 * (1.0 - 2.0 * R * Phi / r),
        middle=lambda r, a: 3.0 * a**3 / r**2,
        a_term=lambda r, a: 6.0 * a**2 / r**2,
        v2=lambda r, a, Psi: -2.0 * a**3 / r**3 * Psi,
        term1_band=0.0,
        middle_band=0.0,
        a_band=6.0,
    )


def a_region_sums(grid: np.ndarray) -> np.ndarray:
    """For every base index i0, the weighted sum of a symmetric ``grid`` over the set A (without h**2)."""
    n = grid.shape[0]
    if n % 2:
        raise KnotError("the A-term quadrature needs an even sample count")
    half = n // 2
    idx = np.arange(n)
    out = np.zeros(n)
    for k in range(1, half + 1):
        diag = grid[idx, (idx + k) % n]  # diag[i] = G[i, i + k]
        csum = np.concatenate([[0.0], np.cumsum(np.concatenate([diag, diag]))])
        # window i in [i0 - k, i0], i.e. positions i0 - k + n .. i0 + n in the doubled array
        window = csum[idx + n + 1] - csum[idx + n - k]
        window -= 0.5 * (diag + diag[(idx - k) % n])
        out += (0.5 if k == half else 1.0) * window
    return 2.0 * out


def _not_band(n: int, i0: int) -> np.ndarray:
    idx = np.arange(n)
    k = np.abs(idx - i0)
    return np.minimum(k, n - k) > BAND


class _Residuals:
    """Shared state for evaluating V1/V2 at many base points of one curve."""

    def __init__(self, curve: ArcCurve, integrand: Integrand):
        require_normalized(curve)
        self.curve = curve
        self.ig = integrand
        n = curve.n
        h = curve.spacing
        self.rho = curve.chord_matrix()
        self.alpha = curve.arc_matrix()
        mid = kernel_grid(curve, integrand.middle, integrand.middle_band)
        self.middle_total = float(np.sum(np.sum(mid, axis=1))) * h * h
        agrid = kernel_grid(curve, integrand.a_term, integrand.a_band)
        self.a_sums = a_region_sums(agrid) * h * h
        self.band_cells = 2 * BAND + 1
        self.n = n

    def radius(self, i0: int) -> float:
        c = self.curve
        if c.curvatures[i0] <= c.curvature_threshold:
            raise StraightSampleError(f"sample {i0} is straight (curvature below threshold)")
        return 1.0 / float(c.curvatures[i0])

    def _frame(self, i0: int):
        c = self.curve
        t = c.tangents[i0] / np.linalg.norm(c.tangents[i0])
        nrm = c.second_derivs[i0] / c.curvatures[i0]
        b = np.cross(t, nrm)
        return b, np.cross(b, t)

    def _row(self, i0: int):
        sel = _not_band(self.n, i0)
        idx = np.flatnonzero(sel)
        chord = self.curve.positions[idx] - self.curve.positions[i0]
        r = self.rho[i0, idx]
        a = self.alpha[i0, idx]
        return idx, chord / r[:, None], r, a

    def v2(self, i0: int) -> float:
        R = self.radius(i0)
        _, u, r, a = self._row(i0)
        b, _ = self._frame(i0)
        Psi = u @ b
        s = np.sum(self.ig.v2(r, a, Psi))
        return float(4.0 / (3.0 * R) * s * self.curve.spacing)

    def v1(self, i0: int) -> float:
        R = self.radius(i0)
        h = self.curve.spacing
        _, u, r, a = self._row(i0)
        _, w = self._frame(i0)
        Phi = u @ w
        term1 = (np.sum(self.ig.term1(r, a, R, Phi)) + self.band_cells * self.ig.term1_band) * h
        bracket = 4.0 * term1 - self.middle_total / np.pi + self.a_sums[i0]
        return float(2.0 / (3.0 * R) * bracket)


@dataclass
class ResidualField:
    n: int
    v1: np.ndarray
    v2: np.ndarray
    defect: float
    kernel_name: str
    skipped: list = field(default_factory=list)

    @property
    def params(self) -> np.ndarray:
        return np.arange(self.n) * (2.0 * np.pi / self.n)


def v1_at(curve: ArcCurve, k: EnergyKernel, i0: int) -> float:
    return _Residuals(curve, generic_integrand(k)).v1(i0)


def v2_at(curve: ArcCurve, k: EnergyKernel, i0: int) -> float:
    return _Residuals(curve, generic_integrand(k)).v2(i0)


def closed_form_v1(curve: ArcCurve, i0: int) -> float:
    return _Residuals(curve, closed_form_integrand()).v1(i0)


def closed_form_v2(curve: ArcCurve, i0: int) -> float:
    return _Residuals(curve, closed_form_integrand()).v2(i0)


def residual_field(curve: ArcCurve, k: EnergyKernel | Integrand) -> ResidualField:
    """V1 and V2 at every sample plus the defect; straight samples are skipped and contribute 0."""
    ig = k if isinstance(k, Integrand) else generic_integrand(k)
    res = _Residuals(curve, ig)
    v1 = np.zeros(curve.n)
    v2 = np.zeros(curve.n)
    skipped = []
    for i0 in range(curve.n):
        try:
            v1[i0] = res.v1(i0)
            v2[i0] = res.v2(i0)
        except StraightSampleError:
            skipped.append(i0)
    defect = float(curve.spacing * np.sum(v1**2 + v2**2))
    return ResidualField(curve.n, v1, v2, defect, ig.name, skipped)


def closed_form_field(curve: ArcCurve) -> ResidualField:
    return residual_field(curve, closed_form_integrand())


__all__ = [
    "ResidualField",
    "StraightSampleError",
    "closed_form_field",
    "closed_form_v1",
    "closed_form_v2",
    "in_A",
    "residual_field",
    "v1_at",
    "v2_at",
]
