"""Double-integral knot energy over the torus of parameter pairs, by the periodic trapezoid rule."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import TWO_PI, ArcCurve, KnotError, NumericalError, PolyKnot, segment_distance_matrix
from .kernels import EnergyKernel

BAND = 1  # cells with cyclic |i - j| <= BAND take the diagonal limit
NEAR_DOUBLE_POINT = 1e-9


@dataclass(frozen=True)
class EnergyReport:
    value: float
    n: int
    diagonal_band: int
    kernel_name: str


def band_mask(n: int, band: int = BAND) -> np.ndarray:
    idx = np.arange(n)
    k = np.abs(idx[:, None] - idx[None, :])
    return np.minimum(k, n - k) <= band


def require_normalized(curve: ArcCurve, rtol: float = 1e-6) -> None:
    if abs(curve.total_length - TWO_PI) > rtol * TWO_PI:
        raise KnotError(
            f"curve length {curve.total_length!r} is not 2*pi; normalize_length() the knot first"
        )


def kernel_grid(curve: ArcCurve, func, band_value: float, band: int = BAND) -> np.ndarray:
    """Evaluate ``func(rho, alpha)`` on every off-band cell, ``band_value`` on the band."""
    rho = curve.chord_matrix()
    alpha = curve.arc_matrix()
    mask = band_mask(curve.n, band)
    off = ~mask
    if np.any(rho[off] < NEAR_DOUBLE_POINT * curve.total_length / TWO_PI):
        i, j = np.argwhere(off & (rho < NEAR_DOUBLE_POINT * curve.total_length / TWO_PI))[0]
        raise NumericalError(f"near double point between samples {i} and {j}")
    out = np.empty_like(rho)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out[off] = func(rho[off], alpha[off])
    out[mask] = band_value
    if not np.all(np.isfinite(out)):
        raise NumericalError("kernel produced a non-finite value off the diagonal")
    return out


def check_double_points(knot: PolyKnot) -> None:
    """Raise NumericalError when two non-adjacent edges (nearly) touch.

    Resampling can step over a near double point of the source polyline, so
    callers that start from a PolyKnot check it here first.
    """
    seg = segment_distance_matrix(knot.vertices)
    tol = NEAR_DOUBLE_POINT * knot.length / TWO_PI
    if seg.min() < tol:
        i, j = np.unravel_index(int(np.argmin(seg)), seg.shape)
        raise NumericalError(f"near double point between edges {i} and {j} (distance {seg.min():.3g})")


def _ordered_sum(grid: np.ndarray) -> float:
    # fixed-order reduction: per-row sums, then the row totals in index order
    return float(np.sum(np.sum(grid, axis=1)))


def _double_sum(curve: ArcCurve, k: EnergyKernel, band_value: float, mode: str) -> float:
    grid = kernel_grid(curve, k.eval, band_value)
    h = curve.spacing
    if mode == "full":
        return _ordered_sum(grid) * h * h
    if mode == "upper":
        upper = np.triu(grid, 1)
        return (2.0 * _ordered_sum(upper) + float(np.trace(grid))) * h * h
    raise ValueError(f"mode must be 'full' or 'upper', got {mode!r}")


def total_energy(curve: ArcCurve, k: EnergyKernel, mode: str = "full") -> EnergyReport:
    """E_f of a length-2*pi curve.

    ``mode="upper"`` sums the strict upper triangle twice plus the diagonal,
    which must agree with the full sum; it exists as a self-check.
    """
    require_normalized(curve)
    if not np.isfinite(k.diagonal_limit):
        raise NumericalError(f"kernel {k.name} has no finite diagonal limit")
    value = _double_sum(curve, k, k.diagonal_limit, mode)
    return EnergyReport(value, curve.n, 2 * BAND + 1, k.name)


def raw_double_sum(curve: ArcCurve, k: EnergyKernel) -> float:
    """The same quadrature on a curve of any length, spacing ``total_length / n``.

    The diagonal limit is transported from length 2*pi with the kernel's
    homogeneity degree, so scale-invariant kernels give scale-free sums.
    """
    if k.degree is None:
        raise ValueError(f"kernel {k.name} is not homogeneous; normalize the curve instead")
    band_value = k.diagonal_limit * (curve.total_length / TWO_PI) ** k.degree
    return _double_sum(curve, k, band_value, "full")
