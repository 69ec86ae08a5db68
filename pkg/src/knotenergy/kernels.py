"""Energy kernels f(rho, alpha): chord length rho, arc distance alpha.

Each kernel carries its partial derivatives and the limits of f, df/drho and
df/dalpha along the diagonal (rho -> 0 with rho/alpha -> 1). The charged kernel
``alpha**2 / rho`` is a reading of a garbled printed formula (arc squared over chord).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

Func = Callable[[np.ndarray, np.ndarray], np.ndarray]

STANDARD_PROBES = ((0.5, 1.0), (1.0, 2.0), (2.0, 3.0))


@dataclass(frozen=True)
class EnergyKernel:
    name: str
    eval: Func
    d_rho: Func
    d_alpha: Func
    diagonal_limit: float
    has_finite_variation: bool
    # limits of the partials on the diagonal; None where they diverge
    d_rho_diagonal_limit: float | None = None
    d_alpha_diagonal_limit: float | None = None
    # homogeneity degree: f(s*rho, s*alpha) = s**degree * f(rho, alpha)
    degree: float | None = None

    def __call__(self, rho, alpha):
        return self.eval(rho, alpha)


def kernel_arc3_chord2() -> EnergyKernel:
    return EnergyKernel(
        name="arc3-chord2",
        eval=lambda r, a: a**3 / r**2,
        d_rho=lambda r, a: -2.0 * a**3 / r**3,
        d_alpha=lambda r, a: 3.0 * a**2 / r**2,
        diagonal_limit=0.0,
        has_finite_variation=True,
        d_rho_diagonal_limit=-2.0,
        d_alpha_diagonal_limit=3.0,
        degree=1.0,
    )


def kernel_charged_constrained() -> EnergyKernel:
    return EnergyKernel(
        name="charged",
        eval=lambda r, a: a**2 / r,
        d_rho=lambda r, a: -(a**2) / r**2,
        d_alpha=lambda r, a: 2.0 * a / r,
        diagonal_limit=0.0,
        has_finite_variation=True,
        d_rho_diagonal_limit=-1.0,
        d_alpha_diagonal_limit=2.0,
        degree=1.0,
    )


def kernel_mobius() -> EnergyKernel:
    # along rho = 2 sin(u/2), alpha = u: 1/(4 sin^2(u/2)) - 1/u^2 -> 1/12
    return EnergyKernel(
        name="mobius",
        eval=lambda r, a: 1.0 / r**2 - 1.0 / a**2,
        d_rho=lambda r, a: -2.0 / r**3,
        d_alpha=lambda r, a: 2.0 / a**3,
        diagonal_limit=1.0 / 12.0,
        has_finite_variation=False,
        degree=-2.0,
    )


KERNELS = {
    "arc3-chord2": kernel_arc3_chord2,
    "charged": kernel_charged_constrained,
    "mobius": kernel_mobius,
}


def get_kernel(name: str) -> EnergyKernel:
    try:
        return KERNELS[name]()
    except KeyError:
        raise ValueError(f"unknown kernel {name!r}; choose from {sorted(KERNELS)}") from None


@dataclass
class AdmissibilityReport:
    kernel_name: str
    probes: list = field(default_factory=list)
    d_rho_errors: list = field(default_factory=list)
    d_alpha_errors: list = field(default_factory=list)
    derivatives_ok: bool = True
    diagonal_tail: list = field(default_factory=list)
    diagonal_ok: bool = True
    tolerance: float = 1e-4

    @property
    def ok(self) -> bool:
        return self.derivatives_ok and self.diagonal_ok


def _rel_err(approx: float, exact: float) -> float:
    return abs(approx - exact) / max(abs(exact), 1e-12)


def check_admissibility(k: EnergyKernel, probes=STANDARD_PROBES, tolerance: float = 1e-4) -> AdmissibilityReport:
    """Finite-difference check of the partials and a diagonal-tail check of f.

    The tail walks the circle diagonal rho = 2 sin(u/2), alpha = u with u
    shrinking geometrically; it passes when the distance to ``diagonal_limit``
    shrinks monotonically over the last few samples (or is already at rounding level).
    """
    rep = AdmissibilityReport(k.name, list(probes), tolerance=tolerance)
    for rho, alpha in probes:
        step = 1e-5 * alpha
        fd_r = (k.eval(rho + step, alpha) - k.eval(rho - step, alpha)) / (2 * step)
        fd_a = (k.eval(rho, alpha + step) - k.eval(rho, alpha - step)) / (2 * step)
        er = _rel_err(fd_r, k.d_rho(rho, alpha))
        ea = _rel_err(fd_a, k.d_alpha(rho, alpha))
        rep.d_rho_errors.append(er)
        rep.d_alpha_errors.append(ea)
        if not (er <= tolerance and ea <= tolerance):
            rep.derivatives_ok = False

    us = 0.5 ** np.arange(1, 9)
    vals = [float(k.eval(2.0 * math.sin(u / 2.0), u)) for u in us]
    rep.diagonal_tail = list(zip(us.tolist(), vals))
    gaps = np.abs(np.array(vals) - k.diagonal_limit)
    tail = gaps[-4:]
    rep.diagonal_ok = bool(np.all(np.isfinite(gaps)) and (np.all(np.diff(tail) < 0) or tail[-1] < 1e-9))
    return rep
