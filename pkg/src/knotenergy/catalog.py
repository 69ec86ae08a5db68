"""Built-in starting knots, all normalized to length 2*pi.

Smooth presets are sampled at equal arc-length steps of their parametrization,
so every vertex lies on the curve. The 5_2 and 6_x presets (and the composite
knots) are closures of braid words drawn on concentric strands; the knot type
is documented, not certified.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import TWO_PI, KnotError, PolyKnot, normalize_length
from .mm import e_mm

DENSE = 64  # parameter samples per output vertex when inverting arc length


class UnknownPresetError(KnotError):
    pass


@dataclass(frozen=True)
class PresetEntry:
    name: str
    builder: Callable[[int], PolyKnot]
    expected_class: str


def _equal_arclength(curve: Callable[[np.ndarray], np.ndarray], n: int, label: str) -> PolyKnot:
    """n points at equal arc-length spacing along a closed 2*pi-periodic curve."""
    m = DENSE * n
    t = np.arange(m + 1) * (TWO_PI / m)
    pts = curve(t)
    cum = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1))])
    targets = np.arange(n) * (cum[-1] / n)
    knot = PolyKnot(curve(np.interp(targets, cum, t)), label)
    return normalize_length(knot)[0]


def circle(n: int) -> PolyKnot:
    t = np.arange(n) * (TWO_PI / n)
    return normalize_length(PolyKnot(np.c_[np.cos(t), np.sin(t), np.zeros(n)], "circle"))[0]


def two_arc(theta: float, n: int) -> PolyKnot:
    """Two equal circular arcs of half-angle ``theta`` glued at two corners.

    The corners are obtuse for theta in (pi/4, 3*pi/4); theta = pi/2 is the circle.
    """
    if not math.pi / 4 < theta < 3 * math.pi / 4:
        raise KnotError(f"two-arc half-angle {theta!r} outside (pi/4, 3pi/4)")
    if n < 4 or n % 2:
        raise KnotError("two-arc needs an even vertex count >= 4")
    half = n // 2
    s = np.arange(half) * (2.0 * theta / half)
    off = math.cos(theta)
    upper = np.c_[np.cos(math.pi / 2 + theta - s), np.sin(math.pi / 2 + theta - s) - off]
    lower = -upper
    xy = np.vstack([upper, lower])
    return normalize_length(PolyKnot(np.c_[xy, np.zeros(n)], f"two-arc({theta:.9g})"))[0]


def torus_knot(p: int, q: int, n: int) -> PolyKnot:
    """Winds p times around the axis and q times around the core of a torus with radii 2 and 1."""
    if math.gcd(p, q) != 1 or p < 1 or q < 1:
        raise KnotError(f"torus({p},{q}) needs coprime positive p, q")

    def curve(t):
        r = 2.0 + np.cos(q * t)
        return np.c_[r * np.cos(p * t), r * np.sin(p * t), np.sin(q * t)]

    return _equal_arclength(curve, n, f"torus({p},{q})")


def figure_eight(n: int) -> PolyKnot:
    def curve(t):
        r = 2.0 + np.cos(2 * t)
        return np.c_[r * np.cos(3 * t), r * np.sin(3 * t), np.sin(4 * t)]

    return _equal_arclength(curve, n, "figure-eight")


def _smoothstep(s):
    return s * s * (3.0 - 2.0 * s)


def braid_closure(word, strands: int, n: int, label: str = "") -> PolyKnot:
    """Closure of a braid word; generator +-i swaps positions i-1 and i.

    Strand positions sit on radii 2 + 0.5*k around the z axis; each letter
    occupies an equal angular slot in which the two strands exchange radii
    while one dips below the other (positive letter: the lower-index strand
    passes over).
    """
    word = [int(g) for g in word]
    if not word or any(not 1 <= abs(g) < strands for g in word):
        raise KnotError(f"braid word {word} does not fit {strands} strands")
    slots = len(word)
    perm = list(range(strands))  # perm[pos] = strand at position pos
    for g in word:
        i = abs(g) - 1
        perm[i], perm[i + 1] = perm[i + 1], perm[i]
    # follow strand 0 around the closure; a knot visits every strand once
    order = [0]
    pos_of_end = {perm[pos]: pos for pos in range(strands)}
    while True:
        nxt = pos_of_end[order[-1]]
        if nxt == 0:
            break
        order.append(nxt)
    if len(order) != strands:
        raise KnotError(f"braid word {word} closes to a link with several components")

    def strand_path(start_pos: int, u: np.ndarray) -> np.ndarray:
        # u in [0, 1): one turn of the strand that starts at position start_pos
        radius = np.full_like(u, float(start_pos))
        z = np.zeros_like(u)
        pos = start_pos
        for slot, g in enumerate(word):
            i = abs(g) - 1
            s = np.clip(u * slots - slot, 0.0, 1.0)
            inside = (u * slots >= slot) & (u * slots < slot + 1)
            if pos in (i, i + 1):
                other = i + 1 if pos == i else i
                radius = np.where(u * slots >= slot, pos + (other - pos) * _smoothstep(s), radius)
                over = (pos == i) == (g > 0)
                z = np.where(inside, (0.3 if over else -0.3) * np.sin(np.pi * s), z)
                pos = other
        return radius, z

    def curve(t):
        # t in [0, 2*pi] covers all strands in sequence
        u = t / TWO_PI * strands
        k = np.minimum(np.floor(u).astype(int), strands - 1)
        frac = u - k
        out = np.empty((len(t), 3))
        for j, start in enumerate(order):
            sel = k == j
            r, z = strand_path(start, frac[sel])
            ang = TWO_PI * frac[sel]
            rad = 2.0 + 0.5 * r
            out[sel] = np.c_[rad * np.cos(ang), rad * np.sin(ang), z]
        return out

    return _equal_arclength(curve, n, label or f"braid{word}")


BRAIDS = {
    "granny": ([1, 1, 1, 2, 2, 2], 3, "3_1 # 3_1"),
    "square-knot": ([1, 1, 1, -2, -2, -2], 3, "3_1 # mirror(3_1)"),
    "5_2": ([1, 1, 1, 2, -1, 2], 3, "5_2"),
    "6_1": ([1, 1, 2, -1, -3, 2, -3], 4, "6_1"),
    "6_2": ([1, 1, 1, -2, 1, -2], 3, "6_2"),
    "6_3": ([1, 1, -2, 1, -2, -2], 3, "6_3"),
}

TORUS_PRESETS = ((2, 3), (3, 2), (2, 5), (2, 7), (3, 4))


def _entries() -> dict[str, PresetEntry]:
    out = {
        "circle": PresetEntry("circle", circle, "unknot"),
        "two-arc": PresetEntry("two-arc", lambda n: two_arc(math.pi / 3, n), "unknot"),
        "figure-eight": PresetEntry("figure-eight", figure_eight, "4_1"),
    }
    for p, q in TORUS_PRESETS:
        name = f"torus({p},{q})"
        out[name] = PresetEntry(name, lambda n, p=p, q=q: torus_knot(p, q, n), f"T({p},{q})")
    for name, (word, strands, cls) in BRAIDS.items():
        out[name] = PresetEntry(
            name, lambda n, w=word, s=strands, nm=name: braid_closure(w, s, n, nm), cls
        )
    return out


PRESETS = _entries()
ALIASES = {"trefoil": "torus(2,3)", "unknot": "circle"}


def list_presets() -> list[str]:
    return list(PRESETS)


_TORUS = re.compile(r"^torus\((\d+),(\d+)\)$")
_TWO_ARC = re.compile(r"^two-arc\(([^)]+)\)$")


def build(name: str, n: int) -> PolyKnot:
    """Preset ``name`` with ``n`` vertices; also accepts torus(p,q) and two-arc(theta)."""
    key = ALIASES.get(name.strip(), name.replace(" ", ""))
    if key in PRESETS:
        return PRESETS[key].builder(n)
    if m := _TORUS.match(key):
        return torus_knot(int(m.group(1)), int(m.group(2)), n)
    if m := _TWO_ARC.match(key):
        try:
            theta = float(m.group(1))
        except ValueError:
            raise UnknownPresetError(f"bad two-arc angle {m.group(1)!r}") from None
        return two_arc(theta, n)
    raise UnknownPresetError(f"unknown preset {name!r}; choose from {list_presets()}")


def scan_two_arc(
    target: float,
    n: int = 512,
    energy=None,
    lo: float = math.pi / 4 + 1e-3,
    hi: float = math.pi / 2,
    xtol: float = 1e-6,
):
    """Half-angle theta in [lo, hi] whose two-arc knot has Mm-energy ``target``.

    A coarse grid locates the minimum of the family; the root is then bracketed
    on the branch between that minimum and ``hi`` and refined by bisection.
    Returns (theta, energy) of the closest point found.
    """
    if energy is None:

        def energy(k):
            return e_mm(k).value

    grid = np.linspace(lo, hi, 17)
    vals = np.array([energy(two_arc(th, n)) for th in grid])
    i = int(np.argmin(vals))
    a, b = grid[i], hi
    fa, fb = vals[i] - target, vals[-1] - target
    if fa > 0 or fb < 0:
        j = int(np.argmin(np.abs(vals - target)))
        return float(grid[j]), float(vals[j])
    while b - a > xtol:
        mid = 0.5 * (a + b)
        fm = energy(two_arc(mid, n)) - target
        if fm < 0:
            a = mid
        else:
            b = mid
    theta = 0.5 * (a + b)
    return theta, float(energy(two_arc(theta, n)))
