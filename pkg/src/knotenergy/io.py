"""Knot file and Wavefront OBJ polyline reading and writing."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .geometry import KnotError, PolyKnot

HEADER = "knotfile 1"


class KnotFileError(KnotError):
    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


def parse_knotfile(text: str) -> PolyKnot:
    if not text.endswith("\n"):
        raise KnotFileError("missing trailing newline", text.count("\n") + 1)
    lines = text.split("\n")[:-1]
    if not lines or lines[0].strip() != HEADER:
        raise KnotFileError(f"expected header {HEADER!r}", 1)
    if len(lines) < 2 or not (lines[1] == "label" or lines[1].startswith("label ")):
        raise KnotFileError("expected 'label <text>'", 2)
    label = lines[1][6:]
    verts = []
    for lineno, line in enumerate(lines[2:], start=3):
        parts = line.split()
        if len(parts) != 3:
            raise KnotFileError(f"expected 3 numbers, got {len(parts)} fields", lineno)
        try:
            verts.append([float(p) for p in parts])
        except ValueError:
            raise KnotFileError(f"not a number in {line.strip()!r}", lineno) from None
    try:
        return PolyKnot(np.array(verts).reshape(-1, 3), label)
    except KnotError as exc:
        raise KnotFileError(str(exc), None) from None


def format_knotfile(knot: PolyKnot) -> str:
    rows = [HEADER, f"label {knot.label}".rstrip() if knot.label else "label"]
    rows += [" ".join(repr(float(c)) for c in v) for v in knot.vertices]
    return "\n".join(rows) + "\n"


def read_knot(path) -> PolyKnot:
    return parse_knotfile(Path(path).read_text())


def write_knot(knot: PolyKnot, path) -> None:
    Path(path).write_text(format_knotfile(knot))


def format_obj(knot: PolyKnot) -> str:
    rows = [f"# {knot.label}"] if knot.label else []
    rows += ["v " + " ".join(repr(float(c)) for c in v) for v in knot.vertices]
    m = len(knot)
    rows += [f"l {i + 1} {(i + 1) % m + 1}" for i in range(m)]
    return "\n".join(rows) + "\n"


def parse_obj(text: str) -> PolyKnot:
    """Read the vertices of an OBJ polyline; edges are assumed to form the closed vertex cycle."""
    verts = []
    label = ""
    for lineno, line in enumerate(text.splitlines(), start=1):
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "#" and not verts and not label:
            label = line.lstrip("#").strip()
        elif parts[0] == "v":
            try:
                verts.append([float(p) for p in parts[1:4]])
            except ValueError:
                raise KnotFileError(f"bad vertex {line.strip()!r}", lineno) from None
    return PolyKnot(np.array(verts).reshape(-1, 3), label)
