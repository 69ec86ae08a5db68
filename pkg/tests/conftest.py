import numpy as np
import pytest

from knotenergy.geometry import PolyKnot, normalize_length, resample_arclength


def circle_knot(m=256, radius=1.0):
    t = np.arange(m) * (2 * np.pi / m)
    return PolyKnot(np.c_[radius * np.cos(t), radius * np.sin(t), np.zeros(m)], "circle")


def ellipse_knot(a=1.0, b=0.8, m=2048):
    t = np.arange(m) * (2 * np.pi / m)
    return normalize_length(PolyKnot(np.c_[a * np.cos(t), b * np.sin(t), np.zeros(m)], "ellipse"))[0]


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


@pytest.fixture(scope="session")
def circle512():
    return resample_arclength(normalize_length(circle_knot(4096))[0], 512)


@pytest.fixture(scope="session")
def ellipse256():
    return resample_arclength(ellipse_knot(), 256)


ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS, key=int):
        ok, detail, complete = ACCEPTANCE_RESULTS[key]
        status = "FAIL" if not ok else "PASS" if complete else "INCOMPLETE (not all parts ran)"
        terminalreporter.write_line(f"criterion {key}: {status}  {detail}")
