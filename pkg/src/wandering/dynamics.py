"""Iteration of fitted maps: orbits, the attracting fixed point near 2, images."""

from __future__ import annotations

import cmath
import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import symbolic
from .geometry import Raster, TruncatedCarlemanSet, encode_ppm, label_raster

OVERFLOW_GUARD = 1e300


class NonFiniteEvaluation(ArithmeticError):
    """A map returned NaN at a finite point."""


@dataclass(frozen=True)
class Trajectory:
    start: complex
    points: tuple
    word: str = ""
    escaped: bool = False

    @property
    def steps(self) -> int:
        return len(self.points) - 1

    def to_json(self) -> dict:
        return {
            "word": self.word,
            "escaped": self.escaped,
            "points": [[p.real, p.imag] for p in self.points],
        }


def orbit(F: Callable, z: complex, n: int) -> Trajectory:
    """``[z, F(z), ..., F^n(z)]``, cut short (``escaped``) past the overflow guard."""
    if n < 1:
        raise ValueError("n must be >= 1")
    z = complex(z)
    pts = [z]
    escaped = False
    for _ in range(n):
        w = complex(F(z))
        if cmath.isnan(w):
            raise NonFiniteEvaluation(f"map returned NaN at {z}")
        if cmath.isinf(w) or abs(w) > OVERFLOW_GUARD:
            escaped = True
            break
        pts.append(w)
        z = w
    return Trajectory(pts[0], tuple(pts), getattr(F, "word", ""), escaped)


@dataclass(frozen=True)
class ConformanceStep:
    step: int
    predicted: int  # disk center from the symbolic table
    distance: float
    inside: bool


def orbit_conformance(
    F: Callable,
    cset: TruncatedCarlemanSet,
    table: symbolic.TransitionTable,
    z: complex,
    symbol: symbolic.DomainSymbol,
    steps: int,
) -> list[ConformanceStep]:
    """Compare ``F``-iterates of ``z`` (taken from ``symbol``'s component) with the table's disks.

    Stops before the first predicted disk whose containing component is not
    part of ``cset``; the fitted map is unconstrained there.
    """
    present = {c.symbol for c in cset.components if c.symbol is not None}
    disks = []
    s = symbol
    while len(disks) < steps:
        d = table.apply(s)
        if d is None or d.containing not in present:
            break
        disks.append(d)
        s = d.containing
    if not disks:
        return []
    pts = orbit(F, z, len(disks)).points
    out = []
    for n, (w, d) in enumerate(zip(pts[1:], disks), 1):
        dist = abs(w - d.center)
        out.append(ConformanceStep(n, d.center, dist, dist < d.radius))
    return out


@dataclass(frozen=True)
class FixedPointResult:
    z0: complex
    multiplier: float
    iterations: int
    converged: bool
    residual: float = float("nan")

    @property
    def attracting(self) -> bool:
        return self.converged and self.multiplier < 1

    def to_json(self) -> dict:
        return {
            "z0": [self.z0.real, self.z0.imag],
            "multiplier": self.multiplier,
            "iterations": self.iterations,
            "converged": self.converged,
            "attracting": self.attracting,
            "residual": self.residual,
        }


def derivative_modulus(F: Callable, z: complex, h: float = 1e-6) -> float:
    """``|F'(z)|`` by a central difference along the real axis."""
    return abs((complex(F(z + h)) - complex(F(z - h))) / (2 * h))


def find_fixed_point(F: Callable, seed: complex = 2, tol: float = 1e-9, max_iter: int = 500) -> FixedPointResult:
    """Plain iteration ``z <- F(z)`` until successive iterates agree to ``tol``."""
    z = complex(seed)
    for i in range(1, max_iter + 1):
        w = complex(F(z))
        if not cmath.isfinite(w):
            return FixedPointResult(z, float("nan"), i, False)
        if abs(w - z) <= tol:
            z = w
            res = abs(complex(F(z)) - z)
            return FixedPointResult(z, derivative_modulus(F, z), i, res <= tol, res)
        z = w
    return FixedPointResult(z, float("nan"), max_iter, False, abs(complex(F(z)) - z))


# -------------------------------------------------------------- rendering

_FAMILY_RGB = {
    "G0": (230, 190, 40),
    "L": (200, 150, 30),
    "M": (200, 150, 30),
    "G": (40, 150, 70),
    "B": (60, 90, 200),
}


def component_color(cid: str) -> tuple[int, int, int]:
    fam = cid if cid == "G0" else cid.rstrip("0123456789")
    base = _FAMILY_RGB.get(fam, (150, 60, 150))
    k = int(cid[len(fam):] or 0) if cid != "G0" else 0
    shade = 1.0 - 0.12 * (k % 4)
    return tuple(int(round(c * shade)) for c in base)


@dataclass(frozen=True)
class RenderConfig:
    viewport: tuple = (-12.0, 12.0, -5.0, 5.0)
    width: int = 480
    height: int = 200
    max_steps: int = 24
    extra: dict = field(default_factory=dict)


def escape_steps(F: Callable, z: np.ndarray, z0: complex, max_steps: int) -> np.ndarray:
    """Per point, steps until the orbit is within 1/2 of ``z0`` (``max_steps`` if never)."""
    z = np.array(z, dtype=complex)
    steps = np.full(z.shape, max_steps, dtype=np.int64)
    live = np.ones(z.shape, dtype=bool)
    for n in range(max_steps):
        with np.errstate(all="ignore"):
            hit = live & (np.abs(z - z0) < 0.5)
        steps[hit] = n
        live &= ~hit
        live &= np.isfinite(z) & (np.abs(z) <= OVERFLOW_GUARD)
        if not live.any():
            break
        z[live] = F(z[live])
    return steps


def render_regions(
    cset: TruncatedCarlemanSet,
    F: Optional[Callable] = None,
    viewport=(-12.0, 12.0, -5.0, 5.0),
    resolution=(480, 200),
    out: Optional[str] = None,
    max_steps: int = 24,
    z0: Optional[complex] = None,
) -> bytes:
    """PPM image of the set; with ``F``, background pixels shaded by steps to reach ``z0``."""
    x0, x1, y0, y1 = map(float, viewport)
    W, H = map(int, resolution)
    if not (x1 > x0 and y1 > y0) or W < 1 or H < 1:
        raise ValueError("degenerate viewport or resolution")
    raster = Raster((x0, x1, y0, y1), W, H)
    labels = label_raster(cset, raster)
    rgb = np.full((H, W, 3), 255, dtype=np.uint8)
    if F is not None:
        if z0 is None:
            z0 = find_fixed_point(F).z0
        steps = escape_steps(F, raster.centers(), z0, max_steps)
        level = (235 - (steps * 200) // max(max_steps, 1)).astype(np.uint8)
        level[steps >= max_steps] = 0
        rgb[:] = level[..., None]
    for i, c in enumerate(cset.components):
        rgb[labels == i] = component_color(c.id)
    data = encode_ppm(rgb)
    if out is not None:
        Path(out).write_bytes(data)
    return data


def sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()
