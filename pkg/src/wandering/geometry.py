"""Truncated Carleman sets as labeled region primitives.

Two families are built.  ``example3`` is the comb

    G0 = {|z-2| <= 1},
    G_k = {|z-(4k+2)| <= 1} with vertical half-lines Re z = 4k+2, |Im z| >= 1,
    B_k = the mirror image of G_k,
    L_k = {Re z = 4k},  M_k = {Re z = -4k},

and ``example1`` is the right half of the unit circle with the real ray
x > 1 and the rays arg z = pi/n, n >= 3, outside the unit disk.  Unbounded
pieces are clipped at height (example3) or modulus (example1) ``T``, and
only indices up to ``N`` are kept.

Of the three Carleman-set conditions only the first (C_inf minus the set
is connected) is checked, and only on a raster.  Local connectedness at
infinity and the condition on interior components meeting compact sets
are limit properties with no witness on a finite truncation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy import ndimage

from .symbolic import CORE, DomainSymbol

# points within this distance of a curve count as on it
CURVE_TOL = 1e-9


class RasterResolutionError(ValueError):
    """The raster is too coarse to separate the set's pieces reliably."""


# ------------------------------------------------------------- primitives


def _linspace_nodes(n: int, offset: float, nodes: str) -> np.ndarray:
    """``n + 1`` parameters in [0, 1] (or ``n`` shifted ones plus both ends)."""
    if nodes == "chebyshev":
        t = 0.5 - 0.5 * np.cos(np.pi * (np.arange(n + 1) + offset) / (n + offset))
        return t
    if offset == 0.0:
        return np.arange(n + 1) / n
    inner = (np.arange(n) + offset) / n
    return np.concatenate([[0.0], inner, [1.0]])


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("disk radius must be positive")

    def contains(self, z: np.ndarray, tol: float = CURVE_TOL) -> np.ndarray:
        return np.abs(z - self.center) <= self.radius + tol

    def bbox(self) -> tuple[float, float, float, float]:
        c, r = self.center, self.radius
        return c.real - r, c.real + r, c.imag - r, c.imag + r

    def samples(self, spacing: float, offset: float = 0.0, nodes: str = "uniform") -> np.ndarray:
        return _ring_samples(self.center, 0.0, self.radius, spacing, offset)

    def boundary(self, n: int) -> np.ndarray:
        return self.center + self.radius * np.exp(2j * np.pi * np.arange(n) / n)

    def raster(self, X0, X1, Y0, Y1) -> np.ndarray:
        dx = np.clip(self.center.real, X0, X1) - self.center.real
        dy = np.clip(self.center.imag, Y0, Y1) - self.center.imag
        return dx * dx + dy * dy <= self.radius**2

    def to_json(self) -> dict:
        return {"type": "Disk", "center": [self.center.real, self.center.imag], "radius": self.radius}


@dataclass(frozen=True)
class Annulus:
    center: complex
    inner: float
    outer: float

    def __post_init__(self):
        if not 0 < self.inner < self.outer:
            raise ValueError("annulus needs 0 < inner < outer")

    def contains(self, z, tol=CURVE_TOL):
        r = np.abs(z - self.center)
        return (r >= self.inner - tol) & (r <= self.outer + tol)

    def bbox(self):
        c, r = self.center, self.outer
        return c.real - r, c.real + r, c.imag - r, c.imag + r

    def samples(self, spacing, offset=0.0, nodes="uniform"):
        return _ring_samples(self.center, self.inner, self.outer, spacing, offset)

    def raster(self, X0, X1, Y0, Y1):
        cx, cy = self.center.real, self.center.imag
        near = (np.clip(cx, X0, X1) - cx) ** 2 + (np.clip(cy, Y0, Y1) - cy) ** 2
        far = np.maximum(np.abs(X0 - cx), np.abs(X1 - cx)) ** 2 + np.maximum(np.abs(Y0 - cy), np.abs(Y1 - cy)) ** 2
        return (near <= self.outer**2) & (far >= self.inner**2)

    def to_json(self):
        return {"type": "Annulus", "center": [self.center.real, self.center.imag], "inner": self.inner, "outer": self.outer}


def _ring_samples(center: complex, r0: float, r1: float, spacing: float, offset: float) -> np.ndarray:
    radii = []
    j = 0
    while True:
        r = r0 + (j + offset) * spacing
        if r >= r1 - 1e-12:
            break
        radii.append(r)
        j += 1
    radii.append(r1)
    pts = []
    for r in radii:
        if r <= 0.0:
            pts.append(np.array([center]))
            continue
        n = max(1, math.ceil(2 * math.pi * r / spacing))
        pts.append(center + r * np.exp(2j * np.pi * (np.arange(n) + offset) / n))
    return np.concatenate(pts)


@dataclass(frozen=True)
class VerticalSegment:
    """The closed segment ``{x + iy : y0 <= y <= y1}``.

    ``role`` records what it truncates: a full line (``segment``) or a
    half-line going up from ``y0`` / down from ``y1``.
    """

    x: float
    y0: float
    y1: float
    role: str = "segment"

    def __post_init__(self):
        if not self.y1 > self.y0:
            raise ValueError("segment interval must be nonempty")

    @property
    def length(self) -> float:
        return self.y1 - self.y0

    def contains(self, z, tol=CURVE_TOL):
        return (np.abs(z.real - self.x) <= tol) & (z.imag >= self.y0 - tol) & (z.imag <= self.y1 + tol)

    def bbox(self):
        return self.x, self.x, self.y0, self.y1

    def samples(self, spacing, offset=0.0, nodes="uniform"):
        n = max(1, math.ceil(self.length / spacing - 1e-9))
        t = _linspace_nodes(n, offset, nodes)
        return self.x + 1j * (self.y0 + self.length * t)

    def raster(self, X0, X1, Y0, Y1):
        return (X0 <= self.x) & (self.x <= X1) & (Y1 >= self.y0) & (Y0 <= self.y1)

    def to_json(self):
        return {"type": self.role, "x": self.x, "y": [self.y0, self.y1]}


def VerticalHalfLineUp(x: float, T: float) -> VerticalSegment:
    return VerticalSegment(x, 1.0, T, "halfline_up")


def VerticalHalfLineDown(x: float, T: float) -> VerticalSegment:
    return VerticalSegment(x, -T, -1.0, "halfline_down")


@dataclass(frozen=True)
class Arc:
    """``{|z| = radius, theta0 < arg z < theta1}``, endpoints excluded."""

    radius: float
    theta0: float
    theta1: float

    def contains(self, z, tol=CURVE_TOL):
        th = np.angle(z)
        return (np.abs(np.abs(z) - self.radius) <= tol) & (th > self.theta0) & (th < self.theta1)

    def bbox(self):
        th = np.linspace(self.theta0, self.theta1, 721)
        p = self.radius * np.exp(1j * th)
        return p.real.min(), p.real.max(), p.imag.min(), p.imag.max()

    def samples(self, spacing, offset=0.0, nodes="uniform"):
        n = max(1, math.ceil(self.radius * (self.theta1 - self.theta0) / spacing))
        u = (np.arange(n) + (1 + offset) / 2) / n
        return self.radius * np.exp(1j * (self.theta0 + (self.theta1 - self.theta0) * u))

    def to_json(self):
        return {"type": "Arc", "radius": self.radius, "theta": [self.theta0, self.theta1]}


@dataclass(frozen=True)
class Ray:
    """``{r e^{i angle} : r0 < r <= r1}``, open at the inner end."""

    angle: float
    r0: float
    r1: float

    def contains(self, z, tol=CURVE_TOL):
        r = np.abs(z)
        off = np.abs(z - r * np.exp(1j * self.angle))
        return (off <= tol) & (r > self.r0 + tol) & (r <= self.r1 + tol)

    def bbox(self):
        a, b = self.r0 * np.exp(1j * self.angle), self.r1 * np.exp(1j * self.angle)
        return min(a.real, b.real), max(a.real, b.real), min(a.imag, b.imag), max(a.imag, b.imag)

    def samples(self, spacing, offset=0.0, nodes="uniform"):
        n = max(1, math.ceil((self.r1 - self.r0) / spacing))
        r = self.r0 + (self.r1 - self.r0) * (np.arange(1, n + 1) - (1 - (1 + offset) / 2) * (np.arange(1, n + 1) < n)) / n
        return r * np.exp(1j * self.angle)

    def to_json(self):
        return {"type": "Ray", "angle": self.angle, "r": [self.r0, self.r1]}


Primitive = Union[Disk, Annulus, VerticalSegment, Arc, Ray]


# ------------------------------------------------------------- components


@dataclass(frozen=True)
class LabeledComponent:
    id: str
    primitives: tuple
    symbol: Optional[DomainSymbol] = None

    def contains(self, z, tol=CURVE_TOL) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=bool)
        for p in self.primitives:
            out |= p.contains(z, tol)
        return out

    def bbox(self):
        boxes = np.array([p.bbox() for p in self.primitives])
        return boxes[:, 0].min(), boxes[:, 1].max(), boxes[:, 2].min(), boxes[:, 3].max()

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "symbol": None if self.symbol is None else str(self.symbol),
            "primitives": [p.to_json() for p in self.primitives],
        }


@dataclass(frozen=True)
class TruncatedCarlemanSet:
    kind: str
    N: int
    T: float
    components: tuple

    def __iter__(self):
        return iter(self.components)

    def __len__(self):
        return len(self.components)

    @property
    def ids(self) -> list[str]:
        return [c.id for c in self.components]

    def component(self, cid: str) -> LabeledComponent:
        for c in self.components:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def bbox(self) -> tuple[float, float, float, float]:
        boxes = np.array([c.bbox() for c in self.components])
        return boxes[:, 0].min(), boxes[:, 1].max(), boxes[:, 2].min(), boxes[:, 3].max()

    def to_json(self) -> dict:
        return {"kind": self.kind, "N": self.N, "T": self.T, "components": [c.to_json() for c in self.components]}


def _example3(N: int, T: float) -> list[LabeledComponent]:
    comps = [LabeledComponent("G0", (Disk(2 + 0j, 1.0),), CORE)]
    for k in range(1, N + 1):
        c = 4 * k + 2
        for sign, name in ((1, "G"), (-1, "B")):
            x = float(sign * c)
            comps.append(
                LabeledComponent(
                    f"{name}{k}",
                    (Disk(complex(x, 0), 1.0), VerticalHalfLineUp(x, T), VerticalHalfLineDown(x, T)),
                    DomainSymbol(name, k),
                )
            )
        comps.append(LabeledComponent(f"L{k}", (VerticalSegment(4.0 * k, -T, T),), CORE))
        comps.append(LabeledComponent(f"M{k}", (VerticalSegment(-4.0 * k, -T, T),), CORE))
    return comps


def _example1(N: int, T: float) -> list[LabeledComponent]:
    comps = [
        LabeledComponent("Arc", (Arc(1.0, -math.pi / 2, math.pi / 2),)),
        LabeledComponent("R0", (Ray(0.0, 1.0, T),)),
    ]
    for n in range(3, N + 3):
        comps.append(LabeledComponent(f"R{n}", (Ray(math.pi / n, 1.0, T),)))
    return comps


def build_set(kind: Union[str, int], N: int, T: float) -> TruncatedCarlemanSet:
    """Truncation of one of the two example Carleman sets to indices <= N and height/modulus T."""
    kind = {1: "example1", 3: "example3", "1": "example1", "3": "example3"}.get(kind, kind)
    if kind not in ("example1", "example3"):
        raise ValueError(f"unknown set kind {kind!r}")
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N}")
    if not T > 1:
        raise ValueError(f"T must exceed 1, got {T}")
    T = float(T)
    comps = _example3(int(N), T) if kind == "example3" else _example1(int(N), T)
    return TruncatedCarlemanSet(kind, int(N), T, tuple(comps))


def custom_set(components: Sequence[LabeledComponent], kind: str = "custom") -> TruncatedCarlemanSet:
    return TruncatedCarlemanSet(kind, 0, 0.0, tuple(components))


# ------------------------------------------------------------- membership


def membership(cset: TruncatedCarlemanSet, z: complex, tol: float = CURVE_TOL) -> Optional[str]:
    """Id of the component containing ``z`` (closed pieces), or None."""
    z = np.asarray(complex(z))
    for c in cset.components:
        if c.contains(z, tol):
            return c.id
    return None


def membership_array(cset: TruncatedCarlemanSet, z: np.ndarray, tol: float = CURVE_TOL) -> np.ndarray:
    """Component index per point, -1 for points outside the set."""
    z = np.asarray(z, dtype=complex)
    out = np.full(z.shape, -1, dtype=np.int64)
    for i, c in enumerate(cset.components):
        hit = c.contains(z, tol) & (out < 0)
        out[hit] = i
    return out


# --------------------------------------------------------------- sampling


def sample_components(
    cset: TruncatedCarlemanSet,
    spacing: float,
    offset: float = 0.0,
    nodes: str = "uniform",
    min_nodes: int = 0,
) -> dict[str, np.ndarray]:
    """Deterministic samples per component id.

    Disks are sampled on concentric rings ``spacing`` apart plus the
    boundary circle; segments at ``spacing`` steps including both ends.
    ``offset`` in [0, 1) shifts rings, angles and steps by that fraction of
    a step.  ``nodes="chebyshev"`` clusters segment nodes toward the ends,
    and ``min_nodes`` raises the node count on every segment and boundary
    circle; both only matter for fitting.
    """
    if not spacing > 0:
        raise ValueError("spacing must be positive")
    if not 0.0 <= offset < 1.0:
        raise ValueError("offset must lie in [0, 1)")
    out = {}
    for c in cset.components:
        pts = []
        for p in c.primitives:
            pts.append(p.samples(spacing, offset, nodes))
            if min_nodes:
                if isinstance(p, VerticalSegment) and math.ceil(p.length / spacing) < min_nodes:
                    pts[-1] = p.samples(p.length / min_nodes, offset, nodes)
                elif isinstance(p, Disk):
                    pts.append(p.boundary(min_nodes))
        out[c.id] = np.concatenate(pts)
    return out


def sample_points(cset: TruncatedCarlemanSet, spacing: float, offset: float = 0.0) -> list[tuple[complex, str]]:
    """Flat, ordered list of ``(z, component id)`` samples."""
    return [(complex(z), cid) for cid, pts in sample_components(cset, spacing, offset).items() for z in pts]


# --------------------------------------------------------------- distance


def primitive_distance(a: Primitive, b: Primitive) -> float:
    """Euclidean distance between two disks / vertical segments."""
    if isinstance(a, VerticalSegment) and isinstance(b, Disk):
        a, b = b, a
    if isinstance(a, Disk) and isinstance(b, Disk):
        return max(0.0, abs(a.center - b.center) - a.radius - b.radius)
    if isinstance(a, Disk) and isinstance(b, VerticalSegment):
        y = min(max(a.center.imag, b.y0), b.y1)
        return max(0.0, abs(a.center - complex(b.x, y)) - a.radius)
    if isinstance(a, VerticalSegment) and isinstance(b, VerticalSegment):
        gap = max(0.0, max(a.y0, b.y0) - min(a.y1, b.y1))
        return math.hypot(a.x - b.x, gap)
    raise NotImplementedError(f"no distance for {type(a).__name__} / {type(b).__name__}")


def min_component_distance(cset: TruncatedCarlemanSet) -> float:
    """Smallest distance between two distinct components (brute force over primitive pairs)."""
    best = math.inf
    for c1, c2 in itertools.combinations(cset.components, 2):
        for p, q in itertools.product(c1.primitives, c2.primitives):
            best = min(best, primitive_distance(p, q))
    return best


def min_feature_size(cset: TruncatedCarlemanSet) -> float:
    """Smallest length scale a raster must resolve: radii, annulus widths, gaps."""
    sizes = []
    rays = []
    for c in cset.components:
        for p in c.primitives:
            if isinstance(p, Disk):
                sizes.append(p.radius)
            elif isinstance(p, Annulus):
                sizes.append(min(p.inner, p.outer - p.inner))
            elif isinstance(p, Ray):
                rays.append(p)
    rays.sort(key=lambda r: r.angle)
    for r, s in zip(rays, rays[1:]):
        sizes.append(2 * min(r.r0, s.r0) * math.sin((s.angle - r.angle) / 2))
    for c1, c2 in itertools.combinations(cset.components, 2):
        for p, q in itertools.product(c1.primitives, c2.primitives):
            try:
                sizes.append(primitive_distance(p, q))
            except NotImplementedError:
                pass
    return min(sizes) if sizes else math.inf


# ----------------------------------------------------------------- raster


@dataclass(frozen=True)
class Raster:
    """Pixel grid over ``bbox``; row 0 is the top (largest Im z)."""

    bbox: tuple[float, float, float, float]
    width: int
    height: int

    @classmethod
    def at_resolution(cls, bbox, resolution: float) -> "Raster":
        x0, x1, y0, y1 = bbox
        return cls(tuple(bbox), max(1, round((x1 - x0) * resolution)), max(1, round((y1 - y0) * resolution)))

    def edges(self):
        x0, x1, y0, y1 = self.bbox
        xs = x0 + (x1 - x0) * np.arange(self.width + 1) / self.width
        ys = y1 - (y1 - y0) * np.arange(self.height + 1) / self.height
        X0, X1 = np.meshgrid(xs[:-1], ys[:-1])[0], np.meshgrid(xs[1:], ys[:-1])[0]
        Y1, Y0 = np.meshgrid(xs[:-1], ys[:-1])[1], np.meshgrid(xs[:-1], ys[1:])[1]
        return X0, X1, Y0, Y1

    def centers(self) -> np.ndarray:
        x0, x1, y0, y1 = self.bbox
        xs = x0 + (x1 - x0) * (np.arange(self.width) + 0.5) / self.width
        ys = y1 - (y1 - y0) * (np.arange(self.height) + 0.5) / self.height
        X, Y = np.meshgrid(xs, ys)
        return X + 1j * Y

    def pixel_of(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        x0, x1, y0, y1 = self.bbox
        col = np.floor((np.real(z) - x0) / (x1 - x0) * self.width).astype(np.int64)
        row = np.floor((y1 - np.imag(z)) / (y1 - y0) * self.height).astype(np.int64)
        return np.clip(row, 0, self.height - 1), np.clip(col, 0, self.width - 1)


def label_raster(cset: TruncatedCarlemanSet, raster: Raster) -> np.ndarray:
    """Component index per pixel (-1 for none), marking every pixel a piece touches."""
    X0, X1, Y0, Y1 = raster.edges()
    labels = np.full((raster.height, raster.width), -1, dtype=np.int32)
    step = min((raster.bbox[1] - raster.bbox[0]) / raster.width, (raster.bbox[3] - raster.bbox[2]) / raster.height) / 4
    for i, c in enumerate(cset.components):
        for p in c.primitives:
            if hasattr(p, "raster"):
                hit = p.raster(X0, X1, Y0, Y1)
                labels[hit & (labels < 0)] = i
            else:
                pts = p.samples(step)
                r, col = raster.pixel_of(pts)
                free = labels[r, col] < 0
                labels[r[free], col[free]] = i
    return labels


def complement_report(cset: TruncatedCarlemanSet, bbox=None, resolution: float = 20.0) -> dict:
    """Flood-fill the raster complement from the box border.

    Returns counts of complement pixels and of those the fill cannot reach;
    the set passes when nothing is left unreached.
    """
    inner = cset.bbox()
    if bbox is None:
        bbox = (inner[0] - 1, inner[1] + 1, inner[2] - 1, inner[3] + 1)
    x0, x1, y0, y1 = bbox
    if not (x0 < inner[0] and x1 > inner[1] and y0 < inner[2] and y1 > inner[3]):
        raise ValueError(f"bounding box {bbox} does not strictly contain the set {inner}")
    feature = min_feature_size(cset)
    if feature * resolution < 2:
        raise RasterResolutionError(
            f"resolution {resolution} px/unit gives < 2 px across the smallest feature ({feature:.4g})"
        )
    raster = Raster.at_resolution(bbox, resolution)
    free = label_raster(cset, raster) < 0
    four = ndimage.generate_binary_structure(2, 1)
    lab, n = ndimage.label(free, structure=four)
    border = np.unique(np.concatenate([lab[0], lab[-1], lab[:, 0], lab[:, -1]]))
    reached = np.isin(lab, border[border > 0])
    return {
        "width": raster.width,
        "height": raster.height,
        "complement_pixels": int(free.sum()),
        "unreached_pixels": int((free & ~reached).sum()),
        "complement_regions": int(n),
        "connected": bool(not (free & ~reached).any()),
    }


def complement_connected(cset: TruncatedCarlemanSet, bbox=None, resolution: float = 20.0) -> bool:
    """Raster check that every bounded-box complement pixel connects to the border."""
    return complement_report(cset, bbox, resolution)["connected"]


def encode_ppm(rgb: np.ndarray) -> bytes:
    """Binary PPM (P6) of an ``H x W x 3`` uint8 array."""
    rgb = np.ascontiguousarray(rgb, dtype=np.uint8)
    h, w, _ = rgb.shape
    return b"P6\n%d %d\n255\n" % (w, h) + rgb.tobytes()


def raster_ppm(cset: TruncatedCarlemanSet, bbox, resolution: float) -> bytes:
    """Debug image of the rasterized set: black pieces on white."""
    raster = Raster.at_resolution(bbox, resolution)
    mask = label_raster(cset, raster) >= 0
    rgb = np.where(mask[..., None], 0, 255).astype(np.uint8).repeat(3, axis=2)
    return encode_ppm(rgb)
