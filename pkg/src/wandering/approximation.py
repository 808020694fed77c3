"""Piecewise targets, exp-continuity tolerances and polynomial approximants.

A generator is realized as ``F = exp(p)`` with ``p`` a polynomial fitted to
a piecewise-constant logarithm of the generator table's disk centers.  If
``|p(z) - t| <= safe_delta(|e^t|)`` then ``|F(z) - e^t| <= 1/2``.

Fitting runs on a compact truncation of the Carleman set.  The polynomial
is represented through Vandermonde-with-Arnoldi: the basis is orthonormal
on the (weighted) training nodes and evaluation replays the recorded
Hessenberg recurrence, so degrees in the hundreds stay well conditioned.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import symbolic
from .geometry import TruncatedCarlemanSet, sample_components

# exp overflows (or exceeds the orbit guard) above this real part
LOG_GUARD = math.log(1e300)

TARGET_FOR = {"f": "alpha", "g": "beta", "h": "gamma"}
TOLERANCE_FOR = {"alpha": "eps1", "beta": "eps2", "gamma": "eps3"}
_ALIASES = {
    "α": "alpha", "β": "beta", "γ": "gamma",
    "eps1": "alpha", "eps2": "beta", "eps3": "gamma",
    "ε1": "alpha", "ε2": "beta", "ε3": "gamma",
    "f": "alpha", "g": "beta", "h": "gamma",
}


class RankDeficientError(np.linalg.LinAlgError):
    """The unregularized design matrix lost rank before the requested degree."""


def canonical_target(name: str) -> str:
    name = _ALIASES.get(name, name)
    if name not in ("alpha", "beta", "gamma"):
        raise ValueError(f"unknown target {name!r}; expected alpha, beta or gamma")
    return name


# ------------------------------------------------------------------ delta


def safe_delta(m: float) -> float:
    """Radius about any ``w0`` with ``|e^w0| = m`` on which ``e^w`` stays within 1/2 of ``e^w0``.

    ``|e^w - e^w0| <= m (e^|w-w0| - 1)``, which equals 1/2 at ``ln(1 + 1/(2m))``.
    """
    if not m > 0:
        raise ValueError("modulus must be positive")
    return math.log1p(1.0 / (2.0 * m))


# ---------------------------------------------------------------- targets


LOG2 = math.log(2)
IPI = 1j * math.pi


def _target_value(name: str, symbol: symbolic.DomainSymbol) -> complex:
    if symbol.kind == "Core":
        return complex(LOG2)
    k = symbol.k
    if symbol.kind == "B":
        return IPI + math.log(4 * k + 6)
    if name == "alpha":
        return IPI + math.log(6)
    if name == "beta":
        return IPI + math.log(6) if k == 1 else complex(math.log(4 * k - 2))
    # gamma
    if k == 1:
        return IPI + math.log(10)
    if k == 2:
        return IPI + math.log(6)
    return complex(math.log(4 * k - 6))


@dataclass(frozen=True)
class PiecewiseTarget:
    name: str
    value: dict  # component id -> complex

    def __call__(self, cid: str) -> complex:
        return self.value[cid]

    def to_json(self) -> dict:
        return {"name": self.name, "value": {k: [v.real, v.imag] for k, v in self.value.items()}}


@dataclass(frozen=True)
class ToleranceProfile:
    name: str
    value: dict  # component id -> delta

    def __call__(self, cid: str) -> float:
        return self.value[cid]

    def to_json(self) -> dict:
        return {"name": self.name, "value": dict(self.value)}


def _symbolic_components(cset: TruncatedCarlemanSet):
    comps = [c for c in cset.components if c.symbol is not None]
    if not comps:
        raise ValueError(f"set of kind {cset.kind!r} has no components with domain symbols")
    return comps


def target_profile(name: str, cset: TruncatedCarlemanSet) -> PiecewiseTarget:
    """The piecewise-constant logarithm assigned to each component (alpha, beta or gamma)."""
    name = canonical_target(name)
    return PiecewiseTarget(name, {c.id: _target_value(name, c.symbol) for c in _symbolic_components(cset)})


def tolerance_profile(name: str, cset: TruncatedCarlemanSet) -> ToleranceProfile:
    """Per-component delta: ``safe_delta(|exp(target)|)`` for the matching target."""
    target = target_profile(name, cset)
    return ToleranceProfile(
        TOLERANCE_FOR[target.name],
        {cid: safe_delta(abs(cmath.exp(t))) for cid, t in target.value.items()},
    )


# ------------------------------------------------------------ approximant


def _arnoldi(u: np.ndarray, degree: int, w: np.ndarray, breakdown: float = 1e-12):
    """Weighted Vandermonde-with-Arnoldi; returns (Q, H) with Q orthonormal in the w-mean inner product.

    Stops early (returning fewer columns) when orthogonalization cancels
    all but a ``breakdown`` fraction of the next vector: the nodes cannot
    support a higher degree, either because there are too few distinct
    ones or because they cluster too tightly.
    """
    M = len(u)
    Q = np.zeros((M, degree + 1), dtype=complex)
    H = np.zeros((degree + 1, degree), dtype=complex)
    Q[:, 0] = 1.0
    wn = w / w.sum()
    for k in range(degree):
        v = u * Q[:, k]
        before = math.sqrt(float(wn @ (v.real**2 + v.imag**2)))
        for _ in range(2):  # classical Gram-Schmidt, twice
            h = (Q[:, : k + 1].conj().T * wn) @ v
            v -= Q[:, : k + 1] @ h
            H[: k + 1, k] += h
        nrm = math.sqrt(float(wn @ (v.real**2 + v.imag**2)))
        if nrm <= breakdown * max(before, 1.0):
            return Q[:, : k + 1], H[: k + 1, :k]
        H[k + 1, k] = nrm
        Q[:, k + 1] = v / nrm
    return Q, H


@dataclass(frozen=True)
class Approximant:
    """Polynomial ``p(z) = sum_j c_j q_j((z - center)/scale)`` in an Arnoldi basis.

    ``q_0 = 1`` and ``q_{k+1} = (u q_k - sum_{i<=k} H[i,k] q_i) / H[k+1,k]``.
    """

    center: complex
    scale: float
    hessenberg: np.ndarray
    coefficients: np.ndarray
    training_residual: float = float("nan")
    training_rss: float = float("nan")
    target: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def basis(self, z) -> np.ndarray:
        u = (np.asarray(z, dtype=complex).ravel() - self.center) / self.scale
        n = self.degree
        Q = np.empty((u.size, n + 1), dtype=complex)
        Q[:, 0] = 1.0
        H = self.hessenberg
        for k in range(n):
            Q[:, k + 1] = (u * Q[:, k] - Q[:, : k + 1] @ H[: k + 1, k]) / H[k + 1, k]
        return Q

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(over="ignore", invalid="ignore"):
            out = self.basis(z) @ self.coefficients
        return out.reshape(z.shape) if z.ndim else complex(out[0])

    def to_json(self) -> dict:
        n = self.degree
        H = self.hessenberg
        cols = [[[H[i, k].real, H[i, k].imag] for i in range(k + 2)] for k in range(n)]
        return {
            "kind": "arnoldi",
            "target": self.target,
            "scaling": {"center": [self.center.real, self.center.imag], "scale": self.scale},
            "degree": n,
            "hessenberg": cols,
            "coefficients": [[c.real, c.imag] for c in self.coefficients],
            "training_residual": self.training_residual,
            "training_rss": self.training_rss,
            "meta": self.meta,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Approximant":
        n = obj["degree"]
        H = np.zeros((n + 1, n), dtype=complex)
        for k, col in enumerate(obj["hessenberg"]):
            for i, (re, im) in enumerate(col):
                H[i, k] = complex(re, im)
        c = np.array([complex(re, im) for re, im in obj["coefficients"]])
        sc = obj["scaling"]
        return cls(
            complex(*sc["center"]), float(sc["scale"]), H, c,
            obj.get("training_residual", float("nan")), obj.get("training_rss", float("nan")),
            obj.get("target", ""), obj.get("meta", {}),
        )


class _Basis:
    """Arnoldi basis on fixed nodes, reusable across reweighted solves."""

    def __init__(self, z, degree, weights, center, scale):
        self.z = z
        self.center, self.scale = complex(center), float(scale)
        u = (z - self.center) / self.scale
        self.Q, self.H = _arnoldi(u, degree, weights)
        self.degree = self.Q.shape[1] - 1
        self.distinct = np.unique(np.round(u, 14)).size

    def solve(self, y, weights, lam):
        n = self.degree + 1
        sw = np.sqrt(weights / weights.sum())
        A = self.Q * sw[:, None]
        b = y * sw
        if lam > 0:
            A = np.vstack([A, math.sqrt(lam) * np.eye(n)])
            b = np.concatenate([b, np.zeros(n)])
        c = np.linalg.lstsq(A, b, rcond=None)[0]
        r = self.Q @ c - y
        rss = float(np.sum(weights / weights.sum() * np.abs(r) ** 2))
        return Approximant(self.center, self.scale, self.H, c, float(np.max(np.abs(r))), rss), r


def _prepare(z, y, degree, lam, weights, center, scale):
    z = np.asarray(z, dtype=complex).ravel()
    y = np.asarray(y, dtype=complex).ravel()
    if degree < 0 or lam < 0:
        raise ValueError("degree and lam must be nonnegative")
    if z.size == 0 or z.size != y.size:
        raise ValueError("need equally many nodes and values")
    w = np.ones(z.size) if weights is None else np.asarray(weights, dtype=float).ravel()
    if center is None:
        center = complex((z.real.max() + z.real.min()) / 2, (z.imag.max() + z.imag.min()) / 2)
    if scale is None:
        scale = float(np.max(np.abs(z - center))) or 1.0
    basis = _Basis(z, degree, w, center, scale)
    if basis.degree < degree and lam == 0.0 and basis.distinct > basis.degree + 1:
        raise RankDeficientError(
            f"basis broke down at degree {basis.degree} with {basis.distinct} distinct nodes; "
            "raise lam or add samples"
        )
    return basis, y, w


def fit_points(
    z: np.ndarray,
    y: np.ndarray,
    degree: int,
    lam: float = 0.0,
    weights: Optional[np.ndarray] = None,
    center: Optional[complex] = None,
    scale: Optional[float] = None,
) -> Approximant:
    """Weighted least-squares polynomial fit of ``y`` at nodes ``z``.

    Minimizes ``mean_w |p(z) - y|^2 + lam * |c|^2`` with ``c`` the
    coefficients in the orthonormal basis.  The domain is mapped to the
    unit disk by ``(z - center) / scale`` first.  With fewer distinct
    nodes than ``degree + 1`` and ``lam = 0`` the fit interpolates at
    degree ``#nodes - 1``.
    """
    basis, y, w = _prepare(z, y, degree, lam, weights, center, scale)
    return basis.solve(y, w, lam)[0]


@dataclass(frozen=True)
class FitResult:
    approximant: Approximant
    training_residual: float  # max |p - target| over training nodes
    relative_residual: float  # max |p - target| / delta
    samples: int


def training_nodes(cset: TruncatedCarlemanSet, spacing: float, degree: int) -> dict:
    """Fitting nodes: spacing-based, Chebyshev-clustered on segments, densified with the degree.

    Equispaced nodes on short segments make high-degree least squares blow
    up between nodes near the segment tips.
    """
    return sample_components(cset, spacing, nodes="chebyshev", min_nodes=2 * degree)


def fit_approximant(
    cset: TruncatedCarlemanSet,
    target: PiecewiseTarget,
    degree: int,
    lam: float = 0.0,
    spacing: float = 0.05,
    weights: str = "tolerance",
    lawson_iterations: int = 0,
) -> FitResult:
    """Fit ``p`` of degree ``degree`` to ``target`` on the truncation.

    ``weights="tolerance"`` weights each component by ``1/delta^2`` so the
    fit balances errors measured in units of the admissible radius;
    ``"uniform"`` is plain least squares.  ``lawson_iterations > 0``
    reweights toward the minimax fit (Lawson's algorithm); then the
    sum-of-squares monotonicity in the degree no longer holds.
    """
    tol = tolerance_profile(target.name, cset)
    nodes = training_nodes(cset, spacing, degree)
    z = np.concatenate([nodes[cid] for cid in target.value])
    y = np.concatenate([np.full(nodes[cid].size, target.value[cid]) for cid in target.value])
    delta = np.concatenate([np.full(nodes[cid].size, tol.value[cid]) for cid in target.value])
    if weights == "tolerance":
        w0 = delta**-2
    elif weights == "uniform":
        w0 = np.ones(z.size)
    else:
        raise ValueError(f"unknown weighting {weights!r}")
    bb = cset.bbox()
    center = complex((bb[0] + bb[1]) / 2, (bb[2] + bb[3]) / 2)
    scale = float(np.max(np.abs(z - center)))
    basis, y, _ = _prepare(z, y, degree, lam, w0, center, scale)
    p, r = basis.solve(y, w0, lam)
    w = w0 / w0.sum()
    for _ in range(lawson_iterations):
        w = w * (np.abs(r) / delta)
        w = np.maximum(w / w.sum(), 1e-300)
        p, r = basis.solve(y, w, lam)
    r = np.abs(r)
    p = Approximant(
        p.center, p.scale, p.hessenberg, p.coefficients, float(r.max()), p.training_rss, target.name,
        {"spacing": spacing, "lam": lam, "weights": weights, "lawson_iterations": lawson_iterations,
         "kind": cset.kind, "N": cset.N, "T": cset.T},
    )
    return FitResult(p, float(r.max()), float(np.max(r / delta)), int(z.size))


def residual_envelope(residuals: Sequence[float], window: int) -> list[float]:
    """Maxima of consecutive blocks of ``window`` residuals (ordered by degree).

    Max residuals wobble from one degree to the next because the training
    nodes change with the degree; block maxima expose the trend.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    r = list(residuals)
    return [max(r[i : i + window]) for i in range(0, len(r), window)]


def non_increasing(values: Sequence[float], rtol: float = 1e-9) -> bool:
    return all(b <= a * (1 + rtol) for a, b in zip(values, values[1:]))


# -------------------------------------------------------------- maps


@dataclass(frozen=True)
class EntireMap:
    """``F = exp(inner)``.  Overflow returns complex infinity instead of warning; NaN propagates."""

    inner: Callable
    name: str = "F"

    @property
    def word(self) -> str:
        return self.name

    def __call__(self, z):
        scalar = np.ndim(z) == 0
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        with np.errstate(over="ignore", invalid="ignore"):
            p = np.asarray(self.inner(z), dtype=complex)
            ok = np.isfinite(z) & np.isfinite(p) & (p.real <= LOG_GUARD)
            out = np.full(z.shape, complex(np.inf, 0))
            out[ok] = np.exp(p[ok])
            out[np.isnan(z) | np.isnan(p)] = complex(np.nan, np.nan)
        return complex(out[0]) if scalar else out


@dataclass(frozen=True)
class CompositeMap:
    """``maps[word[0]] ∘ ... ∘ maps[word[-1]]``."""

    maps: dict
    word: str

    def __call__(self, z):
        for letter in reversed(self.word):
            z = self.maps[letter](z)
        return z


def oracle_map(name: str, cset: TruncatedCarlemanSet) -> EntireMap:
    """``exp(target)`` evaluated exactly per component: the ideal stand-in for a fit."""
    target = target_profile(name, cset)
    comps = [c for c in cset.components if c.id in target.value]

    def inner(z):
        z = np.asarray(z, dtype=complex)
        out = np.full(z.shape, complex(np.nan, np.nan))
        for c in comps:
            hit = c.contains(z) & np.isnan(out)
            out[hit] = target.value[c.id]
        return out

    return EntireMap(inner, {"alpha": "f", "beta": "g", "gamma": "h"}[target.name])


# ------------------------------------------------------------ verification


@dataclass(frozen=True)
class ComponentCheck:
    id: str
    symbol: str
    center: int
    samples: int
    max_residual: float
    passed: bool

    def to_json(self) -> dict:
        return {
            "id": self.id, "symbol": self.symbol, "center": self.center, "samples": self.samples,
            "max_residual": self.max_residual, "pass": self.passed,
        }


@dataclass(frozen=True)
class VerificationReport:
    word: str
    rows: tuple
    passed: bool

    @property
    def max_residual(self) -> float:
        return max((r.max_residual for r in self.rows), default=0.0)

    def to_json(self) -> dict:
        return {"word": self.word, "pass": self.passed, "max_residual": self.max_residual,
                "components": [r.to_json() for r in self.rows]}


def chain_stays_inside(cset: TruncatedCarlemanSet, word: str, symbol: symbolic.DomainSymbol) -> bool:
    """Whether every intermediate image of ``symbol`` under ``word`` is a component of ``cset``."""
    present = {c.symbol for c in cset.components if c.symbol is not None}
    s = symbol
    for letter in reversed(word[1:]):
        s = symbolic.generator_table(letter).step(s)
        if s not in present:
            return False
    return True


def verify_mapping(
    F: Callable,
    cset: TruncatedCarlemanSet,
    table: symbolic.TransitionTable,
    spacing: float = 0.025,
    offset: float = 0.5,
    only: Optional[Sequence[str]] = None,
) -> VerificationReport:
    """Check ``|F(z) - c| < 1/2`` on fresh samples, with ``c`` the table's disk center per component."""
    word = getattr(F, "word", None)
    if word is not None and len(word) != len(table.word):
        raise ValueError(f"map word {word!r} and table word {table.word!r} differ in length")
    samples = sample_components(cset, spacing, offset=offset)
    rows = []
    for c in cset.components:
        if c.symbol is None or (only is not None and c.id not in only):
            continue
        center = table.apply(c.symbol).center
        with np.errstate(all="ignore"):
            r = np.abs(np.asarray(F(samples[c.id])) - center)
        res = float(np.max(np.where(np.isnan(r), np.inf, r)))
        rows.append(ComponentCheck(c.id, str(c.symbol), center, int(r.size), res, res < symbolic.DISK_RADIUS))
    return VerificationReport(table.word, tuple(rows), all(r.passed for r in rows))
