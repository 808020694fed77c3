"""Symbolic domain-transition tables for the maps f, g, h and their composites.

The Fatou-component alphabet has three kinds of symbol: ``Core`` (the
absorbing union of G0 with every L_k and M_k), ``G(k)`` and ``B(k)``.  A
table sends each symbol to a radius-1/2 disk about an integer center; the
disk sits inside exactly one component, and that component is the next
symbol of the orbit.

Every table is stored in *normal form*: per indexed branch, a run of
explicit exceptions for ``k = 1 .. k0 - 1`` followed by one affine tail
valid for all ``k >= k0``.  Composition keeps this form, so tables of any
word over ``{f, g, h}`` are finite objects.

Words are written left to right as outer to inner: ``"fg"`` is f∘g, which
applies g first.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, NamedTuple, Optional

import numpy as np

GENERATORS = ("f", "g", "h")
DISK_RADIUS = 0.5


class TableError(ValueError):
    """A table violates the normal-form invariants or cannot be composed."""


class UnknownWordError(KeyError):
    """No claimed table is displayed for this word."""


# ---------------------------------------------------------------- symbols


class DomainSymbol(NamedTuple):
    kind: str  # "Core" | "G" | "B"
    k: int = 0

    def __str__(self) -> str:
        return "Core" if self.kind == "Core" else f"{self.kind}({self.k})"

    @classmethod
    def parse(cls, text: str) -> "DomainSymbol":
        """Accepts ``Core``, ``G:5``, ``G(5)``, ``B5`` and the like."""
        text = text.strip()
        if text.lower() == "core":
            return CORE
        m = re.fullmatch(r"([GB])\s*(?:[:(]\s*)?(\d+)\s*\)?", text)
        if not m:
            raise ValueError(f"cannot parse domain symbol {text!r}")
        return make_symbol(m.group(1), int(m.group(2)))


CORE = DomainSymbol("Core", 0)
KIND_CODE = {"Core": 0, "G": 1, "B": 2}


def centers_of(kind_codes: np.ndarray, ks: np.ndarray) -> np.ndarray:
    """Array version of :func:`component_center`."""
    c = 4 * ks + 2
    return np.where(kind_codes == 0, 2, np.where(kind_codes == 1, c, -c))


def make_symbol(kind: str, k: int = 0) -> DomainSymbol:
    if kind == "Core":
        return CORE
    if kind not in ("G", "B"):
        raise ValueError(f"unknown symbol kind {kind!r}")
    if k < 1:
        raise ValueError(f"{kind} index must be >= 1, got {k}")
    return DomainSymbol(kind, k)


def component_center(s: DomainSymbol) -> int:
    """Center of the closed unit disk realizing ``s`` (G0 for Core)."""
    if s.kind == "Core":
        return 2
    c = 4 * s.k + 2
    return c if s.kind == "G" else -c


def containing_symbol(center: int) -> DomainSymbol:
    """The component whose unit disk contains the half-disk about ``center``.

    Only the component centers 2, ±(4k+2) qualify; any other center
    would put the 1/2-disk outside every component of the set.
    """
    if center == 2:
        return CORE
    a = abs(center)
    if a >= 6 and (a - 2) % 4 == 0:
        return DomainSymbol("G" if center > 0 else "B", (a - 2) // 4)
    raise TableError(f"no component of the Carleman set contains the disk about {center}")


class TargetDisk(NamedTuple):
    center: int
    containing: DomainSymbol

    @property
    def radius(self) -> float:
        return DISK_RADIUS

    @classmethod
    def about(cls, center: int) -> "TargetDisk":
        return cls(center, containing_symbol(center))

    @classmethod
    def inside(cls, s: DomainSymbol) -> "TargetDisk":
        return cls(component_center(s), s)

    def __str__(self) -> str:
        return f"disk({self.center}) in {self.containing}"


# ----------------------------------------------------------- tail targets


class IndexExpr(NamedTuple):
    """Symbol-valued expression ``kind(slope*k + offset)``; slope is 0 or 1."""

    kind: str
    slope: int
    offset: int

    def index(self, k: int) -> int:
        return self.slope * k + self.offset

    def symbol(self, k: int) -> DomainSymbol:
        if self.kind == "Core":
            return CORE
        return DomainSymbol(self.kind, self.slope * k + self.offset)

    def disk(self, k: int) -> TargetDisk:
        s = self.symbol(k)
        return TargetDisk(component_center(s), s)

    def center_affine(self) -> tuple[int, int]:
        """Center as ``(a, b)`` meaning ``a*k + b``."""
        if self.kind == "Core":
            return 0, 2
        sign = 1 if self.kind == "G" else -1
        return sign * 4 * self.slope, sign * (4 * self.offset + 2)

    def symbol_text(self) -> str:
        if self.kind == "Core":
            return "Core"
        if self.slope == 0:
            return f"{self.kind}({self.offset})"
        if self.offset == 0:
            return f"{self.kind}(k)"
        return f"{self.kind}(k{self.offset:+d})"

    def center_text(self) -> str:
        return affine_text(*self.center_affine())

    @classmethod
    def constant(cls, s: DomainSymbol) -> "IndexExpr":
        return cls("Core", 0, 0) if s.kind == "Core" else cls(s.kind, 0, s.k)

    @classmethod
    def parse(cls, text: str) -> "IndexExpr":
        text = text.replace(" ", "")
        if text == "Core":
            return cls("Core", 0, 0)
        m = re.fullmatch(r"([GB])\((k)?([+-]?\d+)?\)", text)
        if not m or (m.group(2) is None and m.group(3) is None):
            raise ValueError(f"cannot parse symbol expression {text!r}")
        slope = 1 if m.group(2) else 0
        return cls(m.group(1), slope, int(m.group(3) or 0))


def affine_text(a: int, b: int) -> str:
    """Render ``a*k + b`` the way the tables print it: ``-(4k+10)``, ``4k-2``, ``-6``."""
    if a == 0:
        return str(b)

    def body(a: int, b: int) -> str:
        head = "k" if a == 1 else f"{a}k"
        return head if b == 0 else f"{head}{b:+d}"

    return body(a, b) if a > 0 else f"-({body(-a, -b)})"


def parse_affine(text: str) -> tuple[int, int]:
    text = text.replace(" ", "")
    neg = text.startswith("-(") and text.endswith(")")
    inner = text[2:-1] if neg else text
    m = re.fullmatch(r"([+-]?\d*)k([+-]\d+)?", inner)
    if m:
        coef = m.group(1)
        a = int(coef) if coef not in ("", "+", "-") else (-1 if coef == "-" else 1)
        b = int(m.group(2) or 0)
    else:
        a, b = 0, int(inner)
    return (-a, -b) if neg else (a, b)


# ------------------------------------------------------------------ rules


@dataclass(frozen=True)
class IndexedRule:
    """Rule for one indexed branch (G or B): exceptions for k < ``start``, then a tail.

    ``exceptions[k-1]`` is the disk for index k.  ``None`` marks an index
    the source table leaves unstated; only claimed tables contain gaps.
    """

    branch: str
    exceptions: tuple[Optional[TargetDisk], ...]
    tail: IndexExpr

    @property
    def start(self) -> int:
        return len(self.exceptions) + 1

    @property
    def total(self) -> bool:
        return all(e is not None for e in self.exceptions)

    def at(self, k: int) -> Optional[TargetDisk]:
        if k <= len(self.exceptions):
            return self.exceptions[k - 1]
        return self.tail.disk(k)

    def validate(self) -> None:
        if self.branch not in ("G", "B"):
            raise TableError(f"bad branch {self.branch!r}")
        t = self.tail
        if t.slope not in (0, 1) or (t.kind == "Core" and (t.slope, t.offset) != (0, 0)):
            raise TableError(f"tail {t} is not affine in this alphabet")
        if t.kind != "Core" and t.index(self.start) < 1:
            raise TableError(f"{self.branch} tail {t.symbol_text()} leaves the alphabet at k={self.start}")
        for e in self.exceptions:
            if e is not None and containing_symbol(e.center) != e.containing:
                raise TableError(f"disk {e} names the wrong component")

    def normalized(self) -> "IndexedRule":
        """Absorb trailing exceptions that already agree with the tail."""
        exc = list(self.exceptions)
        t = self.tail
        while exc and exc[-1] is not None:
            k = len(exc)
            if t.kind != "Core" and t.index(k) < 1:
                break
            if t.disk(k) != exc[-1]:
                break
            exc.pop()
        return IndexedRule(self.branch, tuple(exc), t)


@dataclass(frozen=True)
class TransitionTable:
    """Where each symbol lands under the map named by ``word``."""

    word: str
    core: TargetDisk
    g: IndexedRule
    b: IndexedRule

    def __post_init__(self):
        if not self.word or set(self.word) - set(GENERATORS):
            raise TableError(f"word must be a nonempty string over f, g, h: {self.word!r}")
        if self.core.containing != CORE:
            raise TableError("Core must map into Core")
        self.g.validate()
        self.b.validate()

    @property
    def rules(self) -> tuple:
        return (("Core", self.core), ("G", self.g), ("B", self.b))

    @property
    def total(self) -> bool:
        return self.g.total and self.b.total

    def rule(self, branch: str) -> IndexedRule:
        return self.g if branch == "G" else self.b

    def apply(self, s: DomainSymbol) -> Optional[TargetDisk]:
        if s.kind == "Core":
            return self.core
        return (self.g if s.kind == "G" else self.b).at(s.k)

    def step(self, s: DomainSymbol) -> DomainSymbol:
        d = self.apply(s)
        if d is None:
            raise TableError(f"table {self.word} has no row for {s}")
        return d.containing

    def apply_array(self, kinds: np.ndarray, ks: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Vectorized :meth:`apply` over symbols coded as ``KIND_CODE`` / index arrays.

        Returns ``(centers, containing kinds, containing indices)``.
        """
        kinds = np.asarray(kinds, dtype=np.int64)
        ks = np.asarray(ks, dtype=np.int64)
        out_kind = np.zeros_like(kinds)
        out_k = np.zeros_like(ks)
        out_kind[kinds == 0] = KIND_CODE[self.core.containing.kind]
        out_k[kinds == 0] = self.core.containing.k
        for code, rule in ((1, self.g), (2, self.b)):
            sel = kinds == code
            if not sel.any():
                continue
            k = ks[sel]
            t = rule.tail
            rk = np.full_like(k, KIND_CODE[t.kind])
            ri = t.slope * k + t.offset
            if rule.exceptions:
                if not rule.total:
                    raise TableError(f"table {self.word} has gaps; apply_array needs a total table")
                exc_kind = np.array([KIND_CODE[d.containing.kind] for d in rule.exceptions])
                exc_k = np.array([d.containing.k for d in rule.exceptions])
                early = k < rule.start
                rk[early] = exc_kind[k[early] - 1]
                ri[early] = exc_k[k[early] - 1]
            out_kind[sel] = rk
            out_k[sel] = ri
        return centers_of(out_kind, out_k), out_kind, out_k

    def b_escape_start(self) -> Optional[int]:
        """Smallest j from which B(j) provably runs up a strictly increasing B-chain."""
        t = self.b.tail
        if t.kind == "B" and t.slope == 1 and t.offset >= 1:
            return self.b.start
        return None


# ------------------------------------------------------- generator tables


def _rule(branch: str, exceptions, tail: IndexExpr) -> IndexedRule:
    return IndexedRule(branch, tuple(TargetDisk.about(c) for c in exceptions), tail)


_CORE_DISK = TargetDisk(2, CORE)
_B_SHIFT = IndexExpr("B", 1, 1)  # B(k) -> disk -(4k+6) inside B(k+1)


@lru_cache(maxsize=None)
def generator_table(name: str) -> TransitionTable:
    """The transition table of one of the generators f, g, h."""
    if name == "f":
        g_rule = _rule("G", [], IndexExpr("B", 0, 1))
    elif name == "g":
        g_rule = _rule("G", [-6], IndexExpr("G", 1, -1))
    elif name == "h":
        g_rule = _rule("G", [-10, -6], IndexExpr("G", 1, -2))
    else:
        raise ValueError(f"unknown generator {name!r}; expected one of f, g, h")
    return TransitionTable(name, _CORE_DISK, g_rule, _rule("B", [], _B_SHIFT))


# ------------------------------------------------------------ composition


def _compose_rule(outer: TransitionTable, rule: IndexedRule) -> IndexedRule:
    exc = [outer.apply(d.containing) for d in rule.exceptions]
    t = rule.tail
    if t.kind == "Core" or t.slope == 0:
        landed = outer.apply(t.symbol(rule.start))
        return IndexedRule(rule.branch, tuple(exc), IndexExpr.constant(landed.containing)).normalized()
    # tail symbol is X(k + off); push it through outer's X-branch
    o = outer.rule(t.kind)
    start = max(rule.start, o.start - t.offset)
    for k in range(rule.start, start):
        exc.append(o.at(k + t.offset))
    ot = o.tail
    if ot.kind == "Core" or ot.slope == 0:
        tail = ot
    else:
        tail = IndexExpr(ot.kind, 1, ot.offset + t.offset)
    return IndexedRule(rule.branch, tuple(exc), tail).normalized()


def compose(outer: TransitionTable, inner: TransitionTable) -> TransitionTable:
    """Table of outer∘inner: a symbol goes through ``inner``, then ``outer``."""
    if not (outer.total and inner.total):
        raise TableError("only total tables compose; claimed tables may have gaps")
    return TransitionTable(
        outer.word + inner.word,
        outer.apply(inner.core.containing),
        _compose_rule(outer, inner.g),
        _compose_rule(outer, inner.b),
    )


def check_word(word: str) -> str:
    if not word or set(word) - set(GENERATORS):
        raise ValueError(f"word must be a nonempty string over f, g, h: {word!r}")
    return word


@lru_cache(maxsize=256)
def derived_table(word: str) -> TransitionTable:
    """Compose generator tables for ``word`` (left = outermost)."""
    check_word(word)
    table = generator_table(word[-1])
    for letter in reversed(word[:-1]):
        table = compose(generator_table(letter), table)
    return table


def step_word(word: str, s: DomainSymbol) -> TargetDisk:
    """Brute-force oracle: apply generator tables letter by letter, rightmost first."""
    disk = None
    for letter in reversed(check_word(word)):
        disk = generator_table(letter).apply(s)
        s = disk.containing
    return disk


def step_word_array(word: str, kinds: np.ndarray, ks: np.ndarray):
    """:func:`step_word` over coded symbol arrays."""
    centers = None
    for letter in reversed(check_word(word)):
        centers, kinds, ks = generator_table(letter).apply_array(kinds, ks)
    return centers, kinds, ks


# --------------------------------------------------------- claimed tables

# Rows as displayed for each composite, centers read off |F(z) - c| < 1/2
# as +c and |F(z) + c| < 1/2 as -c.  ``None`` marks an index with no row.
_CLAIMED = {
    "fg": ([-10], ("B", 0, 1), ("G", 4, 10)),
    "gf": ([], ("B", 0, 2), ("B", -4, -10)),
    "fh": ([-14, -10, None], ("B", 0, 1), ("B", -4, -10)),
    "hf": ([], ("B", 0, 2), ("B", -4, -10)),
    "gh": ([-14, -10], ("B", 0, 1), ("B", -4, -10)),
    "hg": ([-10, -10, -6], ("G", 4, -10), ("B", -4, -10)),
    "fgh": ([-18, -14, -10], ("B", 0, 1), ("B", -4, -10)),
    "fhg": ([-14, -14, -10], ("B", 0, 1), ("B", -4, -10)),
    "gfh": ([-18, -14], ("B", 0, 2), ("B", -4, -10)),
    "ghf": ([], ("B", 0, 3), ("B", -4, -10)),
    "hfg": ([-14], ("B", 0, 2), ("B", -4, -10)),
    "hgf": ([], ("B", 0, 3), ("B", -4, -10)),
}

CLAIMED_WORDS = tuple(_CLAIMED)


def _tail(spec: tuple) -> IndexExpr:
    kind, a, b = spec
    if a == 0:
        # constant row: B(b) or G(b) by index
        return IndexExpr(kind, 0, b)
    sign = 1 if a > 0 else -1
    return IndexExpr("G" if sign > 0 else "B", 1, (sign * b - 2) // 4)


@lru_cache(maxsize=None)
def claimed_table(word: str) -> TransitionTable:
    """The table displayed for a composite word, transcribed without correction."""
    if word not in _CLAIMED:
        raise UnknownWordError(f"no claimed table is displayed for {word!r}; known: {', '.join(CLAIMED_WORDS)}")
    g_exc, g_tail, b_tail = _CLAIMED[word]
    g_rule = IndexedRule("G", tuple(None if c is None else TargetDisk.about(c) for c in g_exc), _tail(g_tail))
    b_rule = IndexedRule("B", (), _tail(b_tail))
    return TransitionTable(word, _CORE_DISK, g_rule, b_rule)


# ------------------------------------------------------------------- diff


@dataclass(frozen=True)
class Discrepancy:
    """A maximal run of indices on one branch where derived and claimed disagree.

    Centers along the run are affine in k; ``derived``/``claimed`` hold the
    ``(a, b)`` pairs of ``a*k + b``.  ``claimed`` is None where the claimed
    table has no row.  Core rows use ``lo = hi = 0``.
    """

    word: str
    branch: str
    lo: int
    hi: int
    derived: tuple[int, int]
    claimed: Optional[tuple[int, int]]

    def to_json(self) -> dict:
        def side(ab):
            if ab is None:
                return None
            c = affine_text(*ab)
            if ab[0] == 0:
                return {"center": c, "containing": str(containing_symbol(ab[1]))}
            return {"center": c, "containing": _containing_text(ab)}

        return {
            "word": self.word,
            "branch": self.branch,
            "k": [self.lo, self.hi],
            "derived": side(self.derived),
            "claimed": side(self.claimed),
        }


def _containing_text(ab: tuple[int, int]) -> str:
    a, b = ab
    sign = 1 if a > 0 else -1
    return IndexExpr("G" if sign > 0 else "B", 1, (sign * b - 2) // 4).symbol_text()


@dataclass(frozen=True)
class DiscrepancyReport:
    word: str
    k_max: int
    entries: tuple[Discrepancy, ...]

    def __bool__(self) -> bool:
        return bool(self.entries)

    def mismatched(self) -> Iterator[tuple[str, int]]:
        """Every (branch, index) covered by an entry."""
        for e in self.entries:
            for k in range(e.lo, e.hi + 1):
                yield e.branch, k

    def to_json(self) -> dict:
        return {"word": self.word, "k_max": self.k_max, "entries": [e.to_json() for e in self.entries]}


def diff_tables(derived: TransitionTable, claimed: TransitionTable, k_max: int) -> DiscrepancyReport:
    """Compare two tables symbol by symbol up to ``k_max``, coalescing affine runs."""
    if derived.word != claimed.word:
        raise TableError(f"cannot diff tables of different words: {derived.word!r} vs {claimed.word!r}")
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    entries: list[Discrepancy] = []
    if derived.core != claimed.core:
        entries.append(Discrepancy(derived.word, "Core", 0, 0, (0, derived.core.center), (0, claimed.core.center)))
    for branch in ("G", "B"):
        dr, cr = derived.rule(branch), claimed.rule(branch)
        run: list = []  # [lo, hi, d_ab, c_ab, d_center_prev, c_center_prev]
        for k in range(1, k_max + 1):
            d, c = dr.at(k), cr.at(k)
            if d == c:
                if run:
                    entries.append(_close(derived.word, branch, run))
                    run = []
                continue
            dc = d.center
            cc = None if c is None else c.center
            if run and _extends(run, k, dc, cc):
                run[1] = k
                continue
            if run:
                entries.append(_close(derived.word, branch, run))
            run = [k, k, None, None, dc, cc]
        if run:
            entries.append(_close(derived.word, branch, run))
    return DiscrepancyReport(derived.word, k_max, tuple(entries))


def _extends(run: list, k: int, dc: int, cc: Optional[int]) -> bool:
    lo, hi, d_slope, c_slope, d0, c0 = run
    if k != hi + 1 or (cc is None) != (c0 is None):
        return False
    ds = (dc - d0) // (k - lo) if (dc - d0) % (k - lo) == 0 else None
    cs = 0 if cc is None else ((cc - c0) // (k - lo) if (cc - c0) % (k - lo) == 0 else None)
    if ds is None or cs is None:
        return False
    if d_slope is None:
        run[2], run[3] = ds, cs
        return True
    return ds == d_slope and cs == c_slope


def _close(word: str, branch: str, run: list) -> Discrepancy:
    lo, hi, ds, cs, d0, c0 = run
    ds = ds or 0
    cs = cs or 0
    derived = (ds, d0 - ds * lo)
    claimed = None if c0 is None else (cs, c0 - cs * lo)
    return Discrepancy(word, branch, lo, hi, derived, claimed)


# ---------------------------------------------------------------- orbits


@dataclass(frozen=True)
class OrbitClassification:
    """Outcome of iterating the symbol map from ``start``.

    Wandering: after ``entry_step`` steps the orbit sits at ``entry`` = B(j),
    from where the table's B-tail raises the index by ``shift`` >= 1 every
    step with no exception in the way, so no symbol can recur.
    """

    variant: str
    start: DomainSymbol
    entry_step: Optional[int] = None
    entry: Optional[DomainSymbol] = None
    shift: Optional[int] = None
    preperiod: Optional[int] = None
    period: Optional[int] = None
    cycle: tuple[DomainSymbol, ...] = ()
    horizon: Optional[int] = None

    def to_json(self) -> dict:
        out = {"variant": self.variant, "start": str(self.start)}
        if self.variant == "Wandering":
            out.update(entry_step=self.entry_step, entry=str(self.entry), shift=self.shift)
        elif self.variant in ("Periodic", "PrePeriodic"):
            out.update(preperiod=self.preperiod, period=self.period, cycle=[str(s) for s in self.cycle])
        elif self.variant == "Unknown":
            out.update(horizon=self.horizon)
        return out


def default_horizon(k_max: int) -> int:
    return 10 * k_max + 100


def orbit_symbols(table: TransitionTable, start: DomainSymbol, steps: int) -> list[DomainSymbol]:
    """``[start, s1, ..., s_steps]`` under the symbol map."""
    out = [start]
    for _ in range(steps):
        out.append(table.step(out[-1]))
    return out


def _walk(table: TransitionTable, start: DomainSymbol, horizon: int, memo: Optional[dict]) -> OrbitClassification:
    if start.kind == "Core":
        return OrbitClassification("FixedCore", start)
    escape_from = table.b_escape_start()
    shift = table.b.tail.offset if escape_from is not None else None
    seen: dict[DomainSymbol, int] = {}
    path: list[DomainSymbol] = []
    s = start
    for n in range(horizon + 1):
        if s in seen:
            m = seen[s]
            cyc = tuple(path[m:])
            if m == 0:
                return OrbitClassification("Periodic", start, preperiod=0, period=n - m, cycle=cyc)
            return OrbitClassification("PrePeriodic", start, preperiod=m, period=n - m, cycle=cyc)
        if escape_from is not None and s.kind == "B" and s.k >= escape_from:
            result = OrbitClassification("Wandering", start, entry_step=n, entry=s, shift=shift)
            _remember(memo, path, result)
            return result
        if memo is not None and s in memo:
            known = memo[s]
            if n + known.entry_step <= horizon:
                result = OrbitClassification(
                    "Wandering", start, entry_step=n + known.entry_step, entry=known.entry, shift=shift
                )
                _remember(memo, path, result)
                return result
            break
        seen[s] = n
        path.append(s)
        if n < horizon:
            s = table.step(s)
    return OrbitClassification("Unknown", start, horizon=horizon)


def _remember(memo: Optional[dict], path: list, result: OrbitClassification) -> None:
    if memo is None:
        return
    for i, s in enumerate(path):
        memo[s] = OrbitClassification(
            "Wandering", s, entry_step=result.entry_step - i, entry=result.entry, shift=result.shift
        )


def classify_orbit(table: TransitionTable, start: DomainSymbol, horizon: int = 100) -> OrbitClassification:
    """Classify the symbolic orbit of ``start`` within ``horizon`` steps."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    return _walk(table, start, horizon, None)


@dataclass(frozen=True)
class WanderingSummary:
    word: str
    k_max: int
    horizon: int
    classifications: dict  # DomainSymbol -> OrbitClassification
    counts: dict  # variant -> count over G(k), B(k)

    @property
    def wandering(self) -> list[DomainSymbol]:
        return [s for s, c in self.classifications.items() if c.variant == "Wandering"]

    def to_json(self, full: bool = False) -> dict:
        out = {
            "word": self.word,
            "k_max": self.k_max,
            "horizon": self.horizon,
            "counts": dict(sorted(self.counts.items())),
            "core": self.classifications[CORE].variant,
        }
        if full:
            out["symbols"] = [c.to_json() for c in self.classifications.values()]
        return out


def enumerate_wandering(word: str, k_max: int, horizon: Optional[int] = None) -> WanderingSummary:
    """Classify Core and every G(k), B(k) with k <= k_max under the derived table of ``word``."""
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    table = derived_table(check_word(word))
    horizon = default_horizon(k_max) if horizon is None else horizon
    memo: dict = {}
    out = {CORE: _walk(table, CORE, horizon, memo)}
    counts: dict[str, int] = {}
    for kind in ("G", "B"):
        for k in range(1, k_max + 1):
            s = DomainSymbol(kind, k)
            c = _walk(table, s, horizon, memo)
            out[s] = c
            counts[c.variant] = counts.get(c.variant, 0) + 1
    return WanderingSummary(word, k_max, horizon, out, counts)


# ------------------------------------------------------------------- JSON


def _disk_json(d: Optional[TargetDisk]):
    if d is None:
        return None
    return {"center": [d.center, 0], "containing": str(d.containing)}


def _disk_from_json(obj) -> Optional[TargetDisk]:
    if obj is None:
        return None
    re_, im = obj["center"]
    if im != 0:
        raise TableError("disk centers are real integers")
    d = TargetDisk.about(int(re_))
    if str(d.containing) != obj["containing"]:
        raise TableError(f"disk about {re_} is inside {d.containing}, not {obj['containing']}")
    return d


def table_to_json(table: TransitionTable) -> dict:
    rules = [{"branch": "Core", "target": _disk_json(table.core)}]
    for branch in ("G", "B"):
        r = table.rule(branch)
        rules.append(
            {
                "branch": branch,
                "exceptions": [{"k": i + 1, "target": _disk_json(d)} for i, d in enumerate(r.exceptions)],
                "tail": {"from": r.start, "target": r.tail.symbol_text(), "center": r.tail.center_text()},
            }
        )
    return {"word": table.word, "rules": rules}


def table_from_json(obj: dict) -> TransitionTable:
    rules = {r["branch"]: r for r in obj["rules"]}
    core = _disk_from_json(rules["Core"]["target"])
    built = {}
    for branch in ("G", "B"):
        r = rules[branch]
        exc = sorted(r["exceptions"], key=lambda e: e["k"])
        if [e["k"] for e in exc] != list(range(1, len(exc) + 1)) or r["tail"]["from"] != len(exc) + 1:
            raise TableError(f"{branch} exceptions must cover 1..from-1 exactly once")
        tail = IndexExpr.parse(r["tail"]["target"])
        if parse_affine(r["tail"]["center"]) != tail.center_affine():
            raise TableError(f"{branch} tail center {r['tail']['center']} disagrees with {r['tail']['target']}")
        built[branch] = IndexedRule(branch, tuple(_disk_from_json(e["target"]) for e in exc), tail)
    return TransitionTable(obj["word"], core, built["G"], built["B"])
