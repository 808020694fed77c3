"""One test per acceptance criterion; each records a PASS/FAIL line shown in the terminal summary."""

import io
import itertools
import json
import math
import time

import numpy as np
import pytest

from wandering import approximation as ap
from wandering import dynamics as dy
from wandering import geometry as geo
from wandering import symbolic as sy
from wandering.cli import run
from wandering.symbolic import CORE, DomainSymbol

from test_dynamics import GOLDEN_SHA256
from test_symbolic import COMPOSITES, PINNED_DIFF

ALL15 = ["f", "g", "h"] + COMPOSITES
MAPS = {"f": "alpha", "g": "beta", "h": "gamma"}
DEGREES = (50, 100, 150, 200, 250, 300)


def test_criterion_1_generator_tables(criterion):
    expected = {  # (branch, k) -> center, transcribed from the generator rows
        "f": {("Core", 0): 2, ("G", 1): -6, ("G", 7): -6, ("B", 1): -10, ("B", 5): -26},
        "g": {("Core", 0): 2, ("G", 1): -6, ("G", 2): 6, ("G", 9): 34, ("B", 3): -18},
        "h": {("Core", 0): 2, ("G", 1): -10, ("G", 2): -6, ("G", 3): 6, ("G", 5): 14, ("B", 2): -14},
    }
    t0 = time.perf_counter()
    tables = {n: sy.generator_table.__wrapped__(n) for n in "fgh"}
    ok = all(
        tables[n].apply(CORE if b == "Core" else DomainSymbol(b, k)).center == c
        for n, rows in expected.items() for (b, k), c in rows.items()
    )
    ok &= all(
        tables[n].rules[0][1] == sy.TargetDisk(2, CORE) and tables[n].b.tail == sy.IndexExpr("B", 1, 1)
        for n in "fgh"
    )
    ok &= [d.center for d in tables["g"].g.exceptions] == [-6] and tables["g"].g.tail == sy.IndexExpr("G", 1, -1)
    ok &= [d.center for d in tables["h"].g.exceptions] == [-10, -6] and tables["h"].g.tail == sy.IndexExpr("G", 1, -2)
    ok &= tables["f"].g.exceptions == () and tables["f"].g.tail == sy.IndexExpr("B", 0, 1)
    ms = (time.perf_counter() - t0) * 1e3
    assert criterion(1, ok and ms < 1, f"3 tables x 3 branches transcribed exactly in {ms:.3f} ms (< 1 ms)")


def test_criterion_2_composition_oracle(criterion):
    sy.derived_table.cache_clear()
    t0 = time.perf_counter()
    ks = np.arange(1, 10**4 + 1)
    ok = True
    for w in COMPOSITES:
        table = sy.derived_table(w)
        for code in (1, 2):
            kinds = np.full(ks.shape, code)
            a = table.apply_array(kinds, ks)
            b = sy.step_word_array(w, kinds, ks)
            ok &= all(np.array_equal(x, y) for x, y in zip(a, b))
        ok &= table.apply(CORE) == sy.step_word(w, CORE)
    secs = time.perf_counter() - t0
    assert criterion(2, ok and secs < 1, f"12 words x 20000 symbols agree exactly in {secs:.3f} s (< 1 s)")


def test_criterion_3_symbolic_wandering(criterion):
    sy.derived_table.cache_clear()
    t0 = time.perf_counter()
    summaries = [sy.enumerate_wandering(w, 1000) for w in ALL15]
    secs = time.perf_counter() - t0
    ok = all(s.counts == {"Wandering": 2000} for s in summaries)
    ok &= all(s.classifications[CORE].variant == "FixedCore" for s in summaries)
    assert criterion(3, ok and secs < 1, f"15 maps x 2000 symbols all Wandering, Core FixedCore, in {secs:.3f} s (< 1 s)")


def test_criterion_4_discrepancy_pinning(criterion):
    got = {}
    for w in COMPOSITES:
        rep = sy.diff_tables(sy.derived_table(w), sy.claimed_table(w), 10**4)
        got[w] = [(e.branch, e.lo, e.hi, e.derived, e.claimed) for e in rep.entries]
    cli_ok = True
    for w in COMPOSITES:
        out = io.StringIO()
        run(["tables", "diff", "--word", w, "--kmax", "10000"], out, io.StringIO())
        doc = json.loads(out.getvalue())
        cli_ok &= [(e["branch"], *e["k"]) for e in doc["entries"]] == [x[:3] for x in PINNED_DIFF[w]]
    ok = got == PINNED_DIFF and cli_ok and got["fg"] and all(got[w] for w in COMPOSITES if len(w) == 3)
    n = sum(len(v) for v in got.values())
    assert criterion(4, ok, f"`tables diff` matches the pinned oracle diff exactly ({n} entries over 12 words)")


def test_criterion_5_symmetry(criterion):
    words = ["".join(p) for n in (1, 2) for p in itertools.product("fgh", repeat=n)]
    nonempty = {}
    bad = []
    for u, v in itertools.product(words, repeat=2):
        for w in (u + v, v + u):
            if w not in nonempty:
                nonempty[w] = bool(sy.enumerate_wandering(w, 100).wandering)
        if nonempty[u + v] != nonempty[v + u]:
            bad.append((u, v))
    assert criterion(5, not bad, f"{len(words) ** 2} ordered pairs, wandering(u∘v) == wandering(v∘u) at k <= 100")


def test_criterion_6_tolerance_soundness(criterion):
    s = geo.build_set(3, 3, 4)
    ring = np.exp(2j * np.pi * np.arange(1000) / 1000)
    worst = 0.0
    for name in MAPS.values():
        t, tol = ap.target_profile(name, s), ap.tolerance_profile(name, s)
        for cid in s.ids:
            w = t(cid) + tol(cid) * ring
            worst = max(worst, float(np.max(np.abs(np.exp(w) - np.exp(t(cid))))))
    assert criterion(6, worst <= 0.5 + 1e-12, f"max |e^w - e^target| on the delta circles = {worst:.15f}")


@pytest.mark.slow
def test_criterion_7_numerical_realization(criterion, fits):
    """Strict threshold first; the degraded form applies when it is out of reach at degree 300."""
    s = geo.build_set(3, 1, 2)
    envelope, reports = {}, {}
    for letter, name in MAPS.items():
        row = []
        for d in DEGREES:
            if d == 300:
                fit, F, rep, secs = fits(letter)
                assert secs < 60, f"{letter}: {secs:.1f} s"
            else:
                fit = ap.fit_approximant(s, ap.target_profile(name, s), d)
                rep = ap.verify_mapping(ap.EntireMap(fit.approximant, letter), s, sy.generator_table(letter))
            row.append(rep.max_residual)
            reports[letter, d] = rep
        envelope[letter] = row
    strict = {letter: reports[letter, 300].passed for letter in MAPS}
    best = {letter: min(row) for letter, row in envelope.items()}
    full = all(set(r["id"] for r in reports[k].to_json()["components"]) == set(s.ids) for k in reports)
    degraded = all(ap.non_increasing(row) for row in envelope.values()) and full
    secs = max(fits(letter)[3] for letter in MAPS)
    detail = (
        ("strict pass" if all(strict.values()) else "strict threshold 1/2 not reached at degree <= 300; degraded form")
        + ": max residual over degrees " + ", ".join(map(str, DEGREES)) + ": "
        + "; ".join(f"{k} " + " ".join(f"{r:.2f}" for r in v) for k, v in envelope.items())
        + "; best " + ", ".join(f"{k} {v:.3f}" for k, v in best.items())
        + f"; slowest fit+verify {secs:.1f} s"
    )
    assert criterion(7, all(strict.values()) or degraded, detail)


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="residual < 1/2 on every component is out of reach at degree <= 300")
def test_criterion_7_strict_threshold(criterion, fits):
    worst = {letter: fits(letter)[2].max_residual for letter in MAPS}
    passed = all(fits(letter)[2].passed for letter in MAPS)
    criterion("7 (strict threshold)", passed,
              "max residual at degree 300: " + ", ".join(f"{k} {v:.3f}" for k, v in worst.items()) + " (need < 0.5)")
    assert passed


@pytest.mark.slow
def test_criterion_8_fixed_point(criterion, fits):
    s = geo.build_set(3, 1, 2)
    seeds = geo.sample_components(s, 0.05)["G0"]
    seeds = seeds[np.linspace(0, seeds.size - 1, 50).astype(int)]
    assert len(set(seeds.tolist())) == 50
    ok, parts = True, []
    z0 = {}
    for letter in MAPS:
        F = fits(letter)[1]
        res = [dy.find_fixed_point(F, z) for z in seeds]
        zs = np.array([r.z0 for r in res])
        spread = float(np.max(np.abs(zs - zs[0])))
        mult = res[0].multiplier
        good = all(r.converged for r in res) and spread < 1e-6 and abs(zs[0] - 2) < 0.5 and mult < 1
        ok &= good
        z0[letter] = zs[0]
        parts.append(f"{letter}: z0={zs[0].real:.6f}{zs[0].imag:+.6f}i |F'|={mult:.4f} spread={spread:.1e}")
    gaps = ", ".join(f"|z0({a})-z0({b})|={abs(z0[a] - z0[b]):.2e}" for a, b in itertools.combinations("fgh", 2))
    assert criterion(8, ok, "; ".join(parts) + "; " + gaps)


def test_criterion_9_complement_connectivity(criterion):
    ex3 = geo.complement_connected(geo.build_set(3, 2, 4), resolution=20)
    ex1 = geo.complement_connected(geo.build_set(1, 3, 4), resolution=20)
    ring = geo.custom_set([geo.LabeledComponent("A", (geo.Annulus(0j, 1.0, 2.0),))])
    ann = geo.complement_connected(ring, resolution=20)
    ok = ex3 and ex1 and not ann
    assert criterion(9, ok, f"example3(2,4)={ex3}, example1(3,4)={ex1}, annulus={ann} at 20 px/unit")


def test_criterion_10_determinism(criterion, tmp_path):
    cmds = [
        ["tables", "derive", "--word", "hgf"],
        ["tables", "claimed", "--word", "gh"],
        ["tables", "diff", "--word", "fgh", "--kmax", "10000"],
        ["classify", "--word", "g", "--start", "G:9", "--horizon", "100"],
        ["enumerate", "--word", "fg", "--kmax", "100", "--full"],
        ["geometry", "build", "--example", "1", "-N", "3", "-T", "4"],
        ["check-complement", "--example", "3", "-N", "2", "-T", "4"],
        ["fit", "--target", "beta", "--degree", "40", "--out", str(tmp_path / "g.json")],
        ["verify", "--word", "ghf", "--oracle", "-N", "4", "-T", "3"],
        ["fixedpoint", "--map", "h", "--oracle"],
        ["render", "-N", "2", "-T", "4", "--out", str(tmp_path / "r.ppm")],
        ["render", "-N", "2", "-T", "4", "--oracle", "--map", "f", "--res", "120x50", "--out", str(tmp_path / "o.ppm")],
    ]
    same = True
    for argv in cmds:
        runs = []
        for _ in range(2):
            out = io.StringIO()
            code = run(argv, out, io.StringIO())
            files = sorted((p.name, p.read_bytes()) for p in tmp_path.iterdir())
            runs.append((code, out.getvalue(), files))
        same &= runs[0] == runs[1] and runs[0][0] == 0
    golden = dy.sha256((tmp_path / "r.ppm").read_bytes())
    ok = same and golden == GOLDEN_SHA256
    assert criterion(10, ok, f"{len(cmds)} commands byte-identical across runs; render sha256 {golden[:16]}... matches golden")
