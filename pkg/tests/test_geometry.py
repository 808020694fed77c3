import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wandering import geometry as geo
from wandering.geometry import Annulus, Disk, LabeledComponent, VerticalSegment, build_set
from wandering.symbolic import CORE, DomainSymbol


def test_build_example3_components():
    assert build_set(3, 1, 5).ids == ["G0", "G1", "B1", "L1", "M1"]
    s = build_set("example3", 2, 3)
    assert s.component("G2").primitives[0] == Disk(10 + 0j, 1.0)
    assert s.component("B2").primitives[0] == Disk(-10 + 0j, 1.0)
    assert s.component("L2").primitives[0] == VerticalSegment(8.0, -3.0, 3.0)
    assert s.component("M2").primitives[0] == VerticalSegment(-8.0, -3.0, 3.0)
    assert s.component("G1").symbol == DomainSymbol("G", 1)
    assert {s.component(i).symbol for i in ("G0", "L1", "M2")} == {CORE}


def test_half_lines_truncated_at_T():
    g1 = build_set(3, 1, 4).component("G1")
    up, down = g1.primitives[1:]
    assert (up.x, up.y0, up.y1) == (6.0, 1.0, 4.0)
    assert (down.x, down.y0, down.y1) == (6.0, -4.0, -1.0)


def test_example1_rays_clipped():
    s = build_set(1, 3, 4)
    assert s.ids == ["Arc", "R0", "R3", "R4", "R5"]
    for c in s.components[1:]:
        r = c.primitives[0]
        assert r.r1 == 4.0
    assert geo.membership(s, 1j) is None  # Re z > 0 is required on the arc
    assert geo.membership(s, complex(math.cos(0.3), math.sin(0.3))) == "Arc"
    assert geo.membership(s, 3 * np.exp(1j * math.pi / 4)) == "R4"


@pytest.mark.parametrize("args", [(3, 0, 2), (3, 1, 1.0), (2, 1, 3), (3, 1.5, 3)])
def test_build_rejects_bad_parameters(args):
    with pytest.raises(ValueError):
        build_set(*args)


def test_membership_examples():
    s = build_set(3, 2, 3)
    assert geo.membership(s, 2) == "G0"
    assert geo.membership(s, -6) == "B1"
    assert geo.membership(s, 4 + 0.5j) == "L1"
    assert geo.membership(s, 3 + 0j) == "G0"  # boundary counts
    assert geo.membership(s, 6 + 2.5j) == "G1"  # on the half-line
    assert geo.membership(s, 6 + 3.5j) is None  # above the truncation
    assert geo.membership(s, 4.5 + 0j) is None


def test_min_distance_is_one():
    for N, T in [(1, 2), (2, 4), (5, 3)]:
        assert abs(geo.min_component_distance(build_set(3, N, T)) - 1.0) <= 1e-12


def test_segment_sample_count():
    assert geo.VerticalSegment(0.0, 0.0, 4.0).samples(0.1).size == 41


def test_sample_coverage_and_consistency():
    s = build_set(3, 1, 2)
    pts = geo.sample_points(s, 0.5)
    assert {cid for _, cid in pts} == set(s.ids)
    assert all(geo.membership(s, z) == cid for z, cid in pts)
    assert pts == geo.sample_points(s, 0.5)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.floats(1.5, 6), st.floats(0.05, 0.8), st.floats(0, 0.95))
def test_samples_lie_in_their_component(N, T, spacing, offset):
    s = build_set(3, N, T)
    per = geo.sample_components(s, spacing, offset)
    for cid, z in per.items():
        assert z.size >= math.ceil(1 / spacing)
        labels = geo.membership_array(s, z)
        assert all(s.ids[i] == cid for i in labels)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 5), st.floats(1.5, 5), st.integers(0, 3), st.floats(0, 3))
def test_monotone_in_N_and_T(N, T, dN, dT):
    a = build_set(3, N, T)
    b = build_set(3, N + dN, T + dT)
    assert set(a.ids) <= set(b.ids)
    same_T = build_set(3, N + dN, T)
    for c in a.components:
        assert same_T.component(c.id) == c
        d = b.component(c.id)
        assert c.symbol == d.symbol
        for p, q in zip(c.primitives, d.primitives):
            if isinstance(p, Disk):
                assert p == q
            else:  # clipped lines only grow with T
                assert p.x == q.x and q.y0 <= p.y0 <= p.y1 <= q.y1


def test_set_json():
    doc = build_set(3, 1, 2).to_json()
    assert doc["kind"] == "example3" and doc["N"] == 1 and doc["T"] == 2.0
    assert [c["id"] for c in doc["components"]] == ["G0", "G1", "B1", "L1", "M1"]


# ---------------------------------------------------------- complement


def _annulus():
    return geo.custom_set([LabeledComponent("A", (Annulus(0j, 1.0, 2.0),))])


def test_complement_connected_examples():
    assert geo.complement_connected(build_set(3, 2, 4), resolution=20)
    assert geo.complement_connected(build_set(1, 3, 4), resolution=20)
    assert not geo.complement_connected(_annulus(), resolution=20)
    assert geo.complement_connected(geo.custom_set([LabeledComponent("D", (Disk(0j, 1.0),))]))


def test_annulus_report_counts_hole():
    rep = geo.complement_report(_annulus(), resolution=20)
    assert rep["unreached_pixels"] > 0.9 * math.pi * 20**2
    assert rep["complement_regions"] == 2


@pytest.mark.parametrize("cset", [build_set(3, 2, 4), build_set(3, 1, 2), build_set(1, 3, 4)])
def test_resolution_stable(cset):
    for r in (20, 40):
        assert geo.complement_connected(cset, resolution=r)


def test_resolution_too_coarse():
    with pytest.raises(geo.RasterResolutionError):
        geo.complement_connected(build_set(3, 2, 4), resolution=1.5)


def test_box_must_contain_set():
    with pytest.raises(ValueError):
        geo.complement_connected(build_set(3, 1, 2), bbox=(-5, 5, -3, 3))


def test_raster_ppm_deterministic():
    s = build_set(3, 1, 2)
    a = geo.raster_ppm(s, (-8, 8, -3, 3), 10)
    assert a.startswith(b"P6\n160 60\n255\n")
    assert len(a) == len(b"P6\n160 60\n255\n") + 160 * 60 * 3
    assert a == geo.raster_ppm(s, (-8, 8, -3, 3), 10)
