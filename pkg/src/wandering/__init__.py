"""Wandering domains for f, g, h and their composites: symbolic tables, Carleman-set
truncations, polynomial realizations and their dynamics."""

from .symbolic import (
    CORE,
    DomainSymbol,
    TransitionTable,
    classify_orbit,
    claimed_table,
    compose,
    derived_table,
    diff_tables,
    enumerate_wandering,
    generator_table,
)
from .geometry import build_set, complement_connected, membership, sample_points
from .approximation import (
    EntireMap,
    fit_approximant,
    safe_delta,
    target_profile,
    tolerance_profile,
    verify_mapping,
)
from .dynamics import find_fixed_point, orbit, render_regions

__version__ = "0.1.0"
