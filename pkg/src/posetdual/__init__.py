"""Quasi-polynomial dualization of ideal/filter families over finite posets."""

__version__ = "0.1.0"

from .engine import (
    DualResult,
    RecursionStats,
    TraceEvent,
    call_bound,
    check_dual,
    chi,
    decompose_element,
    decompose_filter,
    decompose_ideal,
    find_balanced_filter,
    find_balanced_ideal,
    large_degree_set,
    simple_dual,
)
from .errors import *  # noqa: F401,F403
from .lattice import (
    BirkhoffMap,
    ExplicitLattice,
    ProductLattice,
    birkhoff_poset,
    lattice_dual,
    product_poset,
)
from .mining import (
    ClosureLattice,
    ImplicationBase,
    MonotoneProperty,
    TransversalInequality,
    enum_inc,
    enumerate_all,
    max_pi,
    min_pi,
)
from .poset import (
    DualInstance,
    Poset,
    brute_force_dual,
    down_closure,
    enumerate_ideals,
    is_filter,
    is_ideal,
    normalize_family,
    up_closure,
    validate_instance,
    verify_filter_witness,
    verify_witness,
)
