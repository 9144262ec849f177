"""Finite order theory: posets, distributive-lattice duality, finite
Priestley spaces, the P(n, w) construction and a cut-space fragment."""

from .errors import (
    CapExceeded,
    CycleError,
    InfeasiblePlacement,
    IsoFailure,
    NotALattice,
    NotDistributive,
    NotPriestley,
    NotSeparablePrecondition,
    PosetKitError,
    RoundTripFailure,
    TooFewParts,
    UndecidableAtDepth,
    UniverseMismatch,
    UnknownIdError,
)
from .poset import (
    FinitePoset,
    down_set,
    find_isomorphism,
    from_json,
    from_relation,
    interval,
    order_components,
    up_set,
)
from .lattice import (
    FiniteLattice,
    check_bounded_distributive,
    downset_lattice,
    lattice_from_poset,
    prime_ideals,
    prime_spectrum_poset,
    round_trip_lattice,
    round_trip_poset,
)
from .topology import (
    FiniteSpace,
    certify_subbasic_cover,
    check_priestley,
    generate_topology,
    interval_subbase,
    union_subbase,
)
from .construct import generate_P, verify_P
from .cutspace import build_fragment, order_iso_check, separation_witness, sweep

__version__ = "0.1.0"
