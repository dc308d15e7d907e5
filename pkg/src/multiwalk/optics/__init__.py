"""Linear-optics side: networks, triangular decomposition, the walk/network
compilers and the controlled-phase rewriter."""

from .compile import (
    RoutingOp,
    RoutingPlan,
    compile_network_to_walk,
    compile_walk_to_network,
    fock_distance,
    routing_plan,
    walk_mode_map,
)
from .network import (
    BeamSplitter,
    CPhase,
    Element,
    NetworkParseError,
    OpticalNetwork,
    Phase,
    Relabel,
    apply_network,
    beamsplitter,
    cphase,
    dumps_network,
    loads_network,
    mode_map_distance,
    network_mode_map,
    phase,
    swap,
)
from .reck import reck_decompose
from .rewrite import BlockedReport, Commutation, HoistResult, check_commutation, hoist_cphases

__all__ = [
    "BeamSplitter",
    "BlockedReport",
    "CPhase",
    "Commutation",
    "Element",
    "HoistResult",
    "NetworkParseError",
    "OpticalNetwork",
    "Phase",
    "Relabel",
    "RoutingOp",
    "RoutingPlan",
    "apply_network",
    "beamsplitter",
    "check_commutation",
    "compile_network_to_walk",
    "compile_walk_to_network",
    "cphase",
    "dumps_network",
    "fock_distance",
    "hoist_cphases",
    "loads_network",
    "mode_map_distance",
    "network_mode_map",
    "phase",
    "reck_decompose",
    "routing_plan",
    "swap",
    "walk_mode_map",
]
