"""Probabilistic machines: exact allocation tables, sampled runs, amplification."""

from .allocation import (
    AllocationTable,
    InfeasibleBound,
    PrefixComparable,
    accept_probability,
    allocate_accept,
    allocate_reject,
    allocate_to,
    mass,
)
from .bpp import (
    AmplifiedMachine,
    SeparationViolated,
    Verdict,
    amplify,
    bpp_to_structure,
    decide_separated,
    exact_majority_error,
    hoeffding_bound,
    table_machine_for,
    trials_for,
)
from .machines import (
    ApproximantPair,
    BitSource,
    OutOfFuel,
    SampledMachine,
    TableMachine,
    approximants,
    length_lex,
    no_derandomization_machine,
)

__all__ = [
    "AllocationTable", "InfeasibleBound", "PrefixComparable", "accept_probability",
    "allocate_accept", "allocate_reject", "allocate_to", "mass",
    "AmplifiedMachine", "SeparationViolated", "Verdict", "amplify", "bpp_to_structure",
    "decide_separated", "exact_majority_error", "hoeffding_bound", "table_machine_for", "trials_for",
    "ApproximantPair", "BitSource", "OutOfFuel", "SampledMachine", "TableMachine",
    "approximants", "length_lex", "no_derandomization_machine",
]
