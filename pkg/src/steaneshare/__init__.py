"""Quantum secret sharing on concatenated seven-qubit codes.

Compile monotone quantum access structures into share trees, simulate
sharing, recovery, and universal logical computation on the shared secret
with a sparse reference engine or a scalable stabilizer engine, and verify
recoverability and secrecy subset by subset.
"""

from ._backend import active_backend
from .access import (
    AccessStructure,
    AccessStructureError,
    format_structure,
    normalize,
    parse_structure,
)
from .protocol import (
    CircuitProgram,
    MeasurementRecord,
    ProtocolError,
    RecoveryResult,
    SharedSecret,
    parse_program,
    run_circuit,
    share,
    share_with_ancillas,
    transcript_distance,
    verify_scheme,
)
from .scheme import (
    DISCARDED,
    SchemeError,
    SchemeStats,
    SchemeTree,
    build_23,
    build_nn,
    build_omega,
    compile_structure,
    format_tree,
    parse_tree,
    stats,
    tree_authorized,
)
from .sparse import DensityMap, SecretQubit, SparseEngineError, SparseState
from .tableau import HybridTableau, PauliWord, RecoveryPlan, TableauError

__version__ = "0.1.0"

__all__ = [
    "AccessStructure",
    "AccessStructureError",
    "CircuitProgram",
    "DISCARDED",
    "DensityMap",
    "HybridTableau",
    "MeasurementRecord",
    "PauliWord",
    "ProtocolError",
    "RecoveryPlan",
    "RecoveryResult",
    "SchemeError",
    "SchemeStats",
    "SchemeTree",
    "SecretQubit",
    "SharedSecret",
    "SparseEngineError",
    "SparseState",
    "TableauError",
    "active_backend",
    "build_23",
    "build_nn",
    "build_omega",
    "compile_structure",
    "format_structure",
    "format_tree",
    "normalize",
    "parse_program",
    "parse_structure",
    "parse_tree",
    "run_circuit",
    "share",
    "share_with_ancillas",
    "stats",
    "transcript_distance",
    "tree_authorized",
    "verify_scheme",
]
