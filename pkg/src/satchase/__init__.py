"""Chase engines for data exchange with target functional dependencies."""

from .chase import (
    ChaseOutcome,
    ChaseStats,
    classical_chase,
    interleaved_chase,
    oblivious_chase,
    run_engine,
)
from .core import (
    Atom,
    Fd,
    Instance,
    Null,
    NullCounter,
    Scenario,
    Schema,
    SchemaError,
    StTgd,
    Var,
)
from .egd import COMPILED_KERNEL, ChaseFail
from .iso import find_homomorphism, is_isomorphic
from .parser import load_instance, parse_mapping, print_mapping, serialize_solution

__version__ = "0.1.0"

__all__ = [
    "Atom",
    "ChaseFail",
    "ChaseOutcome",
    "ChaseStats",
    "COMPILED_KERNEL",
    "Fd",
    "Instance",
    "Null",
    "NullCounter",
    "Scenario",
    "Schema",
    "SchemaError",
    "StTgd",
    "Var",
    "classical_chase",
    "find_homomorphism",
    "interleaved_chase",
    "is_isomorphic",
    "load_instance",
    "oblivious_chase",
    "parse_mapping",
    "print_mapping",
    "run_engine",
    "serialize_solution",
    "__version__",
]
