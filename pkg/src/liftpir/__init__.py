"""Private information retrieval from MDS-coded storage with colluding servers."""

from .gf import FieldSpec, Scalar
from .lift import SymbolicMatrix, lifted_rate, symbolic_matrix
from .oneshot import OneShotScheme, make_scheme, retrieve_one_shot
from .refine import refine, retrieve_refined
from .retrieval import build_schedule, lifted_config, retrieve
from .storage import Database, Message, StorageConfig, random_messages, rs_encode

__all__ = [
    "FieldSpec", "Scalar", "SymbolicMatrix", "lifted_rate", "symbolic_matrix",
    "OneShotScheme", "make_scheme", "retrieve_one_shot", "refine", "retrieve_refined",
    "build_schedule", "lifted_config", "retrieve",
    "Database", "Message", "StorageConfig", "random_messages", "rs_encode",
]
