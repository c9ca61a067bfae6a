"""Generic finite structures: amalgamation classes, forcing conditions,
dense requirements and brute-force verifiers for the built prefixes."""

from genstruct.structures import (
    Embedding,
    FinStructure,
    Signature,
    empty_structure,
    enumerate_embeddings,
    find_isomorphism,
    induced_substructure,
    relabel_disjoint,
    validate_structure,
)

__all__ = [
    "Embedding",
    "FinStructure",
    "Signature",
    "empty_structure",
    "enumerate_embeddings",
    "find_isomorphism",
    "induced_substructure",
    "relabel_disjoint",
    "validate_structure",
]
