"""Symmetric configurations v_k and modular Golomb rulers: constructions,
block-circulant transforms, extensions, exhaustive oracles and spectrum tables."""
from .errors import ConfiguraError, PreconditionFailed
from .gf import FiniteField, dlog, field_new
from .matrix import BdcMatrix, IncidenceMatrix, is_configuration
from .ruler import (GolombRuler, ModularRuler, affine_map, delta_scan, oracle_exists,
                    quotient, retest_modulus, validate_modular)

__version__ = "0.1.0"

__all__ = [
    "BdcMatrix", "ConfiguraError", "FiniteField", "GolombRuler", "IncidenceMatrix",
    "ModularRuler", "PreconditionFailed", "affine_map", "delta_scan", "dlog",
    "field_new", "is_configuration", "oracle_exists", "quotient",
    "retest_modulus", "validate_modular",
]
