"""Verification engine for converse-theorem proofs via the Fricke involution and Hecke operators."""

__version__ = "0.1.0"
