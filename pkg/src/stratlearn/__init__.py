"""Local homology inference for stratified spaces from point samples."""

__version__ = "0.1.0"
