"""iwasawa-ideals - exact computations in truncated Iwasawa algebras."""
__version__ = "0.1.0"
