"""Utilities functions, classes, and variables."""
import json
import logging
import sys
from typing import Iterator, Sequence, Tuple

import numpy as np
from numpy.random import PCG64, Generator

LOGGER = logging.getLogger(__name__)
###############
# Global logging level setting
# SET TO INFO FOR RELEASE
# LOGGER.setLevel(logging.DEBUG)
LOGGER.setLevel(logging.INFO)
###############
"""
utils.py
====================================
Definitions of utility functions, classes, and variables
"""


def new_rand_gen(seed: int = 12345) -> Generator:
    """Returns a fresh generator, so that independent suites do not share state."""
    return Generator(PCG64(seed))


def attach_stream_handler(verbose: bool = False):
    """Attaches a stderr handler to the package logger; stdout is kept for reports.

    Args:
        verbose: if True, sets the level to DEBUG instead of INFO.
    """
    level = logging.DEBUG if verbose else logging.INFO
    LOGGER.setLevel(level)
    for handler in LOGGER.handlers:
        if getattr(handler, "_iwasawa_handler", False):
            handler.setLevel(level)
            return handler
    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    handler._iwasawa_handler = True
    LOGGER.addHandler(handler)
    return handler


def base_p_digits(a: int, p: int) -> Iterator[Tuple[int, int]]:
    """Yields (j, d_j) with a = sum d_j p^j, skipping zero digits."""
    if a < 0:
        raise ValueError(f"Expected a nonnegative exponent, got {a}")
    j = 0
    while a:
        a, d = divmod(a, p)
        if d:
            yield j, d
        j += 1


def monomials_below(n: int, degree: int) -> list:
    """All exponent vectors of length n and total degree < degree, in graded-lex order.

    Graded-lex: ascending total degree, then lexicographically *descending*
    exponents inside a degree, so that X_1 comes before X_2 (the order used by
    sympy's ``grlex`` for leading terms).
    """
    result = []
    for d in range(degree):
        result.extend(monomials_of_degree(n, d))
    return result


def monomials_of_degree(n: int, d: int) -> list:
    """All exponent vectors of length n and total degree exactly d, lex-descending."""
    if n == 0:
        return [()] if d == 0 else []
    if n == 1:
        return [(d,)]
    out = []
    for first in range(d, -1, -1):
        for rest in monomials_of_degree(n - 1, d - first):
            out.append((first, *rest))
    return out


def grlex_key(exponents: Sequence[int]):
    """Sort key realising the canonical graded-lex order of ``monomials_below``."""
    return (sum(exponents), tuple(-e for e in exponents))


def parse_digit_vector(text: str) -> list:
    """Parses the digit-vector literal ``"a00,a01;a10,a11"`` (rows = i, columns = k)."""
    rows = [row.strip() for row in text.strip().split(";")]
    try:
        digits = [[int(a) for a in row.split(",")] for row in rows]
    except ValueError as e:
        raise ValueError(f"Invalid digit vector literal '{text}'") from e
    widths = {len(row) for row in digits}
    if len(widths) != 1:
        raise ValueError(
            f"Digit vector '{text}' has rows of different lengths {sorted(widths)}"
        )
    return digits


def to_builtin(obj):
    """Recursively converts numpy scalars/arrays and tuples to JSON-friendly builtins."""
    if isinstance(obj, dict):
        return {str(k): to_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_builtin(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_builtin(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dump_json(report: dict) -> str:
    """Canonical JSON rendering: sorted keys, two-space indent, trailing newline."""
    return json.dumps(to_builtin(report), sort_keys=True, indent=2) + "\n"


def time_difference(time_start, time_finish, as_string=True):
    """Computes the time difference between two datetime objects.

    Args:
    time_start (datetime): time to subtract to time_finish
    time_finish (datetime): time to add to subtract time_start to
    as_string (bool): if True, returns a string with the full time diff. Otherwise, returns the seconds as float.
    """
    time_taken = time_finish - time_start
    if not as_string:
        return time_taken.total_seconds()
    hours, rest = divmod(time_taken.total_seconds(), 3600)
    minutes, seconds = divmod(rest, 60)
    return f"{int(hours):02d}:{int(minutes):02d}:{seconds:06.3f}"
