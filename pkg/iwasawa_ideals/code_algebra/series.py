"""The truncated power-series ring A_N = F_p[X_{i,k}] / m^N.

A series is stored as a dense coefficient vector over the monomials of total
degree < N, listed in the canonical graded-lex order of the ring context.
Products go through a precomputed table of monomial pairs (i, j) with
deg(i) + deg(j) < N, so a truncated product is a single ``np.bincount``.

Polynomial literal grammar: sums of terms ``c*X<i>_<k>^a*...`` with integer
coefficients, e.g. ``"X0_0^2*X1_0 + X0_1"``. Parsing goes through sympy.
"""
from functools import cached_property
from math import comb
from tokenize import TokenError
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import sympy as sp
from sympy.parsing.sympy_parser import (
    convert_xor,
    parse_expr,
    standard_transformations,
)
from sympy.polys.polyerrors import BasePolynomialError

from iwasawa_ideals.utils import LOGGER as logger
from iwasawa_ideals.utils import base_p_digits, monomials_below

Exponents = Tuple[int, ...]
Variable = Tuple[int, int]

_TRANSFORMATIONS = standard_transformations + (convert_xor,)


class PrecisionError(ValueError):
    """Raised when a request needs more precision than the context carries."""


class RingContext:
    """Immutable description of A_N with variables X_{i,k}, 0 <= i < e, 0 <= k < f.

    The flat index of X_{i,k} is i*f + k.
    """

    def __init__(self, p: int, N: int, e: int = 1, f: int = 1):
        """Creates the context.

        Args:
            p: characteristic of the coefficient field F_p
            N: truncation order, monomials of total degree >= N are discarded
            e: number of levels i
            f: number of variables per level
        """
        if N < 2:
            raise ValueError(f"Truncation order N must be >= 2, got N={N}")
        if e < 1 or f < 1:
            raise ValueError(f"e and f must be positive, got e={e}, f={f}")
        self.p = p
        self.N = N
        self.e = e
        self.f = f
        self.n = e * f
        self.monomials: List[Exponents] = monomials_below(self.n, N)
        self.size = len(self.monomials)
        self.exponents = np.array(self.monomials, dtype=np.int64).reshape(
            self.size, self.n
        )
        self.degrees = self.exponents.sum(axis=1)
        # number of monomials of degree < d, for d = 0..N
        self.count_below = np.array(
            [int((self.degrees < d).sum()) for d in range(N + 1)], dtype=np.int64
        )
        self.index_grid = np.full((N,) * self.n, -1, dtype=np.int64)
        self.index_grid[tuple(self.exponents.T)] = np.arange(self.size)
        logger.debug(
            f"Ring context: p={p}, n={self.n}, N={N}, {self.size} monomials"
        )

    def __eq__(self, other):
        return isinstance(other, RingContext) and (
            self.p,
            self.N,
            self.e,
            self.f,
        ) == (other.p, other.N, other.e, other.f)

    def __hash__(self):
        return hash((self.p, self.N, self.e, self.f))

    def __repr__(self):
        return f"RingContext(p={self.p}, N={self.N}, e={self.e}, f={self.f})"

    ##############
    # Variables
    def flat(self, var: Variable) -> int:
        """Flat index of X_{i,k}."""
        i, k = var
        if not (0 <= i < self.e and 0 <= k < self.f):
            raise ValueError(
                f"Variable X{i}_{k} out of range for e={self.e}, f={self.f}"
            )
        return i * self.f + k

    def var_of(self, index: int) -> Variable:
        return divmod(index, self.f)

    def var_name(self, index: int) -> str:
        i, k = self.var_of(index)
        return f"X{i}_{k}"

    @cached_property
    def symbols(self) -> Tuple[sp.Symbol, ...]:
        return tuple(sp.Symbol(self.var_name(v)) for v in range(self.n))

    def column(self, exponents: Sequence[int]) -> int:
        """Column of a monomial, -1 if its degree is >= N."""
        exponents = tuple(int(a) for a in exponents)
        if sum(exponents) >= self.N:
            return -1
        return int(self.index_grid[exponents])

    ##############
    # Constructors
    def series(self, coeffs: np.ndarray, precision: Optional[int] = None) -> "TruncatedSeries":
        return TruncatedSeries(self, coeffs, precision)

    @cached_property
    def zero(self) -> "TruncatedSeries":
        return self.series(np.zeros(self.size, dtype=np.int64))

    @cached_property
    def one(self) -> "TruncatedSeries":
        return self.constant(1)

    def constant(self, c: int) -> "TruncatedSeries":
        coeffs = np.zeros(self.size, dtype=np.int64)
        coeffs[0] = c
        return self.series(coeffs)

    def monomial(self, exponents: Sequence[int], c: int = 1) -> "TruncatedSeries":
        coeffs = np.zeros(self.size, dtype=np.int64)
        col = self.column(exponents)
        if col >= 0:
            coeffs[col] = c
        return self.series(coeffs)

    def var(self, var: Variable) -> "TruncatedSeries":
        """The series X_{i,k}."""
        exponents = [0] * self.n
        exponents[self.flat(var)] = 1
        return self.monomial(exponents)

    def from_terms(self, terms: Dict[Exponents, int]) -> "TruncatedSeries":
        """Builds a series from an association exponents -> coefficient (degree >= N dropped)."""
        coeffs = np.zeros(self.size, dtype=np.int64)
        for exponents, c in terms.items():
            if len(exponents) != self.n:
                raise ValueError(
                    f"Exponent vector {exponents} has length {len(exponents)}, expected {self.n}"
                )
            col = self.column(exponents)
            if col >= 0:
                coeffs[col] += int(c)
        return self.series(coeffs)

    def linear_form(self, coefficients: Sequence[int]) -> "TruncatedSeries":
        """sum_v c_v X_v for a length-n coefficient vector (flat indexing)."""
        coeffs = np.zeros(self.size, dtype=np.int64)
        coeffs[1 : self.n + 1] = np.asarray(coefficients, dtype=np.int64)
        return self.series(coeffs)

    ##############
    # Literal grammar
    def parse(self, text: str) -> "TruncatedSeries":
        """Parses a polynomial literal such as ``"X0_0^2*X1_0 + X0_1"``."""
        names = {self.var_name(v): s for v, s in enumerate(self.symbols)}
        try:
            expr = parse_expr(text, local_dict=names, transformations=_TRANSFORMATIONS)
        except (SyntaxError, TypeError, TokenError, sp.SympifyError) as e:
            raise ValueError(f"Cannot parse polynomial literal '{text}'") from e
        unknown = {str(s) for s in expr.free_symbols} - set(names)
        if unknown:
            raise ValueError(
                f"Unknown variables {sorted(unknown)} in '{text}'; expected names like X0_0"
            )
        try:
            poly = sp.Poly(expr, *self.symbols, domain="ZZ")
        except BasePolynomialError as e:
            raise ValueError(f"'{text}' is not a polynomial with integer coefficients") from e
        return self.from_terms({m: int(c) for m, c in poly.terms()})

    ##############
    # Multiplication tables
    @cached_property
    def _pair_table(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(i, j, k) with monomial_i * monomial_j = monomial_k of degree < N."""
        lefts, rights, targets = [], [], []
        for i in range(self.size):
            cnt = int(self.count_below[self.N - self.degrees[i]])
            js = np.arange(cnt)
            sums = self.exponents[i] + self.exponents[:cnt]
            lefts.append(np.full(cnt, i, dtype=np.int64))
            rights.append(js)
            targets.append(self.index_grid[tuple(sums.T)])
        table = (
            np.concatenate(lefts),
            np.concatenate(rights),
            np.concatenate(targets),
        )
        logger.debug(f"Pair table for {self}: {table[0].size} products")
        return table

    def _mul_coeffs(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        lefts, rights, targets = self._pair_table
        weights = (a[lefts] * b[rights]).astype(np.float64)
        prod = np.bincount(targets, weights=weights, minlength=self.size)
        return np.rint(prod).astype(np.int64) % self.p

    @cached_property
    def _derivative_tables(self) -> List[Tuple[np.ndarray, np.ndarray, np.ndarray]]:
        """Per variable: (source columns, target columns, multipliers)."""
        tables = []
        for v in range(self.n):
            src = np.nonzero(self.exponents[:, v] > 0)[0]
            lowered = self.exponents[src].copy()
            mult = lowered[:, v].copy()
            lowered[:, v] -= 1
            tables.append((src, self.index_grid[tuple(lowered.T)], mult))
        return tables

    def _shift_table(self, exponents: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
        """(source, target) columns of multiplication by a monomial."""
        d = sum(exponents)
        cnt = int(self.count_below[max(self.N - d, 0)])
        src = np.arange(cnt)
        shifted = self.exponents[:cnt] + np.asarray(exponents, dtype=np.int64)
        return src, self.index_grid[tuple(shifted.T)]


class TruncatedSeries:
    """Element of A_N (immutable).

    Attributes:
        ctx (RingContext): the ring
        coeffs (np.ndarray): coefficients in [0, p) indexed by ``ctx.monomials``
        precision (int): the series is known modulo m^precision; N unless
            obtained by differentiation, which loses one degree
    """

    __slots__ = ("ctx", "coeffs", "precision")

    def __init__(self, ctx: RingContext, coeffs: np.ndarray, precision: Optional[int] = None):
        coeffs = np.asarray(coeffs, dtype=np.int64) % ctx.p
        if coeffs.shape != (ctx.size,):
            raise ValueError(
                f"Expected {ctx.size} coefficients for {ctx}, got shape {coeffs.shape}"
            )
        coeffs.setflags(write=False)
        self.ctx = ctx
        self.coeffs = coeffs
        self.precision = ctx.N if precision is None else precision

    ##############
    # Protocol
    def _check(self, other: "TruncatedSeries"):
        if not isinstance(other, TruncatedSeries) or other.ctx != self.ctx:
            raise ValueError(f"Series from different contexts: {self.ctx} and {getattr(other, 'ctx', other)}")

    def _coerce(self, other) -> "TruncatedSeries":
        if isinstance(other, (int, np.integer)):
            return self.ctx.constant(int(other))
        self._check(other)
        return other

    def _precision_with(self, other: "TruncatedSeries") -> int:
        return min(self.precision, other.precision)

    def __add__(self, other):
        other = self._coerce(other)
        return TruncatedSeries(self.ctx, self.coeffs + other.coeffs, self._precision_with(other))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        return TruncatedSeries(self.ctx, self.coeffs - other.coeffs, self._precision_with(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return TruncatedSeries(self.ctx, -self.coeffs, self.precision)

    def __mul__(self, other):
        if isinstance(other, (int, np.integer)):
            return TruncatedSeries(self.ctx, self.coeffs * int(other), self.precision)
        self._check(other)
        return TruncatedSeries(
            self.ctx,
            self.ctx._mul_coeffs(self.coeffs, other.coeffs),
            self._precision_with(other),
        )

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result, base = self.ctx.one, self
        while exponent:
            if exponent & 1:
                result = result * base
            exponent >>= 1
            if exponent:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, (int, np.integer)):
            other = self.ctx.constant(int(other))
        return (
            isinstance(other, TruncatedSeries)
            and other.ctx == self.ctx
            and np.array_equal(self.coeffs, other.coeffs)
        )

    def __hash__(self):
        return hash((self.ctx, self.coeffs.tobytes()))

    def __bool__(self):
        return bool(self.coeffs.any())

    def __repr__(self):
        return f"TruncatedSeries({self.format()})"

    def __str__(self):
        return self.format()

    ##############
    # Terms
    def is_zero(self) -> bool:
        return not self.coeffs.any()

    def terms(self) -> Dict[Exponents, int]:
        """Canonical sparse association exponents -> nonzero coefficient (graded-lex)."""
        return {
            self.ctx.monomials[c]: int(self.coeffs[c])
            for c in np.nonzero(self.coeffs)[0]
        }

    def constant_term(self) -> int:
        return int(self.coeffs[0])

    def format(self) -> str:
        """Canonical literal: graded-lex terms, coefficients in [0, p)."""
        pieces = []
        for exponents, c in self.terms().items():
            factors = []
            for v, a in enumerate(exponents):
                if a == 1:
                    factors.append(self.ctx.var_name(v))
                elif a > 1:
                    factors.append(f"{self.ctx.var_name(v)}^{a}")
            if not factors:
                pieces.append(str(c))
            elif c == 1:
                pieces.append("*".join(factors))
            else:
                pieces.append("*".join([str(c), *factors]))
        return " + ".join(pieces) if pieces else "0"

    ##############
    # Order and symbol (ts_deg_gr)
    def order(self) -> Optional[int]:
        """deg(x): minimal total degree of a stored term, None for the zero representative ("≥N")."""
        support = np.nonzero(self.coeffs)[0]
        if support.size == 0:
            return None
        return int(self.ctx.degrees[support[0]])

    def order_label(self):
        """The order as reported: an integer, or the string ``">=N"``."""
        order = self.order()
        return f">={self.ctx.N}" if order is None else order

    def homogeneous_part(self, d: int) -> "TruncatedSeries":
        coeffs = np.where(self.ctx.degrees == d, self.coeffs, 0)
        return TruncatedSeries(self.ctx, coeffs, self.precision)

    def symbol(self) -> "TruncatedSeries":
        """gr(x) = x mod m^(deg(x)+1), the lowest-degree homogeneous part."""
        order = self.order()
        if order is None:
            return self.ctx.zero
        return self.homogeneous_part(order)

    def is_homogeneous(self) -> bool:
        support = np.nonzero(self.coeffs)[0]
        return support.size == 0 or len(set(self.ctx.degrees[support].tolist())) == 1

    ##############
    # Inverse, derivatives, substitution
    def inverse(self) -> "TruncatedSeries":
        """Multiplicative inverse of a unit via Newton iteration y <- y(2 - a y).

        Raises:
            ZeroDivisionError: zero constant term.
        """
        a0 = self.constant_term()
        if a0 == 0:
            raise ZeroDivisionError(f"{self.format()} is not a unit of A_{self.ctx.N}")
        y = self.ctx.constant(pow(a0, -1, self.ctx.p))
        reached = 1
        while reached < self.ctx.N:
            y = y * (2 - self * y)
            reached *= 2
        return TruncatedSeries(self.ctx, y.coeffs, self.precision)

    def partial(self, var: Variable) -> "TruncatedSeries":
        """Formal partial derivative; the result is known modulo m^(precision-1)."""
        src, dst, mult = self.ctx._derivative_tables[self.ctx.flat(var)]
        coeffs = np.zeros(self.ctx.size, dtype=np.int64)
        coeffs[dst] = self.coeffs[src] * mult
        return TruncatedSeries(self.ctx, coeffs, self.precision - 1)

    def times_monomial(self, exponents: Sequence[int]) -> "TruncatedSeries":
        src, dst = self.ctx._shift_table(exponents)
        coeffs = np.zeros(self.ctx.size, dtype=np.int64)
        coeffs[dst] = self.coeffs[src]
        return TruncatedSeries(self.ctx, coeffs, self.precision)

    def frobenius(self, k: int = 1) -> "TruncatedSeries":
        """x(X) -> x(X^(p^k)), which equals x^(p^k) over F_p."""
        scale = self.ctx.p**k
        terms = {
            tuple(a * scale for a in exponents): c
            for exponents, c in self.terms().items()
        }
        return self.ctx.from_terms(terms)

    def substitute(self, images: Sequence["TruncatedSeries"]) -> "TruncatedSeries":
        """Evaluates the series at X_v = images[v], truncated (ts_substitute).

        Raises:
            ValueError: wrong number of images or an image with nonzero constant term.
        """
        ctx = self.ctx
        if len(images) != ctx.n:
            raise ValueError(f"Expected {ctx.n} images, got {len(images)}")
        for v, image in enumerate(images):
            self._check(image)
            if image.constant_term() != 0:
                raise ValueError(
                    f"Image of {ctx.var_name(v)} has nonzero constant term: {image.format()}"
                )
        products: Dict[Exponents, np.ndarray] = {(0,) * ctx.n: ctx.one.coeffs}

        def monomial_image(exponents: Exponents) -> np.ndarray:
            if exponents in products:
                return products[exponents]
            v = max(i for i, a in enumerate(exponents) if a)
            lower = list(exponents)
            lower[v] -= 1
            value = ctx._mul_coeffs(monomial_image(tuple(lower)), images[v].coeffs)
            products[exponents] = value
            return value

        total = np.zeros(ctx.size, dtype=np.int64)
        for exponents, c in self.terms().items():
            total = (total + c * monomial_image(exponents)) % ctx.p
        precision = min([self.precision] + [im.precision for im in images])
        return TruncatedSeries(ctx, total, precision)


##############
# Module-level operations
def ts_arith(a: TruncatedSeries, b: TruncatedSeries, which: str) -> TruncatedSeries:
    """Sum or product in A_N."""
    a._check(b)
    if which == "add":
        return a + b
    if which == "mul":
        return a * b
    raise ValueError(f"Unknown operation '{which}', expected add or mul")


def ts_deg_gr(a: TruncatedSeries):
    """(order, symbol); the order of the zero representative is reported as ">=N"."""
    return a.order_label(), a.symbol()


def ts_inverse(a: TruncatedSeries) -> TruncatedSeries:
    return a.inverse()


def ts_partial(a: TruncatedSeries, var: Variable) -> TruncatedSeries:
    return a.partial(var)


def ts_substitute(a: TruncatedSeries, images: Sequence[TruncatedSeries]) -> TruncatedSeries:
    return a.substitute(images)


def one_plus_pow(ctx: RingContext, var: Variable, exponent: int) -> TruncatedSeries:
    """(1 + X_{i,k})^a through the base-p digits of a and (1+X)^(p^j) = 1 + X^(p^j)."""
    v = ctx.flat(var)
    result = ctx.one
    for j, d in base_p_digits(exponent, ctx.p):
        step = ctx.p**j
        if step >= ctx.N:
            break
        terms = {}
        for i in range(d + 1):
            exponents = [0] * ctx.n
            exponents[v] = i * step
            terms[tuple(exponents)] = comb(d, i)
        result = result * ctx.from_terms(terms)
    return result


def compose_images(
    first: Sequence[TruncatedSeries], second: Sequence[TruncatedSeries]
) -> List[TruncatedSeries]:
    """Images of the composite endomorphism ``first`` after ``second``.

    If phi sends X_v to first[v] and psi sends X_v to second[v], then
    (psi o phi)(X_v) = first[v](second), so that
    ``a.substitute(first).substitute(second) == a.substitute(compose_images(first, second))``.
    """
    return [image.substitute(second) for image in first]


def parse_many(ctx: RingContext, text: str) -> List[TruncatedSeries]:
    """Parses a semicolon-separated list of literals (empty string gives [])."""
    return [ctx.parse(piece) for piece in text.split(";") if piece.strip()]


def format_many(series: Iterable[TruncatedSeries]) -> List[str]:
    return [s.format() for s in series]
