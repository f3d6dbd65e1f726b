"""Arithmetic in F_p and in F_q = F_p[t]/(phi(t)).

Elements of F_q are carried as coordinate tuples in the basis 1, lambda, ...,
lambda^(f-1), where lambda is the class of t. Polynomial products and
reductions are delegated to ``galois.Poly`` over ``galois.GF(p)``.

For f = 1 the field is F_p itself, presented with phi = t and lambda = 1 so
that the indexing X_{i,k} (k = 0 only) and the representative [lambda^0] = 1
stay uniform downstream.
"""
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import List, Sequence, Tuple

import galois
import numpy as np
from sympy import isprime

from iwasawa_ideals.utils import LOGGER as logger


@dataclass(frozen=True)
class FieldSpec:
    """Presentation of F_q.

    Args:
        p (int): characteristic, must be prime
        f (int): residue degree, q = p^f
        phi (Tuple[int]): f+1 coefficients of a monic irreducible phi, constant term first
    """

    p: int
    f: int
    phi: Tuple[int, ...]

    def __post_init__(self):
        """Normalizes ``phi`` to a tuple of integers in [0, p)."""
        object.__setattr__(
            self, "phi", tuple(int(c) % self.p for c in self.phi)
        )


@dataclass(frozen=True)
class FqElem:
    """Element of F_q, coordinates in the basis {lambda^k}."""

    field: "FieldContext"
    coords: Tuple[int, ...]

    def __add__(self, other):
        return self.field.add(self, other)

    def __sub__(self, other):
        return self.field.add(self, self.field.neg(other))

    def __neg__(self):
        return self.field.neg(self)

    def __mul__(self, other):
        return self.field.mul(self, other)

    def __pow__(self, exponent: int):
        return self.field.pow(self, exponent)

    def is_zero(self) -> bool:
        """True for the zero element."""
        return not any(self.coords)

    def __repr__(self):
        return f"FqElem{self.coords}"


class FieldContext:
    """Immutable arithmetic context for F_q = F_p[t]/(phi)."""

    def __init__(self, spec: FieldSpec):
        """Validates ``spec`` and caches the reduction data.

        Args:
            spec: the presentation of the field

        Raises:
            ValueError: non-prime p, phi of wrong degree, non-monic or reducible phi.
        """
        p, f, phi = spec.p, spec.f, spec.phi
        if not isprime(p):
            raise ValueError(f"p must be prime, got p={p}")
        if f < 1:
            raise ValueError(f"f must be a positive integer, got f={f}")
        if len(phi) != f + 1:
            raise ValueError(
                f"phi must have f+1={f + 1} coefficients, got {len(phi)}"
            )
        if phi[-1] != 1:
            raise ValueError(f"phi must be monic, got leading coefficient {phi[-1]}")
        self.spec = spec
        self.p = p
        self.f = f
        self.q = p**f
        self.GF = galois.GF(p)
        # galois orders coefficients from the leading term down
        self.phi_poly = galois.Poly(list(phi[::-1]), field=self.GF)
        if f > 1 and not self.phi_poly.is_irreducible():
            raise ValueError(
                f"phi={list(phi)} is reducible over F_{p}"
            )
        if f == 1 and phi != (0, 1):
            raise ValueError(
                f"For f=1 the prime field is presented with phi = t, i.e. phi=[0, 1]; got {list(phi)}"
            )
        logger.debug(f"Field context F_{self.q} built with phi={list(phi)}")

    def __eq__(self, other):
        return isinstance(other, FieldContext) and self.spec == other.spec

    def __hash__(self):
        return hash(self.spec)

    def __repr__(self):
        return f"FieldContext(p={self.p}, f={self.f}, phi={list(self.spec.phi)})"

    ##############
    # Elements
    def elem(self, coords: Sequence[int]) -> FqElem:
        """Builds an element from its f coordinates (reduced mod p)."""
        coords = tuple(int(c) % self.p for c in coords)
        if len(coords) != self.f:
            raise ValueError(
                f"Expected {self.f} coordinates for an element of F_{self.q}, got {len(coords)}"
            )
        return FqElem(self, coords)

    @cached_property
    def zero(self) -> FqElem:
        return self.elem([0] * self.f)

    @cached_property
    def one(self) -> FqElem:
        return self.elem([1] + [0] * (self.f - 1))

    def basis(self, k: int) -> FqElem:
        """The basis element lambda^k, 0 <= k <= f-1 (lambda = 1 when f = 1)."""
        if not 0 <= k < self.f:
            raise ValueError(f"k must lie in [0, {self.f}), got {k}")
        coords = [0] * self.f
        coords[k] = 1
        return self.elem(coords)

    def from_int(self, a: int) -> FqElem:
        """Image of an integer in F_p inside F_q."""
        return self.elem([a] + [0] * (self.f - 1))

    def elements(self) -> List[FqElem]:
        """All q elements, in lexicographic order of coordinates."""
        return [
            self.elem(c[::-1]) for c in product(range(self.p), repeat=self.f)
        ]

    ##############
    # Arithmetic
    def _check(self, *elems: FqElem):
        for a in elems:
            if a.field != self:
                raise ValueError(
                    f"Element {a} belongs to {a.field}, not to {self}"
                )

    def _to_poly(self, a: FqElem) -> galois.Poly:
        return galois.Poly(list(a.coords[::-1]), field=self.GF)

    def _from_poly(self, poly: galois.Poly) -> FqElem:
        coeffs = [int(c) for c in poly.coeffs[::-1]]
        coeffs = (coeffs + [0] * self.f)[: self.f]
        return FqElem(self, tuple(coeffs))

    def add(self, a: FqElem, b: FqElem) -> FqElem:
        self._check(a, b)
        return FqElem(
            self, tuple((x + y) % self.p for x, y in zip(a.coords, b.coords))
        )

    def neg(self, a: FqElem) -> FqElem:
        self._check(a)
        return FqElem(self, tuple((-x) % self.p for x in a.coords))

    def mul(self, a: FqElem, b: FqElem) -> FqElem:
        """Schoolbook product reduced by phi (ff_mul)."""
        self._check(a, b)
        if self.f == 1:
            return FqElem(self, ((a.coords[0] * b.coords[0]) % self.p,))
        return self._from_poly((self._to_poly(a) * self._to_poly(b)) % self.phi_poly)

    def pow(self, a: FqElem, exponent: int) -> FqElem:
        """Square-and-multiply; negative exponents go through the inverse."""
        self._check(a)
        if exponent < 0:
            return self.pow(self.inv(a), -exponent)
        result, base = self.one, a
        while exponent:
            if exponent & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            exponent >>= 1
        return result

    def inv(self, a: FqElem) -> FqElem:
        """Inverse via the extended Euclidean algorithm (ff_inv).

        Raises:
            ZeroDivisionError: a is zero.
        """
        self._check(a)
        if a.is_zero():
            raise ZeroDivisionError(f"0 has no inverse in F_{self.q}")
        if self.f == 1:
            return FqElem(self, (pow(a.coords[0], -1, self.p),))
        d, s, _ = galois.egcd(self._to_poly(a), self.phi_poly)
        # d is a nonzero constant since phi is irreducible
        return self._from_poly((s // d) % self.phi_poly)

    def regular_rep_matrix(self, a: FqElem) -> np.ndarray:
        """Matrix of multiplication-by-a in the basis {lambda^k}.

        Column k holds the coordinates of a * lambda^k, so that a -> matrix is a
        ring homomorphism F_q -> M_f(F_p).

        Returns:
            galois.FieldArray: f x f matrix over GF(p)
        """
        self._check(a)
        columns = [self.mul(a, self.basis(k)).coords for k in range(self.f)]
        return self.GF(np.array(columns, dtype=np.int64).T.reshape(self.f, self.f))


def field_make(spec: FieldSpec) -> FieldContext:
    """Builds the arithmetic context of ``spec`` (field_make)."""
    return FieldContext(spec)


def ff_mul(a: FqElem, b: FqElem) -> FqElem:
    """Product in F_q."""
    if a.field != b.field:
        raise ValueError("ff_mul: elements from different field contexts")
    return a.field.mul(a, b)


def ff_inv(a: FqElem) -> FqElem:
    """Inverse in F_q."""
    return a.field.inv(a)


def regular_rep_matrix(a: FqElem) -> np.ndarray:
    """Multiplication-by-a matrix in the basis {lambda^k}."""
    return a.field.regular_rep_matrix(a)
