"""Arithmetic in O_F / p^M O_F.

O_F is presented as one unramified step followed by one Eisenstein step,

    O_F / p^M = (Z/p^M)[t] / (phi~(t)) [pi] / (E(pi)),

where phi~ is phi with integer-lifted coefficients and E is a monic Eisenstein
polynomial whose coefficients lie in the unramified part. Elements are e x f
integer arrays: entry (i, k) is the coefficient of pi^i t^k.

The uniformizer varpi is pi, and {varpi^i [lambda^k]} is the Z_p-basis that
realises the variables X_{i,k} of the power-series presentation.
"""
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import List, Sequence, Tuple, Union

import numpy as np
from numpy.random import Generator
from sympy import Matrix

from iwasawa_ideals.code_algebra.gf import FieldContext, FieldSpec, FqElem
from iwasawa_ideals.utils import LOGGER as logger

EisensteinCoeff = Union[int, Sequence[int]]


@dataclass(frozen=True)
class LocalFieldSpec:
    """Concrete presentation of O_F / p^M.

    Args:
        base (FieldSpec): residue field presentation
        e (int): ramification index
        eis (Tuple): e+1 coefficients of E(pi), constant term first; each either an
            integer or a list of f integers (an element of the unramified part)
        M (int): p-adic precision exponent
    """

    base: FieldSpec
    e: int
    eis: Tuple[EisensteinCoeff, ...]
    M: int

    @property
    def n(self) -> int:
        """Number of variables X_{i,k}, n = e f."""
        return self.e * self.base.f


class OFElem:
    """Element of O_F / p^M in the coordinates pi^i t^k (immutable)."""

    __slots__ = ("ring", "coords")

    def __init__(self, ring: "LocalRing", coords: np.ndarray):
        self.ring = ring
        coords = np.asarray(coords, dtype=np.int64) % ring.modulus
        coords.setflags(write=False)
        self.coords = coords

    def __add__(self, other):
        return self.ring.add(self, other)

    def __sub__(self, other):
        return self.ring.add(self, self.ring.neg(other))

    def __neg__(self):
        return self.ring.neg(self)

    def __mul__(self, other):
        return self.ring.mul(self, other)

    def __pow__(self, exponent: int):
        return self.ring.pow(self, exponent)

    def __eq__(self, other):
        return (
            isinstance(other, OFElem)
            and self.ring == other.ring
            and np.array_equal(self.coords, other.coords)
        )

    def __hash__(self):
        return hash((self.ring.spec, self.coords.tobytes()))

    def is_zero(self) -> bool:
        return not self.coords.any()

    def __repr__(self):
        return f"OFElem({self.coords.tolist()})"


class LocalRing:
    """Immutable context for O_F / p^M (ring_make)."""

    def __init__(self, spec: LocalFieldSpec):
        """Validates ``spec`` and caches reduction rules, Teichmueller lifts and B^-1.

        Raises:
            ValueError: non-Eisenstein polynomial or malformed coefficients.
            ArithmeticError: the change-of-basis matrix is not invertible mod p.
        """
        self.spec = spec
        self.field = FieldContext(spec.base)
        self.p = self.field.p
        self.f = self.field.f
        self.q = self.field.q
        self.e = spec.e
        self.M = spec.M
        self.n = self.e * self.f
        if self.e < 1:
            raise ValueError(f"e must be a positive integer, got e={self.e}")
        if self.M < 1:
            raise ValueError(f"M must be a positive integer, got M={self.M}")
        self.modulus = self.p**self.M
        # phi~ : integer lift, the low f coefficients
        self._phi_low = np.array(spec.base.phi[:-1], dtype=np.int64)
        self._eis = self._parse_eisenstein(spec.eis)
        self._check_eisenstein()
        logger.debug(
            f"Local ring built: p={self.p}, f={self.f}, e={self.e}, M={self.M}"
        )

    def __eq__(self, other):
        return isinstance(other, LocalRing) and self.spec == other.spec

    def __hash__(self):
        return hash(self.spec)

    def __repr__(self):
        return f"LocalRing(p={self.p}, f={self.f}, e={self.e}, M={self.M})"

    ##############
    # Validation
    def _parse_eisenstein(self, eis) -> np.ndarray:
        if len(eis) != self.e + 1:
            raise ValueError(
                f"Eisenstein polynomial must have e+1={self.e + 1} coefficients, got {len(eis)}"
            )
        rows = []
        for j, c in enumerate(eis):
            if isinstance(c, (int, np.integer)):
                row = [int(c)] + [0] * (self.f - 1)
            else:
                row = [int(a) for a in c]
                if len(row) != self.f:
                    raise ValueError(
                        f"Eisenstein coefficient {j} must have f={self.f} coordinates, got {len(row)}"
                    )
            rows.append(row)
        return np.array(rows, dtype=np.int64)

    def _check_eisenstein(self):
        eis = self._eis
        lead = eis[-1] % self.modulus
        if lead[0] != 1 % self.modulus or lead[1:].any():
            raise ValueError("Eisenstein polynomial must be monic")
        if (eis[:-1] % self.p).any():
            raise ValueError(
                "Eisenstein condition violated: a non-leading coefficient is not divisible by p"
            )
        if not (eis[0] % (self.p**2)).any():
            raise ValueError(
                "Eisenstein condition violated: constant term divisible by p^2"
            )

    ##############
    # Unramified part (Z/p^M)[t]/(phi~)
    def _mul_unramified(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        prod = np.convolve(a, b) % self.modulus
        # t^f = -sum phi_j t^j
        for d in range(len(prod) - 1, self.f - 1, -1):
            c = prod[d]
            if c:
                prod[d - self.f : d] = (prod[d - self.f : d] - c * self._phi_low) % self.modulus
                prod[d] = 0
        return prod[: self.f]

    ##############
    # Elements
    def elem(self, coords) -> OFElem:
        """Builds an element from an e x f array (or a list of e lists of f ints)."""
        arr = np.array(coords, dtype=np.int64)
        if arr.shape != (self.e, self.f):
            raise ValueError(
                f"Expected an {self.e}x{self.f} coordinate array, got shape {arr.shape}"
            )
        return OFElem(self, arr)

    def from_int(self, a: int) -> OFElem:
        coords = np.zeros((self.e, self.f), dtype=np.int64)
        coords[0, 0] = a
        return OFElem(self, coords)

    @cached_property
    def zero(self) -> OFElem:
        return self.from_int(0)

    @cached_property
    def one(self) -> OFElem:
        return self.from_int(1)

    @cached_property
    def uniformizer(self) -> OFElem:
        """varpi = pi (equal to p when e = 1)."""
        if self.e == 1:
            return OFElem(self, -self._eis[0].reshape(1, self.f))
        coords = np.zeros((self.e, self.f), dtype=np.int64)
        coords[1, 0] = 1
        return OFElem(self, coords)

    def lift_t_power(self, k: int) -> OFElem:
        """The integer lift t^k of lambda^k (before Teichmueller correction)."""
        coords = np.zeros((self.e, self.f), dtype=np.int64)
        coords[0, k] = 1
        return OFElem(self, coords)

    ##############
    # Arithmetic (of_arith)
    def _check(self, *elems: OFElem):
        for a in elems:
            if a.ring != self:
                raise ValueError(f"Element {a} belongs to {a.ring}, not to {self}")

    def add(self, a: OFElem, b: OFElem) -> OFElem:
        self._check(a, b)
        return OFElem(self, a.coords + b.coords)

    def neg(self, a: OFElem) -> OFElem:
        self._check(a)
        return OFElem(self, -a.coords)

    def mul(self, a: OFElem, b: OFElem) -> OFElem:
        """Product with reduction by phi~ and by E(pi)."""
        self._check(a, b)
        e, f = self.e, self.f
        prod = np.zeros((2 * e - 1, f), dtype=np.int64)
        for i1 in range(e):
            if not a.coords[i1].any():
                continue
            for i2 in range(e):
                if b.coords[i2].any():
                    prod[i1 + i2] = (
                        prod[i1 + i2]
                        + self._mul_unramified(a.coords[i1], b.coords[i2])
                    ) % self.modulus
        # pi^e = -sum_{j<e} E_j pi^j
        for d in range(2 * e - 2, e - 1, -1):
            c = prod[d]
            if c.any():
                for j in range(e):
                    prod[d - e + j] = (
                        prod[d - e + j] - self._mul_unramified(c, self._eis[j])
                    ) % self.modulus
                prod[d] = 0
        return OFElem(self, prod[:e])

    def pow(self, a: OFElem, exponent: int) -> OFElem:
        self._check(a)
        if exponent < 0:
            raise ValueError("Negative powers are not supported in O_F/p^M")
        result, base = self.one, a
        while exponent:
            if exponent & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            exponent >>= 1
        return result

    def elements(self) -> List[OFElem]:
        """All p^(Mn) elements; only meant for desk-scale exhaustive checks."""
        if self.modulus**self.n > 2**16:
            raise ValueError(
                f"Refusing to enumerate {self.modulus ** self.n} elements of O_F/p^M"
            )
        return [
            self.digits_compose(np.array(d).reshape(self.e, self.f))
            for d in product(range(self.modulus), repeat=self.n)
        ]

    def random(self, rng: Generator) -> OFElem:
        """Uniform random element drawn with ``rng``."""
        return OFElem(self, rng.integers(0, self.modulus, size=(self.e, self.f)))

    ##############
    # Teichmueller representatives
    def teichmuller_lift(self, x: OFElem) -> OFElem:
        """Fixed point of y -> y^q starting from x (at most M+1 iterations)."""
        self._check(x)
        y = x
        for _ in range(self.M + 1):
            z = self.pow(y, self.q)
            if z == y:
                return y
            y = z
        logger.warning(f"Teichmueller iteration did not stabilise from {x}")
        return y

    def teichmuller(self, k: int) -> OFElem:
        """[lambda^k] for 0 <= k <= f-1 (teichmuller)."""
        if not 0 <= k < self.f:
            raise ValueError(f"k must lie in [0, {self.f}), got {k}")
        return self._teichmuller_lifts[k]

    @cached_property
    def _teichmuller_lifts(self) -> Tuple[OFElem, ...]:
        return tuple(self.teichmuller_lift(self.lift_t_power(k)) for k in range(self.f))

    ##############
    # Digits in the basis {varpi^i [lambda^k]}
    @cached_property
    def basis_elements(self) -> Tuple[OFElem, ...]:
        """varpi^i [lambda^k], flattened with index i*f + k."""
        out = []
        varpi_power = self.one
        for _i in range(self.e):
            for k in range(self.f):
                out.append(self.mul(varpi_power, self.teichmuller(k)))
            varpi_power = self.mul(varpi_power, self.uniformizer)
        return tuple(out)

    @cached_property
    def change_of_basis(self) -> Matrix:
        """The n x n matrix B whose columns are the coordinates of varpi^i [lambda^k]."""
        columns = [b.coords.reshape(-1).tolist() for b in self.basis_elements]
        return Matrix(columns).T

    @cached_property
    def _change_of_basis_inverse(self) -> np.ndarray:
        try:
            inverse = self.change_of_basis.inv_mod(self.modulus)
        except ValueError as e:
            raise ArithmeticError(
                "change-of-basis matrix is not invertible mod p"
            ) from e
        return np.array(inverse.tolist(), dtype=np.int64)

    def digits_decompose(self, x: OFElem) -> np.ndarray:
        """Solves B a = coords(x) mod p^M; returns the e x f digit array."""
        self._check(x)
        digits = self._change_of_basis_inverse @ x.coords.reshape(-1) % self.modulus
        return digits.reshape(self.e, self.f)

    def digits_compose(self, digits) -> OFElem:
        """sum a_{i,k} varpi^i [lambda^k]."""
        digits = np.asarray(digits, dtype=np.int64).reshape(-1)
        if digits.size != self.n:
            raise ValueError(f"Expected {self.n} digits, got {digits.size}")
        matrix = np.array(self.change_of_basis.tolist(), dtype=np.int64)
        coords = matrix @ (digits % self.modulus) % self.modulus
        return OFElem(self, coords.reshape(self.e, self.f))

    ##############
    # Reduction mod p
    def reduce_mod_p(self, x: OFElem) -> Tuple[FqElem, ...]:
        """x mod p in O_F/p = F_q[varpi]/(varpi^e): the F_q coefficient of each varpi^i."""
        self._check(x)
        return tuple(self.field.elem(x.coords[i] % self.p) for i in range(self.e))


def ring_make(spec: LocalFieldSpec) -> LocalRing:
    """Builds the context of ``spec`` (ring_make)."""
    return LocalRing(spec)


def of_arith(a: OFElem, b: OFElem, which: str) -> OFElem:
    """Ring operation ``which`` in {"add", "mul", "neg"} (neg ignores b)."""
    if a.ring != b.ring:
        raise ValueError("of_arith: elements from different rings")
    if which == "add":
        return a.ring.add(a, b)
    if which == "mul":
        return a.ring.mul(a, b)
    if which == "neg":
        return a.ring.neg(a)
    raise ValueError(f"Unknown operation '{which}', expected add, mul or neg")
