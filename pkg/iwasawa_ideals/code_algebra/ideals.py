"""Degreewise linear algebra for finitely generated ideals of A_N.

An ideal is represented by the row space, inside A/m^N, of all products
g*mu (g a generator, mu a monomial, deg(g*mu) < N). The span is row reduced
once over GF(p) with ``galois``; since columns are ordered by ascending degree,
the image of the ideal in A/m^d is read off the same reduced basis by keeping
the rows whose pivot has degree < d and the first columns.

The remainder of a vector against the reduced basis vanishes on every pivot
column, which gives membership, nu and membership in the associated graded
ideal by looking at its first nonzero column.
"""
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import galois
import numpy as np

from iwasawa_ideals.code_algebra.series import (
    PrecisionError,
    RingContext,
    TruncatedSeries,
)
from iwasawa_ideals.utils import LOGGER as logger

VERDICTS = ("InfiniteCertified", "ZeroSoFar", "Inconclusive")


@dataclass(frozen=True)
class NuValue:
    """Either Finite(k) with 0 <= k < N, or AtLeastPrecision (``k is None``)."""

    k: Optional[int] = None

    @classmethod
    def finite(cls, k: int) -> "NuValue":
        return cls(k)

    @classmethod
    def at_least_precision(cls) -> "NuValue":
        return cls(None)

    @property
    def is_finite(self) -> bool:
        return self.k is not None

    def at_least(self, bound) -> bool:
        """nu >= bound (AtLeastPrecision satisfies every bound within precision)."""
        return self.k is None or self.k >= bound

    def to_dict(self) -> dict:
        if self.k is None:
            return {"at_least_precision": True}
        return {"finite": self.k}

    def __repr__(self):
        return "AtLeastPrecision" if self.k is None else f"Finite({self.k})"


class IdealHandle:
    """Ideal of A_N given by generators, with a lazily built reduced basis.

    Attributes:
        ctx (RingContext): the ring
        generators (tuple of TruncatedSeries): generators in canonical form
    """

    def __init__(self, ctx: RingContext, generators: Sequence[TruncatedSeries] = ()):
        for g in generators:
            if g.ctx != ctx:
                raise ValueError(
                    f"Generator {g.format()} belongs to {g.ctx}, expected {ctx}"
                )
        self.ctx = ctx
        self.generators: Tuple[TruncatedSeries, ...] = tuple(generators)
        self.GF = galois.GF(ctx.p)
        self._lock = threading.Lock()
        self._basis = None
        self._pivots = None

    def __repr__(self):
        gens = ", ".join(g.format() for g in self.generators)
        return f"IdealHandle(({gens}) in {self.ctx})"

    def to_dict(self) -> dict:
        return {"generators": [g.format() for g in self.generators]}

    ##############
    # Reduced basis
    def _spanning_rows(self) -> np.ndarray:
        ctx = self.ctx
        rows = []
        for g in self.generators:
            order = g.order()
            if order is None:
                continue
            for mu in ctx.monomials[: int(ctx.count_below[ctx.N - order])]:
                rows.append(g.times_monomial(mu).coeffs)
        if not rows:
            return np.zeros((0, ctx.size), dtype=np.int64)
        return np.array(rows, dtype=np.int64)

    def _reduce(self):
        with self._lock:
            if self._basis is not None:
                return
            rows = self._spanning_rows()
            if rows.shape[0] == 0:
                basis = self.GF(np.zeros((0, self.ctx.size), dtype=np.int64))
                pivots = np.zeros(0, dtype=np.int64)
            else:
                reduced = self.GF(rows).row_reduce()
                nonzero = np.asarray(reduced).any(axis=1)
                basis = reduced[nonzero]
                pivots = np.argmax(np.asarray(basis) != 0, axis=1).astype(np.int64)
            logger.debug(
                f"Reduced basis of {len(self.generators)} generators: "
                f"{rows.shape[0]} products, rank {basis.shape[0]}"
            )
            self._pivots = pivots
            self._basis = basis

    @property
    def pivots(self) -> np.ndarray:
        """Pivot columns of the reduced basis at degree N (ascending)."""
        self._reduce()
        return self._pivots

    def basis(self, d: Optional[int] = None):
        """Reduced row-echelon basis of the image of the ideal in A/m^d.

        Returns:
            galois.FieldArray: rank x (number of monomials of degree < d)
        """
        d = self.ctx.N if d is None else d
        self._check_degree(d)
        self._reduce()
        cols = int(self.ctx.count_below[d])
        keep = self._pivots < cols
        return self._basis[keep][:, :cols]

    def rank(self, d: Optional[int] = None) -> int:
        return int(self.basis(d).shape[0])

    def _check_degree(self, d: int):
        if not 0 <= d <= self.ctx.N:
            raise PrecisionError(
                f"Degree {d} outside [0, N={self.ctx.N}] for this ideal"
            )

    def remainder(self, x: TruncatedSeries) -> np.ndarray:
        """x minus its projection on the pivots; zero on every pivot column."""
        if x.ctx != self.ctx:
            raise ValueError(f"Series from {x.ctx}, ideal lives in {self.ctx}")
        self._reduce()
        v = self.GF(x.coeffs)
        if self._basis.shape[0] == 0:
            return np.asarray(v)
        return np.asarray(v - v[self._pivots] @ self._basis)

    def span_key(self) -> bytes:
        """Identifies the degree-N span (equal spans give equal keys)."""
        self._reduce()
        return np.asarray(self._basis).tobytes()

    def extended(self, extra: Sequence[TruncatedSeries]) -> "IdealHandle":
        """The ideal generated by these generators and ``extra``."""
        return IdealHandle(self.ctx, self.generators + tuple(extra))

    ##############
    # Queries
    def contains(self, x: TruncatedSeries, d: Optional[int] = None) -> bool:
        """True iff x mod m^d lies in the image of the ideal in A/m^d."""
        d = self.ctx.N if d is None else d
        self._check_degree(d)
        cols = int(self.ctx.count_below[d])
        return not self.remainder(x)[:cols].any()

    def nu(self, x: TruncatedSeries) -> NuValue:
        """Largest k with x in I + m^k; AtLeastPrecision when x lies in the degree-N span."""
        support = np.nonzero(self.remainder(x))[0]
        if support.size == 0:
            return NuValue.at_least_precision()
        return NuValue.finite(int(self.ctx.degrees[support[0]]))

    def gr_member(self, h: TruncatedSeries) -> bool:
        """Membership of a homogeneous h of degree d in the degree-d piece of gr(I).

        h is the symbol of an element of I exactly when h lies in I + m^(d+1).

        Raises:
            ValueError: h is not homogeneous.
            PrecisionError: d + 1 > N.
        """
        if not h.is_homogeneous():
            raise ValueError(f"gr_member expects a homogeneous series, got {h.format()}")
        d = h.order()
        if d is None:
            return True
        self._check_degree(d + 1)
        return self.contains(h, d + 1)

    def radical_member_bounded(self, h: TruncatedSeries, K: int) -> Tuple[bool, Optional[int]]:
        """True with witness k when gr_member(h^k) holds for some 1 <= k <= K.

        False only means "not in the radical at exponents <= K".

        Raises:
            ValueError: h is not homogeneous.
            PrecisionError: deg(h)*K >= N.
        """
        if not h.is_homogeneous():
            raise ValueError(f"radical_member_bounded expects a homogeneous series, got {h.format()}")
        d = h.order()
        if d is None:
            return True, 1
        if d * K >= self.ctx.N:
            raise PrecisionError(
                f"deg(h)*K = {d}*{K} = {d * K} must stay below N={self.ctx.N}"
            )
        power = self.ctx.one
        for k in range(1, K + 1):
            power = power * h
            if self.gr_member(power):
                return True, k
        return False, None

    def is_open(self) -> Optional[int]:
        """Smallest k < N with every monomial of degree in [k, N) in the degree-N span, else None."""
        ctx = self.ctx
        pivots = self.pivots
        for k in range(ctx.N):
            below = int(ctx.count_below[k])
            if int((pivots >= below).sum()) == ctx.size - below:
                return k
        return None

    def radical_contains_variables(self, K: int) -> Dict[str, Optional[int]]:
        """Witness exponent per variable X_{i,k} whose symbol is in the bounded radical (None otherwise)."""
        K = min(K, self.ctx.N - 1)
        result = {}
        for v in range(self.ctx.n):
            member, witness = self.radical_member_bounded(
                self.ctx.var(self.ctx.var_of(v)), K
            )
            result[self.ctx.var_name(v)] = witness if member else None
        return result


##############
# delta
@dataclass(frozen=True)
class DeltaRow:
    k: int
    deg: int
    nu: NuValue

    @property
    def gap(self) -> Optional[int]:
        return None if self.nu.k is None else self.nu.k - self.deg

    def to_dict(self) -> dict:
        return {"k": self.k, "deg": self.deg, "nu": self.nu.to_dict()}


@dataclass
class DeltaReport:
    """Table (k, deg(x^k P), nu(x^k P)) and its verdict.

    ``ZeroSoFar`` is never a certificate: a finite computation cannot
    certify delta = 0.
    """

    verdict: str
    table: List[DeltaRow] = field(default_factory=list)
    witness: Optional[int] = None
    convention: bool = False

    @property
    def certified(self) -> bool:
        return self.verdict == "InfiniteCertified"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "certified": self.certified,
            "witness": self.witness,
            "convention": self.convention,
            "table": [row.to_dict() for row in self.table],
        }


def delta_estimate(
    I: IdealHandle, x: TruncatedSeries, P: TruncatedSeries, K: int
) -> DeltaReport:
    """Tabulates nu(x^k P) - deg(x^k P) for 0 <= k <= K.

    Raises:
        PrecisionError: deg(x)*K + deg(P) >= N.
    """
    if I.contains(x) or I.contains(P):
        return DeltaReport("InfiniteCertified", convention=True)
    N = I.ctx.N
    dx, dP = x.order(), P.order()
    if dx * K + dP >= N:
        raise PrecisionError(
            f"deg(x)*K + deg(P) = {dx}*{K} + {dP} must stay below N={N}"
        )
    table = []
    y = P
    for k in range(K + 1):
        if k:
            y = y * x
        table.append(DeltaRow(k, y.order(), I.nu(y)))
    logger.debug(
        "delta table: " + ", ".join(f"(k={r.k}, deg={r.deg}, nu={r.nu})" for r in table)
    )
    witness = next((r.k for r in table if r.nu.is_finite and r.gap > 0), None)
    if witness is not None:
        return DeltaReport("InfiniteCertified", table, witness)
    if any(not r.nu.is_finite for r in table):
        logger.warning("delta estimate reached the precision bound: Inconclusive")
        return DeltaReport("Inconclusive", table)
    return DeltaReport("ZeroSoFar", table)


@dataclass
class GrowthCertificate:
    """epsilon = 1/(2 k0 deg x) with nu(x^k) >= (1+epsilon) deg(x^k) checked for k0 <= k <= K."""

    k0: int
    epsilon: Fraction
    verified: List[int]
    failed: List[int]

    @property
    def ok(self) -> bool:
        return not self.failed

    def to_dict(self) -> dict:
        return {
            "k0": self.k0,
            "epsilon": str(self.epsilon),
            "verified": self.verified,
            "failed": self.failed,
            "ok": self.ok,
        }


def growth_certificate(I: IdealHandle, x: TruncatedSeries, K: int) -> Optional[GrowthCertificate]:
    """Explicit growth exponent from the first k0 <= K with nu(x^k0) > deg(x^k0).

    Returns None when no such k0 exists up to K.

    Raises:
        ValueError: x is not in the maximal ideal.
        PrecisionError: deg(x)*K >= N.
    """
    d = x.order()
    if d is None or d == 0:
        raise ValueError(f"growth_certificate needs x in m \\ m^N, got {x.format()}")
    if d * K >= I.ctx.N:
        raise PrecisionError(f"deg(x)*K = {d}*{K} must stay below N={I.ctx.N}")
    powers = [I.ctx.one]
    for _ in range(K):
        powers.append(powers[-1] * x)
    values = [I.nu(y) for y in powers]
    k0 = next(
        (k for k in range(1, K + 1) if values[k].at_least(k * d + 1)),
        None,
    )
    if k0 is None:
        return None
    epsilon = Fraction(1, 2 * k0 * d)
    verified, failed = [], []
    for k in range(k0, K + 1):
        (verified if values[k].at_least((1 + epsilon) * k * d) else failed).append(k)
    return GrowthCertificate(k0, epsilon, verified, failed)


##############
# Module-level operations
def ideal_build(ctx: RingContext, gens: Sequence[TruncatedSeries] = ()) -> IdealHandle:
    return IdealHandle(ctx, gens)


def ideal_contains(I: IdealHandle, x: TruncatedSeries, d: int) -> bool:
    return I.contains(x, d)


def nu(I: IdealHandle, x: TruncatedSeries) -> NuValue:
    return I.nu(x)


def gr_member(I: IdealHandle, h: TruncatedSeries) -> bool:
    return I.gr_member(h)


def radical_member_bounded(I: IdealHandle, h: TruncatedSeries, K: int):
    return I.radical_member_bounded(h, K)


def is_open(I: IdealHandle) -> Optional[int]:
    return I.is_open()
