"""Exact polynomials over F_p and the Moore-matrix toolkit.

Polynomials are sympy ``PolyElement`` values of the ring F_p[w1, ..., wd]
(graded-lex order); nothing is truncated. A vector v of V = F_p^d is the
linear form sum_i v_i * w_(i+1), and a line of P(V) is represented by the
vector whose first nonzero coordinate is 1.

For linear forms u_1..u_m, the Moore matrix M(u) has entry (r, j) equal to
u_j^(p^r), r = 0..m-1.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import galois
import numpy as np
import sympy as sp
from sympy.polys.domains import GF
from sympy.polys.orderings import grlex
from sympy.polys.polyerrors import ExactQuotientFailed
from sympy.polys.rings import PolyElement, ring
from sympy.parsing.sympy_parser import (
    convert_xor,
    parse_expr,
    standard_transformations,
)

from iwasawa_ideals.code_algebra.series import PrecisionError
from iwasawa_ideals.utils import LOGGER as logger
from iwasawa_ideals.utils import grlex_key

DEFAULT_MAX_DEGREE = 4096


class VerificationError(ArithmeticError):
    """An exact identity that must hold failed to verify."""


class ExactRing:
    """F_p[w1..wd] with the helpers used by the Moore computations."""

    def __init__(self, p: int, d: int, max_degree: int = DEFAULT_MAX_DEGREE):
        if not sp.isprime(p):
            raise ValueError(f"p must be prime, got p={p}")
        if d < 1:
            raise ValueError(f"Need at least one variable, got d={d}")
        self.p = p
        self.d = d
        self.max_degree = max_degree
        self.R, *_ = ring(",".join(f"w{i + 1}" for i in range(d)), GF(p), grlex)
        self.GF = galois.GF(p)

    def __eq__(self, other):
        return isinstance(other, ExactRing) and (self.p, self.d) == (other.p, other.d)

    def __hash__(self):
        return hash((self.p, self.d))

    def __repr__(self):
        return f"ExactRing(p={self.p}, d={self.d})"

    @property
    def gens(self) -> Tuple[PolyElement, ...]:
        return self.R.gens

    @property
    def zero(self) -> PolyElement:
        return self.R.zero

    @property
    def one(self) -> PolyElement:
        return self.R.one

    def form(self, vector: Sequence[int]) -> PolyElement:
        """The linear form sum_i v_i w_(i+1)."""
        vector = [int(a) % self.p for a in vector]
        if len(vector) != self.d:
            raise ValueError(f"Vector {vector} has length {len(vector)}, expected {self.d}")
        return sum((a * w for a, w in zip(vector, self.gens) if a), self.R.zero)

    def vector(self, form: PolyElement) -> List[int]:
        """Coefficient vector of a linear form."""
        if any(sum(m) != 1 for m in form.monoms()) and form:
            raise ValueError(f"{self.format(form)} is not a linear form")
        coeffs = [0] * self.d
        for monom, c in form.terms():
            coeffs[monom.index(1)] = int(c) % self.p
        return coeffs

    def as_form(self, w) -> PolyElement:
        return w if isinstance(w, PolyElement) else self.form(w)

    def check_degree(self, degree: int, what: str = "polynomial"):
        if degree > self.max_degree:
            raise PrecisionError(
                f"{what} would reach degree {degree}, above the exact-degree cap {self.max_degree}"
            )

    def frobenius(self, poly: PolyElement, k: int) -> PolyElement:
        """poly^(p^k), computed by scaling exponents."""
        scale = self.p**k
        self.check_degree(total_degree(poly) * scale, "Frobenius power")
        return self.R.from_dict(
            {tuple(a * scale for a in monom): c for monom, c in poly.terms()}
        )

    def terms(self, poly: PolyElement) -> List[Tuple[Tuple[int, ...], int]]:
        """Terms in ascending graded-lex order with coefficients in [0, p)."""
        items = [(monom, int(c) % self.p) for monom, c in poly.terms()]
        return sorted(items, key=lambda t: grlex_key(t[0]))

    def format(self, poly: PolyElement) -> str:
        """Literal in the w1..wd grammar (exact_poly_format)."""
        pieces = []
        for monom, c in self.terms(poly):
            factors = [
                f"w{i + 1}" if a == 1 else f"w{i + 1}^{a}"
                for i, a in enumerate(monom)
                if a
            ]
            if not factors:
                pieces.append(str(c))
            else:
                pieces.append("*".join(([str(c)] if c != 1 else []) + factors))
        return " + ".join(pieces) if pieces else "0"

    def parse(self, text: str) -> PolyElement:
        names = {str(s): s for s in self.R.symbols}
        try:
            expr = parse_expr(
                text,
                local_dict=names,
                transformations=standard_transformations + (convert_xor,),
            )
            return self.R.from_expr(expr)
        except (SyntaxError, TypeError, ValueError, sp.SympifyError) as e:
            raise ValueError(f"Cannot parse '{text}' as a polynomial in w1..w{self.d}") from e

    def scalar(self, poly: PolyElement) -> Optional[int]:
        """The value of a constant polynomial, None if poly is not constant."""
        if not poly:
            return 0
        if not poly.is_ground:
            return None
        return int(poly.terms()[0][1]) % self.p

    def rank(self, vectors: Sequence[Sequence[int]]) -> int:
        if len(vectors) == 0:
            return 0
        return int(np.linalg.matrix_rank(self.GF(np.array(vectors, dtype=np.int64) % self.p)))


@lru_cache(maxsize=None)
def exact_ring(p: int, d: int) -> ExactRing:
    return ExactRing(p, d)


def total_degree(poly: PolyElement) -> int:
    return max((sum(m) for m in poly.monoms()), default=0)


def min_degree(poly: PolyElement) -> Optional[int]:
    """Lowest total degree of a term, None for 0."""
    if not poly:
        return None
    return min(sum(m) for m in poly.monoms())


def is_homogeneous(poly: PolyElement) -> bool:
    return len({sum(m) for m in poly.monoms()}) <= 1


##############
# Matrices of polynomials
Matrix = List[List[PolyElement]]


def minor(matrix: Matrix, i: int, j: int) -> Matrix:
    """The block obtained by removing row i and column j (0-based)."""
    return [row[:j] + row[j + 1 :] for r, row in enumerate(matrix) if r != i]


def determinant(matrix: Matrix, R) -> PolyElement:
    """Cofactor expansion along the first row."""
    size = len(matrix)
    if size == 0:
        return R.one
    if size == 1:
        return matrix[0][0]
    total = R.zero
    for j in range(size):
        entry = matrix[0][j]
        if not entry:
            continue
        term = entry * determinant(minor(matrix, 0, j), R)
        total = total + term if j % 2 == 0 else total - term
    return total


def mat_mul(a: Matrix, b: Matrix, R) -> Matrix:
    return [
        [sum((a[i][k] * b[k][j] for k in range(len(b))), R.zero) for j in range(len(b[0]))]
        for i in range(len(a))
    ]


def moore_matrix(er: ExactRing, forms: Sequence, shift: int = 0) -> Matrix:
    """M(u_1^(p^shift), ..., u_m^(p^shift)): entry (r, j) = u_j^(p^(shift + r))."""
    forms = [er.as_form(w) for w in forms]
    m = len(forms)
    er.check_degree(er.p ** (shift + m - 1), "Moore matrix entry")
    return [[er.frobenius(w, shift + r) for w in forms] for r in range(m)]


def _check_independent(er: ExactRing, forms: Sequence):
    vectors = [er.vector(er.as_form(w)) for w in forms]
    if er.rank(vectors) < len(vectors):
        raise ValueError(
            f"Linear forms {[er.format(er.as_form(w)) for w in forms]} are dependent over F_{er.p}"
        )


def moore_det(er: ExactRing, forms: Sequence, shift: int = 0) -> PolyElement:
    """det M(u_1, ..., u_m), homogeneous of degree p^shift (p^m - 1)/(p - 1).

    Raises:
        ValueError: the forms are linearly dependent.
    """
    _check_independent(er, forms)
    return determinant(moore_matrix(er, forms, shift), er.R)


def comatrix(matrix: Matrix, R) -> Matrix:
    """Com(M) with (i, j) entry (-1)^(i+j) det C_ji."""
    size = len(matrix)
    com = []
    for i in range(size):
        row = []
        for j in range(size):
            value = determinant(minor(matrix, j, i), R)
            row.append(value if (i + j) % 2 == 0 else -value)
        com.append(row)
    return com


def comatrix_cramer_check(er: ExactRing, forms: Sequence) -> Tuple[Matrix, bool]:
    """Com(M(u)) and whether M * Com = det * Id holds entrywise."""
    _check_independent(er, forms)
    matrix = moore_matrix(er, forms)
    com = comatrix(matrix, er.R)
    det = determinant(matrix, er.R)
    prod = mat_mul(matrix, com, er.R)
    size = len(matrix)
    ok = all(
        prod[i][j] == (det if i == j else er.R.zero)
        for i in range(size)
        for j in range(size)
    )
    return com, ok


##############
# Projective lines
def projective_points(p: int, m: int) -> List[Tuple[int, ...]]:
    """P(F_p^m): one vector per line, first nonzero coordinate 1, lexicographic order."""
    points = []
    for v in product(range(p), repeat=m):
        lead = next((a for a in v if a), 0)
        if lead == 1:
            points.append(v)
    return points


def normalize_line(vector: Sequence[int], p: int) -> Tuple[int, ...]:
    vector = [int(a) % p for a in vector]
    lead = next((a for a in vector if a), 0)
    if lead == 0:
        raise ValueError("The zero vector does not define a line")
    inv = pow(lead, -1, p)
    return tuple(a * inv % p for a in vector)


def projective_product(er: ExactRing, lines: Sequence[Sequence[int]]) -> PolyElement:
    """Product of the canonical representatives of a set of lines of P(V)."""
    representatives = sorted({normalize_line(v, er.p) for v in lines})
    result = er.R.one
    for v in representatives:
        result = result * er.form(v)
    return result


def u_g(er: ExactRing, g: Sequence[int], subspace: Optional[Sequence[Sequence[int]]] = None) -> PolyElement:
    """U_g = product of the lines of P(W) outside P(ker g), W = span(subspace) (default V)."""
    basis = [list(b) for b in subspace] if subspace is not None else np.eye(er.d, dtype=int).tolist()
    lines = []
    for a in projective_points(er.p, len(basis)):
        v = [sum(a[l] * basis[l][i] for l in range(len(basis))) % er.p for i in range(er.d)]
        if sum(gi * vi for gi, vi in zip(g, v)) % er.p:
            lines.append(v)
    return projective_product(er, lines)


def moore_factorization_check(er: ExactRing, forms: Sequence) -> Tuple[Optional[int], bool]:
    """Scalar c with det M(u) = c * prod over P(span u); ok iff c is a nonzero constant."""
    forms = [er.as_form(w) for w in forms]
    det = moore_det(er, forms)
    product_of_lines = er.R.one
    for a in projective_points(er.p, len(forms)):
        product_of_lines = product_of_lines * sum(
            (c * w for c, w in zip(a, forms) if c), er.R.zero
        )
    try:
        quotient = det.exquo(product_of_lines)
    except ExactQuotientFailed:
        return None, False
    scalar = er.scalar(quotient)
    return scalar, scalar is not None and scalar != 0


def lemma_estimation_check(er: ExactRing, forms: Sequence, i: int, j: int) -> Tuple[PolyElement, bool]:
    """det C_ij / det M(u_1..^u_j..u_m) and whether it lies in m_V^(p^(m-1) - p^(i-1)).

    i, j are 1-based as in the statement.

    Raises:
        VerificationError: the division is not exact.
    """
    forms = [er.as_form(w) for w in forms]
    m = len(forms)
    if m < 2:
        raise ValueError("lemma_estimation_check needs at least two forms")
    if not (1 <= i <= m and 1 <= j <= m):
        raise ValueError(f"Row/column ({i}, {j}) out of range for m={m}")
    matrix = moore_matrix(er, forms)
    _check_independent(er, forms)
    block = determinant(minor(matrix, i - 1, j - 1), er.R)
    divisor = determinant(moore_matrix(er, forms[: j - 1] + forms[j:]), er.R)
    try:
        quotient = block.exquo(divisor)
    except ExactQuotientFailed as e:
        raise VerificationError(
            f"det C_{i}{j} = {er.format(block)} is not divisible by {er.format(divisor)}"
        ) from e
    bound = er.p ** (m - 1) - er.p ** (i - 1)
    low = min_degree(quotient)
    return quotient, low is None or low >= bound


##############
# Certificates for U_g^(p^s) * (g o varphi)
@dataclass
class UfCertificate:
    """Coefficients c_i with U_g^(p^s) (g o varphi) = sum_i c_i varphi^(p^(s+i-1)).

    Attributes:
        coefficients: c_1..c_m (the first row of U)
        bounds: required lowest degrees p^s (p^(m-1) - p^(i-1))
        lambdas: the recovered scalars lambda_j in F_p^x
        u_matrix: the full matrix U
        identity_ok: the displayed identity holds on every basis vector of V_1
        rows_ok: U e = D^(p^s) f holds row by row on every basis vector of V_1
        matrix_ok: U M(w^(p^s)) = D^(p^s)
    """

    er: ExactRing
    s: int
    m: int
    u_g: PolyElement
    coefficients: List[PolyElement]
    bounds: List[int]
    lambdas: List[int]
    u_matrix: Matrix
    dual_basis: List[List[int]]
    identity_ok: bool
    rows_ok: bool
    matrix_ok: bool
    min_degrees: List[Optional[int]] = field(default_factory=list)

    @property
    def bounds_ok(self) -> bool:
        return all(d is None or d >= b for d, b in zip(self.min_degrees, self.bounds))

    @property
    def ok(self) -> bool:
        return self.identity_ok and self.rows_ok and self.matrix_ok and self.bounds_ok

    def to_dict(self) -> dict:
        fmt = self.er.format
        return {
            "p": self.er.p,
            "s": self.s,
            "m": self.m,
            "u_g": fmt(self.u_g),
            "coefficients": [fmt(c) for c in self.coefficients],
            "bounds": self.bounds,
            "min_degrees": self.min_degrees,
            "lambdas": self.lambdas,
            "dual_basis": [fmt(self.er.form(w)) for w in self.dual_basis],
            "U": [[fmt(c) for c in row] for row in self.u_matrix],
            "identity_ok": self.identity_ok,
            "rows_ok": self.rows_ok,
            "matrix_ok": self.matrix_ok,
            "bounds_ok": self.bounds_ok,
            "ok": self.ok,
        }


def image_basis(er: ExactRing, varphi: Sequence[Sequence[int]]) -> Tuple[np.ndarray, np.ndarray]:
    """Row-reduced basis of span(varphi) and its pivot columns."""
    rows = er.GF(np.array(varphi, dtype=np.int64).reshape(len(varphi), er.d) % er.p)
    reduced = rows.row_reduce()
    basis = np.asarray(reduced)[np.asarray(reduced).any(axis=1)]
    pivots = np.argmax(basis != 0, axis=1)
    return basis, pivots


def _complete_dual_basis(er: ExactRing, first: Sequence[int], m: int) -> np.ndarray:
    rows = [list(first)]
    for k in range(m):
        unit = [0] * m
        unit[k] = 1
        if er.rank(rows + [unit]) > len(rows):
            rows.append(unit)
        if len(rows) == m:
            break
    return np.array(rows, dtype=np.int64)


def prop_uf_certificate(
    er: ExactRing,
    g: Sequence[int],
    varphi: Sequence[Sequence[int]],
    s: int,
) -> UfCertificate:
    """Builds and verifies the coefficients c_i of U_g^(p^s) (g o varphi) over varphi^(p^(s+i-1)).

    Args:
        er: the exact ring of V = F_p^d
        g: coefficient vector of a linear functional on V (nonzero on the image)
        varphi: images in V of the basis vectors of V_1
        s: Frobenius shift, s >= 0

    Raises:
        ValueError: g vanishes on the image, or varphi is zero.
        PrecisionError: degrees exceed the exact-degree cap.
        VerificationError: a scalar lambda_j cannot be recovered.
    """
    p = er.p
    if s < 0:
        raise ValueError(f"s must be >= 0, got {s}")
    basis, pivots = image_basis(er, varphi)
    m = basis.shape[0]
    if m == 0:
        raise ValueError("varphi is zero, its image has dimension 0")
    er.check_degree(p**s * (p**m - 1) // (p - 1) + p ** (s + m - 1), "certificate")
    g = [int(a) % p for a in g]
    f1 = (basis @ np.array(g, dtype=np.int64)) % p
    if not f1.any():
        raise ValueError(f"g = {g} vanishes on the image of varphi")
    F = _complete_dual_basis(er, f1.tolist(), m)
    C = np.asarray(np.linalg.inv(er.GF(F)))
    duals = [((C[:, j] @ basis) % p).tolist() for j in range(m)]
    logger.debug(f"dim V_2 = {m}, dual basis {[er.format(er.form(w)) for w in duals]}")

    frob = moore_matrix(er, duals, s)
    det_s = determinant(frob, er.R)
    com = comatrix(frob, er.R)
    lambdas, u_matrix, deltas = [], [], []
    for j in range(m):
        others = duals[:j] + duals[j + 1 :]
        det_hat = determinant(moore_matrix(er, others, s), er.R) if others else er.R.one
        delta = u_g(er, _functional_on_v(F[j], pivots, er), basis.tolist())
        deltas.append(delta)
        try:
            lam = er.scalar((er.frobenius(delta, s) * det_hat).exquo(det_s))
        except ExactQuotientFailed as e:
            raise VerificationError(f"Delta_{j + 1}^(p^s) * det_hat is not a multiple of det M") from e
        if not lam:
            raise VerificationError(f"lambda_{j + 1} is not a nonzero scalar")
        lambdas.append(lam)
        row = []
        for i in range(m):
            try:
                row.append((com[j][i] * lam).exquo(det_hat))
            except ExactQuotientFailed as e:
                raise VerificationError(
                    f"Com_{j + 1}{i + 1} is not divisible by det M(w^_{j + 1})"
                ) from e
        u_matrix.append(row)

    product_um = mat_mul(u_matrix, frob, er.R)
    matrix_ok = all(
        product_um[j][i] == (er.frobenius(deltas[j], s) if i == j else er.R.zero)
        for j in range(m)
        for i in range(m)
    )

    identity_ok, rows_ok = True, True
    for image in varphi:
        image = [int(a) % p for a in image]
        coords = [image[c] for c in pivots]
        values = (F @ np.array(coords, dtype=np.int64)) % p
        powers = [er.frobenius(er.form(image), s + i) for i in range(m)]
        for j in range(m):
            lhs = sum((u_matrix[j][i] * powers[i] for i in range(m)), er.R.zero)
            rhs = er.frobenius(deltas[j], s) * int(values[j])
            if lhs != rhs:
                rows_ok = False
        g_value = sum(a * b for a, b in zip(g, image)) % p
        if sum((u_matrix[0][i] * powers[i] for i in range(m)), er.R.zero) != er.frobenius(deltas[0], s) * g_value:
            identity_ok = False

    coefficients = list(u_matrix[0])
    bounds = [p**s * (p ** (m - 1) - p**i) for i in range(m)]
    certificate = UfCertificate(
        er=er,
        s=s,
        m=m,
        u_g=deltas[0],
        coefficients=coefficients,
        bounds=bounds,
        lambdas=lambdas,
        u_matrix=u_matrix,
        dual_basis=duals,
        identity_ok=identity_ok,
        rows_ok=rows_ok,
        matrix_ok=matrix_ok,
        min_degrees=[min_degree(c) for c in coefficients],
    )
    if not certificate.ok:
        logger.warning(f"Certificate failed to verify: {certificate.to_dict()}")
    return certificate


def _functional_on_v(f_row: np.ndarray, pivots: np.ndarray, er: ExactRing) -> List[int]:
    """Extends a functional given on the image basis to V, zero on non-pivot coordinates.

    Since the image basis is row reduced, the coordinate of v in the image on
    basis vector l is v[pivots[l]].
    """
    g = [0] * er.d
    for l, c in enumerate(pivots):
        g[int(c)] = int(f_row[l]) % er.p
    return g


def moore_det_report(er: ExactRing, forms: Sequence) -> Dict[str, object]:
    """Moore determinant, Cramer and factorization checks, as reported by the CLI."""
    forms = [er.as_form(w) for w in forms]
    det = moore_det(er, forms)
    com, cramer_ok = comatrix_cramer_check(er, forms)
    scalar, factor_ok = moore_factorization_check(er, forms)
    m = len(forms)
    estimation = []
    if m >= 2:
        for i in range(1, m + 1):
            for j in range(1, m + 1):
                quotient, ok = lemma_estimation_check(er, forms, i, j)
                estimation.append(
                    {"i": i, "j": j, "quotient": er.format(quotient), "ok": ok}
                )
    expected_degree = (er.p**m - 1) // (er.p - 1)
    return {
        "forms": [er.format(w) for w in forms],
        "det": er.format(det),
        "degree": total_degree(det),
        "expected_degree": expected_degree,
        "homogeneous": is_homogeneous(det),
        "comatrix": [[er.format(c) for c in row] for row in com],
        "cramer_ok": cramer_ok,
        "factorization_scalar": scalar,
        "factorization_ok": factor_ok,
        "estimation": estimation,
        "ok": cramer_ok
        and factor_ok
        and all(e["ok"] for e in estimation)
        and total_degree(det) == expected_degree,
    }
