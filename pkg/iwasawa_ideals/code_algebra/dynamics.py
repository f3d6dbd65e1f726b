"""The group layer: U inside A_N, the rho-action and the Gamma-action.

U is identified with O_F (additively), an element x with digits a_{i,k} in
the basis varpi^i [lambda^k] mapping to prod (1 + X_{i,k})^(a_{i,k}). An
element gamma = diag(1 + p^r x, 1) acts on U by multiplication, hence on A_N by
the substitution X_{i,k} -> embed((1 + p^r x) varpi^i [lambda^k]) - 1.

On V = sum F_p X_{i,k}, O_F/p = F_q[varpi]/(varpi^e) acts through rho: the
variable X_{j,k} corresponds to varpi^j lambda^k and rho(xbar) is
multiplication by xbar. A residue xbar is carried as a tuple of e elements of
F_q, its varpi-levels.
"""
from dataclasses import dataclass, field
from datetime import datetime
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import galois
import numpy as np
from tqdm import tqdm

from iwasawa_ideals.code_algebra.gf import FqElem
from iwasawa_ideals.code_algebra.ideals import (
    IdealHandle,
    NuValue,
    delta_estimate,
)
from iwasawa_ideals.code_algebra.moore import projective_points
from iwasawa_ideals.code_algebra.padic import LocalRing, OFElem
from iwasawa_ideals.code_algebra.series import (
    PrecisionError,
    RingContext,
    TruncatedSeries,
    one_plus_pow,
)
from iwasawa_ideals.utils import LOGGER as logger
from iwasawa_ideals.utils import time_difference

Residue = Tuple[FqElem, ...]


class ActionContext:
    """O_F/p^M together with A_N in the e*f variables X_{i,k}.

    Raises:
        PrecisionError: p^M < N, since (1+X)^(p^M) must vanish to 1 in A_N.
    """

    def __init__(self, local: LocalRing, N: int):
        if local.modulus < N:
            raise PrecisionError(
                f"p^M = {local.p}^{local.M} = {local.modulus} must be >= N = {N}"
            )
        self.local = local
        self.field = local.field
        self.p = local.p
        self.e = local.e
        self.f = local.f
        self.n = local.n
        self.N = N
        self.ring = RingContext(self.p, N, self.e, self.f)
        self.GF = galois.GF(self.p)
        logger.info(
            f"Action context: p={self.p}, e={self.e}, f={self.f}, M={local.M}, N={N}"
        )

    def __repr__(self):
        return f"ActionContext({self.local}, N={self.N})"

    def residue(self, x: OFElem) -> Residue:
        return self.local.reduce_mod_p(x)

    def _check_level(self, level: int):
        if not 0 <= level < self.e:
            raise ValueError(f"Level {level} out of range [0, {self.e})")

    def residues(self) -> List[Residue]:
        """All q^e elements of O_F/p."""
        elems = self.field.elements()
        return [tuple(levels) for levels in product(elems, repeat=self.e)]


##############
# Embedding of U
def embed(ctx: ActionContext, x: OFElem) -> TruncatedSeries:
    """prod_{i,k} (1 + X_{i,k})^(a_{i,k}) for the digits a of x."""
    digits = ctx.local.digits_decompose(x)
    result = ctx.ring.one
    for i in range(ctx.e):
        for k in range(ctx.f):
            if digits[i, k]:
                result = result * one_plus_pow(ctx.ring, (i, k), int(digits[i, k]))
    return result


##############
# rho
def rho_matrix(ctx: ActionContext, c: FqElem, level: int) -> galois.FieldArray:
    """Matrix of rho(c varpi^level) on V; column i*f+k is the image of X_{i,k}."""
    ctx._check_level(level)
    block = ctx.field.regular_rep_matrix(c)
    matrix = ctx.GF(np.zeros((ctx.n, ctx.n), dtype=np.int64))
    f = ctx.f
    for j in range(ctx.e - level):
        target = level + j
        matrix[target * f : (target + 1) * f, j * f : (j + 1) * f] = block
    return matrix


def rho_of(ctx: ActionContext, xbar: Residue) -> galois.FieldArray:
    """rho of a general residue: the sum of its levels."""
    if len(xbar) != ctx.e:
        raise ValueError(f"Expected {ctx.e} levels, got {len(xbar)}")
    matrix = ctx.GF(np.zeros((ctx.n, ctx.n), dtype=np.int64))
    for level, c in enumerate(xbar):
        if not c.is_zero():
            matrix = matrix + rho_matrix(ctx, c, level)
    return matrix


def rho_image_form(ctx: ActionContext, rho: galois.FieldArray, v: int) -> TruncatedSeries:
    """rho(xbar)(X_v) as a linear form of A_N."""
    return ctx.ring.linear_form(np.asarray(rho[:, v]))


def rho_block_check(ctx: ActionContext, c: FqElem, level: int) -> Dict[str, object]:
    """For c != 0: rho(c varpi^i) maps Y_j onto Y_{i+j} (i+j < e) and kills Y_j (i+j >= e)."""
    if c.is_zero():
        raise ValueError("rho_block_check needs a nonzero residue")
    matrix = np.asarray(rho_matrix(ctx, c, level))
    f = ctx.f
    blocks = []
    ok = True
    for j in range(ctx.e):
        columns = matrix[:, j * f : (j + 1) * f]
        target = level + j
        if target < ctx.e:
            inside = columns[target * f : (target + 1) * f]
            outside = np.delete(columns, np.s_[target * f : (target + 1) * f], axis=0)
            rank = int(np.linalg.matrix_rank(ctx.GF(inside)))
            block_ok = rank == f and not outside.any()
        else:
            rank = 0
            block_ok = not columns.any()
        blocks.append({"j": j, "target": target if target < ctx.e else None, "rank": rank, "ok": block_ok})
        ok = ok and block_ok
    return {"level": level, "blocks": blocks, "ok": ok}


def _functional_after_rho(ctx: ActionContext, g: Sequence[int], c: FqElem, level: int, j: int) -> Tuple[int, ...]:
    """g o rho(c varpi^level) restricted to Y_j, with g a functional on Y_(level+j)."""
    block = np.asarray(ctx.field.regular_rep_matrix(c))
    g = np.asarray(g, dtype=np.int64)
    return tuple(int(a) for a in (g @ block) % ctx.p)


def rho_bijection_check(ctx: ActionContext, level: int, j: int, g: Sequence[int]) -> bool:
    """c -> g o rho(c varpi^level)|Y_j is a bijection F_q -> Y_j^* for nonzero g in Y_(level+j)^*."""
    if level + j >= ctx.e:
        raise ValueError(f"Levels {level} + {j} must stay below e={ctx.e}")
    if not any(int(a) % ctx.p for a in g):
        raise ValueError("g must be nonzero")
    images = {
        _functional_after_rho(ctx, g, c, level, j) for c in ctx.field.elements()
    }
    return len(images) == ctx.field.q


def dual_preimages(ctx: ActionContext, g: Sequence[int], i0: int) -> List[FqElem]:
    """c_k in F_q with g o rho(c_k varpi^i0) = X_{0,k}^* on Y_0, for k = 0..f-1."""
    ctx._check_level(i0)
    if not any(int(a) % ctx.p for a in g):
        raise ValueError("g must be nonzero")
    table = {_functional_after_rho(ctx, g, c, i0, 0): c for c in ctx.field.elements()}
    preimages = []
    for k in range(ctx.f):
        target = tuple(1 if kk == k else 0 for kk in range(ctx.f))
        if target not in table:
            raise ArithmeticError(f"No residue maps to X_0_{k}^* under g o rho")
        preimages.append(table[target])
    return preimages


##############
# Gamma
@dataclass
class GammaEndomorphism:
    """gamma = diag(1 + p^r x, 1) acting on A_N.

    Attributes:
        r: positive integer
        x: element of O_F/p^M
        images: gamma(X_{i,k}), flat index i*f+k
    """

    ctx: ActionContext
    r: int
    x: OFElem
    images: List[TruncatedSeries]

    def act(self, F: TruncatedSeries) -> TruncatedSeries:
        if F.ctx != self.ctx.ring:
            raise ValueError(f"Series from {F.ctx}, gamma acts on {self.ctx.ring}")
        return F.substitute(self.images)

    def compose(self, other: "GammaEndomorphism") -> List[TruncatedSeries]:
        """Images of self after other: X -> other(self(X))."""
        return [other.act(image) for image in self.images]

    def is_identity(self) -> bool:
        return all(
            image == self.ctx.ring.var(self.ctx.ring.var_of(v))
            for v, image in enumerate(self.images)
        )

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "x": self.ctx.local.digits_decompose(self.x),
            "images": {
                self.ctx.ring.var_name(v): image.format()
                for v, image in enumerate(self.images)
            },
        }


def gamma_make(ctx: ActionContext, r: int, x: OFElem) -> GammaEndomorphism:
    """gamma(X_{i,k}) = embed((1 + p^r x) varpi^i [lambda^k]) - 1."""
    if r < 1:
        raise ValueError(f"r must be >= 1, got r={r}")
    local = ctx.local
    scale = local.add(local.one, local.mul(local.from_int(ctx.p**r), x))
    images = [
        embed(ctx, local.mul(scale, b)) - 1 for b in local.basis_elements
    ]
    return GammaEndomorphism(ctx, r, x, images)


def gamma_act(gamma: GammaEndomorphism, F: TruncatedSeries) -> TruncatedSeries:
    return gamma.act(F)


def default_gammas(ctx: ActionContext) -> List[GammaEndomorphism]:
    """gamma(r=1, x=varpi^i [lambda^k]) for every (i, k)."""
    return [gamma_make(ctx, 1, b) for b in ctx.local.basis_elements]


##############
# Taylor congruence
@dataclass
class TaylorCheck:
    residual: TruncatedSeries
    bound: int
    ok: bool
    vacuous: bool

    def to_dict(self) -> dict:
        return {
            "residual": self.residual.format(),
            "order": self.residual.order_label(),
            "bound": self.bound,
            "ok": self.ok,
            "vacuous": self.vacuous,
        }


def taylor_gap_check(gamma: GammaEndomorphism, F: TruncatedSeries) -> TaylorCheck:
    """gamma(F) - F - sum_v rho(xbar)(X_v)^(p^r) (1 + X_v) dF/dX_v, required in m^(2 p^r).

    xbar is the reduction mod p of gamma's own x.
    """
    ctx = gamma.ctx
    ring = ctx.ring
    rho = rho_of(ctx, ctx.residue(gamma.x))
    residual = gamma.act(F) - F
    for v in range(ctx.n):
        var = ring.var_of(v)
        derivative = F.partial(var)
        if derivative.is_zero():
            continue
        shift = rho_image_form(ctx, rho, v).frobenius(gamma.r)
        residual = residual - shift * (1 + ring.var(var)) * derivative
    bound = 2 * ctx.p**gamma.r
    vacuous = bound > ring.N
    if vacuous:
        logger.warning(f"Taylor check vacuous: 2p^r = {bound} > N = {ring.N}")
    order = residual.order()
    ok = vacuous or order is None or order >= bound
    return TaylorCheck(residual, bound, ok, vacuous)


##############
# Controlled ideals and the key element P
def build_P(ctx: ActionContext, F: TruncatedSeries, g: Sequence[int], i0: int, c: FqElem) -> TruncatedSeries:
    """P = sum_k (g o rho(c varpi^i0))(X_{0,k}) (1 + X_{0,k}) dF/dX_{0,k}.

    Raises:
        ValueError: g is zero or has the wrong length.
    """
    ctx._check_level(i0)
    if len(g) != ctx.f:
        raise ValueError(f"g must have f={ctx.f} coefficients, got {len(g)}")
    if not any(int(a) % ctx.p for a in g):
        raise ValueError("g must be a nonzero functional on Y_i0")
    scalars = _functional_after_rho(ctx, g, c, i0, 0)
    ring = ctx.ring
    P = ring.zero
    for k, s in enumerate(scalars):
        if s:
            P = P + s * (1 + ring.var((0, k))) * F.partial((0, k))
    return P


def u_g_series(ctx: ActionContext, g: Sequence[int], i0: int) -> TruncatedSeries:
    """U_g in the variables X_{i0,*}: the product of the lines of Y_i0 off ker g."""
    ring = ctx.ring
    result = ring.one
    for v in projective_points(ctx.p, ctx.f):
        if sum(a * b for a, b in zip(g, v)) % ctx.p:
            coefficients = [0] * ctx.n
            for k, a in enumerate(v):
                coefficients[i0 * ctx.f + k] = a
            result = result * ring.linear_form(coefficients)
    return result


@dataclass
class CorDeltaReport:
    P: TruncatedSeries
    u_g: TruncatedSeries
    table: List[Tuple[int, object, NuValue]] = field(default_factory=list)
    certified: bool = False
    convention: bool = False
    delta: Optional[dict] = None

    def to_dict(self) -> dict:
        return {
            "P": self.P.format(),
            "u_g": self.u_g.format(),
            "table": [
                {"r": r, "deg": deg, "nu": nu.to_dict()} for r, deg, nu in self.table
            ],
            "certified": self.certified,
            "convention": self.convention,
            "delta": self.delta,
        }


def cor_delta_experiment(
    ctx: ActionContext,
    I: IdealHandle,
    F: TruncatedSeries,
    g: Sequence[int],
    i0: int,
    c: FqElem,
    R: int,
    delta_bound: int = 8,
) -> CorDeltaReport:
    """Table (r, deg(U_g^(p^r) P), nu(U_g^(p^r) P)) for 0 <= r <= R.

    Raises:
        ValueError: F is not in I.
        PrecisionError: some U_g^(p^r) P leaves the precision.
    """
    if not I.contains(F):
        raise ValueError(f"{F.format()} is not an element of the ideal")
    P = build_P(ctx, F, g, i0, c)
    ug = u_g_series(ctx, g, i0)
    if I.contains(P):
        return CorDeltaReport(P, ug, certified=True, convention=True)
    deg_P = P.order()
    N = ctx.N
    if ctx.p ** (R + ctx.f - 1) + deg_P >= N:
        raise PrecisionError(
            f"deg(U_g^(p^R) P) = {ctx.p ** (R + ctx.f - 1)} + {deg_P} must stay below N={N}"
        )
    table = []
    for r in range(R + 1):
        y = ug.frobenius(r) * P
        table.append((r, y.order_label(), I.nu(y)))
    certified = any(
        nu.is_finite and isinstance(deg, int) and nu.k > deg for _r, deg, nu in table
    )
    K = min(delta_bound, (N - 1 - deg_P) // ug.order())
    delta = delta_estimate(I, ug, P, K).to_dict() if K >= 1 else None
    return CorDeltaReport(P, ug, table, certified, delta=delta)


def control_check(ctx: ActionContext, I: IdealHandle) -> Dict[str, object]:
    """Whether every dF/dX_{0,k}, F a generator, lies in I modulo m^(N-1)."""
    generators = []
    ok = True
    for F in I.generators:
        derivatives = []
        for k in range(ctx.f):
            D = F.partial((0, k))
            member = I.contains(D, ctx.N - 1)
            derivatives.append({"k": k, "derivative": D.format(), "member": member})
            ok = ok and member
        generators.append({"generator": F.format(), "derivatives": derivatives})
    return {"generators": generators, "controlled": ok}


##############
# Levels and openness
def select_i0(ctx: ActionContext, I: IdealHandle, K: int) -> Dict[str, object]:
    """Largest level carrying a variable whose symbol is not in the bounded radical.

    All variables of the levels above i0 are then in the bounded radical of
    gr(I); i0 is None when every variable is.
    """
    witnesses = I.radical_contains_variables(K)
    i0 = None
    for level in range(ctx.e - 1, -1, -1):
        names = [ctx.ring.var_name(level * ctx.f + k) for k in range(ctx.f)]
        if any(witnesses[name] is None for name in names):
            i0 = level
            break
    return {"i0": i0, "witnesses": witnesses}


def ug_family_open(ctx: ActionContext) -> Optional[int]:
    """Openness witness of the ideal of F_p[Y] generated by every U_g, g in P(Y^*).

    Computed in a one-level ring with f variables; None when not open at N.
    """
    if ctx.p ** (ctx.f - 1) >= ctx.N:
        raise PrecisionError(f"deg U_g = {ctx.p ** (ctx.f - 1)} must stay below N={ctx.N}")
    level_ring = RingContext(ctx.p, ctx.N, 1, ctx.f)
    gens = []
    for g in projective_points(ctx.p, ctx.f):
        product_of_lines = level_ring.one
        for v in projective_points(ctx.p, ctx.f):
            if sum(a * b for a, b in zip(g, v)) % ctx.p:
                product_of_lines = product_of_lines * level_ring.linear_form(v)
        gens.append(product_of_lines)
    return IdealHandle(level_ring, gens).is_open()


##############
# Gamma closure
@dataclass
class ClosureReport:
    """Outcome of the Gamma-closure iteration.

    ``open_at`` is evidence at precision N only, never a proof of openness.
    """

    ideal: IdealHandle
    rounds: int
    generator_counts: List[int]
    open_at: Optional[int]
    stable: bool
    trace: List[List[str]]
    wall_time: Optional[str] = None

    def to_dict(self, with_timing: bool = False) -> dict:
        report = {
            "rounds": self.rounds,
            "generator_counts": self.generator_counts,
            "open_at": self.open_at,
            "stable": self.stable,
            "trace": self.trace,
            "generators": [g.format() for g in self.ideal.generators],
            "note": "evidence at finite precision, not a proof",
        }
        if with_timing:
            report["wall_time"] = self.wall_time
        return report


def gamma_closure(
    I0: IdealHandle,
    gammas: Sequence[GammaEndomorphism],
    max_rounds: int = 16,
    progress: bool = False,
) -> ClosureReport:
    """Replaces I by I + sum gamma(I) until the degree-N span is stable.

    gamma(I) is generated by the images of the generators, so each round only
    maps the generators added in the previous round.
    """
    start = datetime.now()
    current = I0
    frontier = list(I0.generators)
    counts = [len(current.generators)]
    trace: List[List[str]] = []
    stable = False
    rounds = 0
    for _ in tqdm(range(max_rounds), disable=not progress, desc="closure"):
        added = []
        for gamma in gammas:
            for F in frontier:
                image = gamma.act(F)
                if not current.contains(image) and image not in added:
                    added.append(image)
        if not added:
            stable = True
            break
        rounds += 1
        current = current.extended(added)
        frontier = added
        counts.append(len(current.generators))
        trace.append([g.format() for g in added])
        logger.debug(
            f"closure round {rounds}: +{len(added)} generators, rank {current.rank()}"
        )
    if not stable:
        logger.warning(f"closure did not stabilise within {max_rounds} rounds")
    open_at = current.is_open()
    return ClosureReport(
        ideal=current,
        rounds=rounds,
        generator_counts=counts,
        open_at=open_at,
        stable=stable,
        trace=trace,
        wall_time=time_difference(start, datetime.now()),
    )
