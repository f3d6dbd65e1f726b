"""Property suites run by ``iwasawa-ideals selftest``.

Each suite is deterministic: randomness comes from a generator seeded per
suite, and wall-times are only reported on request.
"""
from dataclasses import dataclass, field
from datetime import datetime
from itertools import product
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from iwasawa_ideals.code_algebra.dynamics import (
    ActionContext,
    control_check,
    default_gammas,
    embed,
    gamma_closure,
    gamma_make,
    rho_bijection_check,
    rho_block_check,
    rho_of,
    taylor_gap_check,
)
from iwasawa_ideals.code_algebra.gf import FieldSpec
from iwasawa_ideals.code_algebra.ideals import IdealHandle, delta_estimate
from iwasawa_ideals.code_algebra.moore import (
    ExactRing,
    comatrix_cramer_check,
    is_homogeneous,
    lemma_estimation_check,
    moore_det,
    moore_factorization_check,
    projective_points,
    prop_uf_certificate,
    total_degree,
)
from iwasawa_ideals.code_algebra.padic import LocalFieldSpec, LocalRing
from iwasawa_ideals.code_algebra.series import RingContext, TruncatedSeries
from iwasawa_ideals.utils import LOGGER as logger
from iwasawa_ideals.utils import new_rand_gen, time_difference

# (p, e, f) -> (phi, Eisenstein polynomial)
SHAPES = {
    (2, 1, 2): ([1, 1, 1], [-2, 1]),
    (2, 2, 1): ([0, 1], [-2, 0, 1]),
    (3, 2, 1): ([0, 1], [-3, 0, 1]),
    (2, 2, 2): ([1, 1, 1], [-2, 0, 1]),
}
CLOSURE_CONFIGS = [(2, 2, 1, 4, 2), (2, 1, 2, 4, 2), (2, 2, 2, 4, 2), (3, 2, 1, 9, 2)]
# Open closures among the n single-variable and 20 random principal starts.
# At N=4, p=2 every gamma(X_v) is X_v plus the square of a linear form, so
# most monomials of degree 2 and 3 are never reached.
CLOSURE_OPEN_COUNTS = {
    (2, 2, 1, 4, 2): 7,
    (2, 1, 2, 4, 2): 19,
    (2, 2, 2, 4, 2): 0,
    (3, 2, 1, 9, 2): 19,
}
# open_at of the closure of (X_v); None stays non-open
CLOSURE_OF_VARIABLES = {
    (2, 2, 1, 4, 2): {"X0_0": 2, "X1_0": None},
    (2, 2, 2, 4, 2): {"X0_0": None, "X0_1": None, "X1_0": None, "X1_1": None},
}
MAX_FAILURES = 20


def action_context(p: int, e: int, f: int, N: int, M: int) -> ActionContext:
    phi, eis = SHAPES[(p, e, f)]
    local = LocalRing(LocalFieldSpec(FieldSpec(p, f, tuple(phi)), e, tuple(eis), M))
    return ActionContext(local, N)


@dataclass
class SuiteResult:
    checks: int = 0
    failures: List[str] = field(default_factory=list)
    details: Dict[str, object] = field(default_factory=dict)

    def check(self, condition: bool, label: str):
        self.checks += 1
        if not condition:
            if len(self.failures) < MAX_FAILURES:
                self.failures.append(label)
            logger.debug(f"check failed: {label}")

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": self.checks,
            "failures": self.failures,
            **self.details,
        }


##############
# Oracles shared with the tests
def span_oracle_contains(I: IdealHandle, x: TruncatedSeries, d: int) -> bool:
    """Membership in A/m^d by comparing ranks of the generator-times-monomial span."""
    ctx = I.ctx
    cols = int(ctx.count_below[d])
    rows = []
    for g in I.generators:
        for mu in ctx.monomials[:cols]:
            rows.append(g.times_monomial(mu).coeffs[:cols])
    if not rows:
        return not x.coeffs[:cols].any()
    span = I.GF(np.array(rows, dtype=np.int64))
    extended = I.GF(np.array(rows + [x.coeffs[:cols]], dtype=np.int64))
    return np.linalg.matrix_rank(span) == np.linalg.matrix_rank(extended)


def independent_tuples_binary(m: int) -> List[List[List[int]]]:
    er = ExactRing(2, m)
    out = []
    for entries in product(range(2), repeat=m * m):
        rows = [list(entries[i * m : (i + 1) * m]) for i in range(m)]
        if er.rank(rows) == m:
            out.append(rows)
    return out


def random_independent_tuples(p: int, m: int, count: int, rng) -> List[List[List[int]]]:
    er = ExactRing(p, m)
    out = []
    while len(out) < count:
        rows = rng.integers(0, p, size=(m, m)).tolist()
        if er.rank(rows) == m:
            out.append(rows)
    return out


##############
# Suites
def suite_moore(rng) -> SuiteResult:
    result = SuiteResult()
    for p, m in product((2, 3), (1, 2, 3)):
        er = ExactRing(p, m)
        tuples = independent_tuples_binary(m) if p == 2 else random_independent_tuples(p, m, 200, rng)
        for rows in tuples:
            det = moore_det(er, rows)
            expected = (p**m - 1) // (p - 1)
            result.check(
                is_homogeneous(det) and total_degree(det) == expected,
                f"moore_det degree p={p} rows={rows}",
            )
            _scalar, factor_ok = moore_factorization_check(er, rows)
            result.check(factor_ok, f"factorization p={p} rows={rows}")
            _com, cramer_ok = comatrix_cramer_check(er, rows)
            result.check(cramer_ok, f"Cramer p={p} rows={rows}")
            if m >= 2:
                for i, j in product(range(1, m + 1), repeat=2):
                    _q, ok = lemma_estimation_check(er, rows, i, j)
                    result.check(ok, f"estimation p={p} rows={rows} i={i} j={j}")
    return result


def non_injective_map(p: int, m: int) -> List[List[int]]:
    """A map F_p^(m+1) -> F_p^m onto F_p^m with a nonzero kernel."""
    images = np.eye(m, dtype=int).tolist()
    images.append([(p - 1) if k == 0 else 0 for k in range(m)])
    return images


def suite_uf_certificates(rng) -> SuiteResult:
    result = SuiteResult()
    for p, m, s in product((2, 3), (1, 2), (0, 1)):
        er = ExactRing(p, m)
        maps = {"identity": np.eye(m, dtype=int).tolist(), "non_injective": non_injective_map(p, m)}
        for name, varphi in maps.items():
            for g in projective_points(p, m):
                certificate = prop_uf_certificate(er, list(g), varphi, s)
                result.check(
                    certificate.ok,
                    f"certificate p={p} m={m} s={s} g={g} varphi={name}",
                )
    return result


def two_variable_fixtures(N: int = 10):
    """The fixture ideals (X_2), (X_1^2, X_2^2), (X_2 + X_1^2), with X_1 = X0_0 and X_2 = X1_0."""
    ring = RingContext(2, N, e=2, f=1)
    fixtures = {
        "(X_2)": IdealHandle(ring, [ring.parse("X1_0")]),
        "(X_1^2, X_2^2)": IdealHandle(ring, [ring.parse("X0_0^2"), ring.parse("X1_0^2")]),
        "(X_2 + X_1^2)": IdealHandle(ring, [ring.parse("X1_0 + X0_0^2")]),
    }
    return ring, fixtures


PRIME_FIXTURES = ("(X_2)", "(X_2 + X_1^2)")


def suite_nu_delta(rng) -> SuiteResult:
    result = SuiteResult()
    ring, fixtures = two_variable_fixtures()
    N = ring.N
    x1, x2 = ring.parse("X0_0"), ring.parse("X1_0")
    principal = fixtures["(X_2)"]
    result.check(principal.nu(x1).k == 1, "nu(X_1) = 1 in (X_2)")
    result.check(principal.nu(x2 + x1 * x1).k == 2, "nu(X_2 + X_1^2) = 2 in (X_2)")

    samples = [x1, x2, x1 + x2, x1 * x2, x2 + x1 * x1]
    for _ in range(10):
        samples.append(ring.series(rng.integers(0, 2, size=ring.size)))
    for name, I in fixtures.items():
        for x in samples:
            value = I.nu(x)
            for k in range(1, N + 1):
                expected = span_oracle_contains(I, x, k)
                result.check(
                    I.contains(x, k) == expected,
                    f"{name}: membership of {x.format()} at degree {k}",
                )
            order = x.order()
            result.check(
                order is None or value.at_least(order),
                f"{name}: nu >= deg for {x.format()}",
            )
        for x, y in product(samples[:5], repeat=2):
            a, b, c = I.nu(x), I.nu(y), I.nu(x * y)
            if a.is_finite and b.is_finite and c.is_finite:
                result.check(c.k >= a.k + b.k, f"{name}: superadditivity {x.format()}, {y.format()}")

    for name in PRIME_FIXTURES:
        I = fixtures[name]
        for x in (x1, x2, x1 + x2):
            K = (N - 1) // x.order()
            report = delta_estimate(I, x, ring.one, K)
            gaps = [row.gap for row in report.table if row.gap is not None]
            result.check(gaps == sorted(gaps), f"{name}: gap monotonicity for {x.format()}")
            member, _ = I.radical_member_bounded(x.symbol(), K)
            expected = "InfiniteCertified" if member else "ZeroSoFar"
            result.check(report.verdict == expected, f"{name}: verdict of {x.format()} is {report.verdict}")
            if report.witness:
                k0 = report.witness
                d = x.order()
                for mult in range(1, K // k0 + 1):
                    nu_value = I.nu(x ** (mult * k0))
                    result.check(
                        nu_value.at_least(mult + mult * k0 * d),
                        f"{name}: amplification for {x.format()} at m={mult}",
                    )
    return result


def suite_rho(rng) -> SuiteResult:
    result = SuiteResult()
    for (p, e, f) in SHAPES:
        ctx = action_context(p, e, f, 2, 2)
        residues = ctx.residues()
        local_residue_mul = _residue_multiplier(ctx)
        rhos = {r: rho_of(ctx, r) for r in residues}
        for a, b in product(residues, repeat=2):
            total = tuple(x + y for x, y in zip(a, b))
            result.check(
                np.array_equal(rhos[total], rhos[a] + rhos[b]),
                f"rho additive ({p},{e},{f})",
            )
            result.check(
                np.array_equal(rhos[local_residue_mul(a, b)], rhos[a] @ rhos[b]),
                f"rho multiplicative ({p},{e},{f})",
            )
        for level in range(e):
            for c in ctx.field.elements():
                if not c.is_zero():
                    result.check(rho_block_check(ctx, c, level)["ok"], f"blocks ({p},{e},{f}) level {level}")
            for j in range(e - level):
                for g in product(range(p), repeat=f):
                    if any(g):
                        result.check(
                            rho_bijection_check(ctx, level, j, g),
                            f"bijection ({p},{e},{f}) i={level} j={j} g={g}",
                        )
    return result


def _residue_multiplier(ctx: ActionContext) -> Callable:
    """Product in F_q[varpi]/(varpi^e) on level tuples."""

    def multiply(a, b):
        out = [ctx.field.zero] * ctx.e
        for i, x in enumerate(a):
            for j, y in enumerate(b):
                if i + j < ctx.e:
                    out[i + j] = out[i + j] + x * y
        return tuple(out)

    return multiply


# (p, e, f, N, M) with p^M >= N, both N = 8 and N = 9 for every shape
EMBED_CONFIGS = [
    (p, e, f, N, next(M for M in range(1, 8) if p**M >= N))
    for (p, e, f) in SHAPES
    for N in (8, 9)
]
EXHAUSTIVE_PAIRS = 2**8
EXHAUSTIVE_ADDITIVITY = 2**12


def random_corpus(ring: RingContext, count: int, rng, max_degree: Optional[int] = None) -> List[TruncatedSeries]:
    """Random series supported in degrees < max_degree (default N/2)."""
    limit = max_degree if max_degree is not None else (ring.N + 1) // 2
    cols = int(ring.count_below[limit])
    corpus = []
    for _ in range(count):
        coeffs = np.zeros(ring.size, dtype=np.int64)
        coeffs[:cols] = rng.integers(0, ring.p, size=cols)
        corpus.append(ring.series(coeffs))
    return corpus


def suite_embed_gamma(rng) -> SuiteResult:
    result = SuiteResult()
    for p, e, f, N, M in EMBED_CONFIGS:
        ctx = action_context(p, e, f, N, M)
        local = ctx.local
        label = f"embed additive ({p},{e},{f}) N={N}"
        size = local.modulus**ctx.n
        if size <= EXHAUSTIVE_ADDITIVITY:
            elements = local.elements()
            images = {x: embed(ctx, x) for x in elements}
            result.check(images[local.zero] == ctx.ring.one, label)
            # f(x + b) = f(x) f(b) over additive generators b gives every pair
            partners = elements if size <= EXHAUSTIVE_PAIRS else local.basis_elements
            for x, y in product(elements, partners):
                result.check(images[x] * images[y] == images[x + y], label)
        for _ in range(500):
            x, y = local.random(rng), local.random(rng)
            result.check(embed(ctx, x) * embed(ctx, y) == embed(ctx, x + y), label)

        xs = {
            "0": local.zero,
            "1": local.one,
            "varpi": local.uniformizer,
            "[lambda]": local.teichmuller(1 if f > 1 else 0),
        }
        corpus = random_corpus(ctx.ring, 50, rng, max_degree=-(-N // 2))
        for r in range(1, N):
            if 2 * p**r > N:
                break
            for name, x in xs.items():
                gamma = gamma_make(ctx, r, x)
                for F in corpus:
                    result.check(
                        taylor_gap_check(gamma, F).ok,
                        f"Taylor ({p},{e},{f}) r={r} x={name} F={F.format()}",
                    )
        r = 1
        for _ in range(3):
            x, y = local.random(rng), local.random(rng)
            pr = local.from_int(p**r)
            xy = x + y + pr * x * y
            composite = gamma_make(ctx, r, x).compose(gamma_make(ctx, r, y))
            result.check(composite == gamma_make(ctx, r, xy).images, f"gamma composition ({p},{e},{f})")
    return result


def suite_control(rng) -> SuiteResult:
    result = SuiteResult()
    for (p, e, f) in ((2, 2, 1), (3, 2, 1), (2, 2, 2)):
        ctx = action_context(p, e, f, 4, 2)
        ring = ctx.ring
        result.check(
            control_check(ctx, IdealHandle(ring, [ring.var((1, 0))]))["controlled"],
            f"(X1_0) controlled ({p},{e},{f})",
        )
        result.check(
            not control_check(ctx, IdealHandle(ring, [ring.var((0, 0))]))["controlled"],
            f"(X0_0) not controlled ({p},{e},{f})",
        )
        for F in random_corpus(ring, 5, rng, max_degree=2):
            powered = F**p
            result.check(
                control_check(ctx, IdealHandle(ring, [powered]))["controlled"],
                f"p-th power {powered.format()} controlled ({p},{e},{f})",
            )
    return result


def random_principal_generator(ring: RingContext, rng) -> TruncatedSeries:
    cols = int(ring.count_below[3])
    while True:
        coeffs = np.zeros(ring.size, dtype=np.int64)
        coeffs[1:cols] = rng.integers(0, ring.p, size=cols - 1)
        if coeffs.any():
            return ring.series(coeffs)


def suite_closure(rng) -> SuiteResult:
    """Closure under gamma(r=1, x=varpi^i [lambda^k]).

    Open counts and the single-variable verdicts are pinned per configuration;
    they are evidence at precision N, not proofs.
    """
    result = SuiteResult()
    configs = {}
    for (p, e, f, N, M) in CLOSURE_CONFIGS:
        ctx = action_context(p, e, f, N, M)
        ring = ctx.ring
        gammas = default_gammas(ctx)
        starts = [ring.var(ring.var_of(v)) for v in range(ring.n)]
        starts += [random_principal_generator(ring, rng) for _ in range(20)]
        open_count, not_open, variables = 0, [], {}
        for index, F in enumerate(starts):
            report = gamma_closure(IdealHandle(ring, [F]), gammas)
            result.check(report.stable, f"closure of ({F.format()}) stabilises")
            result.check(report.ideal.contains(F), f"closure of ({F.format()}) contains F")
            if index < ring.n:
                variables[F.format()] = report.open_at
            if report.open_at is None:
                not_open.append(F.format())
            else:
                open_count += 1
        key = (p, e, f, N, M)
        for name, open_at in CLOSURE_OF_VARIABLES.get(key, {}).items():
            result.check(
                variables[name] == open_at,
                f"closure of ({name}) at {key}: open_at={variables[name]}, expected {open_at}",
            )
        result.check(
            open_count == CLOSURE_OPEN_COUNTS[key],
            f"{key}: {open_count} open closures, expected {CLOSURE_OPEN_COUNTS[key]}",
        )
        zero = gamma_closure(IdealHandle(ring, []), gammas)
        result.check(zero.open_at is None and zero.rounds == 0, f"zero ideal ({p},{e},{f})")
        configs[f"p={p},e={e},f={f},N={N},M={M}"] = {
            "open": open_count,
            "total": len(starts),
            "not_open": not_open,
            "variables": variables,
        }
    result.details["closures"] = configs
    result.details["note"] = "evidence at finite precision, not a proof"
    return result


SUITES: Dict[str, Callable] = {
    "moore": suite_moore,
    "uf_certificates": suite_uf_certificates,
    "nu_delta": suite_nu_delta,
    "rho": suite_rho,
    "embed_gamma": suite_embed_gamma,
    "control": suite_control,
    "closure": suite_closure,
}


def run_selftest(suites: Optional[Sequence[str]] = None, with_timing: bool = False) -> dict:
    """Runs the named suites (all by default) and returns the JSON report."""
    names = list(suites) if suites is not None else list(SUITES)
    unknown = set(names) - set(SUITES)
    if unknown:
        raise ValueError(f"Unknown suites {sorted(unknown)}, expected a subset of {list(SUITES)}")
    report = {"suites": {}}
    for name in names:
        start = datetime.now()
        # seed follows the position in SUITES, not in names
        seed = 12345 + list(SUITES).index(name)
        outcome = SUITES[name](new_rand_gen(seed)).to_dict()
        if with_timing:
            outcome["wall_time"] = time_difference(start, datetime.now())
        logger.info(f"suite {name}: {'passed' if outcome['passed'] else 'FAILED'} ({outcome['checks']} checks)")
        report["suites"][name] = outcome
    report["passed"] = all(s["passed"] for s in report["suites"].values())
    return report
