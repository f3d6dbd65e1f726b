"""Command-line entry point: ``iwasawa-ideals <command> [--config PATH] [flags]``.

Every command prints a single JSON document on stdout. Logs go to stderr.

Exit codes: 0 success, 1 a verified-false property, 2 usage, configuration or
precision errors.
"""
import argparse
import sys
from datetime import datetime
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from iwasawa_ideals.code_algebra.dynamics import (
    ActionContext,
    control_check,
    cor_delta_experiment,
    default_gammas,
    embed,
    gamma_closure,
    gamma_make,
    taylor_gap_check,
)
from iwasawa_ideals.code_algebra.ideals import (
    IdealHandle,
    delta_estimate,
    growth_certificate,
)
from iwasawa_ideals.code_algebra.moore import (
    ExactRing,
    VerificationError,
    moore_det_report,
    prop_uf_certificate,
)
from iwasawa_ideals.code_algebra.padic import LocalRing
from iwasawa_ideals.code_algebra.series import (
    PrecisionError,
    RingContext,
    parse_many,
)
from iwasawa_ideals.config import RunConfig, config_load
from iwasawa_ideals.utils import LOGGER as logger
from iwasawa_ideals.utils import (
    attach_stream_handler,
    dump_json,
    parse_digit_vector,
    time_difference,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2


class Session:
    """Contexts built lazily from the configuration of one invocation."""

    def __init__(self, config: RunConfig):
        self.config = config
        self._local = None
        self._action = None
        self._ring = None

    @property
    def local(self) -> LocalRing:
        if self._local is None:
            self._local = LocalRing(self.config.local_field.spec())
        return self._local

    @property
    def action(self) -> ActionContext:
        if self._action is None:
            self._action = ActionContext(self.local, self.config.N)
            self._ring = self._action.ring
        return self._action

    @property
    def ring(self) -> RingContext:
        if self._ring is None:
            lf = self.config.local_field
            self._ring = RingContext(
                lf.residue_field.p, self.config.N, lf.e, lf.residue_field.f
            )
        return self._ring

    def ideal(self, text: Optional[str], ring: Optional[RingContext] = None) -> IdealHandle:
        ring = ring or self.ring
        return IdealHandle(ring, parse_many(ring, text or ""))

    def element(self, digits: str):
        return self.local.digits_compose(_digit_array(digits, self.local.e, self.local.f))


def _digit_array(text: str, rows: int, cols: int) -> np.ndarray:
    digits = np.array(parse_digit_vector(text), dtype=np.int64)
    if digits.shape != (rows, cols):
        raise ValueError(
            f"Digit vector '{text}' has shape {digits.shape}, expected {rows} rows of {cols}"
        )
    return digits


def _vectors(text: str) -> List[List[int]]:
    return parse_digit_vector(text)


def _require(args, *names):
    for name in names:
        if getattr(args, name.replace("-", "_")) is None:
            raise ValueError(f"--{name} is required for '{args.command}'")


##############
# Commands
def cmd_embed(session: Session, args) -> tuple:
    _require(args, "elem")
    ctx = session.action
    x = session.element(args.elem)
    return EXIT_OK, {
        "digits": ctx.local.digits_decompose(x),
        "embed": embed(ctx, x).format(),
    }


def cmd_gamma_act(session: Session, args) -> tuple:
    _require(args, "x", "elem")
    ctx = session.action
    gamma = gamma_make(ctx, args.r, session.element(args.x))
    F = ctx.ring.parse(args.elem)
    return EXIT_OK, {"gamma": gamma.to_dict(), "F": F.format(), "result": gamma.act(F).format()}


def cmd_nu(session: Session, args) -> tuple:
    _require(args, "elem")
    I = session.ideal(args.ideal)
    x = session.ring.parse(args.elem)
    report = {
        "ideal": I.to_dict(),
        "elem": x.format(),
        "deg": x.order_label(),
        "nu": I.nu(x).to_dict(),
    }
    if args.degree is not None:
        report["contains"] = {"degree": args.degree, "member": I.contains(x, args.degree)}
    return EXIT_OK, report


def cmd_delta(session: Session, args) -> tuple:
    _require(args, "elem")
    I = session.ideal(args.ideal)
    x = session.ring.parse(args.elem)
    P = session.ring.parse(args.P)
    K = args.K
    if K is None:
        K = session.config.caps.delta_bound
        dx, dP = x.order(), P.order()
        if dx and dP is not None:
            K = min(K, (session.ring.N - 1 - dP) // dx)
    report = {
        "ideal": I.to_dict(),
        "elem": x.format(),
        "P": P.format(),
        "K": K,
        "delta": delta_estimate(I, x, P, K).to_dict(),
    }
    order = x.order()
    if order and P.constant_term() and order * K < session.ring.N and not I.contains(x):
        certificate = growth_certificate(I, x, K)
        report["growth"] = None if certificate is None else certificate.to_dict()
    return EXIT_OK, report


def cmd_gr_member(session: Session, args) -> tuple:
    _require(args, "elem")
    I = session.ideal(args.ideal)
    h = session.ring.parse(args.elem)
    report = {"ideal": I.to_dict(), "elem": h.format(), "gr_member": I.gr_member(h)}
    if args.K is not None:
        member, witness = I.radical_member_bounded(h, args.K)
        report["radical"] = {"K": args.K, "member": member, "witness": witness}
    return EXIT_OK, report


def cmd_moore_check(session: Session, args) -> tuple:
    _require(args, "forms")
    forms = _vectors(args.forms)
    er = ExactRing(session.config.p, len(forms[0]), session.config.caps.max_exact_degree)
    report = moore_det_report(er, forms)
    return (EXIT_OK if report["ok"] else EXIT_CHECK_FAILED), report


def cmd_uf_certificate(session: Session, args) -> tuple:
    _require(args, "g", "phi-map")
    g = _vectors(args.g)[0]
    varphi = _vectors(args.phi_map)
    er = ExactRing(session.config.p, len(g), session.config.caps.max_exact_degree)
    certificate = prop_uf_certificate(er, g, varphi, args.s)
    return (EXIT_OK if certificate.ok else EXIT_CHECK_FAILED), certificate.to_dict()


def cmd_taylor_check(session: Session, args) -> tuple:
    _require(args, "x", "elem")
    ctx = session.action
    gamma = gamma_make(ctx, args.r, session.element(args.x))
    F = ctx.ring.parse(args.elem)
    check = taylor_gap_check(gamma, F)
    report = {"r": args.r, "F": F.format(), "taylor": check.to_dict()}
    return (EXIT_OK if check.ok else EXIT_CHECK_FAILED), report


def cmd_control_check(session: Session, args) -> tuple:
    ctx = session.action
    I = session.ideal(args.ideal, ctx.ring)
    return EXIT_OK, {"ideal": I.to_dict(), "control": control_check(ctx, I)}


def cmd_cor_delta(session: Session, args) -> tuple:
    _require(args, "elem", "g", "xbar")
    ctx = session.action
    I = session.ideal(args.ideal, ctx.ring)
    F = ctx.ring.parse(args.elem)
    g = _vectors(args.g)[0]
    c = ctx.field.elem(_vectors(args.xbar)[0])
    R = args.R if args.R is not None else 0
    report = cor_delta_experiment(
        ctx, I, F, g, args.i0, c, R, session.config.caps.delta_bound
    )
    return EXIT_OK, {"ideal": I.to_dict(), "i0": args.i0, "R": R, "cor_delta": report.to_dict()}


def resolve_gammas(session: Session, which: Optional[str]):
    ctx = session.action
    config_gammas = session.config.gammas
    if which == "config" or (which is None and config_gammas is not None):
        if config_gammas is None:
            raise ValueError("--gammas config requested but the configuration has no 'gammas'")
        return [
            gamma_make(ctx, g.r, ctx.local.digits_compose(np.array(g.x, dtype=np.int64)))
            for g in config_gammas
        ]
    if which in (None, "default"):
        return default_gammas(ctx)
    raise ValueError(f"--gammas must be 'default' or 'config', got '{which}'")


def cmd_closure(session: Session, args) -> tuple:
    ctx = session.action
    I0 = session.ideal(args.ideal, ctx.ring)
    gammas = resolve_gammas(session, args.gammas)
    rounds = args.max_rounds or session.config.caps.closure_max_rounds
    closure = gamma_closure(I0, gammas, rounds, progress=args.verbose)
    report = closure.to_dict(with_timing=args.with_timing)
    report["ideal"] = I0.to_dict()
    report["gamma_count"] = len(gammas)
    return EXIT_OK, report


def cmd_selftest(session: Optional[Session], args) -> tuple:
    from iwasawa_ideals.selftest import run_selftest

    report = run_selftest(with_timing=args.with_timing)
    return (EXIT_OK if report["passed"] else EXIT_CHECK_FAILED), report


COMMANDS: Dict[str, Callable] = {
    "embed": cmd_embed,
    "gamma-act": cmd_gamma_act,
    "nu": cmd_nu,
    "delta": cmd_delta,
    "gr-member": cmd_gr_member,
    "moore-check": cmd_moore_check,
    "uf-certificate": cmd_uf_certificate,
    "taylor-check": cmd_taylor_check,
    "control-check": cmd_control_check,
    "cor-delta": cmd_cor_delta,
    "closure": cmd_closure,
    "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iwasawa-ideals",
        description="Exact computations with ideals of truncated Iwasawa algebras.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="JSON configuration file")
    parser.add_argument("--verbose", action="store_true", help="DEBUG logging and progress bars")
    parser.add_argument("--elem", help="series literal, or digit vector 'a00,a01;a10,a11' for embed")
    parser.add_argument("--ideal", default="", help="semicolon-separated generator literals")
    parser.add_argument("--P", default="1", help="series literal P of delta(x, P)")
    parser.add_argument("--K", type=int, help="iteration / exponent bound")
    parser.add_argument("--degree", type=int, help="truncation degree for membership")
    parser.add_argument("--r", type=int, default=1, help="gamma level r >= 1")
    parser.add_argument("--x", help="digit vector of x in gamma = diag(1 + p^r x, 1)")
    parser.add_argument("--g", help="coefficients of a linear functional, e.g. '1,0'")
    parser.add_argument("--i0", type=int, default=0, help="level i0")
    parser.add_argument("--xbar", help="F_q coordinates of the residue at level i0")
    parser.add_argument("--R", type=int, help="largest r of the cor-delta table")
    parser.add_argument("--s", type=int, default=0, help="Frobenius shift s >= 0")
    parser.add_argument("--forms", help="linear forms as rows 'a,b;c,d'")
    parser.add_argument("--phi-map", dest="phi_map", help="images of a basis of V_1 as rows")
    parser.add_argument("--gammas", help="'default' or 'config'")
    parser.add_argument("--max-rounds", dest="max_rounds", type=int, help="closure round limit")
    parser.add_argument("--with-timing", dest="with_timing", action="store_true", help="add wall-times to reports")
    return parser


def run(argv: Optional[Sequence[str]] = None, stdout=None) -> int:
    """Parses ``argv``, runs the command and writes its JSON report; returns the exit code."""
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    attach_stream_handler(args.verbose)
    start = datetime.now()
    logger.info(f"Running '{args.command}'")
    try:
        session = None
        if args.command != "selftest":
            if args.config is None:
                raise ValueError(f"--config is required for '{args.command}'")
            session = Session(config_load(args.config))
        code, report = COMMANDS[args.command](session, args)
        if session is not None:
            report["config"] = session.config.to_dict()
    except VerificationError as err:
        logger.error(str(err))
        code, report = EXIT_CHECK_FAILED, {"error": str(err), "kind": "VerificationError"}
    except (ValueError, IndexError, ZeroDivisionError) as err:
        logger.error(str(err))
        kind = "PrecisionError" if isinstance(err, PrecisionError) else type(err).__name__
        code, report = EXIT_USAGE, {"error": str(err), "kind": kind}
    except ArithmeticError as err:
        logger.error(str(err))
        code, report = EXIT_CHECK_FAILED, {"error": str(err), "kind": type(err).__name__}
    if args.with_timing:
        report["wall_time"] = time_difference(start, datetime.now())
    stdout.write(dump_json(report))
    logger.info(f"'{args.command}' finished with exit code {code}")
    return code


def main() -> int:
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
