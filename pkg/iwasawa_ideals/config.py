"""Module to store configuration parameters for iwasawa_ideals."""
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional, Union

from iwasawa_ideals.code_algebra.gf import FieldSpec
from iwasawa_ideals.code_algebra.moore import DEFAULT_MAX_DEGREE
from iwasawa_ideals.code_algebra.padic import LocalFieldSpec, LocalRing
from iwasawa_ideals.utils import LOGGER

logger = LOGGER

REQUIRED_FIELDS = ("p", "f", "phi", "e", "eisenstein", "M", "N")


################
#    Fields    #
################


@dataclass
class FieldConfig:
    """Residue field F_q = F_p[t]/(phi).

    Args:
        p (int): characteristic
        f (int): residue degree
        phi (List[int]): f+1 coefficients of phi, constant term first
    """

    p: int = 2
    f: int = 1
    phi: List[int] = field(default_factory=lambda: [0, 1])

    def spec(self) -> FieldSpec:
        return FieldSpec(self.p, self.f, tuple(self.phi))


@dataclass
class LocalFieldConfig:
    """O_F / p^M.

    Args:
        residue_field (FieldConfig): residue field
        e (int): ramification index
        eisenstein (List): e+1 coefficients of E(pi), each an int or a list of f ints
        M (int): p-adic precision
    """

    residue_field: FieldConfig = field(default_factory=FieldConfig)
    e: int = 1
    eisenstein: List[Union[int, List[int]]] = field(default_factory=lambda: [-2, 1])
    M: int = 2

    def spec(self) -> LocalFieldSpec:
        eis = tuple(
            tuple(c) if isinstance(c, list) else c for c in self.eisenstein
        )
        return LocalFieldSpec(self.residue_field.spec(), self.e, eis, self.M)


@dataclass
class GammaConfig:
    """gamma = diag(1 + p^r x, 1).

    Args:
        r (int): p-adic level, >= 1
        x (List[List[int]]): digits of x, e rows of f integers
    """

    r: int = 1
    x: List[List[int]] = field(default_factory=lambda: [[1]])


@dataclass
class CapsConfig:
    """Computation caps.

    Args:
        max_exact_degree (int): largest degree of an exact polynomial in moore
        closure_max_rounds (int): default round limit of the Gamma closure
        delta_bound (int): default K of delta estimates
    """

    max_exact_degree: int = DEFAULT_MAX_DEGREE
    closure_max_rounds: int = 16
    delta_bound: int = 8


@dataclass
class RunConfig:
    """Everything a command needs.

    Args:
        local_field (LocalFieldConfig): O_F / p^M
        N (int): truncation order of A_N
        gammas (Optional[List[GammaConfig]]): gamma set, None for the default set
        caps (CapsConfig): computation caps
    """

    local_field: LocalFieldConfig = field(default_factory=LocalFieldConfig)
    N: int = 4
    gammas: Optional[List[GammaConfig]] = None
    caps: CapsConfig = field(default_factory=CapsConfig)

    @property
    def p(self) -> int:
        return self.local_field.residue_field.p

    def to_dict(self) -> dict:
        """Canonical echo, in the layout of the JSON configuration file."""
        lf = self.local_field
        report = {
            "p": lf.residue_field.p,
            "f": lf.residue_field.f,
            "phi": list(lf.residue_field.phi),
            "e": lf.e,
            "eisenstein": list(lf.eisenstein),
            "M": lf.M,
            "N": self.N,
            "caps": asdict(self.caps),
        }
        if self.gammas is not None:
            report["gammas"] = [asdict(g) for g in self.gammas]
        return report


def _fail(message: str):
    logger.error(message)
    raise ValueError(message)


def _integer(data: dict, key: str) -> int:
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(f"config field '{key}' must be an integer, got {value!r}")
    return value


def config_from_dict(data: dict) -> RunConfig:
    """Validates a configuration dictionary; see ``config_load``."""
    if not isinstance(data, dict):
        _fail("configuration must be a JSON object")
    for key in REQUIRED_FIELDS:
        if key not in data:
            _fail(f"missing required config field '{key}'")
    p, f, e, M, N = (_integer(data, k) for k in ("p", "f", "e", "M", "N"))
    if not isinstance(data["phi"], list):
        _fail(f"config field 'phi' must be a list of integers, got {data['phi']!r}")
    if not isinstance(data["eisenstein"], list):
        _fail(
            f"config field 'eisenstein' must be a list, got {data['eisenstein']!r}"
        )
    if e < 1:
        _fail(f"config field 'e' must be >= 1, got {e}")
    if M < 1:
        _fail(f"config field 'M' must be >= 1, got {M}")
    if N < 2:
        _fail(f"config field 'N' must be >= 2, got {N}")

    local_field = LocalFieldConfig(
        residue_field=FieldConfig(p, f, list(data["phi"])),
        e=e,
        eisenstein=list(data["eisenstein"]),
        M=M,
    )
    try:
        LocalRing(local_field.spec())
    except (ValueError, ArithmeticError) as err:
        _fail(f"invalid field data (p, f, phi, e, eisenstein, M): {err}")

    gammas = None
    if data.get("gammas") is not None:
        gammas = []
        for idx, entry in enumerate(data["gammas"]):
            if not isinstance(entry, dict) or "r" not in entry or "x" not in entry:
                _fail(f"config field 'gammas[{idx}]' must have keys 'r' and 'x'")
            x = entry["x"]
            if (
                not isinstance(x, list)
                or len(x) != e
                or any(not isinstance(row, list) or len(row) != f for row in x)
            ):
                _fail(
                    f"config field 'gammas[{idx}].x' must be {e} lists of {f} integers"
                )
            if not isinstance(entry["r"], int) or entry["r"] < 1:
                _fail(f"config field 'gammas[{idx}].r' must be an integer >= 1")
            gammas.append(GammaConfig(entry["r"], [list(row) for row in x]))

    caps = CapsConfig()
    for key, value in (data.get("caps") or {}).items():
        if not hasattr(caps, key):
            _fail(f"unknown config field 'caps.{key}'")
        if not isinstance(value, int) or value < 1:
            _fail(f"config field 'caps.{key}' must be a positive integer")
        setattr(caps, key, value)

    return RunConfig(local_field, N, gammas, caps)


def config_load(path: Union[str, Path]) -> RunConfig:
    """Reads and validates a JSON configuration.

    Keys: p, f, phi, e, eisenstein, M, N, optional gammas and caps.

    Raises:
        ValueError: unreadable file, invalid JSON or a field violating an
            invariant; the message names the field.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as err:
        _fail(f"cannot read configuration {path}: {err}")
    except json.JSONDecodeError as err:
        _fail(f"configuration {path} is not valid JSON: {err}")
    config = config_from_dict(data)
    logger.debug(f"Loaded configuration {config.to_dict()}")
    return config
