import json

import pytest

from iwasawa_ideals.code_algebra.dynamics import ActionContext
from iwasawa_ideals.code_algebra.gf import FieldContext, FieldSpec
from iwasawa_ideals.code_algebra.padic import LocalFieldSpec, LocalRing
from iwasawa_ideals.code_algebra.series import RingContext

PI2_CONFIG = {
    "p": 2,
    "f": 1,
    "phi": [0, 1],
    "e": 2,
    "eisenstein": [-2, 0, 1],
    "M": 2,
    "N": 4,
}


@pytest.fixture
def f4():
    return FieldContext(FieldSpec(2, 2, (1, 1, 1)))


@pytest.fixture
def pi2_ring():
    """(Z/4)[pi]/(pi^2 - 2)."""
    return LocalRing(LocalFieldSpec(FieldSpec(2, 1, (0, 1)), 2, (-2, 0, 1), 2))


@pytest.fixture
def z4_ring():
    return LocalRing(LocalFieldSpec(FieldSpec(2, 1, (0, 1)), 1, (-2, 1), 2))


@pytest.fixture
def two_vars():
    """F_2[[X_1, X_2]] / m^8 with X_1 = X0_0, X_2 = X1_0."""
    return RingContext(2, 8, e=2, f=1)


@pytest.fixture
def pi2_action(pi2_ring):
    return ActionContext(pi2_ring, 4)


@pytest.fixture
def z2_action_n8():
    """e = f = 1, p = 2, N = 8, M = 3."""
    local = LocalRing(LocalFieldSpec(FieldSpec(2, 1, (0, 1)), 1, (-2, 1), 3))
    return ActionContext(local, 8)


@pytest.fixture
def config_file(tmp_path):
    def write(**overrides):
        data = dict(PI2_CONFIG)
        data.update(overrides)
        path = tmp_path / "config.json"
        path.write_text(json.dumps(data))
        return str(path)

    return write


@pytest.fixture
def pi2_config():
    return dict(PI2_CONFIG)
