import numpy as np
import pytest

from iwasawa_ideals.code_algebra.dynamics import (
    ActionContext,
    build_P,
    control_check,
    cor_delta_experiment,
    default_gammas,
    dual_preimages,
    embed,
    gamma_act,
    gamma_closure,
    gamma_make,
    rho_bijection_check,
    rho_block_check,
    rho_matrix,
    rho_of,
    select_i0,
    taylor_gap_check,
    u_g_series,
    ug_family_open,
)
from iwasawa_ideals.code_algebra.gf import FieldSpec
from iwasawa_ideals.code_algebra.ideals import IdealHandle
from iwasawa_ideals.code_algebra.padic import LocalFieldSpec, LocalRing
from iwasawa_ideals.code_algebra.series import PrecisionError
from iwasawa_ideals.selftest import action_context, random_corpus
from iwasawa_ideals.utils import new_rand_gen


@pytest.fixture
def z4_action(z4_ring):
    return ActionContext(z4_ring, 4)


@pytest.fixture
def f4_action():
    """p = 2, e = 1, f = 2, N = 4, M = 2."""
    local = LocalRing(LocalFieldSpec(FieldSpec(2, 2, (1, 1, 1)), 1, (-2, 1), 2))
    return ActionContext(local, 4)


def ideal(ctx, *gens):
    return IdealHandle(ctx.ring, [ctx.ring.parse(g) for g in gens])


def test_precision_guard(z4_ring):
    with pytest.raises(PrecisionError):
        ActionContext(z4_ring, 5)


def test_embed(z4_action, pi2_action):
    ring = z4_action.ring
    assert embed(z4_action, z4_action.local.from_int(3)) == ring.parse(
        "1 + X0_0 + X0_0^2 + X0_0^3"
    )
    assert embed(z4_action, z4_action.local.zero) == ring.one
    local = pi2_action.local
    x = local.one + local.from_int(2) * local.uniformizer
    assert embed(pi2_action, x) == pi2_action.ring.parse("(1 + X0_0)*(1 + X1_0^2)")


def test_embed_is_additive(pi2_action):
    elements = pi2_action.local.elements()
    images = {x: embed(pi2_action, x) for x in elements}
    for x in elements:
        for y in elements:
            assert images[x] * images[y] == images[x + y]


def test_rho_of_one_is_identity(pi2_action):
    one = pi2_action.residue(pi2_action.local.one)
    assert np.array_equal(np.asarray(rho_of(pi2_action, one)), np.eye(2))


def test_rho_on_f4(f4_action):
    lam = f4_action.field.basis(1)
    assert np.array_equal(np.asarray(rho_matrix(f4_action, lam, 0)), [[0, 1], [1, 1]])


def test_rho_uniformizer_shifts_levels(pi2_action):
    varpi = pi2_action.residue(pi2_action.local.uniformizer)
    matrix = np.asarray(rho_of(pi2_action, varpi))
    # X_{0,0} -> X_{1,0}, X_{1,0} -> 0
    assert np.array_equal(matrix, [[0, 0], [1, 0]])


def test_rho_is_ring_homomorphism(f4_action):
    local = f4_action.local
    rng = new_rand_gen(11)
    for _ in range(20):
        x, y = local.random(rng), local.random(rng)
        rho = lambda z: rho_of(f4_action, f4_action.residue(z))  # noqa: E731
        assert np.array_equal(rho(x * y), rho(x) @ rho(y))
        assert np.array_equal(rho(x + y), rho(x) + rho(y))


@pytest.mark.parametrize("shape", [(2, 1, 2), (2, 2, 1), (3, 2, 1), (2, 2, 2)])
def test_rho_block_structure(shape):
    ctx = action_context(*shape, 2, 2)
    for level in range(ctx.e):
        for c in ctx.field.elements():
            if not c.is_zero():
                assert rho_block_check(ctx, c, level)["ok"]
        for j in range(ctx.e - level):
            assert rho_bijection_check(ctx, level, j, [1] + [0] * (ctx.f - 1))
    with pytest.raises(ValueError):
        rho_block_check(ctx, ctx.field.zero, 0)


def test_dual_preimages(f4_action):
    g = [1, 1]
    for k, c in enumerate(dual_preimages(f4_action, g, 0)):
        block = np.asarray(f4_action.field.regular_rep_matrix(c))
        target = [1 if kk == k else 0 for kk in range(2)]
        assert ((np.array(g) @ block) % 2).tolist() == target


def test_gamma_identity(z4_action):
    gamma = gamma_make(z4_action, 1, z4_action.local.zero)
    assert gamma.is_identity()
    F = z4_action.ring.parse("X0_0^2 + X0_0")
    assert gamma_act(gamma, F) == F


def test_gamma_act(z4_action):
    gamma = gamma_make(z4_action, 1, z4_action.local.one)
    ring = z4_action.ring
    assert gamma.images == [ring.parse("X0_0 + X0_0^2 + X0_0^3")]
    assert gamma_act(gamma, ring.parse("X0_0^2")) == ring.parse("X0_0^2")
    assert gamma_act(gamma, ring.constant(1)) == ring.one
    with pytest.raises(ValueError):
        gamma_make(z4_action, 0, z4_action.local.one)


def test_gamma_on_ramified_field(pi2_action):
    gamma = gamma_make(pi2_action, 1, pi2_action.local.uniformizer)
    local = pi2_action.local
    expected = embed(pi2_action, local.one + local.from_int(2) * local.uniformizer) - 1
    assert gamma.images[0] == expected


def test_gamma_composition(pi2_action):
    local = pi2_action.local
    rng = new_rand_gen(5)
    for _ in range(3):
        x, y = local.random(rng), local.random(rng)
        xy = x + y + local.from_int(2) * x * y
        composite = gamma_make(pi2_action, 1, x).compose(gamma_make(pi2_action, 1, y))
        assert composite == gamma_make(pi2_action, 1, xy).images


def test_taylor_examples(z2_action_n8):
    ring = z2_action_n8.ring
    gamma = gamma_make(z2_action_n8, 1, z2_action_n8.local.one)
    check = taylor_gap_check(gamma, ring.parse("X0_0"))
    assert check.ok and check.residual.is_zero()
    check = taylor_gap_check(gamma, ring.parse("X0_0^2"))
    assert check.residual == ring.parse("X0_0^4 + X0_0^6")
    assert check.ok and not check.vacuous


def test_taylor_random_corpus():
    ctx = action_context(2, 2, 1, 8, 3)
    gamma = gamma_make(ctx, 1, ctx.local.uniformizer)
    for F in random_corpus(ctx.ring, 10, new_rand_gen(1), max_degree=4):
        assert taylor_gap_check(gamma, F).ok


def test_taylor_vacuous(z4_action):
    gamma = gamma_make(z4_action, 2, z4_action.local.one)
    check = taylor_gap_check(gamma, z4_action.ring.parse("X0_0"))
    assert check.vacuous and check.ok


def test_build_P(pi2_action):
    c = pi2_action.field.one
    assert build_P(pi2_action, pi2_action.ring.one, [1], 0, c).is_zero()
    F = pi2_action.ring.parse("X0_0 + X1_0")
    assert build_P(pi2_action, F, [1], 0, pi2_action.field.zero).is_zero()
    assert build_P(pi2_action, F, [1], 0, c) == pi2_action.ring.parse("1 + X0_0")
    with pytest.raises(ValueError):
        build_P(pi2_action, F, [0], 0, c)


def test_u_g_series(f4_action):
    assert u_g_series(f4_action, [1, 0], 0) == f4_action.ring.parse("X0_0*(X0_0 + X0_1)")


def test_cor_delta_convention(pi2_action):
    I = ideal(pi2_action, "X0_0^2")
    report = cor_delta_experiment(
        pi2_action, I, pi2_action.ring.parse("X0_0^2"), [1], 0, pi2_action.field.one, 0
    )
    assert report.certified and report.convention
    with pytest.raises(ValueError):
        cor_delta_experiment(
            pi2_action, I, pi2_action.ring.parse("X0_0"), [1], 0, pi2_action.field.one, 0
        )


def test_control_check(pi2_action):
    assert control_check(pi2_action, ideal(pi2_action, "X1_0"))["controlled"]
    assert not control_check(pi2_action, ideal(pi2_action, "X0_0"))["controlled"]
    assert control_check(pi2_action, ideal(pi2_action, "X0_0^2"))["controlled"]


def test_select_i0(pi2_action):
    selection = select_i0(pi2_action, ideal(pi2_action, "X1_0"), 3)
    assert selection["i0"] == 0
    assert selection["witnesses"] == {"X0_0": None, "X1_0": 1}
    assert select_i0(pi2_action, ideal(pi2_action, "X0_0", "X1_0"), 3)["i0"] is None


def test_ug_family_open(z4_action, f4_action):
    assert ug_family_open(z4_action) == 1
    assert ug_family_open(f4_action) == 2


def test_closure_of_first_variable(pi2_action):
    I0 = ideal(pi2_action, "X0_0")
    gammas = default_gammas(pi2_action)
    report = gamma_closure(I0, gammas)
    assert report.stable
    assert report.open_at == 2
    assert report.rounds <= 3
    assert report.ideal.contains(pi2_action.ring.parse("X0_0"))
    for gamma in gammas:
        for F in report.ideal.generators:
            assert report.ideal.contains(gamma.act(F))
    assert "wall_time" not in report.to_dict()
    assert "wall_time" in report.to_dict(with_timing=True)


def test_closure_of_second_level_variable_is_not_open(pi2_action):
    report = gamma_closure(ideal(pi2_action, "X1_0"), default_gammas(pi2_action))
    assert report.stable
    assert report.open_at is None


@pytest.mark.parametrize("name", ["X0_0", "X0_1", "X1_0", "X1_1"])
def test_closure_over_f4_with_e2_is_not_open_at_N4(name):
    ctx = action_context(2, 2, 2, 4, 2)
    report = gamma_closure(ideal(ctx, name), default_gammas(ctx))
    assert report.stable
    assert report.open_at is None


def test_closure_of_zero_ideal(pi2_action):
    report = gamma_closure(IdealHandle(pi2_action.ring), default_gammas(pi2_action))
    assert report.open_at is None
    assert report.rounds == 0
    assert report.stable


def test_closure_round_limit(pi2_action):
    report = gamma_closure(ideal(pi2_action, "X0_0"), default_gammas(pi2_action), max_rounds=0)
    assert not report.stable
    assert report.rounds == 0
