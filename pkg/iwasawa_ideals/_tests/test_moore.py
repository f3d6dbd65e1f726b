import pytest

from iwasawa_ideals.code_algebra.moore import (
    ExactRing,
    comatrix_cramer_check,
    exact_ring,
    is_homogeneous,
    lemma_estimation_check,
    min_degree,
    moore_det,
    moore_det_report,
    moore_factorization_check,
    projective_points,
    projective_product,
    prop_uf_certificate,
    total_degree,
    u_g,
)
from iwasawa_ideals.code_algebra.series import PrecisionError
from iwasawa_ideals.selftest import random_independent_tuples
from iwasawa_ideals.utils import new_rand_gen

IDENTITY_2 = [[1, 0], [0, 1]]


@pytest.fixture
def er2():
    return exact_ring(2, 2)


def test_moore_det_binary_plane(er2):
    det = moore_det(er2, IDENTITY_2)
    assert det == er2.parse("w1*w2^2 + w1^2*w2")
    assert total_degree(det) == 3
    assert is_homogeneous(det)


def test_moore_det_single_form():
    er = exact_ring(3, 1)
    assert moore_det(er, [[1]]) == er.parse("w1")


def test_moore_det_rejects_dependent_forms(er2):
    with pytest.raises(ValueError, match="dependent"):
        moore_det(er2, [[1, 0], [1, 0]])
    with pytest.raises(ValueError):
        comatrix_cramer_check(er2, [[1, 1], [1, 1]])


def test_comatrix(er2):
    com, ok = comatrix_cramer_check(er2, IDENTITY_2)
    assert ok
    expected = [["w2^2", "w2"], ["w1^2", "w1"]]
    assert [[er2.format(c) for c in row] for row in com] == expected


def test_comatrix_single_form():
    er = exact_ring(2, 1)
    com, ok = comatrix_cramer_check(er, [[1]])
    assert com == [[er.one]]
    assert ok


def test_projective_points():
    assert projective_points(2, 2) == [(0, 1), (1, 0), (1, 1)]
    assert len(projective_points(3, 3)) == 13


def test_projective_product(er2):
    assert projective_product(er2, projective_points(2, 2)) == er2.parse("w1*w2*(w1 + w2)")
    assert projective_product(er2, [[1, 1], [1, 1]]) == er2.parse("w1 + w2")
    with pytest.raises(ValueError):
        projective_product(er2, [[0, 0]])


def test_u_g(er2):
    ug = u_g(er2, [1, 0])
    assert ug == er2.parse("w1*(w1 + w2)")
    assert total_degree(ug) == 2
    er = exact_ring(3, 1)
    assert u_g(er, [1]) == er.parse("w1")


@pytest.mark.parametrize("p, m", [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (3, 3)])
def test_moore_factorization(p, m):
    er = ExactRing(p, m)
    for rows in random_independent_tuples(p, m, 5, new_rand_gen(p * 10 + m)):
        scalar, ok = moore_factorization_check(er, rows)
        assert ok
        assert scalar in range(1, p)
        det = moore_det(er, rows)
        assert is_homogeneous(det)
        assert total_degree(det) == (p**m - 1) // (p - 1)


def test_moore_factorization_scalar_mod_three():
    er = exact_ring(3, 2)
    assert moore_factorization_check(er, IDENTITY_2) == (2, True)


def test_lemma_estimation(er2):
    quotient, ok = lemma_estimation_check(er2, IDENTITY_2, 1, 1)
    assert quotient == er2.parse("w2")
    assert ok
    quotient, ok = lemma_estimation_check(er2, IDENTITY_2, 2, 1)
    assert quotient == er2.one
    assert ok


def test_lemma_estimation_mod_three():
    er = exact_ring(3, 2)
    for rows in random_independent_tuples(3, 2, 5, new_rand_gen(5)):
        quotient, ok = lemma_estimation_check(er, rows, 1, 1)
        assert ok
        assert min_degree(quotient) >= 2


def test_lemma_estimation_needs_two_forms():
    with pytest.raises(ValueError):
        lemma_estimation_check(exact_ring(2, 1), [[1]], 1, 1)


def _identity_holds(er, certificate, g, varphi, s):
    for image in varphi:
        value = sum(a * b for a, b in zip(g, image)) % er.p
        lhs = er.frobenius(certificate.u_g, s) * value
        rhs = sum(
            (
                c * er.frobenius(er.form(image), s + i)
                for i, c in enumerate(certificate.coefficients)
            ),
            er.zero,
        )
        if lhs != rhs:
            return False
    return True


@pytest.mark.parametrize("s, bounds", [(0, [1, 0]), (1, [2, 0])])
def test_uf_certificate_binary_plane(er2, s, bounds):
    certificate = prop_uf_certificate(er2, [1, 0], IDENTITY_2, s)
    assert certificate.ok
    assert certificate.bounds == bounds
    assert certificate.u_g == er2.parse("w1*(w1 + w2)")
    assert min_degree(certificate.coefficients[0]) >= bounds[0]
    assert _identity_holds(er2, certificate, [1, 0], IDENTITY_2, s)


def test_uf_certificate_one_dimensional():
    er = exact_ring(3, 1)
    certificate = prop_uf_certificate(er, [1], [[2]], 1)
    assert certificate.ok
    assert certificate.m == 1
    assert _identity_holds(er, certificate, [1], [[2]], 1)


def test_uf_certificate_non_injective_map():
    er = exact_ring(3, 2)
    varphi = [[1, 0], [0, 1], [2, 1]]
    for g in projective_points(3, 2):
        certificate = prop_uf_certificate(er, list(g), varphi, 0)
        assert certificate.ok
        assert _identity_holds(er, certificate, list(g), varphi, 0)


def test_uf_certificate_errors(er2):
    with pytest.raises(ValueError, match="vanishes"):
        prop_uf_certificate(er2, [0, 1], [[1, 0]], 0)
    with pytest.raises(ValueError):
        prop_uf_certificate(er2, [1, 0], [[0, 0]], 0)
    with pytest.raises(PrecisionError):
        prop_uf_certificate(ExactRing(2, 2, max_degree=4), [1, 0], IDENTITY_2, 2)


def test_moore_det_report(er2):
    report = moore_det_report(er2, IDENTITY_2)
    assert report["ok"]
    assert report["degree"] == report["expected_degree"] == 3
    assert len(report["estimation"]) == 4


def test_exact_ring_rejects_non_prime():
    with pytest.raises(ValueError):
        ExactRing(6, 2)
