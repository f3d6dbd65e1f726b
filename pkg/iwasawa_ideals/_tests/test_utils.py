from datetime import datetime, timedelta

import numpy as np
import pytest

from iwasawa_ideals.utils import (
    base_p_digits,
    dump_json,
    grlex_key,
    monomials_below,
    monomials_of_degree,
    new_rand_gen,
    parse_digit_vector,
    time_difference,
)


def test_base_p_digits():
    assert list(base_p_digits(10, 3)) == [(0, 1), (2, 1)]
    assert list(base_p_digits(0, 2)) == []
    with pytest.raises(ValueError):
        list(base_p_digits(-1, 2))


def test_monomials_order():
    assert monomials_of_degree(3, 1) == [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    monomials = monomials_below(3, 4)
    assert len(monomials) == 20
    assert monomials == sorted(monomials, key=grlex_key)


def test_parse_digit_vector():
    assert parse_digit_vector("1,0;2,3") == [[1, 0], [2, 3]]
    assert parse_digit_vector(" 5 ") == [[5]]
    with pytest.raises(ValueError):
        parse_digit_vector("1,a")
    with pytest.raises(ValueError):
        parse_digit_vector("1,0;2")


def test_dump_json_is_canonical():
    report = {"b": np.int64(2), "a": (1, np.array([3, 4])), "c": np.bool_(True)}
    assert dump_json(report) == '{\n  "a": [\n    1,\n    [\n      3,\n      4\n    ]\n  ],\n  "b": 2,\n  "c": true\n}\n'


def test_new_rand_gen_is_reproducible():
    assert new_rand_gen(3).integers(0, 100, 5).tolist() == new_rand_gen(3).integers(0, 100, 5).tolist()


def test_time_difference():
    start = datetime(2024, 1, 1)
    assert time_difference(start, start + timedelta(hours=1, seconds=2.5)) == "01:00:02.500"
    assert time_difference(start, start + timedelta(seconds=3), as_string=False) == 3.0
