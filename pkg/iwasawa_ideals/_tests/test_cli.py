import json
from io import StringIO

import pytest

from iwasawa_ideals.main import run


def invoke(*argv):
    out = StringIO()
    code = run(list(argv), stdout=out)
    return code, json.loads(out.getvalue()), out.getvalue()


def test_nu(config_file):
    code, report, _ = invoke("nu", "--config", config_file(), "--ideal", "X1_0", "--elem", "X0_0")
    assert code == 0
    assert report["nu"] == {"finite": 1}
    assert report["config"]["N"] == 4


def test_nu_with_degree(config_file):
    code, report, _ = invoke(
        "nu", "--config", config_file(), "--ideal", "X1_0", "--elem", "X1_0*X0_0", "--degree", "3"
    )
    assert code == 0
    assert report["contains"] == {"degree": 3, "member": True}


def test_embed(config_file):
    code, report, _ = invoke("embed", "--config", config_file(), "--elem", "1;2")
    assert code == 0
    assert report["embed"] == "1 + X0_0 + X1_0^2 + X0_0*X1_0^2"
    assert report["digits"] == [[1], [2]]


def test_gamma_act(config_file):
    code, report, _ = invoke(
        "gamma-act", "--config", config_file(), "--x", "0;0", "--elem", "X0_0 + X1_0^2"
    )
    assert code == 0
    assert report["result"] == "X0_0 + X1_0^2"


def test_delta(config_file):
    code, report, _ = invoke(
        "delta", "--config", config_file(N=8, M=3), "--ideal", "X1_0", "--elem", "X0_0", "--K", "4"
    )
    assert code == 0
    assert report["delta"]["verdict"] == "ZeroSoFar"
    assert report["growth"] is None


def test_delta_precision_error(config_file):
    code, report, _ = invoke(
        "delta", "--config", config_file(), "--ideal", "X1_0", "--elem", "X0_0", "--K", "4"
    )
    assert code == 2
    assert report["kind"] == "PrecisionError"


def test_gr_member(config_file):
    code, report, _ = invoke(
        "gr-member", "--config", config_file(), "--ideal", "X1_0 + X0_0^2", "--elem", "X1_0", "--K", "2"
    )
    assert code == 0
    assert report["gr_member"] is True
    assert report["radical"] == {"K": 2, "member": True, "witness": 1}


def test_moore_check(config_file):
    code, report, _ = invoke("moore-check", "--config", config_file(), "--forms", "1,0;0,1")
    assert code == 0
    assert report["ok"]
    assert report["degree"] == 3


def test_moore_check_dependent_forms(config_file):
    code, report, _ = invoke("moore-check", "--config", config_file(), "--forms", "1,1;1,1")
    assert code == 2
    assert report["kind"] == "ValueError"


def test_uf_certificate(config_file):
    code, report, _ = invoke(
        "uf-certificate", "--config", config_file(), "--g", "1,0", "--phi-map", "1,0;0,1", "--s", "1"
    )
    assert code == 0
    assert report["ok"]
    assert report["bounds"] == [2, 0]


def test_taylor_check(config_file):
    code, report, _ = invoke(
        "taylor-check", "--config", config_file(), "--x", "1;0", "--elem", "X0_0*X1_0"
    )
    assert code == 0
    assert report["taylor"]["ok"]


def test_control_check(config_file):
    code, report, _ = invoke("control-check", "--config", config_file(), "--ideal", "X0_0")
    assert code == 0
    assert report["control"]["controlled"] is False


def test_cor_delta(config_file):
    code, report, _ = invoke(
        "cor-delta", "--config", config_file(), "--ideal", "X0_0^2", "--elem", "X0_0^2",
        "--g", "1", "--xbar", "1",
    )
    assert code == 0
    assert report["cor_delta"]["convention"] is True


def test_closure(config_file):
    code, report, _ = invoke("closure", "--config", config_file(), "--ideal", "X0_0", "--gammas", "default")
    assert code == 0
    assert report["open_at"] == 2
    assert report["rounds"] <= 3
    assert report["gamma_count"] == 2
    assert "wall_time" not in report


def test_closure_config_gammas_missing(config_file):
    code, report, _ = invoke("closure", "--config", config_file(), "--ideal", "X0_0", "--gammas", "config")
    assert code == 2
    assert "gammas" in report["error"]


def test_with_timing(config_file):
    _, report, _ = invoke(
        "closure", "--config", config_file(), "--ideal", "X0_0", "--with-timing"
    )
    assert "wall_time" in report


def test_output_is_deterministic(config_file):
    path = config_file()
    first = invoke("closure", "--config", path, "--ideal", "X0_0 + X1_0^2")[2]
    second = invoke("closure", "--config", path, "--ideal", "X0_0 + X1_0^2")[2]
    assert first == second


def test_missing_config():
    code, report, _ = invoke("nu", "--elem", "X0_0")
    assert code == 2
    assert "--config" in report["error"]


def test_invalid_config(config_file):
    code, report, _ = invoke("nu", "--config", config_file(p=4), "--elem", "X0_0")
    assert code == 2
    assert "p must be prime" in report["error"]


def test_unknown_command():
    assert run(["frobnicate"], stdout=StringIO()) == 2


def test_missing_flag(config_file):
    code, report, _ = invoke("embed", "--config", config_file())
    assert code == 2
    assert "--elem" in report["error"]


@pytest.mark.parametrize(
    "flags",
    [
        ("--ideal", "X1_0", "--elem", "(X0_0"),
        ("--ideal", "X1_0;(", "--elem", "X0_0"),
    ],
)
def test_unbalanced_literal_is_a_usage_error(config_file, flags):
    code, report, _ = invoke("nu", "--config", config_file(), *flags)
    assert code == 2
    assert report["kind"] == "ValueError"
    assert "Cannot parse" in report["error"]


@pytest.mark.parametrize(
    "command, flags",
    [
        ("moore-check", ("--forms", "")),
        ("uf-certificate", ("--g", "", "--phi-map", "1,0;0,1")),
    ],
)
def test_empty_vectors_are_usage_errors(config_file, command, flags):
    code, report, _ = invoke(command, "--config", config_file(), *flags)
    assert code == 2
    assert "error" in report


def test_delta_default_K_fits_precision(config_file):
    code, report, _ = invoke("delta", "--config", config_file(), "--ideal", "X1_0", "--elem", "X0_0")
    assert code == 0
    assert report["K"] == 3
    assert len(report["delta"]["table"]) == 4
