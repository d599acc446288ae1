import io
import json
import subprocess
import sys

import pytest

from replicalc.algebra import Polynomial, from_wire_obj
from replicalc.cli import run


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"N": 2, "beta": 0.4, "lambda": 0.3, "quad_nodes": 16}))
    return str(path)


def test_apply_text():
    code, out, _ = call("apply", "--op", "D", "--graph", "(1,2)")
    assert code == 0
    assert out.strip() == "2(1,2)^2 - 8(1,2)(1,3) + 6(1,2)(3,4)"
    assert Polynomial.parse(out) == 2 * Polynomial.parse("(1,2)^2 - 4(1,2)(2,3) + 3(1,2)(3,4)")


def test_apply_json_is_wire_format():
    code, out, _ = call("apply", "--op", "C", "--graph", "(1)(2)(3)(4)", "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert from_wire_obj(doc["result"]) == Polynomial.parse("3(1,2)(3,4)")
    assert doc["result"] == {"terms": [{"graph": "(1,2)(3,4)", "coeff": "3"}]}


def test_apply_parity_error():
    code, out, err = call("apply", "--op", "C", "--graph", "(1)(2)(3)")
    assert code == 1 and out == ""
    assert "ParityError" in err and "(1)(2)(3)" in err


def test_apply_diagonal_mode():
    _, out, _ = call("apply", "--op", "C", "--graph", "(1)^2(2)^2", "--diagonal", "kernel")
    assert Polynomial.parse(out) == Polynomial.parse("2(1,2)^2 + (1,1)(2,2)")


def test_apply_unknown_operator_letter():
    code, _, err = call("apply", "--op", "dX", "--graph", "(1,2)")
    assert code == 1 and "unknown operator" in err


def test_check_graph():
    code, out, _ = call("check", "--graph", "(1,2)")
    assert code == 0
    assert "[PASS]" in out and "residual: 0" in out
    code, out, _ = call("check", "--graph", "(1,2)", "--format", "json")
    doc = json.loads(out)
    assert doc["pass"] is True and doc["details"]["residual"] == {"terms": []}
    assert set(doc) >= {"check", "inputs", "lhs", "rhs", "ratio", "rel_error", "pass"}


def test_check_kernel_mode_fails_symbolically():
    code, out, _ = call("check", "--graph", "(1,2)", "--diagonal", "kernel")
    assert code == 1 and "[FAIL]" in out


def test_check_catalog():
    code, out, _ = call("check", "--max-edges", "3")
    assert code == 0
    assert out.count("  ok ") == 12


def test_identities_json():
    code, out, _ = call("identities", "--max-edges", "2", "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert len(doc["records"]) == 4
    for rec in doc["records"]:
        assert set(rec) == {"monomial", "delta", "delta2", "zero_sum_ok"}
        assert rec["zero_sum_ok"] is True
        from_wire_obj(rec["delta"])


def test_verify(small_config):
    code, out, _ = call("verify", "--config", small_config)
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 5 and all(line.startswith("[PASS]") for line in lines)


def test_verify_json_deterministic(small_config):
    a = call("verify", "--config", small_config, "--order", "2", "--format", "json")
    b = call("verify", "--config", small_config, "--order", "2", "--format", "json")
    assert a == b
    doc = json.loads(a[1])
    assert doc["config"]["N"] == 2
    assert [r["check"] for r in doc["reports"]] == [
        "effective_beta", "lambda_derivative", "beta_derivative", "beta_second_derivative_ratio"
    ]


def test_explore():
    code, out, _ = call("explore", "--graph", "(1,2)", "--order", "2")
    assert code == 0 and "[PASS]" in out
    code, out, _ = call("explore", "--graph", "(1,2)", "--order", "3", "--format", "json")
    assert code == 0 and json.loads(out)["pass"] is None


def test_outputs_byte_identical():
    for argv in (["check", "--graph", "(1,2)(2,3)", "--format", "json"], ["identities", "--max-edges", "3"]):
        assert call(*argv) == call(*argv)


def test_out_file(tmp_path):
    target = tmp_path / "r.json"
    code, out, _ = call("apply", "--op", "D", "--graph", "(1,2)", "--format", "json", "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["op"] == "D"


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["bogus"],
        ["apply", "--graph", "(1,2)"],
        ["apply", "--op", "D", "--graph", "(1,2", ],
        ["apply", "--op", "D", "--graph", "(1,2)", "--nope"],
        ["check"],
        ["check", "--max-edges", "2", "--diagonal", "symbol"],
        ["verify", "--config", "/nonexistent/cfg.json"],
        ["apply", "--op", "D", "--graph", "(1,2)", "--format", "xml"],
    ],
)
def test_usage_errors(argv):
    code, _, err = call(*argv)
    assert code == 2 and "usage error" in err


def test_bad_config_contents(tmp_path):
    for content in ["[1]", '{"N": 2, "temperature": 1}', '{"kernel": "other"}', "{"]:
        path = tmp_path / "c.json"
        path.write_text(content)
        assert call("verify", "--config", str(path))[0] == 2


def test_help_exits_zero():
    assert call("--help")[0] == 0


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "replicalc", "apply", "--op", "D", "--graph", "(1,2)"],
        capture_output=True, text=True,
    )
    assert res.returncode == 0
    assert res.stdout.strip() == "2(1,2)^2 - 8(1,2)(1,3) + 6(1,2)(3,4)"
