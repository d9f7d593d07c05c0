import io
import json

import pytest

from prolongation.cli import main
from prolongation.report import CheckResult, Report


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_verify_sl2r_text():
    code, out, _ = run("verify", "--system", "sl2r", "--checks", "structure,curvature")
    assert code == 0
    assert "[PASS       ] sl2r   sl2r-bianchi" in out
    assert out.rstrip().endswith("0 fail")


def test_verify_json_roundtrip():
    code, out, _ = run("verify", "--system", "o3", "--checks", "charts", "--format", "json")
    assert code == 0
    rep = Report.from_json(out)
    assert rep.systems == ["o3"]
    assert rep.summary["discrepancy"] >= 1 and rep.summary["fail"] == 0
    assert json.loads(rep.to_json()) == json.loads(out)


def test_verify_deterministic_modulo_timestamp():
    outs = []
    for _ in range(2):
        _, out, _ = run("verify", "--system", "sl2r", "--checks", "extensions", "--format", "json")
        data = json.loads(out)
        data.pop("timestamp")
        outs.append(data)
    assert outs[0] == outs[1]


def test_verify_unknown_system_and_selector():
    assert run("verify", "--system", "so5")[0] == 2
    code, _, err = run("verify", "--system", "sl2r", "--checks", "nonsense")
    assert code == 2 and "nonsense" in err


def test_verify_custom_file(tmp_path):
    f = tmp_path / "heis.eds"
    f.write_text("system mine\ndim 2\noneforms w1 w2 w3\npseudos y1 y2\n"
                 "connection [[w1, w2], [w3, -w1]]\ncurvature auto\n")
    code, out, _ = run("verify", "--system", str(f), "--checks", "structure,pfaffians")
    assert code == 0 and "mine-d-squared" in out


def test_derive_sl2r_pivot1():
    code, out, _ = run("derive", "--system", "sl2r", "--pivot", "1")
    assert code == 0
    assert "y3 = y2/y1" in out
    assert "alpha3 = 2*y3*w1 + y3**2*w2 - w3 + dy3" in out
    assert "Omega[1,1] = -2*w1 - 2*y3*w2" in out


def test_derive_su3_pivot2_json():
    code, out, _ = run("derive", "--system", "su3", "--pivot", "2", "--format", "json")
    data = json.loads(out)
    assert code == 0 and set(data["forms"]) == {"alpha6", "alpha7"}
    assert data["variables"] == {"y6": "y1/y2", "y7": "y3/y2"}
    assert len(data["subconnection"]) == 2


def test_derive_bad_pivot():
    code, _, err = run("derive", "--system", "sl2r", "--pivot", "5")
    assert code == 2 and "pivot" in err


def test_conserve_constant(tmp_path):
    f = tmp_path / "c.json"
    f.write_text(json.dumps({"a1": {"const": 1}, "a2": {"const": 1}, "N": 3}))
    code, out, _ = run("conserve", "--coeffs", str(f))
    assert code == 0
    assert "I1 = 1/2" in out and "I2 = -1/8" in out and "I3 = 1/16" in out
    assert "pass" in out


def test_conserve_grid(tmp_path):
    f = tmp_path / "g.json"
    xs = [0.01 * k for k in range(2001)]
    f.write_text(json.dumps({"a1": {"grid": [1.0] * len(xs), "h": 0.01},
                             "a2": {"grid": [0.5] * len(xs), "h": 0.01}, "N": 2}))
    code, out, _ = run("conserve", "--coeffs", str(f), "--format", "json")
    rep = Report.from_json(out)
    assert code == 0 and rep.summary["pass"] == 2


@pytest.mark.parametrize("payload", ['{"a1": {"const": 1}}', "[1, 2]", "{not json"])
def test_conserve_bad_input(tmp_path, payload):
    f = tmp_path / "bad.json"
    f.write_text(payload)
    assert run("conserve", "--coeffs", str(f))[0] == 2


def test_parse_roundtrip(tmp_path):
    f = tmp_path / "a.eds"
    f.write_text("system t\ndim 2\noneforms w1 w2 w3\npseudos y1 y2\nconnection [[w1, w2], [w3, -w1]]\ncurvature auto\n")
    code, out, _ = run("parse", str(f))
    assert code == 0
    g = tmp_path / "b.eds"
    g.write_text(out)
    assert run("parse", str(g))[1] == out


def test_parse_error_location(tmp_path):
    f = tmp_path / "bad.eds"
    f.write_text("system t\ndim 2\noneforms w1\npseudos y1 y2\nconnection [[w1, w1], [w1]]\ncurvature auto\n")
    code, _, err = run("parse", str(f))
    assert code == 2
    assert f"{f}:5:" in err


def test_argparse_errors_exit_2():
    assert run()[0] == 2
    assert run("derive", "--system", "sl2r")[0] == 2


def test_failed_check_exits_1(monkeypatch):
    from prolongation import checks
    from prolongation.checks import Check

    def boom():
        raise RuntimeError("broken")
    monkeypatch.setattr(checks, "all_checks", lambda ctx: [Check("x-crash", "structure", boom)])
    code, out, _ = run("verify", "--system", "sl2r")
    assert code == 1 and "FAIL" in out


def test_report_rejects_bad_status_and_summary():
    with pytest.raises(ValueError):
        CheckResult("s", "c", "ok")
    rep = Report(["s"], [CheckResult("s", "c", "pass")])
    data = rep.to_dict()
    data["summary"]["pass"] = 3
    with pytest.raises(ValueError):
        Report.from_dict(data)


def test_report_timings_optional():
    rep = Report(["s"], [CheckResult("s", "c", "pass", seconds=1.5)])
    assert "seconds" not in rep.to_json()
    assert "seconds" in rep.to_json(timings=True)
    assert "(1.500s)" in rep.to_text(timings=True)
