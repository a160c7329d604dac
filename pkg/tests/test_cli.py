from __future__ import annotations

import io
import json

import pytest

from hybridbounds.cli import dispatch


def run(args, tmp_path=None):
    out, err = io.StringIO(), io.StringIO()
    code = dispatch(args, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_kloosterman_example():
    code, out, _ = run(["kloosterman", "--m", "1", "--n", "1", "--q", "3"])
    rep = json.loads(out)
    assert code == 0 and rep["schema"] == 1
    assert rep["result"]["exact"] == "-1" and rep["result"]["approx"] == [-1.0, 0.0]


def test_exponent_saving_csv():
    code, out, _ = run(["exponent", "saving", "--theta", "2/7", "--format", "csv"])
    assert code == 0 and out == "theta,best_mu,saving\n2/7,1/4,1/180\n"


@pytest.mark.parametrize(
    "args",
    [
        ["exponent", "saving", "--theta", "2/x"],
        ["exponent", "saving", "--theta", "0.3"],
        ["kloosterman", "--m", "1", "--n", "1"],
        ["kl3", "--m", "1", "--n", "1", "--c", "12", "--d1", "5"],
        ["gauss", "--q", "12", "--chi", "1"],
        ["nonsense"],
    ],
)
def test_usage_errors(args):
    code, _, _ = run(args)
    assert code == 2


def test_failure_exit_code():
    code, out, err = run(["poisson", "--zero-frequency"])
    assert code == 1 and json.loads(out)["ok"] is False and "failed" in err


def test_dry_run_does_not_compute():
    code, out, _ = run(["bounds-audit", "--kind", "weil", "--dry-run"])
    rep = json.loads(out)
    assert code == 0 and rep["dry_run"] and rep["result"] == {"valid": True}


def test_out_and_cache(tmp_path):
    target = tmp_path / "r.json"
    args = ["exponent", "feasibility", "--theta", "3/10", "--mu", "3/10", "--cache-dir", str(tmp_path / "c"), "--out", str(target)]
    assert run(args)[0] == 0
    first = target.read_bytes()
    assert len(list((tmp_path / "c").iterdir())) == 1
    assert run(args)[0] == 0
    assert target.read_bytes() == first


def test_identity_suite_small():
    code, out, _ = run(["identity-suite", "--max-q", "12", "--recip-max", "10", "--hyperkl-max", "10", "--vanish-max", "10", "--format", "csv"])
    lines = out.splitlines()
    assert code == 0 and lines[0] == "name,checked,failures,status"
    assert all(line.endswith("PASS") for line in lines[1:])


@pytest.mark.parametrize("fmt", ["json", "csv", "plain"])
def test_formats_are_deterministic(fmt):
    args = ["chars", "--q", "15", "--format", fmt]
    assert run(args)[1] == run(args)[1]
