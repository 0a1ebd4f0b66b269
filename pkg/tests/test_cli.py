import json

import pytest

from ramtel.cli import main

ANCHOR_FAMILY = "vars: n, z\npoch(1/2,n)^3/poch(1,n)^3 * z^n\n"
BINOMIAL = "poch(-k,n)*(-1)^n/poch(1,n)\n"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_prove_example_one_json(capsys):
    code, out, _ = run(capsys, "prove", "--example", "1", "--digits", "60", "--json")
    assert code == 0
    data = json.loads(out)
    assert json.dumps(data, sort_keys=True, indent=2) + "\n" == out
    assert data["telescopers"][0]["order"] == 3
    assert data["operatorsEqual"] is True
    assert data["specialization"]["digitsMatched"] >= 58
    assert data["status"] == "fully-validated"


def test_prove_example_two(capsys):
    assert run(capsys, "prove", "--example", "2")[0] == 0


def test_prove_max_order_two(capsys):
    code, out, _ = run(capsys, "prove", "--example", "1", "--max-order", "2", "--json")
    assert code == 1
    assert json.loads(out)["status"] == "failed(no-telescoper)"


def test_eval_catalog(capsys):
    code, out, _ = run(capsys, "eval", "65-8", "--digits", "60")
    assert code == 0
    assert "matched" in out and "9*sqrt(7)/pi" in out
    digits = int(out.split("matched ")[1].split()[0])
    assert digits >= 58


def test_eval_weighted(capsys, tmp_path):
    f = tmp_path / "anchor.term"
    f.write_text(ANCHOR_FAMILY)
    code, out, _ = run(capsys, "eval", "--term", str(f), "--weighted", "5", "42", "1/64",
                       "--digits", "60", "--closed-form", "16/pi")
    assert code == 0
    assert int(out.split("matched ")[1].split()[0]) >= 58


def test_eval_bad_digits(capsys):
    assert run(capsys, "eval", "65-8", "--digits", "0")[0] == 2


def test_eval_divergent(capsys):
    code, _, err = run(capsys, "eval", "wz-4-1")
    assert code == 1 and "divergent" in err


def test_unknown_flag(capsys):
    assert run(capsys, "eval", "65-8", "--bogus")[0] == 2
    assert run(capsys, "prove", "--example", "9")[0] == 2


def test_telescope_then_verify(capsys, tmp_path):
    term = tmp_path / "binom.term"
    term.write_text(BINOMIAL)
    cert = tmp_path / "cert.json"
    code, _, _ = run(capsys, "telescope", str(term), "--json", "--out", str(cert))
    assert code == 0
    assert run(capsys, "verify-cert", str(term), str(cert))[0] == 0

    data = json.loads(cert.read_text())
    data["telescoper"]["coefficients"][0] = "-3"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    assert run(capsys, "verify-cert", str(term), str(bad))[0] == 1


def test_task_files(capsys, tmp_path):
    good = tmp_path / "t.task"
    good.write_text("left: poch(-k,n)*(-1)^n/poch(1,n)\nright: poch(-k,n)*(-1)^n/poch(1,n)\n")
    assert run(capsys, "prove", "--task", str(good))[0] == 0
    bad = tmp_path / "bad.task"
    bad.write_text("left: poch(-k,n\n")
    assert run(capsys, "prove", "--task", str(bad))[0] == 2
    assert run(capsys, "prove", "--task", str(tmp_path / "missing.task"))[0] == 2


def test_list(capsys):
    code, out, _ = run(capsys, "list", "--json")
    assert code == 0
    ids = [s["id"] for s in json.loads(out)["series"]]
    assert {"65-8", "133-8", "wz-42-5"} <= set(ids)


@pytest.mark.parametrize("bad", ["3..1", "x", "-1..2"])
def test_bad_k_range(capsys, bad):
    assert run(capsys, "prove", "--example", "1", "--k-range", bad)[0] == 2
