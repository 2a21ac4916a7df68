import csv
import io
import json
import math

import pytest

from tmsv_trimer.cli import EXIT_DOMAIN, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, load_config_file, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def data_rows(text):
    return list(csv.DictReader(io.StringIO("".join(l for l in text.splitlines(True) if not l.startswith("#")))))


def test_zf_command(capsys):
    code, out, _ = run(capsys, "zf", "--kappa", "2")
    assert code == EXIT_OK
    row = data_rows(out)[0]
    assert float(row["z_f"]) == pytest.approx(math.atan(1 / 3) / (2 * math.sqrt(2)), rel=1e-11)


def test_jointdist_json(capsys):
    code, out, _ = run(capsys, "jointdist", "--r", "0.6", "--N", "0,1,2,3", "--format", "json")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["config"]["l_max_resolved"] == {"0.6": 22}
    assert len(doc["results"]) == 4
    for res in doc["results"]:
        assert set(res) == {"params", "matrix", "success_probability"}
        p = res["matrix"]
        assert sum(map(sum, p)) == pytest.approx(1.0, abs=1e-8)
        if res["params"]["N"] % 2:
            assert all(p[m][m] == 0 for m in range(len(p)))
        else:
            assert max(max(row) for row in p) == p[0][0] or res["params"]["N"] == 2


def test_jointdist_near_vacuum(capsys):
    code, out, _ = run(capsys, "jointdist", "--r", "0.05", "--N", "0")
    assert code == EXIT_OK
    cell = [r for r in data_rows(out) if r["m"] == "0" and r["n"] == "0"][0]
    assert float(cell["probability"]) > 0.99


def test_jointdist_herald_impossible_continues(capsys):
    code, out, _ = run(capsys, "jointdist", "--r", "0.3", "--N", "0", "9", "--lmax", "2", "--format", "json")
    assert code == EXIT_OK
    res = json.loads(out)["results"]
    assert "matrix" in res[0] and "error" in res[1]


def test_empty_r_is_usage_error(capsys):
    assert run(capsys, "jointdist")[0] == EXIT_USAGE
    assert run(capsys, "sweep", "--observable", "xi")[0] == EXIT_USAGE
    assert run(capsys, "bogus")[0] == EXIT_USAGE


def test_domain_errors(capsys):
    assert run(capsys, "sweep", "--r", "1.2", "--observable", "detM")[0] == EXIT_DOMAIN
    assert run(capsys, "sweep", "--r", "0.3", "--eta-b", "0", "--observable", "detM")[0] == EXIT_DOMAIN
    assert run(capsys, "zf", "--ratio", "-1")[0] == EXIT_DOMAIN


def test_xi_requires_ideal_detection(capsys):
    code, _, err = run(capsys, "sweep", "--r", "0.3", "--observable", "xi", "--eta-b", "0.8")
    assert code == EXIT_DOMAIN and "ideal" in err


def test_sweep_table_one_signs(capsys):
    code, out, _ = run(capsys, "sweep", "--r", "0.2,0.3", "--eta-b", "0.8", "--eta-outer", "0.8", "--observable", "detM")
    assert code == EXIT_OK
    rows = data_rows(out)
    assert [(float(r["r"]), int(r["N"])) for r in rows] == [(r, n) for r in (0.2, 0.3) for n in range(4)]
    assert [math.copysign(1, float(r["value"])) for r in rows] == [-1, 1, -1, 1] * 2
    assert list(rows[0]) == ["r", "N", "eta_b", "eta_outer", "theta", "observable", "value"]


def test_sweep_xi_parity(capsys):
    rows = data_rows(run(capsys, "sweep", "--r", "0.3", "--observable", "xi")[1])
    xi = [float(r["value"]) for r in rows]
    assert xi[1] > xi[0] and xi[3] > xi[2]


def test_meanphoton_vanishes_for_weak_squeezing(capsys):
    rows = data_rows(run(capsys, "sweep", "--r", "0.001", "--N", "0", "--observable", "meanphoton")[1])
    assert 0 <= float(rows[0]["value"]) < 1e-5


def test_sweep_deterministic(tmp_path, capsys):
    args = ["sweep", "--r", "0.2", "0.4", "0.6", "--observable", "detM", "--format"]
    for fmt in ("csv", "json"):
        a, b, c = tmp_path / f"a.{fmt}", tmp_path / f"b.{fmt}", tmp_path / f"c.{fmt}"
        assert main(args + [fmt, "--out", str(a)]) == EXIT_OK
        assert main(args + [fmt, "--out", str(b)]) == EXIT_OK
        assert main(args + [fmt, "--out", str(c), "--jobs", "2"]) == EXIT_OK
        assert a.read_bytes() == b.read_bytes() == c.read_bytes()


def test_provenance_header(capsys):
    out = run(capsys, "sweep", "--r", "0.3", "--N", "1", "--observable", "detM")[1]
    header = {l[2:].split("=", 1)[0] for l in out.splitlines() if l.startswith("# ")}
    assert {"z", "theta", "l_max_resolved", "tail_tolerance", "kappa", "ratio"} <= header


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# low-squeezing grid\nr = 0.2, 0.3\nN = 0 1\neta-b = 0.8\neta_outer: 0.8\nobservable = detM\nratio = 10/90\n")
    vals = load_config_file(cfg)
    assert vals["r_values"] == [0.2, 0.3] and vals["N_values"] == [0, 1]
    assert vals["ratio"] == pytest.approx(1 / 9)
    rows = data_rows(run(capsys, "sweep", "--config", str(cfg), "--r", "0.3")[1])
    assert [(r["r"], r["eta_b"]) for r in rows] == [("0.3", "0.8"), ("0.3", "0.8")]


def test_bad_config_file(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    assert run(capsys, "sweep", "--config", str(cfg))[0] == EXIT_USAGE


def test_validate_default_passes(capsys):
    code, out, _ = run(capsys, "validate")
    assert code == EXIT_OK
    names = [l.split()[1].rstrip(":") for l in out.splitlines()]
    assert {"unitarity", "oracle-equivalence", "parity-selection", "exchange-symmetry", "normalization",
            "truncation-convergence"} <= set(names)
    assert all(l.startswith("PASS") for l in out.splitlines())


def test_validate_negative_control(capsys):
    code, out, _ = run(capsys, "validate", "--perturb-theta", "1e-3")
    assert code == EXIT_VALIDATION
    assert [l for l in out.splitlines() if "oracle-equivalence" in l][0].startswith("FAIL")


def test_validate_truncation_failure(capsys):
    code, out, _ = run(capsys, "validate", "--r", "0.9", "--lmax", "2", "--format", "json")
    assert code == EXIT_VALIDATION
    check = {c["name"]: c for c in json.loads(out)["checks"]}["truncation-convergence"]
    assert not check["passed"]
    assert check["residual"] == pytest.approx(0.81**3, rel=1e-9)
