import csv
import io
import json

import jsonschema
import pytest

from bostconnes import cli, qsmrep


def write(tmp_path, obj, name="d.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture
def qz(tmp_path):
    return write(tmp_path, {"kind": "qmodz"})


@pytest.fixture
def weil(tmp_path):
    return write(tmp_path, {"kind": "weil", "q": 4})


def test_verify_ok(capsys, qz):
    code, out, _ = run(capsys, "verify", "--datum", qz, "--seed", "3")
    assert code == 0
    rep = json.loads(out)
    jsonschema.validate(rep, cli.REPORT_SCHEMA)
    assert rep["ok"]
    names = [s["suite"] for s in rep["suites"]]
    assert names == ["datum_laws", "sigma_rho", "zero_sum", "relations", "covariance", "projections",
                     "sigma_rho_cat"]
    assert all(s["checks"] > 0 for s in rep["suites"])


def test_verify_abstract_datum_skips_operator_suites(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "--datum", write(tmp_path, {"kind": "germ"}))
    assert code == 0
    names = {s["suite"] for s in json.loads(out)["suites"]}
    assert "relations" not in names and "sigma_rho_cat" in names


def test_verify_detects_broken_relation(capsys, qz, monkeypatch):
    orig = qsmrep.relation_instances

    def broken(*a, **k):
        out = list(orig(*a, **k))
        r = out[0]
        out[0] = qsmrep.Relation(r.name, r.lhs, tuple((-c, w) for c, w in r.rhs))
        return out

    monkeypatch.setattr(qsmrep, "relation_instances", broken)
    code, out, _ = run(capsys, "verify", "--datum", qz)
    assert code == 1
    rel = next(s for s in json.loads(out)["suites"] if s["suite"] == "relations")
    assert not rel["ok"] and rel["failures"] > 0 and rel["witnesses"]


def test_deterministic_output(capsys, tmp_path):
    cfg = write(tmp_path, {"datum": {"kind": "weil", "q": 4}, "seed": 11, "trunc": [32, 8], "samples": 4})
    a = run(capsys, "verify", "--datum", cfg)
    b = run(capsys, "verify", "--datum", cfg)
    assert a[0] == 0 and a == b


def test_out_file(capsys, qz, tmp_path):
    target = tmp_path / "o.csv"
    code, out, _ = run(capsys, "partition", "--datum", qz, "--beta", "3", "--out", str(target))
    assert code == 0 and out == ""
    assert rows(target.read_text())[0]["status"] == "ok"


@pytest.mark.parametrize("content,where", [
    ('{"kind": ', "not valid JSON"),
    ({"kind": "qmodz", "bogus": 1}, "fails schema at $"),
    ({"kind": 3}, "fails schema at $['kind']"),
    ({"datum": {"kind": "qmodz"}, "tol": -1}, "fails schema at $['tol']"),
    ({"datum": {"kind": "qmodz"}, "extra": 1}, "fails schema at $"),
])
def test_bad_config_exit_2(capsys, tmp_path, content, where):
    code, out, err = run(capsys, "verify", "--datum", write(tmp_path, content))
    assert code == 2 and out == ""
    assert where in err


def test_unknown_kind_exit_2(capsys, tmp_path):
    code, _, err = run(capsys, "verify", "--datum", write(tmp_path, {"kind": "nope"}))
    assert code == 2 and err.startswith("error:")


def test_missing_file_exit_2(capsys, tmp_path):
    code, _, err = run(capsys, "verify", "--datum", str(tmp_path / "absent.json"))
    assert code == 2 and "cannot read" in err


@pytest.mark.parametrize("argv", [[], ["verify"], ["frobnicate", "--datum", "x"]])
def test_bad_arguments_exit_2(capsys, argv):
    assert cli.main(argv) == 2


def test_bad_trunc_exit_2(capsys, qz):
    code, _, err = run(capsys, "spectrum", "--datum", qz, "--trunc", "0")
    assert code == 2 and "--trunc" in err


def test_partition_table(capsys, qz):
    code, out, _ = run(capsys, "partition", "--datum", qz, "--beta", "3,0.5,2")
    assert code == 0
    t = rows(out)
    assert [r["beta"] for r in t] == ["0.5", "2.0", "3.0"]
    assert t[0]["status"].startswith("divergent")
    assert float(t[1]["closed_value"]) == pytest.approx(1.6449340668482264, abs=1e-12)
    assert float(t[2]["closed_value"]) == pytest.approx(1.2020569031595942, abs=1e-12)
    # truncated trace sits below the full series by no more than the omitted tail
    assert 0 <= float(t[1]["deviation"]) <= 1.01e-5


def test_partition_weil_both_forms(capsys, weil):
    code, out, _ = run(capsys, "partition", "--datum", weil, "--beta", "3", "--trunc", "60,30")
    assert code == 0
    t = rows(out)
    assert {r["form"] for r in t} == {"geometric", "polylog"}
    assert float(t[0]["closed_value"]) == pytest.approx(float(t[1]["closed_value"]), rel=1e-12)


def test_gibbs_weight_one_is_exactly_zero(capsys, weil):
    code, out, _ = run(capsys, "gibbs", "--datum", weil, "--beta", "2", "--trunc", "100,20", "--samples", "3")
    assert code == 0
    t = rows(out)
    ident = [r for r in t if json.loads(r["s"]) == {"m": 0, "zeta": "0"}]
    assert float(ident[0]["closed_re"]) == 1.0 and float(ident[0]["closed_im"]) == 0.0
    for r in t:
        if json.loads(r["s"])["m"] != 0:
            assert float(r["closed_re"]) == float(r["closed_im"]) == 0.0
            assert float(r["trace_re"]) == float(r["trace_im"]) == 0.0


def test_gibbs_gamma_rows(capsys, qz):
    code, out, _ = run(capsys, "gibbs", "--datum", qz, "--beta", "2", "--trunc", "2000",
                       "--gamma", "5,7", "--samples", "3")
    assert code == 0
    t = rows(out)
    assert {r["gamma"] for r in t} == {"id", "5:1", "7:1"}
    assert all(r["status"] == "ok" for r in t)


def test_gibbs_divergent_row(capsys, qz):
    code, out, _ = run(capsys, "gibbs", "--datum", qz, "--beta", "0.9", "--trunc", "100")
    assert code == 0
    assert rows(out)[0]["status"].startswith("divergent")


def test_tannaka_table(capsys, qz):
    code, out, _ = run(capsys, "tannaka", "--datum", qz, "--samples", "5", "--seed", "2")
    assert code == 0
    t = rows(out)
    checks = {r["check"] for r in t}
    assert checks == {"sigma_rho_cat", "verschiebung_diag", "orbit_hom_dim"}
    assert all(r["status"] == "ok" for r in t)
    for r in t:
        if r["check"] == "orbit_hom_dim":
            a, b = r["result"].split("=")
            assert a == b


def test_spectrum(capsys, weil):
    code, out, _ = run(capsys, "spectrum", "--datum", weil, "--limit", "4", "--beta", "2")
    assert code == 0
    t = rows(out)
    assert len(t) == 4
    assert [float(r["energy"]) for r in t] == sorted(float(r["energy"]) for r in t)
    assert float(t[0]["boltzmann_weight"]) == 1.0
    assert float(t[1]["boltzmann_weight"]) == pytest.approx(0.25)


def test_spectrum_json(capsys, qz):
    code, out, _ = run(capsys, "spectrum", "--datum", qz, "--limit", "3", "--format", "json")
    rep = json.loads(out)
    jsonschema.validate(rep, cli.REPORT_SCHEMA)
    assert [r[0] for r in rep["rows"]] == ["1", "2", "3"]


def test_config_file_and_flags_merge(tmp_path):
    path = write(tmp_path, {"datum": {"kind": "qmodz"}, "beta": [3, 2], "seed": 4, "tol": 1e-9})
    args = cli.make_parser().parse_args(["partition", "--datum", path, "--seed", "9"])
    cfg = cli.build_config(args)
    assert cfg.beta == (2.0, 3.0) and cfg.seed == 9 and cfg.tol == 1e-9
    assert cfg.fmt == "csv"


def test_schemas_are_valid():
    for s in (cli.DATUM_SCHEMA, cli.CONFIG_SCHEMA, cli.REPORT_SCHEMA):
        jsonschema.Draft202012Validator.check_schema(s)
