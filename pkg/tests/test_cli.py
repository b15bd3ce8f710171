"""End-to-end command-line tests driven through main(argv)."""

import json
import math
import subprocess
import sys

import pytest

from isingchain import ChainParams, covariance
from isingchain.cli import main
from isingchain.currents import McEstimate


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_json(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj), encoding="utf-8")
    return str(path)


def csv_rows(text):
    lines = text.splitlines()
    header = lines[0].split(",")
    return header, [line.split(",") for line in lines[1:]]


def kv_csv(text):
    _, rows = csv_rows(text)
    return {key: value for key, value in rows}


@pytest.fixture
def single_edge(tmp_path):
    return write_json(tmp_path, "single.json", {"J": [1.0], "h": [0.0, 0.0]})


@pytest.fixture
def ferro(tmp_path):
    return write_json(
        tmp_path, "ferro.json", {"J": [0.8, 0.3], "h": [0.5, 0.2, 0.1]}
    )


@pytest.fixture
def signed(tmp_path):
    return write_json(
        tmp_path, "signed.json", {"J": [-0.8, 0.3], "h": [0.5, -0.2, 0.1]}
    )


class TestExact:
    def test_single_edge_csv(self, capsys, single_edge):
        code, out, err = run(
            capsys, "exact", "--instance", single_edge, "--i", "0", "--j", "1"
        )
        assert code == 0 and err == ""
        values = kv_csv(out)
        assert values["covariance"] == format(math.tanh(1.0), ".17g")
        assert float(values["log_partition"]) == pytest.approx(
            math.log(4.0 * math.cosh(1.0)), rel=1e-14
        )
        assert float(values["mean_0"]) == 0.0
        assert float(values["enum_max_mean_abs_diff"]) <= 1e-12
        assert float(values["enum_covariance"]) == pytest.approx(
            math.tanh(1.0), rel=1e-12
        )

    def test_csv_is_lf_terminated(self, capsys, single_edge):
        _, out, _ = run(capsys, "exact", "--instance", single_edge)
        assert "\r" not in out and out.endswith("\n")

    def test_json_output(self, capsys, ferro):
        code, out, _ = run(
            capsys, "exact", "--instance", ferro, "--i", "0", "--j", "2",
            "--out", "json",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["n_sites"] == 3 and len(doc["means"]) == 3
        assert doc["pair"]["i"] == 0 and doc["pair"]["j"] == 2
        assert doc["enum_check"]["max_mean_abs_diff"] <= 1e-12
        assert doc["pair"]["covariance"] == pytest.approx(
            doc["enum_check"]["covariance"], rel=1e-9, abs=1e-12
        )

    def test_reversed_instance_mirrors(self, capsys, tmp_path):
        fwd = write_json(
            tmp_path, "fwd.json", {"J": [0.8, 0.3], "h": [0.5, -0.2, 0.1]}
        )
        rev = write_json(
            tmp_path, "rev.json", {"J": [0.3, 0.8], "h": [0.1, -0.2, 0.5]}
        )
        _, out_f, _ = run(capsys, "exact", "--instance", fwd, "--i", "0", "--j", "2")
        _, out_r, _ = run(capsys, "exact", "--instance", rev, "--i", "0", "--j", "2")
        a, b = kv_csv(out_f), kv_csv(out_r)
        assert a["log_partition"] == b["log_partition"]
        assert float(a["mean_0"]) == pytest.approx(float(b["mean_2"]), abs=1e-14)
        assert float(a["mean_2"]) == pytest.approx(float(b["mean_0"]), abs=1e-14)
        assert float(a["covariance"]) == pytest.approx(
            float(b["covariance"]), rel=1e-13
        )

    def test_no_enum_check_above_cap(self, capsys, tmp_path):
        n = 30
        big = write_json(
            tmp_path, "big.json", {"J": [0.1] * (n - 1), "h": [0.0] * n}
        )
        code, out, _ = run(capsys, "exact", "--instance", big, "--out", "json")
        assert code == 0
        assert "enum_check" not in json.loads(out)

    def test_spec_draws_and_echoes_seed(self, capsys, tmp_path):
        spec = write_json(tmp_path, "spec.json", {"n_sites": 4})
        code, out, err = run(capsys, "exact", "--spec", spec)
        assert code == 0
        assert err.startswith("seed: ")
        int(err.split()[1])  # the echoed seed is an integer

    def test_spec_seed_used_without_echo(self, capsys, tmp_path):
        spec = write_json(tmp_path, "spec.json", {"n_sites": 4, "seed": 11})
        code1, out1, err1 = run(capsys, "exact", "--spec", spec)
        code2, out2, _ = run(capsys, "exact", "--spec", spec)
        assert code1 == code2 == 0 and err1 == "" and out1 == out2

    def test_parse_errors(self, capsys, tmp_path, single_edge):
        bad = tmp_path / "bad.json"
        bad.write_text("not json", encoding="utf-8")
        assert run(capsys, "exact", "--instance", str(bad))[0] == 2
        assert run(capsys, "exact")[0] == 2
        assert run(capsys, "exact", "--instance", single_edge, "--i", "0")[0] == 2
        spec = write_json(tmp_path, "s.json", {"n_sites": 3})
        assert (
            run(capsys, "exact", "--instance", single_edge, "--spec", spec)[0] == 2
        )
        assert run(capsys, "exact", "--instance", str(tmp_path / "nope.json"))[0] == 2

    def test_precondition_errors(self, capsys, single_edge):
        assert (
            run(capsys, "exact", "--instance", single_edge, "--i", "0", "--j", "0")[0]
            == 3
        )
        assert (
            run(capsys, "exact", "--instance", single_edge, "--i", "0", "--j", "9")[0]
            == 3
        )

    def test_argparse_rejects_unknown_flags(self, single_edge):
        with pytest.raises(SystemExit) as exc:
            main(["exact", "--instance", single_edge, "--frobnicate"])
        assert exc.value.code == 2


class TestBounds:
    HEADER = (
        "i,j,exact,thm1,thm2,lemma3,zero_field,"
        "slack_thm1,slack_thm2,slack_lemma3,slack_zero_field"
    )

    def test_ferro_all_bounds_present(self, capsys, ferro):
        code, out, err = run(
            capsys, "bounds", "--instance", ferro, "--i", "0", "--j", "2"
        )
        assert code == 0 and err == ""
        header, rows = csv_rows(out)
        assert ",".join(header) == self.HEADER
        row = dict(zip(header, rows[0]))
        assert row["i"] == "0" and row["j"] == "2"
        for key in ("exact", "thm1", "thm2", "lemma3", "zero_field"):
            assert row[key] != ""
        assert float(row["zero_field"]) == pytest.approx(
            math.tanh(0.8) * math.tanh(0.3), rel=1e-13
        )
        for key in ("slack_thm1", "slack_thm2", "slack_lemma3", "slack_zero_field"):
            assert float(row[key]) >= -1e-12

    def test_signed_instance_reports_lemma3_only(self, capsys, signed):
        code, out, _ = run(
            capsys, "bounds", "--instance", signed, "--i", "0", "--j", "2"
        )
        assert code == 0
        header, rows = csv_rows(out)
        row = dict(zip(header, rows[0]))
        assert row["thm1"] == "" and row["thm2"] == "" and row["zero_field"] == ""
        assert row["lemma3"] != "" and float(row["slack_lemma3"]) >= -1e-12

    def test_zero_field_instance_reports_product_bound(self, capsys, tmp_path):
        inst = write_json(
            tmp_path, "zf.json", {"J": [1.0, 0.5], "h": [0.0, 0.0, 0.0]}
        )
        code, out, _ = run(capsys, "bounds", "--instance", inst, "--i", "0", "--j", "2")
        assert code == 0
        header, rows = csv_rows(out)
        row = dict(zip(header, rows[0]))
        # zero_field bound equals the exact covariance here
        assert float(row["zero_field"]) == pytest.approx(
            math.tanh(1.0) * math.tanh(0.5), rel=1e-13
        )
        assert abs(float(row["slack_zero_field"])) <= 1e-12

    def test_json_output(self, capsys, ferro):
        code, out, _ = run(
            capsys, "bounds", "--instance", ferro, "--i", "0", "--j", "2",
            "--out", "json",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["zero_field"] == pytest.approx(
            math.tanh(0.8) * math.tanh(0.3), rel=1e-13
        )
        assert doc["thm1"] >= doc["exact"] - 1e-12

    def test_tamper_forces_exit_4(self, capsys, ferro):
        code, _, err = run(
            capsys, "bounds", "--instance", ferro, "--i", "0", "--j", "2", "--tamper"
        )
        assert code == 4 and "bound violation" in err

    def test_proof_route_accepted(self, capsys, signed):
        code, out, _ = run(
            capsys, "bounds", "--instance", signed, "--i", "0", "--j", "2",
            "--proof-route",
        )
        assert code == 0

    def test_requires_pair(self, capsys, ferro):
        assert run(capsys, "bounds", "--instance", ferro)[0] == 2


class TestSweep:
    def test_deterministic_and_clean(self, capsys, tmp_path):
        spec = write_json(tmp_path, "spec.json", {"n_sites": 5, "seed": 11})
        code1, out1, err1 = run(capsys, "sweep", "--spec", spec, "--count", "4")
        code2, out2, err2 = run(capsys, "sweep", "--spec", spec, "--count", "4")
        assert code1 == code2 == 0
        assert out1 == out2 and err1 == err2
        header, rows = csv_rows(out1)
        assert header[:2] == ["instance", "seed"] and header[-1] == "violation"
        assert len(rows) == 4
        assert all(row[-1] == "0" for row in rows)
        assert "min slack: thm1=" in err1

    def test_all_pairs(self, capsys, tmp_path):
        spec = write_json(tmp_path, "spec.json", {"n_sites": 5, "seed": 11})
        code, out, _ = run(
            capsys, "sweep", "--spec", spec, "--count", "3", "--pairs", "all"
        )
        assert code == 0
        _, rows = csv_rows(out)
        assert len(rows) == 3 * 10  # C(5, 2) pairs per instance

    def test_field_flips_empty_thm2_column(self, capsys, tmp_path):
        spec = write_json(
            tmp_path,
            "spec.json",
            {"n_sites": 5, "sign_flip_prob": {"h": 1.0}, "seed": 2},
        )
        code, out, err = run(capsys, "sweep", "--spec", spec, "--count", "5")
        assert code == 0
        header, rows = csv_rows(out)
        thm2 = header.index("thm2")
        thm1 = header.index("thm1")
        assert all(row[thm2] == "" for row in rows)
        assert all(row[thm1] != "" for row in rows)
        assert "thm2=n/a" in err

    def test_seed_flag_overrides_spec(self, capsys, tmp_path):
        spec = write_json(tmp_path, "spec.json", {"n_sites": 5, "seed": 11})
        _, out_spec, _ = run(capsys, "sweep", "--spec", spec, "--count", "2")
        _, out_flag, _ = run(
            capsys, "sweep", "--spec", spec, "--count", "2", "--seed", "12"
        )
        assert out_spec != out_flag

    def test_tamper_forces_exit_4(self, capsys, tmp_path):
        spec = write_json(tmp_path, "spec.json", {"n_sites": 5, "seed": 11})
        code, _, err = run(
            capsys, "sweep", "--spec", spec, "--count", "2", "--tamper"
        )
        assert code == 4 and "bound violations: 2" in err

    def test_json_output(self, capsys, tmp_path):
        spec = write_json(tmp_path, "spec.json", {"n_sites": 4, "seed": 7})
        code, out, _ = run(
            capsys, "sweep", "--spec", spec, "--count", "3", "--out", "json"
        )
        assert code == 0
        doc = json.loads(out)
        assert len(doc["rows"]) == 3 and doc["violations"] == 0
        assert set(doc["min_slacks"]) <= {"thm1", "thm2", "lemma3", "zero_field"}

    def test_count_validation(self, capsys, tmp_path):
        spec = write_json(tmp_path, "spec.json", {"n_sites": 5, "seed": 11})
        assert run(capsys, "sweep", "--spec", spec, "--count", "0")[0] == 3

    def test_single_site_spec_rejected(self, capsys, tmp_path):
        spec = write_json(tmp_path, "spec.json", {"n_sites": 1, "seed": 11})
        assert run(capsys, "sweep", "--spec", spec)[0] == 3


class TestMc:
    def test_single_edge(self, capsys, single_edge):
        code, out, err = run(
            capsys, "mc", "--instance", single_edge, "--i", "0", "--j", "1",
            "--samples", "20000", "--seed", "42",
        )
        assert code == 0 and err == ""
        header, rows = csv_rows(out)
        assert header == ["i", "j", "mean", "std_error", "samples", "exact", "z_score"]
        row = dict(zip(header, rows[0]))
        assert row["samples"] == "20000"
        assert abs(float(row["z_score"])) <= 4.0
        assert float(row["exact"]) == pytest.approx(math.tanh(1.0), rel=1e-13)

    def test_json_output(self, capsys, ferro):
        code, out, _ = run(
            capsys, "mc", "--instance", ferro, "--i", "0", "--j", "2",
            "--samples", "20000", "--seed", "1", "--out", "json",
        )
        assert code == 0
        doc = json.loads(out)
        assert abs(doc["z_score"]) <= 4.0
        assert doc["mean"] == pytest.approx(doc["exact"], abs=6 * doc["std_error"])

    def test_draws_seed_when_absent(self, capsys, single_edge):
        code, _, err = run(
            capsys, "mc", "--instance", single_edge, "--i", "0", "--j", "1",
            "--samples", "5000",
        )
        assert code == 0 and err.startswith("seed: ")

    def test_inconclusive_exit_5(self, capsys, tmp_path):
        inst = write_json(tmp_path, "hard.json", {"J": [0.5], "h": [3.0, 3.0]})
        codes = set()
        for seed in range(40):
            code, _, err = run(
                capsys, "mc", "--instance", inst, "--i", "0", "--j", "1",
                "--samples", "8", "--seed", str(seed),
            )
            codes.add(code)
            if code == 5:
                break
        assert 5 in codes

    def test_high_z_exit_5(self, capsys, single_edge, monkeypatch):
        def fake(params, i, j, samples, seed):
            return McEstimate(mean=2.0, std_error=1e-6, samples=samples)

        monkeypatch.setattr("isingchain.cli.mc_switching_covariance", fake)
        code, _, err = run(
            capsys, "mc", "--instance", single_edge, "--i", "0", "--j", "1",
            "--samples", "10", "--seed", "0",
        )
        assert code == 5 and "mc inconsistency" in err

    def test_validation(self, capsys, single_edge):
        assert (
            run(capsys, "mc", "--instance", single_edge, "--i", "0", "--j", "1",
                "--samples", "0", "--seed", "1")[0]
            == 3
        )
        assert run(capsys, "mc", "--instance", single_edge, "--seed", "1")[0] == 2


class TestDecay:
    def test_constant_chain_rates(self, capsys, tmp_path):
        spec = write_json(
            tmp_path,
            "spec.json",
            {
                "n_sites": 8,
                "J": {"type": "constant", "value": 1.0},
                "h": {"type": "constant", "value": 0.0},
                "seed": 1,
            },
        )
        code, out, err = run(capsys, "decay", "--spec", spec)
        assert code == 0 and err == ""
        header, rows = csv_rows(out)
        assert header == ["distance", "rate", "bound_rate", "flag"]
        assert [row[0] for row in rows] == [str(d) for d in range(1, 8)]
        expect = -math.log(math.tanh(1.0))
        for row in rows:
            assert float(row[1]) == pytest.approx(expect, rel=1e-12)
            assert row[3] == "ok"
            assert float(row[1]) >= float(row[2]) - 1e-12

    def test_random_spec_no_violations(self, capsys, tmp_path):
        spec = write_json(tmp_path, "spec.json", {"n_sites": 9, "seed": 4})
        code, out, _ = run(capsys, "decay", "--spec", spec)
        assert code == 0
        _, rows = csv_rows(out)
        assert all(row[3] in ("ok", "no_rate") for row in rows)

    def test_uniform_field_speeds_decay(self, capsys, tmp_path):
        base = {
            "n_sites": 7,
            "J": {"type": "constant", "value": 0.8},
            "seed": 3,
        }
        zero = write_json(
            tmp_path, "zero.json", {**base, "h": {"type": "constant", "value": 0.0}}
        )
        field = write_json(
            tmp_path, "field.json", {**base, "h": {"type": "constant", "value": 0.5}}
        )
        _, out_zero, _ = run(capsys, "decay", "--spec", zero)
        _, out_field, _ = run(capsys, "decay", "--spec", field)
        rates_zero = [float(r[1]) for r in csv_rows(out_zero)[1]]
        rates_field = [float(r[1]) for r in csv_rows(out_field)[1]]
        assert all(f >= z - 1e-12 for z, f in zip(rates_zero, rates_field))

    def test_distances_flag(self, capsys, tmp_path):
        spec = write_json(tmp_path, "spec.json", {"n_sites": 8, "seed": 1})
        code, out, _ = run(capsys, "decay", "--spec", spec, "--distances", "2,5")
        assert code == 0
        _, rows = csv_rows(out)
        assert [row[0] for row in rows] == ["2", "5"]

    def test_n_sites_override(self, capsys, tmp_path):
        spec = write_json(tmp_path, "spec.json", {"n_sites": 8, "seed": 1})
        code, out, _ = run(capsys, "decay", "--spec", spec, "--n-sites", "4")
        assert code == 0
        _, rows = csv_rows(out)
        assert len(rows) == 3

    def test_json_output(self, capsys, tmp_path):
        spec = write_json(tmp_path, "spec.json", {"n_sites": 5, "seed": 2})
        code, out, _ = run(capsys, "decay", "--spec", spec, "--out", "json")
        assert code == 0
        doc = json.loads(out)
        assert doc["seed"] == 2 and len(doc["rows"]) == 4
        assert all(r["flag"] != "violation" for r in doc["rows"])

    def test_errors(self, capsys, tmp_path):
        spec = write_json(tmp_path, "spec.json", {"n_sites": 8, "seed": 1})
        assert run(capsys, "decay", "--spec", spec, "--distances", "x")[0] == 2
        assert run(capsys, "decay", "--spec", spec, "--distances", "0")[0] == 3
        assert run(capsys, "decay", "--spec", spec, "--distances", "9")[0] == 3
        assert run(capsys, "decay", "--spec", spec, "--n-sites", "1")[0] == 3
        anti = write_json(
            tmp_path, "anti.json",
            {"n_sites": 4, "sign_flip_prob": {"J": 1.0}, "seed": 1},
        )
        assert run(capsys, "decay", "--spec", anti)[0] == 3


class TestModuleEntryPoint:
    def test_python_dash_m(self):
        proc = subprocess.run(
            [sys.executable, "-m", "isingchain", "--help"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "exact" in proc.stdout and "decay" in proc.stdout
