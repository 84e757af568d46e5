import csv
import io
import json
import subprocess
import sys


from hnlab.cli import main, run

RAYNAUD_CASE = {
    "fe_profile": {"pieces": [{"rank": 2, "degree": "24"}, {"rank": 1, "degree": "6"}]},
    "base_profile": {"pieces": [{"rank": 1, "degree": "4"}, {"rank": 2, "degree": "6"}]},
    "p": 3,
    "s": 0,
}


def write(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(data if isinstance(data, str) else json.dumps(data))
    return str(path)


def invoke(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestProfileCheck:
    def test_valid(self, tmp_path, capsys):
        path = write(tmp_path, "v.json", {"pieces": [{"rank": 1, "degree": "4"}, {"rank": 2, "degree": "6"}]})
        code, out, _ = invoke(capsys, "--format", "json", "profile", "check", path)
        assert code == 0
        rows = json.loads(out)
        assert rows[0]["instability"] == "1/1"
        assert rows[1]["gap"] == "1/1"

    def test_non_decreasing(self, tmp_path, capsys):
        path = write(tmp_path, "bad.json", {"pieces": [{"rank": 1, "degree": "1"}, {"rank": 1, "degree": "2"}]})
        code, _, err = invoke(capsys, "profile", "check", path)
        assert code == 2
        assert "1" in err and "2" in err

    def test_bad_fraction(self, tmp_path, capsys):
        path = write(tmp_path, "bad.json", {"pieces": [{"rank": 1, "degree": "3/0"}]})
        assert invoke(capsys, "profile", "check", path)[0] == 65

    def test_bad_json(self, tmp_path, capsys):
        assert invoke(capsys, "profile", "check", write(tmp_path, "x.json", "{nope"))[0] == 65

    def test_missing_file(self, tmp_path, capsys):
        assert invoke(capsys, "profile", "check", str(tmp_path / "absent.json"))[0] == 64


class TestBounds:
    def test_lemma1_raynaud(self, tmp_path, capsys):
        path = write(tmp_path, "case.json", RAYNAUD_CASE)
        code, out, _ = invoke(capsys, "bounds", path, "--bound", "lemma1", "--mu-max-omega", "6", "--format", "json")
        assert code == 0
        (rep,) = json.loads(out)
        assert rep == {"lhs": "6/1", "rhs": "6/1", "holds": True, "slack": "0/1", "hypothesis_ok": True,
                       "name": "lemma1"}

    def test_threshold_is_informational(self, tmp_path, capsys):
        path = write(tmp_path, "case.json", RAYNAUD_CASE)
        code, out, _ = invoke(capsys, "--format", "json", "bounds", path, "--bound", "threshold-t1",
                              "--mu-max-omega", "6")
        assert code == 0
        (rep,) = json.loads(out)
        assert rep["hypothesis_ok"] is False and rep["lhs"] == "81/2"

    def test_missing_mu(self, tmp_path, capsys):
        path = write(tmp_path, "case.json", RAYNAUD_CASE)
        assert invoke(capsys, "bounds", path, "--bound", "lemma1")[0] == 64

    def test_failing_bound_exits_3(self, tmp_path, capsys):
        case = dict(RAYNAUD_CASE, fe_profile={"pieces": [{"rank": 1, "degree": "40"}, {"rank": 2, "degree": "0"}]})
        path = write(tmp_path, "case.json", case)
        assert invoke(capsys, "bounds", path, "--bound", "lemma1", "--mu-max-omega", "6")[0] == 3

    def test_flags_only(self, capsys):
        code, out, _ = invoke(capsys, "bounds", "--bound", "threshold-behrend", "--rank-g", "2", "--dim-adjoint", "3",
                              "--coxeter-h", "3", "--mu-max-omega", "0", "--p", "13", "--format", "json")
        assert code == 0 and json.loads(out)[0]["lhs"] == "12/1"

    def test_embedding(self, capsys):
        code, out, _ = invoke(capsys, "bounds", "--bound", "embedding", "--dim", "2", "--mu-max-omega", "5",
                              "--mu-omega", "3", "--deg-O2", "10", "--rank-M1", "1", "--format", "json")
        assert code == 0 and json.loads(out)[0]["rhs"] == "16/1"

    def test_drift(self, tmp_path, capsys):
        case = {"level_profile": RAYNAUD_CASE["fe_profile"], "base_profile": RAYNAUD_CASE["base_profile"],
                "p": 3, "m": 2, "marking": {"1": 1, "2": 2}}
        path = write(tmp_path, "case.json", case)
        code, out, _ = invoke(capsys, "--format", "json", "bounds", path, "--bound", "drift-pp8", "--mu-max-omega", "6")
        assert code == 0
        assert [r["lhs"] for r in json.loads(out)] == ["0/1", "15/1"]

    def test_t5_and_cc1(self, tmp_path, capsys):
        tower = {"base": RAYNAUD_CASE["base_profile"], "p": 3,
                 "levels": [RAYNAUD_CASE["fe_profile"]], "strongly_semistable_at": 1}
        path = write(tmp_path, "case.json", {"tower": tower})
        code, out, _ = invoke(capsys, "--format", "json", "bounds", path, "--bound", "t5", "--mu-max-omega", "6",
                              "--l", "1", "--s", "0")
        assert code == 0
        assert json.loads(out)[0]["slack"] == "1/1"
        assert invoke(capsys, "bounds", path, "--bound", "cc1")[0] == 2

    def test_case_list(self, tmp_path, capsys):
        path = write(tmp_path, "cases.json", {"cases": [RAYNAUD_CASE, dict(RAYNAUD_CASE, s=1)]})
        code, out, _ = invoke(capsys, "--format", "json", "bounds", path, "--bound", "sun", "--mu-max-omega", "6")
        # s=1 drops the Omega term: rhs = 3 * 1 < 6
        assert code == 3
        assert [r["holds"] for r in json.loads(out)] == [True, False]

    def test_bad_bound_name(self, capsys):
        assert invoke(capsys, "bounds", "--bound", "nope")[0] == 64


class TestCurveAndExamples:
    def test_curve(self, capsys):
        code, out, _ = invoke(capsys, "curve", "--d", "4", "--p", "5", "--variant", "fermat", "--format", "json")
        assert code == 0
        (row,) = json.loads(out)
        assert (row["e_hk"], row["s1"], row["l1"], row["deg_L1"], row["I"]) == ("76/25", 1, 4, "-8/1", 4)

    def test_curve_oracle(self, capsys, tmp_path):
        code, out, _ = invoke(capsys, "curve", "--d", "4", "--p", "5", "--oracle", "--e-list", "1,2",
                              "--cache", str(tmp_path), "--format", "json")
        assert code == 0
        fit = json.loads(out)[-1]
        assert fit["section"] == "fit" and fit["a"] == "73/24" and fit["a-closed_form"] == "1/600"

    def test_odd_degree(self, capsys):
        assert invoke(capsys, "curve", "--d", "5", "--p", "5", "--variant", "fermat")[0] == 64

    def test_congruence_fail_and_force(self, capsys):
        assert invoke(capsys, "curve", "--d", "4", "--p", "7")[0] == 64
        code, out, _ = invoke(capsys, "curve", "--d", "4", "--p", "7", "--force", "--format", "json")
        assert code == 0 and "warning" in json.loads(out)[0]

    def test_sweep(self, capsys):
        code, out, _ = invoke(capsys, "curve", "--d", "4", "--variant", "cyclic", "--sweep-primes", "20",
                              "--format", "json")
        rows = json.loads(out)
        assert [r["p"] for r in rows if r["congruence"]] == [3, 11, 17]

    def test_raynaud(self, capsys):
        code, out, _ = invoke(capsys, "example", "raynaud", "--p", "3", "--k", "1", "--format", "json")
        assert code == 0
        verdict = json.loads(out)[2]
        assert verdict["refines"] is False and verdict["witness"] == [1, "12/1"]
        assert verdict["threshold_met"] is False

    def test_raynaud_even_prime(self, capsys):
        assert invoke(capsys, "example", "raynaud", "--p", "2")[0] == 64

    def test_monsky_w(self, capsys):
        code, out, _ = invoke(capsys, "example", "monsky-w", "--d", "8", "--p", "7", "--delta", "1", "--format", "json")
        rows = json.loads(out)
        assert code == 0
        assert any(r["section"] == "warning" for r in rows)

    def test_tower(self, tmp_path, capsys):
        base = {"pieces": [{"rank": 1, "degree": "1"}, {"rank": 1, "degree": "0"}]}
        level = {"pieces": [{"rank": 1, "degree": "5"}, {"rank": 1, "degree": "0"}]}
        path = write(tmp_path, "t.json", {"base": base, "p": 5, "levels": [level], "strongly_semistable_at": 1})
        code, out, _ = invoke(capsys, "tower", path, "--format", "json")
        rows = json.loads(out)
        assert code == 0
        assert rows[-1]["name"] == "cc1-equality[k=1]" and rows[-1]["holds"] is True


class TestRendering:
    ARGV = ["example", "raynaud", "--p", "5", "--k", "2"]

    def test_json_round_trip(self):
        text, _ = run(self.ARGV + ["--format", "json"])
        assert json.dumps(json.loads(text), indent=2) + "\n" == text

    def test_csv_matches_json(self):
        json_text, _ = run(["bounds", "--bound", "threshold-t1", "--rank", "3", "--mu-max-omega", "6", "--p", "3",
                            "--format", "json"])
        csv_text, _ = run(["bounds", "--bound", "threshold-t1", "--rank", "3", "--mu-max-omega", "6", "--p", "3",
                           "--format", "csv"])
        (j,) = json.loads(json_text)
        (c,) = list(csv.DictReader(io.StringIO(csv_text)))
        assert c["lhs"] == j["lhs"] == "81/2" and c["rhs"] == j["rhs"] == "3/1"

    def test_table_marks_decimals(self):
        text, _ = run(["curve", "--d", "4", "--p", "5"])
        assert "76/25 (~3.04)" in text

    def test_deterministic(self):
        assert run(self.ARGV + ["--format", "json"]) == run(self.ARGV + ["--format", "json"])

    def test_global_flags_after_command(self):
        assert run(["--format", "json"] + self.ARGV) == run(self.ARGV + ["--format", "json"])


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hnlab", "example", "raynaud", "--p", "2"], capture_output=True)
    assert proc.returncode == 64
    proc = subprocess.run([sys.executable, "-m", "hnlab", "--format", "json", "curve", "--d", "4", "--p", "11",
                           "--variant", "cyclic"], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)[0]["e_hk"] == "364/121"
