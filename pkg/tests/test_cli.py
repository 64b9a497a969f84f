import json
import re
from pathlib import Path

import jsonschema
import pytest

from bpucoh import cli, specseq

SCHEMA = json.loads((Path(__file__).parents[1] / "docs" / "report.schema.json").read_text())


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--format", "json", "--quiet")
    data = json.loads(out)
    jsonschema.validate(data, SCHEMA)
    return code, data


class TestTable:
    def test_small_case_text(self, capsys):
        code, out, _ = run(capsys, "table", "--p", "3", "--n", "3")
        assert code == 0
        rows = {int(m.group(1)): m.group(2) for m in re.finditer(r"^\s*(\d+)\s+(\S+)", out, re.M)}
        assert rows[3] == "Z/3" and rows[8] == "Z/3"
        assert all(v == "0" for s, v in rows.items() if s not in (3, 8))

    def test_degenerate_json(self, capsys):
        code, data = run_json(capsys, "table", "--p", "5", "--n", "6")
        assert code == 0
        rows = data["result"]["rows"]
        assert len(rows) == 15 and all(r["torsion"] == [] for r in rows)
        assert data["config"]["p"] == [5] and data["tool_version"]

    def test_text_and_json_agree(self, capsys):
        _, out, _ = run(capsys, "table", "--p", "3", "--n", "6", "--quiet")
        _, data = run_json(capsys, "table", "--p", "3", "--n", "6")
        text_rows = re.findall(r"^\s*(\d+)\s+(\S+)\s+(\d+)\s+(.*)$", out, re.M)
        assert len(text_rows) == len(data["result"]["rows"])
        for (s, tor, free, note), row in zip(text_rows, data["result"]["rows"]):
            assert int(s) == row["s"]
            assert tor == (" + ".join(f"Z/{t}" for t in row["torsion"]) or "0")
            assert int(free) == row["free_rank"]
            assert note == row["note"]

    def test_json_roundtrip(self, capsys):
        _, data = run_json(capsys, "table", "--p", "3", "--n", "3")
        assert json.loads(json.dumps(data)) == data


class TestUsageErrors:
    def test_p_two(self, capsys):
        code, _, err = run(capsys, "table", "--p", "2", "--n", "4")
        assert code == 2 and "p > 2" in err

    @pytest.mark.parametrize("argv", [
        ["table", "--p", "9", "--n", "3"],
        ["table", "--p", "17", "--n", "17"],
        ["table", "--p", "3", "--n", "201"],
        ["table", "--p", "3", "--n", "0"],
        ["verify", "--p", "3", "--n-multiples", "0"],
    ])
    def test_caps_and_ranges(self, capsys, argv):
        assert run(capsys, *argv)[0] == 2

    def test_raise_n_cap(self, capsys):
        assert run(capsys, "table", "--p", "3", "--n", "4", "--max-n", "3")[0] == 2
        assert run(capsys, "table", "--p", "3", "--n", "4", "--max-n", "4", "--quiet")[0] == 0

    def test_argparse_errors_exit_two(self, capsys):
        with pytest.raises(SystemExit) as info:
            cli.main(["table", "--p", "three", "--n", "3"])
        assert info.value.code == 2


class TestComplex:
    def test_small_case(self, capsys):
        code, data = run_json(capsys, "complex", "--p", "3", "--n", "3")
        res = data["result"]
        assert code == 0
        assert res["d0"] == [[12, 2, 0, 0], [0, 6, 1, 4], [0, 0, 3, 0]]
        assert res["d1"] == [[0, 0, 1]]
        assert res["exactness"]["exact_at_M1"] and res["exactness"]["exact_at_M2"]

    def test_second_case_exact(self, capsys):
        _, out, _ = run(capsys, "complex", "--p", "3", "--n", "6")
        assert "exact at M1: True   exact at M2: True" in out

    def test_degenerate_message(self, capsys):
        code, out, _ = run(capsys, "complex", "--p", "3", "--n", "4")
        assert code == 0 and "M2 and M3 vanish" in out


class TestVerify:
    def test_sweep(self, capsys):
        code, data = run_json(capsys, "verify", "--p", "3,5", "--n-multiples", "2")
        assert code == 0
        assert [(pr["p"], pr["n"]) for pr in data["result"]["pairs"]] == [(3, 3), (3, 6), (5, 5), (5, 10)]
        assert data["result"]["summary"]["failed"] == 0

    def test_non_dividing_pair_runs_reduced_suite(self, capsys):
        _, data = run_json(capsys, "verify", "--p", "3", "--n", "4")
        names = [c["name"] for c in data["result"]["pairs"][0]["checks"]]
        assert "y_killed" in names and "chain_law" not in names

    def test_injected_fault_fails(self, capsys, monkeypatch):
        monkeypatch.setattr(specseq, "divergence_torus", lambda f: f)
        code, out, _ = run(capsys, "verify", "--p", "3", "--n", "3")
        assert code == 1
        assert re.search(r"\[FAIL\] delta1_value", out)


def test_invariant_violation_exit_code(capsys, monkeypatch):
    monkeypatch.setattr(specseq, "binom_mod_p", lambda n, k, p: 1)
    code, _, err = run(capsys, "table", "--p", "3", "--n", "3")
    assert code == 1 and "invariant violation" in err


class TestDiff:
    def test_d0(self, capsys):
        code, out, _ = run(capsys, "diff", "--op", "d0", "--expr", "c1*c3", "--p", "3", "--n", "3")
        assert code == 0 and "(c1*c2 + 3*c3)*x1" in out

    def test_d1(self, capsys):
        _, data = run_json(capsys, "diff", "--op", "d1", "--expr", "c3", "--p", "3", "--n", "3")
        assert data["result"]["value"] == "1*c1*y_p0"
        assert "C(n-1,p-1)" in data["result"]["provenance"]

    def test_d2(self, capsys):
        _, data = run_json(capsys, "diff", "--op", "d2", "--p", "3", "--n", "6")
        assert data["result"]["value"] == "0"

    def test_parse_error_has_position(self, capsys):
        code, _, err = run(capsys, "diff", "--op", "d0", "--expr", "c1*c$", "--p", "3", "--n", "3")
        assert code == 2 and "position 4" in err

    def test_degree_error(self, capsys):
        code, _, err = run(capsys, "diff", "--op", "d1", "--expr", "c1", "--p", "3", "--n", "3")
        assert code == 2 and "degree 6" in err

    def test_missing_expr(self, capsys):
        assert run(capsys, "diff", "--op", "d0", "--p", "3", "--n", "3")[0] == 2


class TestCache:
    def test_hit_is_byte_identical(self, capsys, tmp_path, monkeypatch):
        _, cold = run_json(capsys, "complex", "--p", "5", "--n", "5", "--cache-dir", str(tmp_path))
        files = list(tmp_path.iterdir())
        assert len(files) == 1
        before = files[0].read_bytes()
        monkeypatch.setattr(cli, "complex_payload", lambda p, n: pytest.fail("cache miss"))
        _, warm = run_json(capsys, "complex", "--p", "5", "--n", "5", "--cache-dir", str(tmp_path))
        assert files[0].read_bytes() == before
        assert cli.canonical_json(warm["result"]) == cli.canonical_json(cold["result"]) == before.decode()

    def test_env_var(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("BPUCOH_CACHE_DIR", str(tmp_path))
        run(capsys, "table", "--p", "3", "--n", "3", "--quiet")
        assert [f.name.startswith("table-") for f in tmp_path.iterdir()] == [True]

    def test_keys_separate_inputs(self, capsys, tmp_path):
        for n in ("3", "6"):
            run(capsys, "table", "--p", "3", "--n", n, "--quiet", "--cache-dir", str(tmp_path))
        run(capsys, "diff", "--op", "d1", "--expr", "c3", "--p", "3", "--n", "3", "--quiet", "--cache-dir", str(tmp_path))
        run(capsys, "diff", "--op", "d1", "--expr", "c1^3", "--p", "3", "--n", "3", "--quiet", "--cache-dir", str(tmp_path))
        names = sorted(f.name for f in tmp_path.iterdir())
        assert len(names) == 4 and not any(n.startswith(".tmp") for n in names)
