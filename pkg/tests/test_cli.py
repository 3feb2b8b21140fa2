import json

import pytest

from rarcheck.cli import run_cli
from rarcheck.litmus import corpus_text


@pytest.fixture()
def corpus_dir(tmp_path):
    for name in ("mp-relaxed", "mp-relacq", "lockmp", "lockmp-mutant",
                 "queue-mp", "seqlock-refine", "ticketlock-refine"):
        (tmp_path / f"{name}.lit").write_text(corpus_text(name))
    return tmp_path


def run(capsys, *argv):
    code = run_cli(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestExplore:
    def test_relacq(self, corpus_dir, capsys):
        code, out, _ = run(capsys, "explore", str(corpus_dir / "mp-relacq.lit"))
        assert code == 0
        assert "r1=1 r2=5" in out

    def test_relaxed_json(self, corpus_dir, capsys):
        code, out, _ = run(capsys, "explore", "--json",
                           str(corpus_dir / "mp-relaxed.lit"))
        assert code == 0
        doc = json.loads(out)
        assert {"verdict", "states_explored", "outcomes", "witness",
                "truncated"} <= set(doc)
        r2s = {oc["r2"] for oc in doc["outcomes"]}
        assert r2s == {0, 5}

    def test_json_stable_across_runs(self, corpus_dir, capsys):
        _, out1, _ = run(capsys, "explore", "--json",
                         str(corpus_dir / "lockmp.lit"))
        _, out2, _ = run(capsys, "explore", "--json",
                         str(corpus_dir / "lockmp.lit"))
        assert out1 == out2

    def test_jobs_flag(self, corpus_dir, capsys):
        code1, out1, _ = run(capsys, "explore", "--json", "--jobs", "3",
                             str(corpus_dir / "lockmp.lit"))
        code2, out2, _ = run(capsys, "explore", "--json",
                             str(corpus_dir / "lockmp.lit"))
        assert code1 == code2 == 0
        assert out1 == out2

    def test_queue_mp_bound_exhausted(self, corpus_dir, capsys):
        code, out, _ = run(capsys, "explore", "--json",
                           str(corpus_dir / "queue-mp.lit"))
        assert code == 2
        doc = json.loads(out)
        assert doc["truncated"] is True
        assert doc["outcomes"] == [{"r1": 1, "r2": 5}]


class TestOutline:
    def test_lockmp_valid(self, corpus_dir, capsys):
        code, out, _ = run(capsys, "outline", str(corpus_dir / "lockmp.lit"))
        assert code == 0
        for name in ("Inv", "T1@1", "T2@4", "final"):
            assert f"{name}: valid" in out

    def test_mutant_invalid_with_witness(self, corpus_dir, capsys):
        code, out, _ = run(capsys, "outline", "--json",
                           str(corpus_dir / "lockmp-mutant.lit"))
        assert code == 1
        doc = json.loads(out)
        assert doc["assertions"]["T2@2"] == "invalid"
        assert doc["witness"]


class TestHoare:
    def test_valid_triple(self, corpus_dir, capsys):
        code, out, _ = run(capsys, "hoare", str(corpus_dir / "lockmp.lit"))
        assert code == 0
        assert "valid" in out


class TestRefine:
    def test_simulation_found(self, corpus_dir, capsys):
        code, out, _ = run(capsys, "refine", "--impl", "ticketlock",
                           "--client", str(corpus_dir / "ticketlock-refine.lit"))
        assert code == 0
        assert "simulation-found" in out
        assert "trace_check" not in out or "trace-refinement" in out

    def test_mutant_counterexample(self, corpus_dir, capsys):
        code, out, _ = run(capsys, "refine", "--json", "--impl",
                           "seqlock-relaxed", "--client",
                           str(corpus_dir / "seqlock-refine.lit"))
        assert code == 1
        doc = json.loads(out)
        assert doc["verdict"] == "no-simulation"
        assert doc["witness"]


class TestOracle:
    def test_fifo(self, capsys):
        code, out, _ = run(capsys, "oracle", "fifo", "--enqs", "2")
        assert code == 0
        assert "pass" in out


class TestErrors:
    def test_unknown_flag(self, capsys):
        code, _, err = run(capsys, "explore", "--nope", "x")
        assert code == 3

    def test_missing_file(self, capsys):
        code, _, err = run(capsys, "explore", "does-not-exist.lit")
        assert code == 3
        assert "error" in err

    def test_parse_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.lit"
        bad.write_text("name t\nthread 1 { x := }\n")
        code, _, err = run(capsys, "explore", str(bad))
        assert code == 3
