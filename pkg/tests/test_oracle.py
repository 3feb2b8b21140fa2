from rarcheck.oracle import (fifo_check, fifo_litmus, matched_order_ok,
                             sequential_fifo_outcomes)
from rarcheck.state import EMPTY


class TestSequentialOracle:
    def test_single_element(self):
        got = sequential_fifo_outcomes([1], 1)
        assert got == {(1,), (EMPTY,)}

    def test_two_elements_order(self):
        got = sequential_fifo_outcomes([1, 2], 2)
        # dequeued non-empty values always appear in enqueue order
        for tup in got:
            vals = [v for v in tup if v is not EMPTY]
            assert vals == sorted(vals)
        assert (1, 2) in got and (EMPTY, EMPTY) in got
        assert (2, 1) not in got

    def test_interleaving_count_consistency(self):
        # with 3+3 operations the oracle sees every C(6,3) = 20 interleaving
        got = sequential_fifo_outcomes([1, 2, 3], 3)
        assert (1, 2, 3) in got
        assert (EMPTY, EMPTY, EMPTY) in got
        assert (EMPTY, 1, 2) in got
        assert all(tuple(v for v in t if v is not EMPTY) ==
                   tuple(sorted(v for v in t if v is not EMPTY)) for t in got)


class TestModelAgainstOracle:
    def test_two_enqueues(self):
        res = fifo_check(2)
        assert res["verdict"] == "pass"
        assert res["model_minus_oracle"] == []
        assert res["oracle_minus_model"] == []

    def test_litmus_text_parses(self):
        from rarcheck.litmus import parse_litmus
        lf = parse_litmus(fifo_litmus(3))
        assert len(lf.threads) == 2


class TestMatchedOrder:
    def test_empty_ok(self):
        class S:
            matched = frozenset()
        assert matched_order_ok(S())

    def test_inversion_detected(self):
        class S:
            matched = frozenset({(1, 4), (2, 3)})
        assert not matched_order_ok(S())
