"""Brute-force cross-checks, independent of the view-based semantics.

The FIFO oracle runs one enqueuer and one dequeuer against a plain
sequential queue under every interleaving of the two call sequences and
compares the dequeue-result tuples with the view-based exploration.
"""

from __future__ import annotations

from .explore import explore
from .litmus import build_system, parse_litmus
from .state import EMPTY


def sequential_fifo_outcomes(enq_values, n_deqs: int):
    """Dequeue-result tuples over all interleavings, FIFO semantics."""
    results = set()

    def go(qi, di, queue, acc):
        if di == n_deqs:
            results.add(tuple(acc))
            return
        if qi < len(enq_values):
            go(qi + 1, di, queue + [enq_values[qi]], acc)
        go(qi, di + 1, queue[1:], acc + [queue[0]]) if queue else \
            go(qi, di + 1, queue, acc + [EMPTY])

    go(0, 0, [], [])
    return results


def matched_order_ok(state) -> bool:
    """Matched pairs must be order-preserving: earlier enqueues are taken
    by earlier dequeues."""
    pairs = sorted(state.matched)
    return all(e1 < e2 and d1 < d2
               for (e1, d1), (e2, d2) in zip(pairs, pairs[1:]))


def fifo_litmus(n_enqs: int) -> str:
    enqs = " ".join(f"q.enq({i});" for i in range(1, n_enqs + 1))
    deqs = " ".join(f"r{i} := q.deq();" for i in range(1, n_enqs + 1))
    return (f"name fifo-oracle-{n_enqs}\n"
            f"object queue q\n"
            f"thread 1 {{ {enqs} }}\n"
            f"thread 2 {{ {deqs} }}\n")


def fifo_check(n_enqs: int = 3, max_steps: int = 96) -> dict:
    """Explore the view-based queue and compare against the oracle."""
    system = build_system(parse_litmus(fifo_litmus(n_enqs)))
    res = explore(system.cfg0, system.ctx, max_steps)
    regs = [f"r{i}" for i in range(1, n_enqs + 1)]
    model = {tuple(oc[r] for r in regs) for oc in res.outcomes}
    oracle = sequential_fifo_outcomes(list(range(1, n_enqs + 1)), n_enqs)
    order_ok = all(matched_order_ok(cfg.beta)
                   for cfg in res.configs.values())
    ok = model == oracle and order_ok and not res.truncated
    return {
        "verdict": "pass" if ok else "fail",
        "states_explored": res.states_explored,
        "truncated": res.truncated,
        "matched_order_preserving": order_ok,
        "model_outcomes": sorted(map(repr, model)),
        "oracle_outcomes": sorted(map(repr, oracle)),
        "model_minus_oracle": sorted(map(repr, model - oracle)),
        "oracle_minus_model": sorted(map(repr, oracle - model)),
    }
