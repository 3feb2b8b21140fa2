import pytest

from rarcheck.assertions import (AndA, BoolA, DefVar, LocalPred, ProofOutline)
from rarcheck.explore import (Configuration, SystemContext, check_hoare,
                              check_outline, explore, successors)
from rarcheck.litmus import build_system, load_corpus
from rarcheck.program import Bin, Bot, Labeled, Lit, Var
from rarcheck.state import canonical_key, make_init_states


def mp_system(name="mp-relacq"):
    return build_system(load_corpus(name))


class TestSuccessors:
    def test_terminal_has_none(self):
        rho, g, b = make_init_states([("d", 0)], {"d"}, None, {1})
        ctx = SystemContext([1], (0,), {"d"}, set())
        cfg = Configuration({1: Bot()}, rho, g, b)
        assert successors(cfg, ctx) == []

    def test_lock_client_init_has_two(self):
        system = build_system(load_corpus("lockmp"))
        succ = successors(system.cfg0, system.ctx)
        assert len(succ) == 2
        assert {t for t, _, _ in succ} == {1, 2}
        assert all("acquire" in lab.render() for _, lab, _ in succ)

    def test_unreadable_value_filtered(self):
        system = mp_system("mp-relaxed")
        succ = successors(system.cfg0, system.ctx)
        # thread 2's first read can only return the initial flag value
        reads = [(t, lab) for t, lab, _ in succ if t == 2]
        assert len(reads) == 1
        assert "rdA(f,0)" in reads[0][1].render()

    def test_deterministic_order(self):
        system = mp_system()
        a = [(t, lab.render()) for t, lab, _ in
             successors(system.cfg0, system.ctx)]
        b = [(t, lab.render()) for t, lab, _ in
             successors(system.cfg0, system.ctx)]
        assert a == b


class TestExplore:
    def test_relaxed_mp_outcomes(self):
        system = mp_system("mp-relaxed")
        res = explore(system.cfg0, system.ctx, 64)
        assert {tuple(sorted(o.items())) for o in res.outcomes} == {
            (("r2", 0),), (("r2", 5),)}
        assert not res.truncated

    def test_relacq_mp_single_outcome(self):
        system = mp_system("mp-relacq")
        res = explore(system.cfg0, system.ctx, 64)
        assert res.outcomes == [{"r1": 1, "r2": 5}]
        assert not res.truncated

    def test_lock_client_outcomes(self):
        system = build_system(load_corpus("lockmp"))
        res = explore(system.cfg0, system.ctx, 64)
        assert res.outcomes == [{"r1": 0, "r2": 0}, {"r1": 5, "r2": 5}]

    def test_monotone_in_bound(self):
        system = build_system(load_corpus("queue-mp"))
        small = explore(system.cfg0, system.ctx, 24)
        large = explore(system.cfg0, system.ctx, 40)
        def keyset(res):
            return {tuple(sorted(o.items())) for o in res.outcomes}
        assert keyset(small) <= keyset(large)

    def test_invalid_bound(self):
        system = mp_system()
        with pytest.raises(ValueError):
            explore(system.cfg0, system.ctx, 0)

    def test_jobs_identical(self):
        system = build_system(load_corpus("lockmp"))
        seq = explore(system.cfg0, system.ctx, 64)
        par = explore(system.cfg0, system.ctx, 64, jobs=4)
        assert seq.outcomes == par.outcomes
        assert seq.states_explored == par.states_explored
        assert set(seq.configs) == set(par.configs)

    def test_witness_replay_determinacy(self):
        system = build_system(load_corpus("lockmp"))
        res = explore(system.cfg0, system.ctx, 64)
        key = res.terminal_keys[0]
        path = res.witness_path(key)
        cfg = system.cfg0
        for step in path:
            matches = [nxt for t, lab, nxt in successors(cfg, system.ctx)
                       if t == step["thread"]
                       and lab.render() == step["label"]]
            assert len(matches) == 1
            cfg = matches[0]
        assert cfg.key() == key


class TestCanonicalKey:
    def test_reflexive(self):
        system = mp_system()
        assert canonical_key(system.cfg0) == canonical_key(system.cfg0)

    def test_timestamp_scaling_is_isomorphic(self):
        system = build_system(load_corpus("lockmp"))
        res = explore(system.cfg0, system.ctx, 64)
        cfg = res.configs[res.terminal_keys[0]]
        scaled = _rescale(cfg, lambda q: 3 * q + 7)
        assert canonical_key(scaled) == canonical_key(cfg)

    def test_order_swap_changes_key(self):
        system = build_system(load_corpus("lockmp"))
        res = explore(system.cfg0, system.ctx, 64)
        cfg = next(c for c in res.configs.values()
                   if len({op.ts for op in c.gamma.ops}) >= 3)
        times = sorted({op.ts for op in cfg.gamma.ops})
        lo, hi = times[1], times[2]
        swap = {lo: hi, hi: lo}
        swapped = _rescale(cfg, lambda q: swap.get(q, q), component="gamma")
        assert canonical_key(swapped) != canonical_key(cfg)


def _rescale(cfg, f, component=None):
    from rarcheck.state import ComponentState, TOp

    def remap_side(state, apply):
        if not apply:
            return state
        table = {}

        def op2(op):
            if op not in table:
                table[op] = TOp(op.action, f(op.ts))
            return table[op]

        def view(v):
            return {x: op2(op) if op in state.ops else op
                    for x, op in v.items()}

        # cross-component view entries keep their original ops
        ops2 = frozenset(op2(op) for op in state.ops)
        tview2 = {t: view(v) for t, v in state.tview.items()}
        mview2 = {op2(op): view(v) for op, v in state.mview.items()}
        cvd2 = frozenset(op2(op) for op in state.cvd)
        matched2 = frozenset((f(a), f(b)) for a, b in state.matched)
        return ComponentState(ops2, tview2, mview2, cvd2, matched2)

    gamma = remap_side(cfg.gamma, component in (None, "gamma"))
    beta = remap_side(cfg.beta, component in (None, "beta"))
    if component is None:
        # remap cross-component references in mviews as well
        gamma, beta = _fix_cross(gamma, beta, f), _fix_cross(beta, gamma, f)
    return Configuration(cfg.prog, cfg.rho, gamma, beta)


def _fix_cross(state, other, f):
    from rarcheck.state import ComponentState, TOp
    other_vars = {op.action.var for op in other.ops}

    def view(v):
        return {x: (TOp(op.action, f(op.ts)) if x in other_vars else op)
                for x, op in v.items()}

    mview2 = {op: view(v) for op, v in state.mview.items()}
    return ComponentState(state.ops, state.tview, mview2, state.cvd,
                          state.matched)


class TestCheckHoare:
    def test_trivial(self):
        rho, g, b = make_init_states([], set(), None, {1})
        ctx = SystemContext([1], (0,), set(), set())
        cfg = Configuration({1: Labeled(1, Bot())}, rho, g, b)
        rep = check_hoare(cfg, ctx, BoolA(True), BoolA(True), 8)
        assert rep.verdict == "valid"

    def test_lock_client_valid(self):
        system = build_system(load_corpus("lockmp"))
        rep = check_hoare(system.cfg0, system.ctx, None,
                          system.outline.final, 64)
        assert rep.verdict == "valid"

    def test_wrong_post_has_witness(self):
        system = build_system(load_corpus("lockmp"))
        bad = AndA((LocalPred(Bin("=", Var("r1"), Lit(5))),
                    LocalPred(Bin("=", Var("r2"), Lit(0)))))
        rep = check_hoare(system.cfg0, system.ctx, None, bad, 64)
        assert rep.verdict == "invalid"
        assert rep.witness

    def test_unsatisfied_pre_is_vacuous(self):
        system = build_system(load_corpus("lockmp"))
        rep = check_hoare(system.cfg0, system.ctx, BoolA(False),
                          BoolA(False), 64)
        assert rep.verdict == "valid"


class TestCheckOutline:
    def test_fig_outline_valid(self):
        system = build_system(load_corpus("lockmp"))
        rep = check_outline(system.cfg0, system.ctx, system.outline, 64)
        assert rep.valid
        assert set(rep.verdicts) == {
            "Inv", "final",
            "T1@1", "T1@2", "T1@3", "T1@4",
            "T2@1", "T2@2", "T2@3", "T2@4"}

    def test_weakened_annotation_still_valid(self):
        # dropping a conjunct weakens the annotation: reachability-checking
        # cannot fail, documenting the under-approximation
        system = build_system(load_corpus("lockmp"))
        anns = {t: dict(d) for t, d in system.outline.annotations.items()}
        q2 = anns[2][2]
        anns[2][2] = q2.items[0]  # keep only the first-acquirer implication
        weakened = ProofOutline(anns, system.outline.invariant,
                                system.outline.final)
        rep = check_outline(system.cfg0, system.ctx, weakened, 64)
        assert rep.valid

    def test_false_at_init_invalid(self):
        system = build_system(load_corpus("lockmp"))
        anns = {t: dict(d) for t, d in system.outline.annotations.items()}
        anns[2][1] = DefVar(2, "d1", Lit(5))
        broken = ProofOutline(anns, system.outline.invariant,
                              system.outline.final)
        rep = check_outline(system.cfg0, system.ctx, broken, 64)
        assert rep.verdicts["T2@1"].verdict == "invalid"
        assert rep.verdicts["T2@1"].witness == []  # fails at the start

    def test_mutant_file_yields_witness(self):
        system = build_system(load_corpus("lockmp-mutant"))
        rep = check_outline(system.cfg0, system.ctx, system.outline, 64)
        assert not rep.valid
        bad = rep.verdicts["T2@2"]
        assert bad.verdict == "invalid"
        assert bad.witness  # concrete path to the violation

    def test_quantified_invariant(self):
        from rarcheck.litmus import Parser
        system = build_system(load_corpus("lockmp"))
        inv = Parser("forall v in {0,5}: "
                     "(dobs(1, d1=v) => pobs(1, d1=v))").parse_assertion()
        outline = ProofOutline({}, invariant=inv)
        rep = check_outline(system.cfg0, system.ctx, outline, 64)
        assert rep.verdicts["Inv"].verdict == "valid"
        bogus = Parser("exists v in {7,8}: pobs(1, d1=v)").parse_assertion()
        rep2 = check_outline(system.cfg0, system.ctx,
                             ProofOutline({}, invariant=bogus), 64)
        assert rep2.verdicts["Inv"].verdict == "invalid"
