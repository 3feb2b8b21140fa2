"""Contextual refinement: client traces, forward simulation, trace inclusion.

The simulation game pairs configurations of the client running the concrete
implementation with configurations of the same client over the abstract
object.  A related pair must agree on client registers and return values,
have equal client covered sets, and give every thread at most the abstract
observations.  Concrete implementation steps are matched by stuttering or by
one abstract step of the same thread; client steps are matched one-to-one by
the identical client step.

Trace inclusion is checked independently by determinizing the abstract trace
graph: every stutter-free concrete client trace must be matched pointwise by
some abstract trace.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import program as P
from .explore import explore, successors
from .litmus import LitmusError, build_system
from .state import BOT, _act_key


@dataclass(frozen=True)
class LockImpl:
    """A concrete lock over plain shared variables."""

    name: str
    init: tuple  # ((variable, value), ...)
    acquire_listing: object  # verbatim body, do-until form
    release_listing: object

    def method(self, meth: str):
        if meth == "acquire":
            return P.desugar(self.acquire_listing), True
        if meth == "release":
            return P.desugar(self.release_listing), BOT
        raise LitmusError(f"lock has no method {meth!r}")


def _seqlock(releasing=True):
    r, loc = P.Var("r"), P.Var("loc")
    acquire = P.DoUntil(
        P.Seq(P.DoUntil(P.GRead("r", "glb", acquiring=True),
                        P.Bin("=", P.Bin("%", r, P.Lit(2)), P.Lit(0))),
              P.Cas("loc", "glb", r, P.Bin("+", r, P.Lit(1)))),
        loc)
    release = P.GWrite("glb", P.Bin("+", r, P.Lit(2)), releasing)
    name = "seqlock" if releasing else "seqlock-relaxed"
    return LockImpl(name, (("glb", 0),), acquire, release)


def _ticketlock(releasing=True):
    m_t, s_n = P.Var("m_t"), P.Var("s_n")
    acquire = P.Seq(P.Fai("m_t", "nt"),
                    P.DoUntil(P.GRead("s_n", "sn", acquiring=True),
                              P.Bin("=", m_t, s_n)))
    release = P.GWrite("sn", P.Bin("+", s_n, P.Lit(1)), releasing)
    name = "ticketlock" if releasing else "ticketlock-relaxed"
    return LockImpl(name, (("nt", 0), ("sn", 0)), acquire, release)


def builtin_impls() -> dict:
    """The two built-in lock implementations plus their relaxed-release
    mutants (negative tests: these must fail refinement)."""
    impls = [_seqlock(), _ticketlock(), _seqlock(False), _ticketlock(False)]
    return {i.name: i for i in impls}


# --- client-state projection and refinement ----------------------------------

def _client_regs(system):
    return {t: frozenset(r for r in regs if r != "rval")
            for t, regs in system.client_locals.items()}


def _locals_part(cfg, client_regs):
    return tuple(
        (t, tuple(sorted((r, _vk(cfg.rho[t].get(r))) for r in client_regs[t])))
        for t in sorted(cfg.rho))


def _vk(v):
    from .state import Sym
    if v is None:
        return ("n",)
    if isinstance(v, Sym):
        return ("s", v.name)
    return ("v", v)


def _gamma_sig(cfg, threads):
    """Observability content of the client state with canonical op keys."""
    gamma = cfg.gamma
    ranks = {}
    for x in {op.action.var for op in gamma.ops}:
        for i, op in enumerate(sorted(gamma.ops_on(x), key=lambda o: o.ts)):
            ranks[op] = (x, i, _act_key(op.action))
    ops_k = frozenset(ranks.values())
    cvd_k = frozenset(ranks[op] for op in gamma.cvd)
    obs_k = {}
    for t in threads:
        for x in gamma.tview.get(t, {}):
            obs_k[(t, x)] = frozenset(ranks[op] for op in gamma.obs(t, x))
    return ops_k, cvd_k, obs_k


def project(cfg, client_regs, threads):
    """The client-visible part of a configuration."""
    ops_k, cvd_k, obs_k = _gamma_sig(cfg, threads)
    return (_locals_part(cfg, client_regs), ops_k, cvd_k,
            tuple(sorted(obs_k.items())))


def project_and_destutter(execution, client_regs, threads):
    """Pointwise projection with consecutive duplicates collapsed."""
    trace = []
    for cfg in execution:
        p = project(cfg, client_regs, threads)
        if not trace or trace[-1] != p:
            trace.append(p)
    return trace


def state_refines(abs_pair, conc_pair, threads) -> bool:
    """Def of state refinement: equal client locals and covered set, and
    concrete observations contained in the abstract ones."""
    (als, agamma), (cls, cgamma) = abs_pair, conc_pair
    if als != cls:
        return False

    class _Holder:
        pass

    a, c = _Holder(), _Holder()
    a.gamma, c.gamma = agamma, cgamma
    _, acvd, aobs = _gamma_sig(a, threads)
    _, ccvd, cobs = _gamma_sig(c, threads)
    if acvd != ccvd:
        return False
    for key, cset in cobs.items():
        if not cset <= aobs.get(key, frozenset()):
            return False
    return True


def _letter_refines(aproj, cproj) -> bool:
    """Pointwise trace-element refinement on projections."""
    als, aops, acvd, aobs = aproj
    cls, cops, ccvd, cobs = cproj
    if als != cls or acvd != ccvd:
        return False
    aobs_d = dict(aobs)
    return all(cset <= aobs_d.get(key, frozenset()) for key, cset in cobs)


def _rvals(cfg):
    return tuple((t, _vk(ls.get("rval"))) for t, ls in sorted(cfg.rho.items()))


def _condition1(acfg, ccfg, client_regs, threads) -> bool:
    if _locals_part(acfg, client_regs) != _locals_part(ccfg, client_regs):
        return False
    if _rvals(acfg) != _rvals(ccfg):
        return False
    _, acvd, aobs = _gamma_sig(acfg, threads)
    _, ccvd, cobs = _gamma_sig(ccfg, threads)
    if acvd != ccvd:
        return False
    for key, cset in cobs.items():
        if not cset <= aobs.get(key, frozenset()):
            return False
    return True


# --- the simulation game ------------------------------------------------------

def _is_impl_step(label) -> bool:
    return label.component == "library" or label.at_hole


def _client_core(label):
    return (repr(label.action), label.rank) if label.action is not None \
        else ("eps",)


def check_sync_free(system):
    """Synchronisation-free clients: no release/acquire annotations and no
    read-modify-writes outside the library."""
    for t, prog in system.cfg0.prog.items():
        _walk_client(prog, t)


def _walk_client(cmd, t):
    if isinstance(cmd, (P.Labeled,)):
        _walk_client(cmd.cmd, t)
    elif isinstance(cmd, P.Seq):
        _walk_client(cmd.a, t)
        _walk_client(cmd.b, t)
    elif isinstance(cmd, P.If):
        _walk_client(cmd.then, t)
        _walk_client(cmd.other, t)
    elif isinstance(cmd, (P.While, P.DoUntil)):
        _walk_client(cmd.body if isinstance(cmd, P.While) else cmd.body, t)
    elif isinstance(cmd, P.GWrite) and cmd.releasing:
        raise LitmusError(f"client thread {t} uses a releasing write")
    elif isinstance(cmd, P.GRead) and cmd.acquiring:
        raise LitmusError(f"client thread {t} uses an acquiring read")
    elif isinstance(cmd, (P.Cas, P.Fai)):
        raise LitmusError(f"client thread {t} uses an update")
    # holes are the library's business


@dataclass
class SimulationResult:
    verdict: str  # 'simulation-found' | 'no-simulation' | 'unknown-beyond-bound'
    relation_size: int = 0
    pairs_explored: int = 0
    counterexample: list = None
    detail: str = ""

    @property
    def ok(self):
        return self.verdict == "simulation-found"


def check_simulation(impl: LockImpl, client_lf, max_steps: int = 64,
                     require_sync_free: bool = True) -> SimulationResult:
    """Play the forward-simulation game over the explored concrete space."""
    abs_sys = build_system(client_lf)
    conc_sys = build_system(client_lf, impl)
    if require_sync_free:
        check_sync_free(abs_sys)

    threads = abs_sys.ctx.threads
    client_regs = _client_regs(abs_sys)

    conc = explore(conc_sys.cfg0, conc_sys.ctx, max_steps)
    if conc.truncated:
        return SimulationResult("unknown-beyond-bound",
                                detail="concrete exploration truncated")

    # concrete edges over canonical keys
    cedges = {}
    for ck, ccfg in conc.configs.items():
        cedges[ck] = [(t, lab, nxt.key(), nxt)
                      for t, lab, nxt in successors(ccfg, conc_sys.ctx)]

    aconfigs = {abs_sys.cfg0.key(): abs_sys.cfg0}
    asuccs = {}

    def abs_successors(ak):
        if ak not in asuccs:
            lst = successors(aconfigs[ak], abs_sys.ctx)
            out = []
            for t, lab, nxt in lst:
                nk = nxt.key()
                aconfigs.setdefault(nk, nxt)
                out.append((t, lab, nk))
            asuccs[ak] = out
        return asuccs[ak]

    def cond1(ak, ck):
        return _condition1(aconfigs[ak], conc.configs[ck], client_regs,
                           threads)

    init_pair = (abs_sys.cfg0.key(), conc_sys.cfg0.key())
    if not cond1(*init_pair):
        return SimulationResult("no-simulation", counterexample=[],
                                detail="initial states unrelated")

    # forward reachability over candidate pairs
    moves = {}  # pair -> list per concrete step: (step-info, [candidate pairs])
    order = [init_pair]
    seen = {init_pair}
    qi = 0
    while qi < len(order):
        ak, ck = order[qi]
        qi += 1
        step_moves = []
        for t, lab, ck2, _ in cedges[ck]:
            cands = []
            if _is_impl_step(lab):
                if cond1(ak, ck2):
                    cands.append((ak, ck2))
                for t2, alab, ak2 in abs_successors(ak):
                    if t2 == t and _is_impl_step(alab) and cond1(ak2, ck2):
                        cands.append((ak2, ck2))
            else:
                core = _client_core(lab)
                for t2, alab, ak2 in abs_successors(ak):
                    if (t2 == t and not _is_impl_step(alab)
                            and _client_core(alab) == core
                            and cond1(ak2, ck2)):
                        cands.append((ak2, ck2))
            step_moves.append(((t, lab.render(), ck2), cands))
            for p in cands:
                if p not in seen:
                    seen.add(p)
                    order.append(p)
        moves[(ak, ck)] = step_moves

    # greatest fixpoint: prune pairs with an unanswerable concrete step;
    # the round a pair is pruned in measures how long it can resist
    losing = {}
    round_no = 0
    while True:
        fresh = []
        for pair, step_moves in moves.items():
            if pair in losing:
                continue
            if any(all(p in losing for p in cands)
                   for _, cands in step_moves):
                fresh.append(pair)
        if not fresh:
            break
        for pair in fresh:
            losing[pair] = round_no
        round_no += 1

    if init_pair in losing:
        path = _extract_counterexample(init_pair, moves, losing)
        return SimulationResult("no-simulation", 0, len(seen), path,
                                "a concrete step cannot be matched")

    winning = {p for p in seen if p not in losing}
    return SimulationResult("simulation-found", len(winning), len(seen))


def _extract_counterexample(pair, moves, losing):
    """Concrete steps that defeat every abstract reply, following the
    longest-resisting replies so the path ends at a genuine mismatch."""
    path = []
    while pair in losing:
        best = None
        for (t, label, ck2), cands in moves[pair]:
            if not all(p in losing for p in cands):
                continue
            rank = max((losing[p] for p in cands), default=-1)
            if rank >= losing[pair]:
                continue  # not the move that pruned this pair
            if best is None or rank > best[2]:
                best = ((t, label), cands, rank)
        if best is None:
            break
        (t, label), cands, rank = best
        path.append({"thread": t, "label": label})
        if not cands:
            break
        pair = max(cands, key=lambda p: losing[p])
    return path


# --- independent trace-inclusion cross-check ----------------------------------

@dataclass
class TraceCheckResult:
    verdict: str  # 'trace-refinement' | 'violation' | 'unknown-beyond-bound'
    counterexample: list = None
    traces_checked: int = 0
    detail: str = ""

    @property
    def ok(self):
        return self.verdict == "trace-refinement"


def check_trace_refinement(impl: LockImpl, client_lf,
                           max_steps: int = 64) -> TraceCheckResult:
    """Determinized matching of every stutter-free concrete client trace
    against the abstract trace graph under pointwise refinement."""
    abs_sys = build_system(client_lf)
    conc_sys = build_system(client_lf, impl)
    threads = abs_sys.ctx.threads
    client_regs = _client_regs(abs_sys)

    conc = explore(conc_sys.cfg0, conc_sys.ctx, max_steps)
    ab = explore(abs_sys.cfg0, abs_sys.ctx, max_steps)
    if conc.truncated or ab.truncated:
        return TraceCheckResult("unknown-beyond-bound",
                                detail="exploration truncated")

    aproj = {k: project(c, client_regs, threads) for k, c in ab.configs.items()}
    cproj = {k: project(c, client_regs, threads)
             for k, c in conc.configs.items()}
    aedges = {k: [nxt.key() for _, _, nxt in successors(c, abs_sys.ctx)]
              for k, c in ab.configs.items()}
    cedges = {k: [(t, lab.render(), nxt.key())
                  for t, lab, nxt in successors(c, conc_sys.ctx)]
              for k, c in conc.configs.items()}

    def closure(akeys):
        out = set(akeys)
        work = list(akeys)
        while work:
            k = work.pop()
            for k2 in aedges[k]:
                if k2 not in out and aproj[k2] == aproj[k]:
                    out.add(k2)
                    work.append(k2)
        return frozenset(out)

    ck0 = conc_sys.cfg0.key()
    ak0 = abs_sys.cfg0.key()
    if not _letter_refines(aproj[ak0], cproj[ck0]):
        return TraceCheckResult("violation", [],
                                detail="initial client states unrelated")
    start = (ck0, closure({ak0}))
    seen = {start}
    parents = {start: None}
    work = [start]
    visible = 0
    while work:
        node = work.pop()
        ck, aset = node
        for t, label, ck2 in cedges[ck]:
            if cproj[ck2] == cproj[ck]:
                aset2 = aset
            else:
                visible += 1
                step = {k2 for k in aset for k2 in aedges[k]
                        if aproj[k2] != aproj[k]
                        and _letter_refines(aproj[k2], cproj[ck2])}
                if not step:
                    path = _trace_path(parents, node)
                    path.append({"thread": t, "label": label})
                    return TraceCheckResult(
                        "violation", path, visible,
                        "concrete client trace has no abstract match")
                aset2 = closure(step)
            node2 = (ck2, aset2)
            if node2 not in seen:
                seen.add(node2)
                parents[node2] = (node, t, label)
                work.append(node2)
    return TraceCheckResult("trace-refinement", None, visible)


def _trace_path(parents, node):
    path = []
    while parents.get(node) is not None:
        node, t, label = parents[node]
        path.append({"thread": t, "label": label})
    path.reverse()
    return path
