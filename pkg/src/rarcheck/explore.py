"""Exhaustive interleaving exploration of the composed semantics.

Configurations pair per-thread programs and local states with the client and
library component states.  Exploration is a breadth-first search memoized on
canonical keys (timestamp-order-isomorphic states collapse), bounded by a
scheduler-step budget with explicit truncation reporting.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import memory, objects, program
from .assertions import EvalCtx, eval_assertion
from .state import BOT, canonical_key, ComponentState


@dataclass(frozen=True, eq=False)
class Configuration:
    prog: dict  # t -> command
    rho: dict  # t -> locals
    gamma: ComponentState
    beta: ComponentState

    _key: list = field(default_factory=list, repr=False, compare=False)

    def key(self):
        if not self._key:
            self._key.append(canonical_key(self))
        return self._key[0]

    def terminated(self) -> bool:
        return all(program.is_done(p) for p in self.prog.values())


class SystemContext:
    """Static facts about one litmus system: threads, value domain, the
    library object (if any), variable components and labelling."""

    def __init__(self, threads, domain, client_vars, library_vars,
                 object_spec=None, n_labels=None, observed=None):
        self.threads = tuple(sorted(threads))
        self.domain = tuple(domain)
        self.client_vars = frozenset(client_vars)
        self.library_vars = frozenset(library_vars)
        self.object_spec = object_spec
        self.n_labels = dict(n_labels or {})
        self.observed = tuple(observed or ())

    def side_of(self, x):
        return "C" if x in self.client_vars else "L"

    def eval_ctx(self) -> EvalCtx:
        specs = {self.object_spec.name: self.object_spec} \
            if self.object_spec else {}
        return EvalCtx(self.side_of, specs, self.n_labels)


@dataclass(frozen=True)
class StepLabel:
    component: str  # 'client' | 'library'
    action: object  # Action or None for silent steps
    rank: object = None  # timeline position disambiguating the choice
    at_hole: bool = False

    def render(self) -> str:
        if self.action is None:
            return "eps[L]" if self.component == "library" else "eps"
        core = repr(self.action)
        if self.rank is not None:
            core += f"@{self.rank}"
        return core


def _rank_on(state: ComponentState, op) -> int:
    times = sorted(o.ts for o in state.ops_on(op.action.var))
    return times.index(op.ts)


def _with_thread(cfg: Configuration, t, p, ls, gamma=None, beta=None):
    prog = dict(cfg.prog)
    prog[t] = p
    rho = dict(cfg.rho)
    rho[t] = ls
    return Configuration(prog, rho, gamma if gamma is not None else cfg.gamma,
                         beta if beta is not None else cfg.beta)


def successors(cfg: Configuration, ctx: SystemContext):
    """All (thread, label, configuration) successors, deterministically
    ordered."""
    out = []
    for t in ctx.threads:
        for step in program.local_step(cfg.prog, cfg.rho, t, ctx.domain):
            comp = "library" if step.lib else "client"
            if step.kind == "eps":
                nxt = _with_thread(cfg, t, step.cmd, step.ls)
                out.append((t, StepLabel(comp, None, at_hole=step.at_hole),
                            nxt))
            elif step.kind == "act":
                a = step.action
                if step.lib:
                    results = _mem_dispatch(cfg.beta, cfg.gamma, t, a)
                    for b2, g2, op in results:
                        nxt = _with_thread(cfg, t, step.cmd, step.ls, g2, b2)
                        out.append((t, StepLabel(comp, a, _rank_on(b2, op)),
                                    nxt))
                else:
                    results = _mem_dispatch(cfg.gamma, cfg.beta, t, a)
                    for g2, b2, op in results:
                        nxt = _with_thread(cfg, t, step.cmd, step.ls, g2, b2)
                        out.append((t, StepLabel(comp, a, _rank_on(g2, op)),
                                    nxt))
            elif step.kind == "call":
                out.extend(_object_steps(cfg, t, step, ctx))
    out.sort(key=lambda s: (s[0], s[1].render()))
    return out


def _mem_dispatch(executing, context, t, a):
    if a.kind == "read":
        return memory.mem_read(executing, context, t, a)
    if a.kind == "write":
        return memory.mem_write(executing, context, t, a)
    if a.kind == "update":
        return memory.mem_update(executing, context, t, a)
    raise program.ProgramError(f"not a memory action: {a!r}")


def _object_steps(cfg, t, step, ctx):
    spec = ctx.object_spec
    call = step.action
    if spec is None or call.obj != spec.name:
        raise program.ProgramError(f"no object named {call.obj!r}")
    ls = cfg.rho[t]
    args = [program.eval_expr(a, ls) for a in call.args]
    out = []
    if spec.kind == "lock" and call.meth == "acquire":
        for b2, g2, op in objects.lock_acquire(cfg.beta, cfg.gamma, t,
                                               spec.name):
            ls2 = dict(step.ls)
            ls2["rval"] = True
            if call.binder:
                ls2[call.binder] = op.action.index
            out.append((t, op, program.Value(True), g2, b2, ls2))
    elif spec.kind == "lock" and call.meth == "release":
        for b2, g2, op in objects.lock_release(cfg.beta, cfg.gamma, t,
                                               spec.name):
            ls2 = dict(step.ls)
            ls2["rval"] = BOT
            out.append((t, op, program.Bot(), g2, b2, ls2))
    elif spec.kind == "queue" and call.meth == "enq":
        for b2, g2, op in objects.queue_enq(cfg.beta, cfg.gamma, t, spec.name,
                                            args[0]):
            ls2 = dict(step.ls)
            ls2["rval"] = BOT
            out.append((t, op, program.Bot(), g2, b2, ls2))
    elif spec.kind == "queue" and call.meth == "deq":
        for b2, g2, op, rv in objects.queue_deq(cfg.beta, cfg.gamma, t,
                                                spec.name):
            ls2 = dict(step.ls)
            ls2["rval"] = rv
            out.append((t, op, program.Value(rv), g2, b2, ls2))
    else:
        raise program.ProgramError(
            f"object {spec.name!r} has no method {call.meth!r}")

    results = []
    for t_, op, content, g2, b2, ls2 in out:
        p2 = _replace_call(cfg.prog[t_], content)
        nxt = _with_thread(cfg, t_, p2, ls2, g2, b2)
        results.append((t_, StepLabel("library", op.action, _rank_on(b2, op)),
                        nxt))
    return results


def _replace_call(cmd, content):
    """Replace the active method call (the next redex) with its result."""
    if isinstance(cmd, program.Labeled):
        return program.Labeled(cmd.label, _replace_call(cmd.cmd, content))
    if isinstance(cmd, program.Seq):
        return program.Seq(_replace_call(cmd.a, content), cmd.b)
    if isinstance(cmd, program.Hole):
        if isinstance(cmd.content, program.MethodCall):
            return program.Hole(content)
        return program.Hole(_replace_call(cmd.content, content))
    if isinstance(cmd, program.Assign) and isinstance(cmd.src, program.Hole):
        return program.Assign(cmd.reg, _replace_call(cmd.src, content))
    raise program.ProgramError(f"no active method call in {cmd!r}")


@dataclass
class ExploreResult:
    states_explored: int
    outcomes: list  # sorted list of dicts register -> value
    truncated: bool
    configs: dict  # canonical key -> Configuration
    parents: dict  # key -> (parent key, thread, label str)
    terminal_keys: list
    initial_key: object

    def witness_path(self, key):
        path = []
        while True:
            parent = self.parents.get(key)
            if parent is None:
                break
            pkey, t, label = parent
            path.append({"thread": t, "label": label})
            key = pkey
        path.reverse()
        return path


def explore(cfg0: Configuration, ctx: SystemContext, max_steps: int = 64,
            jobs: int = 1) -> ExploreResult:
    """Bounded exhaustive exploration with canonical-key memoization."""
    if max_steps <= 0:
        raise ValueError("max_steps must be positive")
    k0 = cfg0.key()
    visited = {k0: cfg0}
    parents = {}
    depth = {k0: 0}
    frontier = [cfg0]
    truncated = False
    terminal_keys = []
    outcomes = set()
    pool = ThreadPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        while frontier:
            if pool is not None:
                succ_lists = list(pool.map(
                    lambda c: successors(c, ctx), frontier))
            else:
                succ_lists = [successors(c, ctx) for c in frontier]
            nxt_frontier = []
            for cfg, succs in zip(frontier, succ_lists):
                k = cfg.key()
                if not succs:
                    terminal_keys.append(k)
                    outcomes.add(_outcome_of(cfg, ctx))
                    continue
                if depth[k] >= max_steps:
                    truncated = True
                    continue
                for t, label, nxt in succs:
                    nk = nxt.key()
                    if nk in visited:
                        continue
                    visited[nk] = nxt
                    parents[nk] = (k, t, label.render())
                    depth[nk] = depth[k] + 1
                    nxt_frontier.append(nxt)
            frontier = nxt_frontier
    finally:
        if pool is not None:
            pool.shutdown()
    out_list = sorted(
        ({r: v for r, v in oc} for oc in outcomes),
        key=lambda d: sorted((k, repr(v)) for k, v in d.items()))
    return ExploreResult(len(visited), out_list, truncated, visited, parents,
                         terminal_keys, k0)


def _outcome_of(cfg: Configuration, ctx: SystemContext):
    merged = {}
    for ls in cfg.rho.values():
        merged.update(ls)
    regs = ctx.observed or tuple(sorted(r for r in merged if r != "rval"))
    return tuple((r, merged.get(r)) for r in sorted(regs))


# --- Hoare triples and proof outlines ----------------------------------------

@dataclass
class CheckReport:
    verdict: str  # 'valid' | 'invalid' | 'unknown-beyond-bound'
    witness: list = None
    states_explored: int = 0
    truncated: bool = False
    detail: str = ""


def check_hoare(cfg0, ctx, pre, post, max_steps: int = 64) -> CheckReport:
    """Partial-correctness check of {pre} program {post}."""
    ectx = ctx.eval_ctx()
    if pre is not None and not eval_assertion(pre, cfg0, ectx):
        return CheckReport("valid", detail="precondition unsatisfied")
    res = explore(cfg0, ctx, max_steps)
    if post is not None:
        for k in res.terminal_keys:
            cfg = res.configs[k]
            if not eval_assertion(post, cfg, ectx):
                return CheckReport("invalid", res.witness_path(k),
                                   res.states_explored, res.truncated,
                                   "postcondition fails at a terminal state")
    if res.truncated:
        return CheckReport("unknown-beyond-bound", None, res.states_explored,
                           True, "paths beyond the step bound not examined")
    return CheckReport("valid", None, res.states_explored, False)


@dataclass
class OutlineReport:
    verdicts: dict  # name -> CheckReport
    states_explored: int = 0
    truncated: bool = False

    @property
    def valid(self) -> bool:
        return all(r.verdict == "valid" for r in self.verdicts.values())


def check_outline(cfg0, ctx, outline, max_steps: int = 64) -> OutlineReport:
    """Reachability check of every annotation plus interference freedom
    over reachable states."""
    ectx = ctx.eval_ctx()
    res = explore(cfg0, ctx, max_steps)
    verdicts = {}

    def name_of(t, label):
        return f"T{t}@{label}"

    def fail(name, key, detail):
        if name not in verdicts or verdicts[name].verdict == "valid":
            verdicts[name] = CheckReport("invalid", res.witness_path(key),
                                         res.states_explored, res.truncated,
                                         detail)

    if outline.invariant is not None:
        verdicts["Inv"] = CheckReport("valid")
    for t, anns in outline.annotations.items():
        for label in anns:
            verdicts[name_of(t, label)] = CheckReport("valid")
    if outline.final is not None:
        verdicts["final"] = CheckReport("valid")

    for key, cfg in res.configs.items():
        if outline.invariant is not None and not eval_assertion(
                outline.invariant, cfg, ectx):
            fail("Inv", key, "invariant fails at a reachable state")
        for t, anns in outline.annotations.items():
            pc = program.pc_of(cfg.prog[t], ctx.n_labels[t])
            ann = anns.get(pc)
            if ann is not None and not eval_assertion(ann, cfg, ectx):
                fail(name_of(t, pc), key, "annotation fails while active")
    if outline.final is not None:
        for key in res.terminal_keys:
            if not eval_assertion(outline.final, res.configs[key], ectx):
                fail("final", key, "final assertion fails at a terminal state")

    # Interference freedom restricted to reachable states: a step of one
    # thread must preserve the annotation currently active in every other.
    for key, cfg in res.configs.items():
        pcs = {t: program.pc_of(cfg.prog[t], ctx.n_labels[t])
               for t in ctx.threads}
        active = {}
        for t in ctx.threads:
            ann = outline.annotations.get(t, {}).get(pcs[t])
            if ann is not None and eval_assertion(ann, cfg, ectx):
                active[t] = ann
        if not active:
            continue
        for t2, label, nxt in successors(cfg, ctx):
            for t, ann in active.items():
                if t == t2:
                    continue
                if not eval_assertion(ann, nxt, ectx):
                    nk = nxt.key()
                    wkey = nk if nk in res.configs else key
                    fail(name_of(t, pcs[t]), wkey,
                         f"interference by thread {t2} step {label.render()}")

    return OutlineReport(verdicts, res.states_explored, res.truncated)
