"""Weak-memory component state: timestamped operations, views, freshness.

A component (client or library) keeps a set of timestamped operations, a
per-thread view function mapping each variable to the earliest operation the
thread may still observe, a per-operation view recording the writer's
viewfront, the set of covered operations, and (for queues) the matched
enqueue/dequeue timestamp pairs.  Timestamps are exact rationals; the
semantics only ever observes their order.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction


class Sym:
    """Interned sentinel value (bottom / empty), distinct from all literals."""

    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name

    def __repr__(self):
        return self.name

    def __deepcopy__(self, memo):
        return self


BOT = Sym("bot")
EMPTY = Sym("empty")

TS0 = Fraction(0)

# Sync modes
RLX = "rlx"
REL = "rel"
ACQ = "acq"
RA = "ra"
OBJ = "obj"

# Action kinds
WRITE = "write"
READ = "read"
UPDATE = "update"
LOCK_INIT = "lock_init"
LOCK_ACQUIRE = "lock_acquire"
LOCK_RELEASE = "lock_release"
QUEUE_INIT = "queue_init"
ENQUEUE = "enqueue"
DEQUEUE = "dequeue"


@dataclass(frozen=True)
class Action:
    kind: str
    var: str
    val: object = None  # written / read / enqueued / dequeued value
    aux: object = None  # update only: the value read
    sync: str = RLX
    owner: object = None  # lock acquire only: owning thread
    index: object = None  # lock ops only: operation counter

    def __repr__(self):
        if self.kind == WRITE:
            return f"wr{'R' if self.sync == REL else ''}({self.var},{self.val})"
        if self.kind == READ:
            return f"rd{'A' if self.sync == ACQ else ''}({self.var},{self.val})"
        if self.kind == UPDATE:
            return f"upd({self.var},{self.aux},{self.val})"
        if self.kind == LOCK_INIT:
            return f"{self.var}.init_{self.index}"
        if self.kind == LOCK_ACQUIRE:
            return f"{self.var}.acquire_{self.index}({self.owner})"
        if self.kind == LOCK_RELEASE:
            return f"{self.var}.release_{self.index}"
        if self.kind == QUEUE_INIT:
            return f"{self.var}.init"
        if self.kind == ENQUEUE:
            return f"{self.var}.enq({self.val})"
        if self.kind == DEQUEUE:
            return f"{self.var}.deq({self.val})"
        return f"{self.kind}({self.var})"


def write(x, v, releasing=False):
    return Action(WRITE, x, val=v, sync=REL if releasing else RLX)


def read(x, v, acquiring=False):
    return Action(READ, x, val=v, sync=ACQ if acquiring else RLX)


def update(x, old, new):
    return Action(UPDATE, x, val=new, aux=old, sync=RA)


def wrval(a: Action):
    """Value contributed to the variable's timeline; None for reads."""
    if a.kind in (WRITE, UPDATE, ENQUEUE):
        return a.val
    return None


def is_releasing_write(a: Action) -> bool:
    return (a.kind == WRITE and a.sync == REL) or a.kind == UPDATE


def is_acquiring_read(a: Action) -> bool:
    return (a.kind == READ and a.sync == ACQ) or a.kind == UPDATE


def is_modifying(a: Action) -> bool:
    """Writes in the broad sense: actions carrying a written value."""
    return a.kind in (WRITE, UPDATE)


@dataclass(frozen=True)
class TOp:
    """An action paired with its timestamp."""

    action: Action
    ts: Fraction

    def __repr__(self):
        return f"({self.action}@{self.ts})"


# Views are plain dicts var -> TOp, treated as immutable.


def merge_views(v1: dict, v2: dict) -> dict:
    """Pointwise-later combination; the result domain is dom(v1)."""
    out = {}
    for x, op in v1.items():
        other = v2.get(x)
        if other is not None and other.ts > op.ts:
            out[x] = other
        else:
            out[x] = op
    return out


def view_set(v: dict, x: str, op: TOp) -> dict:
    out = dict(v)
    out[x] = op
    return out


def view_union(v1: dict, v2: dict) -> dict:
    """Union of views over disjoint variable domains; v1 wins on overlap."""
    out = dict(v2)
    out.update(v1)
    return out


class StateError(Exception):
    pass


@dataclass(frozen=True, eq=False)
class ComponentState:
    """One side's weak-memory state (client or library)."""

    ops: frozenset  # of TOp
    tview: dict  # tid -> (var -> TOp)
    mview: dict  # TOp -> (var -> TOp); ranges may span both components
    cvd: frozenset = frozenset()  # of TOp
    matched: frozenset = frozenset()  # of (ts, ts') pairs, queue only

    def ops_on(self, x: str):
        return [op for op in self.ops if op.action.var == x]

    def obs(self, t, x: str):
        """Operations on x at or after thread t's viewfront of x."""
        tv = self.tview.get(t)
        if tv is None or x not in tv:
            raise StateError(f"no view for thread {t} at {x!r}")
        lo = tv[x].ts
        return {op for op in self.ops if op.action.var == x and op.ts >= lo}

    def max_op(self, x: str) -> TOp:
        candidates = self.ops_on(x)
        if not candidates:
            raise StateError(f"no operation on {x!r}")
        return max(candidates, key=lambda op: op.ts)

    def max_ts(self, x: str) -> Fraction:
        return self.max_op(x).ts

    def updated(self, **kw) -> "ComponentState":
        return replace(self, **kw)

    def variables(self):
        tv = next(iter(self.tview.values()), {})
        return set(tv)


def observable_ops(state: ComponentState, t, x: str):
    return state.obs(t, x)


def max_ts(state: ComponentState, x: str) -> Fraction:
    return state.max_ts(x)


def fresh_ok(state: ComponentState, q: Fraction, q2: Fraction) -> bool:
    """q2 is strictly after q and before every existing timestamp above q."""
    if not q < q2:
        return False
    return all(q2 < op.ts for op in state.ops if op.ts > q)


def insert_fresh_timestamp(state: ComponentState, pred: TOp) -> Fraction:
    """Deterministic fresh timestamp immediately after pred.

    Midpoint of the forced open interval, or pred.ts + 1 when unbounded.
    """
    if pred not in state.ops:
        raise StateError(f"predecessor {pred} not in ops")
    q = pred.ts
    later = [op.ts for op in state.ops if op.ts > q]
    q2 = (q + min(later)) / 2 if later else q + 1
    assert fresh_ok(state, q, q2), (q, q2)
    return q2


def make_init_states(init_assigns, client_vars, library, threads,
                     local_inits=None):
    """Initial local states and component states.

    init_assigns: ordered (variable, value) pairs for the client globals.
    library: None, ('lock', name), ('queue', name), or
             ('impl', [(variable, value), ...]) for a concrete implementation.
    """
    threads = sorted(threads)
    seen = set()
    for x, _ in init_assigns:
        if x in seen:
            raise StateError(f"duplicate initialisation of {x!r}")
        seen.add(x)
    if set(client_vars) != seen:
        raise StateError("every client variable must be initialised exactly once")

    gops = {x: TOp(write(x, v), TS0) for x, v in init_assigns}
    gview = dict(gops)

    if library is None:
        bops, bview = {}, {}
    elif library[0] == "lock":
        op = TOp(Action(LOCK_INIT, library[1], sync=OBJ, index=0), TS0)
        bops, bview = {library[1]: op}, {library[1]: op}
    elif library[0] == "queue":
        op = TOp(Action(QUEUE_INIT, library[1], sync=OBJ, index=0), TS0)
        bops, bview = {library[1]: op}, {library[1]: op}
    elif library[0] == "impl":
        lseen = set()
        for x, _ in library[1]:
            if x in lseen:
                raise StateError(f"duplicate initialisation of {x!r}")
            lseen.add(x)
        bops = {x: TOp(write(x, v), TS0) for x, v in library[1]}
        bview = dict(bops)
    else:
        raise StateError(f"unknown library spec {library!r}")

    init_view = view_union(gview, bview)
    gamma = ComponentState(
        ops=frozenset(gops.values()),
        tview={t: dict(gview) for t in threads},
        mview={op: dict(init_view) for op in gops.values()},
    )
    beta = ComponentState(
        ops=frozenset(bops.values()),
        tview={t: dict(bview) for t in threads},
        mview={op: dict(init_view) for op in bops.values()},
    )
    rho = {t: {"rval": BOT} for t in threads}
    if local_inits:
        for t, assigns in local_inits.items():
            rho[t].update(assigns)
    return rho, gamma, beta


# ---------------------------------------------------------------------------
# Canonicalization: order-isomorphic timestamp renaming per component.

def _val_key(v):
    if v is None:
        return ("n",)
    if isinstance(v, Sym):
        return ("s", v.name)
    return ("v", v)


def _act_key(a: Action):
    return (a.kind, a.var, _val_key(a.val), _val_key(a.aux), a.sync,
            -1 if a.owner is None else a.owner,
            -1 if a.index is None else a.index)


def _rank_map(state: ComponentState) -> dict:
    return {ts: i for i, ts in enumerate(sorted({op.ts for op in state.ops}))}


def _canon_component(state: ComponentState, side_of, ranks: dict):
    """ranks: side -> (ts -> rank); side_of: var -> side tag."""

    def op_ref(op: TOp):
        side = side_of(op.action.var)
        return (side, ranks[side][op.ts], _act_key(op.action))

    def view_key(v: dict):
        return tuple(sorted((x, op_ref(op)) for x, op in v.items()))

    ops_k = tuple(sorted(op_ref(op) for op in state.ops))
    tview_k = tuple(sorted((t, view_key(v)) for t, v in state.tview.items()))
    mview_k = tuple(sorted((op_ref(op), view_key(v))
                           for op, v in state.mview.items()))
    cvd_k = tuple(sorted(op_ref(op) for op in state.cvd))
    if state.ops:
        own_side = side_of(next(iter(state.ops)).action.var)
        rk = ranks[own_side]
        matched_k = tuple(sorted((rk[a], rk[b]) for a, b in state.matched))
    else:
        matched_k = ()
    return (ops_k, tview_k, mview_k, cvd_k, matched_k)


def canonical_key(cfg):
    """Structural key equal for configurations identical up to an
    order-preserving timestamp renaming applied per component."""
    gamma, beta = cfg.gamma, cfg.beta
    gvars = gamma.variables() | {op.action.var for op in gamma.ops}

    def side_of(x):
        return "C" if x in gvars else "L"

    ranks = {"C": _rank_map(gamma), "L": _rank_map(beta)}
    prog_k = tuple(sorted((t, p) for t, p in cfg.prog.items()))
    rho_k = tuple(sorted(
        (t, tuple(sorted((r, _val_key(v)) for r, v in ls.items())))
        for t, ls in cfg.rho.items()))
    return (prog_k, rho_k,
            _canon_component(gamma, side_of, ranks),
            _canon_component(beta, side_of, ranks))
