"""Read/Write/Update transitions over (executing-component, context) pairs.

Each transition takes the state of the component being executed first and the
context second; a library step calls these with the arguments swapped.  An
empty successor list means the candidate action is impossible in the current
state, which is how program-level read candidates get filtered.
"""

from __future__ import annotations

from .state import (ComponentState, TOp, insert_fresh_timestamp,
                    is_acquiring_read, is_releasing_write, merge_views,
                    view_set, view_union, wrval, READ, UPDATE, WRITE)


def mem_read(gamma: ComponentState, beta: ComponentState, t, a):
    """Successors of a relaxed or acquiring read candidate."""
    assert a.kind == READ
    out = []
    for w in gamma.obs(t, a.var):
        if wrval(w.action) != a.val:
            continue
        if is_releasing_write(w.action) and is_acquiring_read(a):
            tv = merge_views(gamma.tview[t], gamma.mview[w])
            ctv = merge_views(beta.tview[t], gamma.mview[w])
            g2 = gamma.updated(tview=_tv(gamma, t, tv))
            b2 = beta.updated(tview=_tv(beta, t, ctv))
        else:
            tv = view_set(gamma.tview[t], a.var, w)
            g2 = gamma.updated(tview=_tv(gamma, t, tv))
            b2 = beta
        out.append((g2, b2, w))
    return out


def mem_write(gamma: ComponentState, beta: ComponentState, t, a):
    """Successors of a write: one per observable, non-covered predecessor."""
    assert a.kind == WRITE
    out = []
    for w in gamma.obs(t, a.var):
        if w in gamma.cvd:
            continue
        q2 = insert_fresh_timestamp(gamma, w)
        new = TOp(a, q2)
        tv = view_set(gamma.tview[t], a.var, new)
        mv = view_union(tv, beta.tview[t])
        g2 = gamma.updated(ops=gamma.ops | {new},
                           tview=_tv(gamma, t, tv),
                           mview=_mv(gamma, new, mv))
        out.append((g2, beta, new))
    return out


def mem_update(gamma: ComponentState, beta: ComponentState, t, a):
    """Successors of an atomic update: read-modify-write with covering."""
    assert a.kind == UPDATE
    out = []
    for w in gamma.obs(t, a.var):
        if w in gamma.cvd or wrval(w.action) != a.aux:
            continue
        q2 = insert_fresh_timestamp(gamma, w)
        new = TOp(a, q2)
        base = view_set(gamma.tview[t], a.var, new)
        if is_releasing_write(w.action):
            tv = merge_views(base, gamma.mview[w])
            ctv = merge_views(beta.tview[t], gamma.mview[w])
        else:
            tv = base
            ctv = beta.tview[t]
        mv = view_union(tv, ctv)
        g2 = gamma.updated(ops=gamma.ops | {new},
                           tview=_tv(gamma, t, tv),
                           mview=_mv(gamma, new, mv),
                           cvd=gamma.cvd | {w})
        b2 = beta.updated(tview=_tv(beta, t, ctv))
        out.append((g2, b2, new))
    return out


def _tv(state: ComponentState, t, view: dict) -> dict:
    out = dict(state.tview)
    out[t] = view
    return out


def _mv(state: ComponentState, op: TOp, view: dict) -> dict:
    out = dict(state.mview)
    out[op] = view
    return out
