"""Program syntax with holes and the thread-local transition rules.

Thread programs are immutable command trees.  A local step either is silent
(assignments, control flow, hole dissolution) or proposes a candidate action
that the memory/object semantics must validate; reads are proposed for every
value in the finite value domain and filtered later.
"""

from __future__ import annotations

from dataclasses import dataclass

from .state import Sym, read, update, write


class ProgramError(Exception):
    pass


# --- expressions -----------------------------------------------------------

@dataclass(frozen=True)
class Lit:
    val: object

    def __repr__(self):
        return repr(self.val)


@dataclass(frozen=True)
class Var:
    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class Un:
    op: str
    e: object

    def __repr__(self):
        return f"{self.op}({self.e!r})"


@dataclass(frozen=True)
class Bin:
    op: str
    a: object
    b: object

    def __repr__(self):
        return f"({self.a!r} {self.op} {self.b!r})"


_BINOPS = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "%": lambda a, b: a % b,
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "and": lambda a, b: bool(a) and bool(b),
    "or": lambda a, b: bool(a) or bool(b),
}

_UNOPS = {
    "-": lambda a: -a,
    "not": lambda a: not a,
}


def eval_expr(e, ls: dict):
    if isinstance(e, Lit):
        return e.val
    if isinstance(e, Var):
        if e.name not in ls:
            raise ProgramError(f"unbound local {e.name!r}")
        return ls[e.name]
    if isinstance(e, Un):
        return _UNOPS[e.op](eval_expr(e.e, ls))
    if isinstance(e, Bin):
        return _BINOPS[e.op](eval_expr(e.a, ls), eval_expr(e.b, ls))
    raise ProgramError(f"not an expression: {e!r}")


def expr_locals(e) -> set:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Un):
        return expr_locals(e.e)
    if isinstance(e, Bin):
        return expr_locals(e.a) | expr_locals(e.b)
    return set()


# --- commands ---------------------------------------------------------------

@dataclass(frozen=True)
class Bot:
    def __repr__(self):
        return "_|_"


@dataclass(frozen=True)
class Value:
    val: object

    def __repr__(self):
        return f"val({self.val!r})"


@dataclass(frozen=True)
class Assign:
    reg: str
    src: object  # Expr or Hole

    def __repr__(self):
        return f"{self.reg} := {self.src!r}"


@dataclass(frozen=True)
class GWrite:
    var: str
    expr: object
    releasing: bool = False

    def __repr__(self):
        return f"{self.var} :={'R' if self.releasing else ''} {self.expr!r}"


@dataclass(frozen=True)
class GRead:
    reg: str
    var: str
    acquiring: bool = False

    def __repr__(self):
        return f"{self.reg} <-{'A' if self.acquiring else ''} {self.var}"


@dataclass(frozen=True)
class Cas:
    reg: str
    var: str
    expect: object
    new: object

    def __repr__(self):
        return f"{self.reg} <- CAS({self.var},{self.expect!r},{self.new!r})"


@dataclass(frozen=True)
class Fai:
    reg: str
    var: str

    def __repr__(self):
        return f"{self.reg} <- FAI({self.var})"


@dataclass(frozen=True)
class MethodCall:
    obj: str
    meth: str
    args: tuple = ()
    binder: object = None  # lock acquire: local receiving the version

    def __repr__(self):
        inner = ",".join(map(repr, self.args))
        if self.binder:
            inner = self.binder if not inner else f"{inner},{self.binder}"
        return f"{self.obj}.{self.meth}({inner})"


@dataclass(frozen=True)
class Body:
    """A concrete method body running inside a hole.

    Reduces to bottom when the wrapped command terminates; that same step
    records the method's return value in the distinguished local rval.
    """

    meth: str
    retval: object
    cmd: object

    def __repr__(self):
        return f"<{self.meth}: {self.cmd!r}>"


@dataclass(frozen=True)
class Hole:
    content: object = None  # None (pristine), Value, Bot, MethodCall, command

    def __repr__(self):
        return f"[{self.content!r}]" if self.content is not None else "[.]"


@dataclass(frozen=True)
class Seq:
    a: object
    b: object

    def __repr__(self):
        return f"{self.a!r}; {self.b!r}"


@dataclass(frozen=True)
class If:
    cond: object
    then: object
    other: object

    def __repr__(self):
        return f"if {self.cond!r} then {{{self.then!r}}} else {{{self.other!r}}}"


@dataclass(frozen=True)
class While:
    cond: object
    body: object

    def __repr__(self):
        return f"while {self.cond!r} do {{{self.body!r}}}"


@dataclass(frozen=True)
class DoUntil:
    body: object
    cond: object

    def __repr__(self):
        return f"do {{{self.body!r}}} until {self.cond!r}"


@dataclass(frozen=True)
class Labeled:
    label: int
    cmd: object

    def __repr__(self):
        return f"{self.label}: {self.cmd!r}"


def seq_all(cmds):
    if not cmds:
        return Bot()
    out = cmds[-1]
    for c in reversed(cmds[:-1]):
        out = Seq(c, out)
    return out


def desugar(cmd):
    """Rewrite do-until loops: do C until B == C; while not B do C."""
    if isinstance(cmd, DoUntil):
        body = desugar(cmd.body)
        return Seq(body, While(Un("not", cmd.cond), body))
    if isinstance(cmd, Seq):
        return Seq(desugar(cmd.a), desugar(cmd.b))
    if isinstance(cmd, If):
        return If(cmd.cond, desugar(cmd.then), desugar(cmd.other))
    if isinstance(cmd, While):
        return While(cmd.cond, desugar(cmd.body))
    if isinstance(cmd, Labeled):
        return Labeled(cmd.label, desugar(cmd.cmd))
    if isinstance(cmd, Body):
        return Body(cmd.meth, cmd.retval, desugar(cmd.cmd))
    if isinstance(cmd, Hole) and cmd.content is not None and not isinstance(
            cmd.content, (Value, Bot, MethodCall)):
        return Hole(desugar(cmd.content))
    if isinstance(cmd, Assign) and isinstance(cmd.src, Hole):
        return Assign(cmd.reg, desugar(cmd.src))
    return cmd


def fill_hole(cmd, d):
    """Fill the leftmost innermost pristine hole of cmd with d."""
    done, out = _fill(cmd, d)
    if not done:
        raise ProgramError("no hole to fill")
    return out


def _fill(cmd, d):
    if isinstance(cmd, Hole):
        if cmd.content is None:
            return True, Hole(d)
        filled, c = _fill(cmd.content, d)
        return filled, (Hole(c) if filled else cmd)
    if isinstance(cmd, Seq):
        filled, a = _fill(cmd.a, d)
        if filled:
            return True, Seq(a, cmd.b)
        filled, b = _fill(cmd.b, d)
        return filled, (Seq(cmd.a, b) if filled else cmd)
    if isinstance(cmd, Assign) and isinstance(cmd.src, Hole):
        filled, h = _fill(cmd.src, d)
        return filled, (Assign(cmd.reg, h) if filled else cmd)
    if isinstance(cmd, If):
        filled, c = _fill(cmd.then, d)
        if filled:
            return True, If(cmd.cond, c, cmd.other)
        filled, c = _fill(cmd.other, d)
        return filled, (If(cmd.cond, cmd.then, c) if filled else cmd)
    if isinstance(cmd, (While, DoUntil)):
        filled, c = _fill(cmd.body, d)
        if not filled:
            return False, cmd
        if isinstance(cmd, While):
            return True, While(cmd.cond, c)
        return True, DoUntil(c, cmd.cond)
    if isinstance(cmd, Labeled):
        filled, c = _fill(cmd.cmd, d)
        return filled, (Labeled(cmd.label, c) if filled else cmd)
    return False, cmd


def is_done(cmd) -> bool:
    """Terminated commands: bottom, a value, or a hole holding either."""
    if isinstance(cmd, (Bot, Value)):
        return True
    if isinstance(cmd, Labeled):
        return is_done(cmd.cmd)
    if isinstance(cmd, Hole):
        return isinstance(cmd.content, (Bot, Value))
    return False


def pc_of(prog_t, n_labels: int) -> int:
    """Label of the first statement whose effect is still pending."""
    c = prog_t
    while isinstance(c, Seq):
        if not is_done(c.a):
            lbl = _leading_label(c.a)
            return lbl if lbl is not None else 0
        c = c.b
    if is_done(c):
        return n_labels + 1
    lbl = _leading_label(c)
    return lbl if lbl is not None else 0


def _leading_label(cmd):
    if isinstance(cmd, Labeled):
        return cmd.label
    return None


# --- thread-local steps -----------------------------------------------------

@dataclass(frozen=True)
class Step:
    """One candidate step of a single thread.

    kind: 'eps' (silent), 'act' (candidate action for the memory semantics)
    or 'call' (abstract object call, resolved by the object semantics).
    """

    kind: str
    action: object  # Action for 'act', MethodCall payload for 'call'
    cmd: object
    ls: dict
    lib: bool = False  # inside a filled hole
    at_hole: bool = False  # step dissolves/consumes a hole


def _ls_set(ls, r, v):
    out = dict(ls)
    out[r] = v
    return out


def _steps(cmd, ls, domain, lib=False):
    if isinstance(cmd, Labeled):
        return [Step(s.kind, s.action, Labeled(cmd.label, s.cmd), s.ls, s.lib,
                     s.at_hole) for s in _steps(cmd.cmd, ls, domain, lib)]

    if isinstance(cmd, (Bot, Value)):
        return []

    if isinstance(cmd, Assign):
        if isinstance(cmd.src, Hole):
            inner = cmd.src.content
            if isinstance(inner, Value):
                return [Step("eps", None, Bot(), _ls_set(ls, cmd.reg, inner.val),
                             lib, at_hole=True)]
            if isinstance(inner, Bot):
                return [Step("eps", None, Bot(), ls, lib, at_hole=True)]
            return [Step(s.kind, s.action, Assign(cmd.reg, Hole(s.cmd)), s.ls,
                         True, s.at_hole)
                    for s in _hole_steps(inner, ls, domain)]
        return [Step("eps", None, Bot(),
                     _ls_set(ls, cmd.reg, eval_expr(cmd.src, ls)), lib)]

    if isinstance(cmd, GWrite):
        a = write(cmd.var, eval_expr(cmd.expr, ls), cmd.releasing)
        return [Step("act", a, Bot(), ls, lib)]

    if isinstance(cmd, GRead):
        return [Step("act", read(cmd.var, v, cmd.acquiring), Bot(),
                     _ls_set(ls, cmd.reg, v), lib) for v in domain]

    if isinstance(cmd, Cas):
        u = eval_expr(cmd.expect, ls)
        v = eval_expr(cmd.new, ls)
        out = [Step("act", update(cmd.var, u, v), Bot(),
                    _ls_set(ls, cmd.reg, True), lib)]
        for w in domain:
            if w != u:
                out.append(Step("act", read(cmd.var, w), Bot(),
                                _ls_set(ls, cmd.reg, False), lib))
        return out

    if isinstance(cmd, Fai):
        return [Step("act", update(cmd.var, u, u + 1), Bot(),
                     _ls_set(ls, cmd.reg, u), lib)
                for u in domain if isinstance(u, int) and not isinstance(u, bool)]

    if isinstance(cmd, MethodCall):
        return [Step("call", cmd, None, ls, lib)]

    if isinstance(cmd, Body):
        out = []
        for s in _steps(cmd.cmd, ls, domain, lib=True):
            if is_done(s.cmd):
                out.append(Step(s.kind, s.action, Bot(),
                                _ls_set(s.ls, "rval", cmd.retval), True,
                                s.at_hole))
            else:
                out.append(Step(s.kind, s.action, Body(cmd.meth, cmd.retval,
                                                       s.cmd), s.ls, True,
                                s.at_hole))
        return out

    if isinstance(cmd, Hole):
        inner = cmd.content
        if inner is None:
            raise ProgramError("cannot execute a pristine hole")
        if isinstance(inner, (Bot, Value)):
            return []  # consumed by the enclosing sequence
        return [Step(s.kind, s.action, Hole(s.cmd), s.ls, True, s.at_hole)
                for s in _hole_steps(inner, ls, domain)]

    if isinstance(cmd, Seq):
        if is_done(cmd.a):
            return [Step("eps", None, cmd.b, ls, lib,
                         at_hole=_ends_in_hole(cmd.a))]
        return [Step(s.kind, s.action, Seq(s.cmd, cmd.b), s.ls, s.lib,
                     s.at_hole) for s in _steps(cmd.a, ls, domain, lib)]

    if isinstance(cmd, If):
        branch = cmd.then if eval_expr(cmd.cond, ls) else cmd.other
        return [Step("eps", None, branch, ls, lib)]

    if isinstance(cmd, While):
        if eval_expr(cmd.cond, ls):
            return [Step("eps", None, Seq(cmd.body, cmd), ls, lib)]
        return [Step("eps", None, Bot(), ls, lib)]

    if isinstance(cmd, DoUntil):
        raise ProgramError("do-until must be desugared before execution")

    raise ProgramError(f"cannot step {cmd!r}")


def _hole_steps(inner, ls, domain):
    steps = _steps(inner, ls, domain, lib=True)
    return steps


def _ends_in_hole(cmd) -> bool:
    if isinstance(cmd, Labeled):
        return _ends_in_hole(cmd.cmd)
    return isinstance(cmd, Hole)


def local_step(prog: dict, rho: dict, t, domain):
    """All program-level successors of thread t; empty when blocked/done."""
    p = prog.get(t)
    if p is None or is_done(p):
        return []
    return _steps(p, rho[t], domain)


def command_locals(cmd) -> set:
    """Local registers read or written by a command tree."""
    if isinstance(cmd, Labeled):
        return command_locals(cmd.cmd)
    if isinstance(cmd, Assign):
        inner = (command_locals(cmd.src.content) if isinstance(cmd.src, Hole)
                 and cmd.src.content is not None else
                 expr_locals(cmd.src) if not isinstance(cmd.src, Hole) else set())
        return {cmd.reg} | inner
    if isinstance(cmd, GWrite):
        return expr_locals(cmd.expr)
    if isinstance(cmd, GRead):
        return {cmd.reg}
    if isinstance(cmd, Cas):
        return {cmd.reg} | expr_locals(cmd.expect) | expr_locals(cmd.new)
    if isinstance(cmd, Fai):
        return {cmd.reg}
    if isinstance(cmd, MethodCall):
        out = set()
        for a in cmd.args:
            out |= expr_locals(a)
        if cmd.binder:
            out.add(cmd.binder)
        return out
    if isinstance(cmd, Hole):
        return command_locals(cmd.content) if cmd.content is not None else set()
    if isinstance(cmd, Body):
        return command_locals(cmd.cmd)
    if isinstance(cmd, Seq):
        return command_locals(cmd.a) | command_locals(cmd.b)
    if isinstance(cmd, If):
        return (expr_locals(cmd.cond) | command_locals(cmd.then)
                | command_locals(cmd.other))
    if isinstance(cmd, While):
        return expr_locals(cmd.cond) | command_locals(cmd.body)
    if isinstance(cmd, DoUntil):
        return expr_locals(cmd.cond) | command_locals(cmd.body)
    return set()


def command_globals(cmd) -> set:
    """Global variables accessed by a command tree (holes excluded)."""
    if isinstance(cmd, Labeled):
        return command_globals(cmd.cmd)
    if isinstance(cmd, Body):
        return command_globals(cmd.cmd)
    if isinstance(cmd, (GWrite, GRead, Cas, Fai)):
        return {cmd.var}
    if isinstance(cmd, Seq):
        return command_globals(cmd.a) | command_globals(cmd.b)
    if isinstance(cmd, If):
        return command_globals(cmd.then) | command_globals(cmd.other)
    if isinstance(cmd, (While, DoUntil)):
        return command_globals(cmd.body)
    return set()


def program_literals(cmd) -> set:
    out = set()

    def walk_expr(e):
        if isinstance(e, Lit) and not isinstance(e.val, Sym):
            out.add(e.val)
        elif isinstance(e, Un):
            walk_expr(e.e)
        elif isinstance(e, Bin):
            walk_expr(e.a)
            walk_expr(e.b)

    def walk(c):
        if isinstance(c, Labeled):
            walk(c.cmd)
        elif isinstance(c, Assign):
            if isinstance(c.src, Hole):
                if c.src.content is not None:
                    walk(c.src.content)
            else:
                walk_expr(c.src)
        elif isinstance(c, GWrite):
            walk_expr(c.expr)
        elif isinstance(c, Cas):
            walk_expr(c.expect)
            walk_expr(c.new)
        elif isinstance(c, MethodCall):
            for a in c.args:
                walk_expr(a)
        elif isinstance(c, Hole):
            if c.content is not None and not isinstance(c.content, (Bot, Value)):
                walk(c.content)
        elif isinstance(c, Body):
            walk(c.cmd)
        elif isinstance(c, Seq):
            walk(c.a)
            walk(c.b)
        elif isinstance(c, If):
            walk_expr(c.cond)
            walk(c.then)
            walk(c.other)
        elif isinstance(c, (While, DoUntil)):
            walk_expr(c.cond)
            walk(c.body)

    walk(cmd)
    return out
