"""Textual litmus/outline format: parser, pretty-printer, system builder.

One format serves every mode: plain litmus tests need no annotations, proof
outlines attach an assertion in braces before each statement, refinement
inputs name the implementation to check.  Example::

    name mp-relacq
    init d := 0; f := 0

    thread 1 { d := 5; f :=R 1; }
    thread 2 {
      do r1 <-A f until r1 = 1;
      r2 <- d;
    }

    final { r1 = 1 and r2 = 5 }
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from importlib import resources

from . import assertions as A
from . import program as P
from .explore import Configuration, SystemContext
from .objects import lock_spec, queue_spec
from .state import (BOT, EMPTY, make_init_states, DEQUEUE, ENQUEUE,
                    LOCK_ACQUIRE, LOCK_INIT, LOCK_RELEASE, QUEUE_INIT)


class LitmusError(Exception):
    def __init__(self, msg, line=None, col=None):
        self.line, self.col = line, col
        where = f" at {line}:{col}" if line is not None else ""
        super().__init__(msg + where)


# --- tokenizer ---------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<assignr>:=R\b)
  | (?P<assign>:=)
  | (?P<reada><-A\b)
  | (?P<read><-)
  | (?P<implies>=>)
  | (?P<op>!=|<=|>=|[<>=+\-*%])
  | (?P<punct>[{}(),;:.@])
  | (?P<int>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
""", re.VERBOSE)


@dataclass(frozen=True)
class Tok:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str):
    toks, line, col, i = [], 1, 1, 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if not m:
            raise LitmusError(f"unexpected character {text[i]!r}", line, col)
        kind = m.lastgroup
        s = m.group()
        if kind == "nl":
            line += 1
            col = 1
        else:
            if kind not in ("ws", "comment"):
                toks.append(Tok(kind, s, line, col))
            col += len(s)
        i = m.end()
    toks.append(Tok("eof", "", line, col))
    return toks


# --- surface syntax ----------------------------------------------------------

@dataclass(frozen=True)
class RawStmt:
    kind: str  # assign|write|read|cas|fai|call|callassign|if|while|dountil
    data: tuple
    annotation: object = None


@dataclass(frozen=True)
class LitmusFile:
    name: str
    init: tuple  # ordered (name, value) pairs
    object_decl: object  # None or (kind, name, impl-or-None)
    mode: str
    threads: tuple  # ordered (tid, tuple of RawStmt)
    invariant: object = None
    final: object = None
    pre: object = None


_KEYWORDS = {"name", "init", "object", "mode", "thread", "invariant", "final",
             "pre", "if", "then", "else", "while", "do", "until", "and", "or",
             "not", "true", "false", "bot", "empty", "in", "forall", "exists",
             "CAS", "FAI", "pobs", "dobs", "cond", "cvd", "cvv", "pc", "impl"}


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.pos = 0

    def peek(self, ahead=0) -> Tok:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def next(self) -> Tok:
        t = self.peek()
        self.pos += 1
        return t

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise LitmusError(msg, tok.line, tok.col)

    def accept(self, kind, text=None):
        t = self.peek()
        if t.kind == kind and (text is None or t.text == text):
            return self.next()
        return None

    def expect(self, kind, text=None, what=None):
        t = self.accept(kind, text)
        if t is None:
            want = what or text or kind
            self.fail(f"expected {want}, found {self.peek().text!r}")
        return t

    def kw(self, word):
        t = self.peek()
        if t.kind == "name" and t.text == word:
            return self.next()
        return None

    # -- file ------------------------------------------------------------

    def parse_joined_name(self) -> str:
        last = self.expect("name")
        parts = [last.text]
        while True:
            nxt = self.peek()
            adjacent = (nxt.line == last.line
                        and nxt.col == last.col + len(last.text))
            if adjacent and (nxt.kind in ("name", "int")
                             or (nxt.kind == "op" and nxt.text == "-")):
                parts.append(self.next().text)
                last = nxt
            else:
                return "".join(parts)

    def parse_file(self) -> LitmusFile:
        self.expect("name", "name", "'name' header")
        name = self.parse_joined_name()
        init = []
        if self.kw("init"):
            init = self.parse_init()
        object_decl = None
        if self.kw("object"):
            object_decl = self.parse_object()
        mode = "explore"
        if self.kw("mode"):
            mode = self.expect("name").text
            if mode not in ("explore", "outline", "hoare", "refine"):
                self.fail(f"unknown mode {mode!r}")
        threads = []
        while self.kw("thread"):
            tid = int(self.expect("int").text)
            self.expect("punct", "{")
            stmts = []
            while not self.accept("punct", "}"):
                stmts.append(self.parse_stmt())
            threads.append((tid, tuple(stmts)))
        if not threads:
            self.fail("at least one thread required")
        invariant = final = pre = None
        while self.peek().kind != "eof":
            if self.kw("invariant"):
                self.expect("punct", "{")
                invariant = self.parse_assertion()
                self.expect("punct", "}")
            elif self.kw("pre"):
                self.expect("punct", "{")
                pre = self.parse_assertion()
                self.expect("punct", "}")
            elif self.kw("final"):
                self.expect("punct", "{")
                final = self.parse_assertion()
                self.expect("punct", "}")
            else:
                self.fail(f"unexpected {self.peek().text!r}")
        return LitmusFile(name, tuple(init), object_decl, mode,
                          tuple(threads), invariant, final, pre)

    def parse_init(self):
        out = []
        while True:
            var = self.expect("name").text
            self.expect("assign", what="':='")
            out.append((var, self.parse_value()))
            if not self.accept("punct", ";"):
                break
            if self.peek().kind != "name" or self.peek().text in (
                    "object", "mode", "thread"):
                break
        return out

    def parse_object(self):
        kind = self.expect("name").text
        if kind not in ("lock", "queue"):
            self.fail(f"unknown object kind {kind!r}")
        name = self.expect("name").text
        impl = None
        if self.kw("impl"):
            impl = self.expect("name").text
        return (kind, name, impl)

    def parse_value(self):
        t = self.peek()
        if t.kind == "int":
            return int(self.next().text)
        if t.kind == "op" and t.text == "-":
            self.next()
            return -int(self.expect("int").text)
        if t.kind == "name" and t.text in ("true", "false", "bot", "empty"):
            self.next()
            return {"true": True, "false": False, "bot": BOT,
                    "empty": EMPTY}[t.text]
        self.fail("expected a value")

    # -- statements --------------------------------------------------------

    def parse_stmt(self) -> RawStmt:
        ann = None
        if self.peek().kind == "punct" and self.peek().text == "{":
            self.next()
            ann = self.parse_assertion()
            self.expect("punct", "}")
        s = self.parse_simple()
        self.accept("punct", ";")
        return replace(s, annotation=ann)

    def parse_simple(self) -> RawStmt:
        t = self.peek()
        if t.kind == "name" and t.text == "if":
            self.next()
            cond = self.parse_expr()
            self.expect("name", "then")
            then = self.parse_block()
            other = ()
            if self.kw("else"):
                other = self.parse_block()
            return RawStmt("if", (cond, then, other))
        if t.kind == "name" and t.text == "while":
            self.next()
            cond = self.parse_expr()
            self.expect("name", "do")
            body = self.parse_block()
            return RawStmt("while", (cond, body))
        if t.kind == "name" and t.text == "do":
            self.next()
            body = self.parse_block()
            self.expect("name", "until")
            cond = self.parse_expr()
            return RawStmt("dountil", (body, cond))
        if t.kind != "name":
            self.fail(f"expected a statement, found {t.text!r}")
        name = self.next().text
        if self.accept("punct", "."):
            return self.parse_call(name)
        if self.accept("assignr"):
            return RawStmt("write", (name, self.parse_expr(), True))
        if self.accept("assign"):
            if (self.peek().kind == "name"
                    and self.peek(1).kind == "punct"
                    and self.peek(1).text == "."):
                obj = self.next().text
                self.next()
                call = self.parse_call(obj)
                return RawStmt("callassign", (name,) + call.data)
            return RawStmt("assign", (name, self.parse_expr()))
        if self.accept("reada"):
            src = self.expect("name").text
            return RawStmt("read", (name, src, True))
        if self.accept("read"):
            if self.peek().text == "CAS":
                self.next()
                self.expect("punct", "(")
                var = self.expect("name").text
                self.expect("punct", ",")
                u = self.parse_expr()
                self.expect("punct", ",")
                v = self.parse_expr()
                self.expect("punct", ")")
                return RawStmt("cas", (name, var, u, v))
            if self.peek().text == "FAI":
                self.next()
                self.expect("punct", "(")
                var = self.expect("name").text
                self.expect("punct", ")")
                return RawStmt("fai", (name, var))
            src = self.expect("name").text
            return RawStmt("read", (name, src, False))
        self.fail(f"expected ':=', '<-' or a call after {name!r}")

    def parse_call(self, obj) -> RawStmt:
        meth = self.expect("name").text
        self.expect("punct", "(")
        args, binder = [], None
        if not self.accept("punct", ")"):
            while True:
                if (meth == "acquire" and self.peek().kind == "name"
                        and self.peek().text not in _KEYWORDS):
                    binder = self.next().text
                else:
                    args.append(self.parse_expr())
                if not self.accept("punct", ","):
                    break
            self.expect("punct", ")")
        return RawStmt("call", (obj, meth, tuple(args), binder))

    def parse_block(self):
        if self.accept("punct", "{"):
            out = []
            while not self.accept("punct", "}"):
                out.append(self.parse_stmt())
            return tuple(out)
        s = self.parse_simple()
        self.accept("punct", ";")
        return (s,)

    # -- expressions -------------------------------------------------------

    def parse_expr(self):
        return self.parse_or()

    def parse_or(self):
        e = self.parse_and()
        while self.kw("or"):
            e = P.Bin("or", e, self.parse_and())
        return e

    def parse_and(self):
        e = self.parse_cmp()
        while self.kw("and"):
            e = P.Bin("and", e, self.parse_cmp())
        return e

    def parse_cmp(self):
        e = self.parse_add()
        t = self.peek()
        if t.kind == "op" and t.text in ("=", "!=", "<", "<=", ">", ">="):
            self.next()
            return P.Bin(t.text, e, self.parse_add())
        if t.kind == "name" and t.text == "in":
            self.next()
            vals = self.parse_value_set()
            out = P.Bin("=", e, P.Lit(vals[0]))
            for v in vals[1:]:
                out = P.Bin("or", out, P.Bin("=", e, P.Lit(v)))
            return out
        return e

    def parse_add(self):
        e = self.parse_term()
        while True:
            t = self.peek()
            if t.kind == "op" and t.text in ("+", "-"):
                self.next()
                e = P.Bin(t.text, e, self.parse_term())
            else:
                return e

    def parse_term(self):
        e = self.parse_factor()
        while True:
            t = self.peek()
            if t.kind == "op" and t.text in ("*", "%"):
                self.next()
                e = P.Bin(t.text, e, self.parse_factor())
            else:
                return e

    def parse_factor(self):
        t = self.peek()
        if t.kind == "int":
            return P.Lit(int(self.next().text))
        if t.kind == "op" and t.text == "-":
            self.next()
            return P.Un("-", self.parse_factor())
        if t.kind == "name" and t.text == "not":
            self.next()
            return P.Un("not", self.parse_factor())
        if t.kind == "name" and t.text in ("true", "false", "bot", "empty"):
            self.next()
            return P.Lit({"true": True, "false": False, "bot": BOT,
                          "empty": EMPTY}[t.text])
        if t.kind == "name" and t.text not in _KEYWORDS:
            return P.Var(self.next().text)
        if t.kind == "punct" and t.text == "(":
            self.next()
            e = self.parse_expr()
            self.expect("punct", ")")
            return e
        self.fail(f"expected an expression, found {t.text!r}")

    def parse_value_set(self):
        self.expect("punct", "{")
        vals = [self.parse_value()]
        while self.accept("punct", ","):
            vals.append(self.parse_value())
        self.expect("punct", "}")
        return vals

    # -- assertions ----------------------------------------------------------

    def parse_assertion(self):
        return self.parse_a_implies()

    def parse_a_implies(self):
        a = self.parse_a_or()
        if self.accept("implies"):
            return A.ImpliesA(a, self.parse_a_implies())
        return a

    def parse_a_or(self):
        items = [self.parse_a_and()]
        while self.kw("or"):
            items.append(self.parse_a_and())
        return items[0] if len(items) == 1 else A.OrA(tuple(items))

    def parse_a_and(self):
        items = [self.parse_a_not()]
        while self.kw("and"):
            items.append(self.parse_a_not())
        return items[0] if len(items) == 1 else A.AndA(tuple(items))

    def parse_a_not(self):
        if self.kw("not"):
            return A.NotA(self.parse_a_not())
        return self.parse_a_atom()

    def parse_a_atom(self):
        t = self.peek()
        if t.kind == "punct" and t.text == "(":
            self.next()
            a = self.parse_assertion()
            self.expect("punct", ")")
            return a
        if t.kind == "name" and t.text in ("forall", "exists"):
            self.next()
            name = self.expect("name").text
            self.expect("name", "in")
            vals = self.parse_value_set()
            self.expect("punct", ":")
            body = self.parse_assertion()
            cls = A.ForallA if t.text == "forall" else A.ExistsA
            return cls(name, tuple(vals), body)
        if t.kind == "name" and t.text == "true":
            self.next()
            return A.BoolA(True)
        if t.kind == "name" and t.text == "false":
            self.next()
            return A.BoolA(False)
        if t.kind == "name" and t.text in ("pobs", "dobs"):
            self.next()
            self.expect("punct", "(")
            tid = int(self.expect("int").text)
            self.expect("punct", ",")
            subject = self.parse_subject()
            self.expect("punct", ")")
            comp = self.parse_lift()
            if isinstance(subject, A.MethodInstance):
                cls = A.PossMeth if t.text == "pobs" else A.DefMeth
                return cls(tid, subject, comp)
            x, v = subject
            cls = A.PossVar if t.text == "pobs" else A.DefVar
            return cls(tid, x, v, comp)
        if t.kind == "name" and t.text == "cond":
            self.next()
            self.expect("punct", "(")
            tid = int(self.expect("int").text)
            self.expect("punct", ",")
            subject = self.parse_subject()
            self.expect("punct", ",")
            tgt, tv = self.parse_vareq()
            self.expect("punct", ")")
            comp = self.parse_lift()
            if isinstance(subject, A.MethodInstance):
                return A.CondCross(tid, subject, tgt, tv)
            x, v = subject
            return A.CondVar(tid, x, v, tgt, tv, comp)
        if t.kind == "name" and t.text in ("cvd", "cvv"):
            self.next()
            self.expect("punct", "(")
            m = self.parse_minst()
            self.expect("punct", ")")
            return A.CoveredA(m) if t.text == "cvd" else A.HiddenA(m)
        if t.kind == "name" and t.text == "pc":
            self.next()
            self.expect("punct", "(")
            tid = int(self.expect("int").text)
            self.expect("punct", ")")
            if self.accept("op", "="):
                return A.PcIn(tid, frozenset({int(self.expect("int").text)}))
            if self.kw("in"):
                self.expect("punct", "{")
                labels = [int(self.expect("int").text)]
                while self.accept("punct", ","):
                    labels.append(int(self.expect("int").text))
                self.expect("punct", "}")
                return A.PcIn(tid, frozenset(labels))
            self.fail("expected '=' or 'in' after pc(t)")
        # fall back to a local-state predicate; 'and'/'or' stay at the
        # assertion level, so only arithmetic and one comparison are eaten
        e = self.parse_add()
        t = self.peek()
        if t.kind == "op" and t.text in ("=", "!=", "<", "<=", ">", ">="):
            self.next()
            return A.LocalPred(P.Bin(t.text, e, self.parse_add()))
        if t.kind == "name" and t.text == "in":
            self.next()
            vals = self.parse_value_set()
            items = tuple(A.LocalPred(P.Bin("=", e, P.Lit(v))) for v in vals)
            return items[0] if len(items) == 1 else A.OrA(items)
        return A.LocalPred(e)

    def parse_subject(self):
        if (self.peek().kind == "name" and self.peek(1).kind == "punct"
                and self.peek(1).text == "."):
            return self.parse_minst()
        return self.parse_vareq()

    def parse_vareq(self):
        x = self.expect("name").text
        self.expect("op", "=")
        return x, self.parse_factor()

    def parse_minst(self) -> A.MethodInstance:
        obj = self.expect("name").text
        self.expect("punct", ".")
        raw = self.expect("name").text
        m = re.fullmatch(r"([a-z]+)(?:_([0-9]+|empty))?", raw)
        if not m:
            self.fail(f"bad method instance {raw!r}")
        meth, suffix = m.group(1), m.group(2)
        kinds = {"init": "init", "acquire": LOCK_ACQUIRE,
                 "release": LOCK_RELEASE, "enq": ENQUEUE, "deq": DEQUEUE}
        if meth not in kinds:
            self.fail(f"unknown method {meth!r}")
        kind = kinds[meth]
        index = val = None
        if meth in ("init", "acquire", "release"):
            index = int(suffix) if suffix is not None else None
        elif suffix is not None:
            val = EMPTY if suffix == "empty" else int(suffix)
        return A.MethodInstance(obj, kind, index, val)

    def parse_lift(self):
        if self.accept("punct", "@"):
            side = self.expect("name").text
            if side not in ("C", "L"):
                self.fail("lift must be @C or @L")
            return side
        return None


def parse_litmus(text: str) -> LitmusFile:
    lf = Parser(text).parse_file()
    _validate(lf)
    return lf


def corpus_text(name: str) -> str:
    return resources.files("rarcheck").joinpath(
        "corpus", f"{name}.lit").read_text()


def load_corpus(name: str) -> LitmusFile:
    return parse_litmus(corpus_text(name))


def _validate(lf: LitmusFile):
    seen = set()
    for x, _ in lf.init:
        if x in seen:
            raise LitmusError(f"duplicate initialisation of {x!r}")
        seen.add(x)
    tids = [t for t, _ in lf.threads]
    if len(set(tids)) != len(tids):
        raise LitmusError("duplicate thread id")


# --- building executable systems ---------------------------------------------

@dataclass
class System:
    """A litmus file elaborated into an executable initial configuration."""

    lf: LitmusFile
    cfg0: Configuration
    ctx: SystemContext
    outline: A.ProofOutline
    client_locals: dict  # tid -> frozenset of client-side registers


def _stmt_locals(stmts, assign_targets=True):
    regs = set()
    for s in stmts:
        k, d = s.kind, s.data
        if k == "assign":
            regs |= ({d[0]} if assign_targets else set()) | \
                P.expr_locals(d[1])
        elif k == "write":
            regs |= P.expr_locals(d[1])
        elif k == "read":
            regs.add(d[0])
        elif k == "cas":
            regs |= {d[0]} | P.expr_locals(d[2]) | P.expr_locals(d[3])
        elif k == "fai":
            regs.add(d[0])
        elif k == "call":
            for a in d[2]:
                regs |= P.expr_locals(a)
            if d[3]:
                regs.add(d[3])
        elif k == "callassign":
            regs.add(d[0])
            for a in d[3]:
                regs |= P.expr_locals(a)
            if d[4]:
                regs.add(d[4])
        elif k == "if":
            regs |= P.expr_locals(d[0]) | _stmt_locals(d[1], assign_targets) \
                | _stmt_locals(d[2], assign_targets)
        elif k == "while":
            regs |= P.expr_locals(d[0]) | _stmt_locals(d[1], assign_targets)
        elif k == "dountil":
            regs |= P.expr_locals(d[1]) | _stmt_locals(d[0], assign_targets)
    return regs


def _stmt_globals(stmts):
    """(read-or-updated, written) global names used by statements."""
    used = set()
    for s in stmts:
        k, d = s.kind, s.data
        if k == "write":
            used.add(d[0])
        elif k == "read":
            used.add(d[1])
        elif k in ("cas", "fai"):
            used.add(d[1])
        elif k == "if":
            used |= _stmt_globals(d[1]) | _stmt_globals(d[2])
        elif k == "while":
            used |= _stmt_globals(d[1])
        elif k == "dountil":
            used |= _stmt_globals(d[0])
    return used


def _build_cmd(s: RawStmt, locals_, globals_):
    k, d = s.kind, s.data
    if k == "assign":
        if d[0] in globals_:
            return P.GWrite(d[0], d[1], False)
        return P.Assign(d[0], d[1])
    if k == "write":
        return P.GWrite(d[0], d[1], d[2])
    if k == "read":
        return P.GRead(d[0], d[1], d[2])
    if k == "cas":
        return P.Cas(d[0], d[1], d[2], d[3])
    if k == "fai":
        return P.Fai(d[0], d[1])
    if k == "call":
        return P.Hole(P.MethodCall(d[0], d[1], d[2], d[3]))
    if k == "callassign":
        return P.Assign(d[0], P.Hole(P.MethodCall(d[1], d[2], d[3], d[4])))
    if k == "if":
        return P.If(d[0], _seq_block(d[1], locals_, globals_),
                    _seq_block(d[2], locals_, globals_) if d[2] else P.Bot())
    if k == "while":
        return P.While(d[0], _seq_block(d[1], locals_, globals_))
    if k == "dountil":
        return P.DoUntil(_seq_block(d[0], locals_, globals_), d[1])
    raise LitmusError(f"unknown statement kind {k!r}")


def _seq_block(stmts, locals_, globals_):
    return P.seq_all([_build_cmd(s, locals_, globals_) for s in stmts])


def build_system(lf: LitmusFile, impl=None) -> System:
    """Elaborate a parsed litmus file; impl (a LockImpl) fills the holes."""
    tids = [t for t, _ in lf.threads]
    local_evidence = set()
    global_evidence = set()
    for _, stmts in lf.threads:
        local_evidence |= _stmt_locals(stmts, assign_targets=False)
        global_evidence |= _stmt_globals(stmts)
    clash = local_evidence & global_evidence
    if clash:
        raise LitmusError(
            f"{sorted(clash)[0]!r} used both as a register and a global")

    obj = lf.object_decl
    obj_name = obj[1] if obj else None
    init_globals = [(x, v) for x, v in lf.init if x not in local_evidence]
    client_vars = {x for x, _ in init_globals}
    undeclared = global_evidence - client_vars - ({obj_name} if obj else set())
    if undeclared:
        raise LitmusError(f"undeclared variable {sorted(undeclared)[0]!r}")

    # thread programs, labelled per top-level statement
    progs, annotations, n_labels = {}, {}, {}
    thread_locals = {}
    for t, stmts in lf.threads:
        cmds, anns = [], {}
        for i, s in enumerate(stmts, start=1):
            cmds.append(P.Labeled(i, _build_cmd(s, local_evidence,
                                                client_vars)))
            if s.annotation is not None:
                anns[i] = s.annotation
        progs[t] = P.desugar(P.seq_all(cmds))
        annotations[t] = anns
        n_labels[t] = len(stmts)
        thread_locals[t] = _stmt_locals(stmts) - client_vars

    for i, t in enumerate(tids):
        for t2 in tids[i + 1:]:
            shared = thread_locals[t] & thread_locals[t2]
            if shared:
                raise LitmusError(
                    f"local {sorted(shared)[0]!r} used by threads {t} and {t2}")

    # local inits go to the thread that owns the register
    local_inits = {t: {} for t in tids}
    for x, v in lf.init:
        if x in local_evidence:
            owner = next((t for t in tids if x in thread_locals[t]), None)
            if owner is None:
                raise LitmusError(f"initialised local {x!r} is never used")
            local_inits[owner][x] = v

    # library side
    spec = None
    library = None
    library_vars = set()
    if obj is not None and impl is None:
        spec = lock_spec(obj_name) if obj[0] == "lock" else queue_spec(obj_name)
        library = (obj[0], obj_name)
        library_vars = {obj_name}
    elif impl is not None:
        if obj is None or obj[0] != "lock":
            raise LitmusError("an implementation needs a lock object")
        library = ("impl", impl.init)
        library_vars = {x for x, _ in impl.init}
        progs = {t: _fill_impl(progs[t], impl) for t in progs}

    rho, gamma, beta = make_init_states(init_globals, client_vars, library,
                                        set(tids), local_inits)

    domain = _value_domain(progs, lf, library)
    observed = _observed_registers(lf, local_evidence)
    ctx = SystemContext(tids, domain, client_vars, library_vars, spec,
                        n_labels, observed)
    cfg0 = Configuration(progs, rho, gamma, beta)
    outline = A.ProofOutline(annotations, lf.invariant, lf.final, lf.pre)
    client_locals = {t: frozenset(thread_locals[t]) for t in tids}
    return System(lf, cfg0, ctx, outline, client_locals)


def _fill_impl(prog_t, impl):
    """Replace abstract method calls with implementation bodies."""
    def walk(c):
        if isinstance(c, P.Labeled):
            return P.Labeled(c.label, walk(c.cmd))
        if isinstance(c, P.Seq):
            return P.Seq(walk(c.a), walk(c.b))
        if isinstance(c, P.Hole) and isinstance(c.content, P.MethodCall):
            call = c.content
            body, retval = impl.method(call.meth)
            return P.Hole(P.Body(call.meth, retval, body))
        if isinstance(c, P.If):
            return P.If(c.cond, walk(c.then), walk(c.other))
        if isinstance(c, P.While):
            return P.While(c.cond, walk(c.body))
        return c
    return walk(prog_t)


def _value_domain(progs, lf: LitmusFile, library):
    lits = set()
    for p in progs.values():
        lits |= {v for v in P.program_literals(p)
                 if isinstance(v, int) and not isinstance(v, bool)}
    for _, v in lf.init:
        if isinstance(v, int) and not isinstance(v, bool):
            lits.add(v)
    if library and library[0] == "impl":
        for _, v in library[1]:
            if isinstance(v, int) and not isinstance(v, bool):
                lits.add(v)
    domain = sorted(lits)
    for extra in (True, False, BOT, EMPTY):
        if extra not in domain:  # True/False collapse into 1/0 if present
            domain.append(extra)
    return tuple(domain)


def _observed_registers(lf: LitmusFile, local_evidence):
    if lf.final is None:
        return ()
    seen = []

    def walk(a):
        if isinstance(a, (A.AndA, A.OrA)):
            for x in a.items:
                walk(x)
        elif isinstance(a, A.NotA):
            walk(a.a)
        elif isinstance(a, A.ImpliesA):
            walk(a.a)
            walk(a.b)
        elif isinstance(a, (A.ForallA, A.ExistsA)):
            walk(a.body)
        elif isinstance(a, A.LocalPred):
            for r in sorted(P.expr_locals(a.expr)):
                if r in local_evidence and r not in seen:
                    seen.append(r)

    walk(lf.final)
    return tuple(seen)


# --- pretty printing ----------------------------------------------------------

def pretty(lf: LitmusFile) -> str:
    out = [f"name {lf.name}"]
    if lf.init:
        out.append("init " + "; ".join(f"{x} := {_pval(v)}"
                                       for x, v in lf.init))
    if lf.object_decl:
        kind, name, impl = lf.object_decl
        line = f"object {kind} {name}"
        if impl:
            line += f" impl {impl}"
        out.append(line)
    if lf.mode != "explore":
        out.append(f"mode {lf.mode}")
    for t, stmts in lf.threads:
        out.append(f"thread {t} {{")
        for s in stmts:
            if s.annotation is not None:
                out.append(f"  {{ {_pa(s.annotation)} }}")
            out.append(f"  {_pstmt(s)};")
        out.append("}")
    if lf.invariant is not None:
        out.append(f"invariant {{ {_pa(lf.invariant)} }}")
    if lf.pre is not None:
        out.append(f"pre {{ {_pa(lf.pre)} }}")
    if lf.final is not None:
        out.append(f"final {{ {_pa(lf.final)} }}")
    return "\n".join(out) + "\n"


def _pval(v):
    if v is BOT:
        return "bot"
    if v is EMPTY:
        return "empty"
    if v is True:
        return "true"
    if v is False:
        return "false"
    return str(v)


def _pe(e) -> str:
    if isinstance(e, P.Lit):
        return _pval(e.val)
    if isinstance(e, P.Var):
        return e.name
    if isinstance(e, P.Un):
        return f"not ({_pe(e.e)})" if e.op == "not" else f"-{_pe(e.e)}"
    if isinstance(e, P.Bin):
        return f"({_pe(e.a)} {e.op} {_pe(e.b)})"
    raise TypeError(f"not an expression: {e!r}")


def _pstmt(s: RawStmt) -> str:
    k, d = s.kind, s.data
    if k == "assign":
        return f"{d[0]} := {_pe(d[1])}"
    if k == "write":
        return f"{d[0]} :={'R' if d[2] else ''} {_pe(d[1])}"
    if k == "read":
        return f"{d[0]} <-{'A' if d[2] else ''} {d[1]}"
    if k == "cas":
        return f"{d[0]} <- CAS({d[1]},{_pe(d[2])},{_pe(d[3])})"
    if k == "fai":
        return f"{d[0]} <- FAI({d[1]})"
    if k == "call":
        return _pcall(d)
    if k == "callassign":
        return f"{d[0]} := {_pcall(d[1:])}"
    if k == "if":
        body = " ".join(_pstmt(x) + ";" for x in d[1])
        alt = f" else {{ {' '.join(_pstmt(x) + ';' for x in d[2])} }}" \
            if d[2] else ""
        return f"if {_pe(d[0])} then {{ {body} }}{alt}"
    if k == "while":
        body = " ".join(_pstmt(x) + ";" for x in d[1])
        return f"while {_pe(d[0])} do {{ {body} }}"
    if k == "dountil":
        body = " ".join(_pstmt(x) + ";" for x in d[0])
        return f"do {{ {body} }} until {_pe(d[1])}"
    raise TypeError(k)


def _pcall(d) -> str:
    obj, meth, args, binder = d
    inner = ",".join(_pe(a) for a in args)
    if binder:
        inner = binder if not inner else f"{inner},{binder}"
    return f"{obj}.{meth}({inner})"


def _pminst(m: A.MethodInstance) -> str:
    names = {LOCK_INIT: "init", QUEUE_INIT: "init", LOCK_ACQUIRE: "acquire",
             LOCK_RELEASE: "release", ENQUEUE: "enq", DEQUEUE: "deq",
             "init": "init"}
    base = f"{m.obj}.{names[m.kind]}"
    if m.index is not None:
        return f"{base}_{m.index}"
    if m.val is not None:
        return f"{base}_{'empty' if m.val is EMPTY else m.val}"
    return base


def _pa(a) -> str:
    lift = lambda c: f"@{c}" if c else ""
    if isinstance(a, A.BoolA):
        return "true" if a.val else "false"
    if isinstance(a, A.NotA):
        return f"not {_pa(a.a)}"
    if isinstance(a, A.AndA):
        return "(" + " and ".join(_pa(x) for x in a.items) + ")"
    if isinstance(a, A.OrA):
        return "(" + " or ".join(_pa(x) for x in a.items) + ")"
    if isinstance(a, A.ImpliesA):
        return f"({_pa(a.a)} => {_pa(a.b)})"
    if isinstance(a, A.ForallA):
        vals = ",".join(_pval(v) for v in a.values)
        return f"(forall {a.name} in {{{vals}}}: {_pa(a.body)})"
    if isinstance(a, A.ExistsA):
        vals = ",".join(_pval(v) for v in a.values)
        return f"(exists {a.name} in {{{vals}}}: {_pa(a.body)})"
    if isinstance(a, A.PossVar):
        return f"pobs({a.t}, {a.var}={_pe(a.val)}){lift(a.comp)}"
    if isinstance(a, A.PossMeth):
        return f"pobs({a.t}, {_pminst(a.m)}){lift(a.comp)}"
    if isinstance(a, A.DefVar):
        return f"dobs({a.t}, {a.var}={_pe(a.val)}){lift(a.comp)}"
    if isinstance(a, A.DefMeth):
        return f"dobs({a.t}, {_pminst(a.m)}){lift(a.comp)}"
    if isinstance(a, A.CondVar):
        return (f"cond({a.t}, {a.var}={_pe(a.val)}, "
                f"{a.tgt}={_pe(a.tgtval)}){lift(a.comp)}")
    if isinstance(a, A.CondCross):
        return f"cond({a.t}, {_pminst(a.m)}, {a.tgt}={_pe(a.tgtval)})"
    if isinstance(a, A.CoveredA):
        return f"cvd({_pminst(a.m)})"
    if isinstance(a, A.HiddenA):
        return f"cvv({_pminst(a.m)})"
    if isinstance(a, A.PcIn):
        labels = sorted(a.labels)
        if len(labels) == 1:
            return f"pc({a.t}) = {labels[0]}"
        return f"pc({a.t}) in {{{','.join(map(str, labels))}}}"
    if isinstance(a, A.LocalPred):
        return _pe(a.expr)
    raise TypeError(f"not an assertion: {a!r}")
