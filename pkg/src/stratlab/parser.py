"""Line-oriented parser for the formula language.

Grammar sketch (lowest precedence first, arrows right-associative):

    formula   := implies ('<->' formula)?
    implies   := or ('->' implies)?
    or        := and ('|' or)?
    and       := negation ('&' and)?
    negation  := '~' negation | primary
    primary   := '(' formula ')' | quantifier | atom
    quantifier:= ('forall' | 'exists') var (quantifier | '.' formula)
    atom      := var ('=' | 'in') var
    var       := IDENT ('^' '-'? INT)?

A quantifier body extends to the end of the enclosing parenthesis.  ``#``
starts a comment.  Parsed formulas come out normalized: a variable is never
bound twice nor both bound and free, and conflicting type annotations on one
variable are rejected.  The name ``empty`` is reserved for the distinguished
constant and cannot be quantified.
"""

from __future__ import annotations

import re
from dataclasses import replace

from . import formulas as F
from .errors import FormulaSyntaxError

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
  | (?P<int>[0-9]+)
  | (?P<sym><->|->|[-&|~=().^])
""", re.VERBOSE)

_KEYWORDS = {"forall", "exists", "in"}


def tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup == "ident":
            kind = m.group() if m.group() in _KEYWORDS else "ident"
            tokens.append((kind, m.group(), pos))
        elif m.lastgroup == "int":
            tokens.append(("int", m.group(), pos))
        elif m.lastgroup == "sym":
            tokens.append((m.group(), m.group(), pos))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0
        self.binder_count = 0
        self.binders = []      # (sid, base name) in pre-order
        self.annotations = {}  # sid -> declared type
        self.base_of = {}      # sid -> base name

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind):
        tok = self.next()
        if tok[0] != kind:
            raise FormulaSyntaxError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        return tok

    # -- variables ---------------------------------------------------------

    def parse_annotation(self):
        if self.peek()[0] != "^":
            return None
        self.next()
        sign = 1
        if self.peek()[0] == "-":
            self.next()
            sign = -1
        tok = self.expect("int")
        return sign * int(tok[1])

    def note_annotation(self, sid, ann, offset):
        if ann is None:
            return
        prev = self.annotations.get(sid)
        if prev is not None and prev != ann:
            raise FormulaSyntaxError(
                f"conflicting type annotations {prev} and {ann} for {self.base_of[sid]}", offset)
        self.annotations[sid] = ann

    def parse_var(self, env):
        tok = self.expect("ident")
        name = tok[1]
        sid = env.get(name, f"f:{name}")
        self.base_of[sid] = name
        ann = self.parse_annotation()
        self.note_annotation(sid, ann, tok[2])
        return F.Var(sid)

    # -- formulas ----------------------------------------------------------

    def parse_formula(self, env):
        left = self.parse_implies(env)
        if self.peek()[0] == "<->":
            self.next()
            return F.Iff(left, self.parse_formula(env))
        return left

    def parse_implies(self, env):
        left = self.parse_or(env)
        if self.peek()[0] == "->":
            self.next()
            return F.Implies(left, self.parse_implies(env))
        return left

    def parse_or(self, env):
        left = self.parse_and(env)
        if self.peek()[0] == "|":
            self.next()
            return F.Or(left, self.parse_or(env))
        return left

    def parse_and(self, env):
        left = self.parse_not(env)
        if self.peek()[0] == "&":
            self.next()
            return F.And(left, self.parse_and(env))
        return left

    def parse_not(self, env):
        if self.peek()[0] == "~":
            self.next()
            return F.Not(self.parse_not(env))
        return self.parse_primary(env)

    def parse_primary(self, env):
        kind, value, offset = self.peek()
        if kind == "(":
            self.next()
            inner = self.parse_formula(env)
            self.expect(")")
            return inner
        if kind in ("forall", "exists"):
            self.next()
            tok = self.expect("ident")
            if tok[1] == F.EMPTY_NAME:
                raise FormulaSyntaxError(f"{F.EMPTY_NAME!r} is reserved and cannot be bound", tok[2])
            sid = f"b{self.binder_count}:{tok[1]}"
            self.binder_count += 1
            self.binders.append((sid, tok[1]))
            self.base_of[sid] = tok[1]
            ann = self.parse_annotation()
            self.note_annotation(sid, ann, tok[2])
            # chained binders share one dot: "exists x^0 exists y^0. ..."
            if self.peek()[0] not in ("forall", "exists"):
                self.expect(".")
            body_env = dict(env)
            body_env[tok[1]] = sid
            body = self.parse_formula(body_env)
            node = F.Forall if kind == "forall" else F.Exists
            return node(F.Var(sid), body)
        if kind == "ident":
            left = self.parse_var(env)
            rel, _, rel_off = self.next()
            if rel == "=":
                return F.Equal(left, self.parse_var(env))
            if rel == "in":
                return F.Member(left, self.parse_var(env))
            raise FormulaSyntaxError("expected '=' or 'in' after variable", rel_off)
        raise FormulaSyntaxError(f"unexpected token {value!r}", offset)

    # -- final naming ------------------------------------------------------

    def finish(self, node):
        free_names = {self.base_of[sid] for sid in self.base_of if sid.startswith("f:")}
        used = set(free_names) | {base for _, base in self.binders}
        taken = set(free_names)
        final = {sid: self.base_of[sid] for sid in self.base_of if sid.startswith("f:")}
        for sid, base in self.binders:
            name = base
            if name in taken:
                name = F.fresh_name(base, used | taken)
            taken.add(name)
            used.add(name)
            final[sid] = name

        def fix(v):
            return F.Var(final[v.name], self.annotations.get(v.name))

        return F.map_vars(node, fix)


def parse(text):
    """Parse one formula.  Raises FormulaSyntaxError with a byte offset."""
    p = _Parser(text)
    node = p.parse_formula({})
    tok = p.peek()
    if tok[0] != "eof":
        raise FormulaSyntaxError(f"trailing input {tok[1]!r}", tok[2])
    return p.finish(node)


def parse_corpus(text):
    """Parse a whole corpus: one formula per line, '#' comments, blank lines ignored.

    Returns a list of (line_number, formula) pairs; line numbers start at 1.
    """
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        try:
            out.append((lineno, parse(line)))
        except FormulaSyntaxError as exc:
            raise FormulaSyntaxError(f"line {lineno}: {exc.message}", exc.offset) from None
    return out
