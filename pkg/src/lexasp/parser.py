"""Parsing of `.lp` program files and `.task` learning-task files.

The grammar is the subset used by the knowledge base: normal rules, denials,
bounded choice rules with conditional elements, comparisons, interval facts
(`level(1..4)` expands into one fact per value), plus the learning-task
constructs `N ~ rule.`, `#modeh/#modeha/#modeb/#modec`, `#maxv`, `#constant`
and `#pos`/`#neg` example blocks.  See docs/grammar.md for the EBNF.

`%` starts a comment.  Two comment forms are significant and attach to the
statement that follows them: `%!trace "..."` (trace template) and `%#key
value` metadata (`%#id`, `%#specific-over`).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .syntax import (
    Atom,
    AtomLiteral,
    BodyLiteral,
    ChoiceElement,
    ChoiceHead,
    Comparison,
    COMPARISON_OPS,
    DuplicateRuleIdError,
    ExampleSpec,
    LearningTask,
    ModeDecl,
    ORIGIN_ARTICLE,
    ParseError,
    Placeholder,
    Program,
    Rule,
    SchemaArg,
    Term,
    check_safety,
)

_TRACE_RE = re.compile(r'%!trace\s+"([^"]*)"\s*$')
_META_RE = re.compile(r"%#([A-Za-z-]+)\s+(\S.*?)\s*$")


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    line: int
    col: int


class _Interval:
    """Transient parse value for `lo..hi` arguments of interval facts."""

    def __init__(self, lo: int, hi: int):
        self.lo = lo
        self.hi = hi


def tokenize(text: str, path: str = "<input>") -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def err(msg: str, l: int, c: int):
        raise ParseError(msg, l, c, path)

    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "%":
            end = text.find("\n", i)
            if end == -1:
                end = n
            comment = text[i:end]
            m = _TRACE_RE.match(comment)
            if m:
                tokens.append(Token("TRACE", m.group(1), line, col))
            elif comment.startswith("%!"):
                err(f"malformed trace annotation: {comment!r}", line, col)
            else:
                m = _META_RE.match(comment)
                if m:
                    tokens.append(Token("META", f"{m.group(1)} {m.group(2)}", line, col))
                elif comment.startswith("%#"):
                    err(f"malformed metadata comment: {comment!r}", line, col)
            col += end - i
            i = end
            continue
        if ch == '"':
            end = text.find('"', i + 1)
            nl = text.find("\n", i + 1)
            if end == -1 or (nl != -1 and nl < end):
                err("unterminated string literal", line, col)
            tokens.append(Token("STRING", text[i + 1 : end], line, col))
            col += end + 1 - i
            i = end + 1
            continue
        if ch.isalpha():
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "VAR" if word[0].isupper() else "IDENT"
            tokens.append(Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        if ch.isdigit() or (ch == "-" and i + 1 < n and text[i + 1].isdigit()):
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("INT", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch == "#":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            if j == i + 1:
                err("expected directive name after '#'", line, col)
            tokens.append(Token("HASH", text[i + 1 : j], line, col))
            col += j - i
            i = j
            continue
        for two in (":-", "..", "!=", "<=", ">="):
            if text.startswith(two, i):
                tokens.append(Token(two, two, line, col))
                i += 2
                col += 2
                break
        else:
            if ch in ".,;:(){}~=<>":
                tokens.append(Token(ch, ch, line, col))
                i += 1
                col += 1
            else:
                err(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("EOF", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str, path: str, origin: str):
        self.tokens = tokenize(text, path)
        self.pos = 0
        self.path = path
        self.origin = origin
        self.used_ids: set[str] = set()
        self.pending_trace: Optional[str] = None
        self.pending_id: Optional[str] = None
        self.pending_specific: Optional[str] = None

    # -- token helpers ----------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            self.err(f"expected {kind!r}, found {tok.value or tok.kind!r}", tok)
        return self.next()

    def accept(self, kind: str) -> Optional[Token]:
        if self.peek().kind == kind:
            return self.next()
        return None

    def err(self, msg: str, tok: Optional[Token] = None):
        tok = tok or self.peek()
        raise ParseError(msg, tok.line, tok.col, self.path)

    # -- directives attached to statements ---------------------------------

    def consume_annotations(self):
        while self.peek().kind in ("TRACE", "META"):
            tok = self.next()
            if tok.kind == "TRACE":
                if self.pending_trace is not None:
                    self.err("two %!trace annotations before one statement", tok)
                self.pending_trace = tok.value
            else:
                key, _, value = tok.value.partition(" ")
                if key == "id":
                    self.pending_id = value.strip()
                elif key == "specific-over":
                    self.pending_specific = value.strip()
                elif key in ("expect",):
                    # consumed by the case-file loader, ignored here
                    pass
                else:
                    self.err(f"unknown metadata key %#{key}", tok)

    def take_pending(self) -> tuple[Optional[str], Optional[str], Optional[str]]:
        out = (self.pending_trace, self.pending_id, self.pending_specific)
        self.pending_trace = self.pending_id = self.pending_specific = None
        return out

    def allocate_id(self, explicit: Optional[str], line: int, tok: Token) -> str:
        if explicit is not None:
            if explicit in self.used_ids:
                raise DuplicateRuleIdError(f"duplicate rule id {explicit!r}", tok.line, tok.col, self.path)
            self.used_ids.add(explicit)
            return explicit
        base = f"{self.path}:{line}"
        rid, k = base, 1
        while rid in self.used_ids:
            k += 1
            rid = f"{base}#{k}"
        self.used_ids.add(rid)
        return rid

    # -- terms / atoms / literals ------------------------------------------

    def parse_term(self, allow_interval: bool = False):
        tok = self.peek()
        if tok.kind == "IDENT":
            self.next()
            return Term.const(tok.value)
        if tok.kind == "VAR":
            self.next()
            return Term.var(tok.value)
        if tok.kind == "STRING":
            self.next()
            return Term.string(tok.value)
        if tok.kind == "INT":
            self.next()
            if self.peek().kind == "..":
                if not allow_interval:
                    self.err("interval terms are only allowed in facts", tok)
                self.next()
                hi = self.expect("INT")
                lo_v, hi_v = int(tok.value), int(hi.value)
                if lo_v > hi_v:
                    self.err(f"empty interval {lo_v}..{hi_v}", tok)
                return _Interval(lo_v, hi_v)
            return Term.integer(int(tok.value))
        self.err(f"expected a term, found {tok.value or tok.kind!r}", tok)

    def parse_atom(self, allow_interval: bool = False) -> Atom:
        name = self.expect("IDENT")
        if name.value == "not":
            self.err("'not' is reserved for default negation", name)
        args: list = []
        if self.accept("("):
            args.append(self.parse_term(allow_interval))
            while self.accept(","):
                args.append(self.parse_term(allow_interval))
            self.expect(")")
        return Atom(name.value, tuple(args))

    def parse_body_literal(self) -> BodyLiteral:
        tok = self.peek()
        if tok.kind == "IDENT" and tok.value == "not":
            self.next()
            return AtomLiteral(self.parse_atom(), negated=True)
        if tok.kind in ("VAR", "INT", "STRING"):
            left = self.parse_term()
            op = self.parse_comparison_op()
            right = self.parse_term()
            return Comparison(left, op, right)
        atom = self.parse_atom()
        if not atom.args and self.peek().kind in COMPARISON_OPS:
            op = self.parse_comparison_op()
            right = self.parse_term()
            return Comparison(Term.const(atom.predicate), op, right)
        return AtomLiteral(atom)

    def parse_comparison_op(self) -> str:
        tok = self.peek()
        if tok.kind not in COMPARISON_OPS:
            self.err(f"expected comparison operator, found {tok.value or tok.kind!r}", tok)
        return self.next().kind

    def parse_body(self) -> tuple[BodyLiteral, ...]:
        lits = [self.parse_body_literal()]
        while self.accept(","):
            lits.append(self.parse_body_literal())
        return tuple(lits)

    # -- statements ---------------------------------------------------------

    def parse_choice_head(self) -> ChoiceHead:
        lb_tok = self.accept("INT")
        lb = int(lb_tok.value) if lb_tok else 0
        if lb < 0:
            self.err("choice lower bound must be >= 0", lb_tok)
        self.expect("{")
        elements = [self.parse_choice_element()]
        while self.accept(";"):
            elements.append(self.parse_choice_element())
        self.expect("}")
        ub_tok = self.accept("INT")
        ub = int(ub_tok.value) if ub_tok else None
        if ub is not None and ub < lb:
            self.err(f"choice upper bound {ub} below lower bound {lb}", ub_tok)
        return ChoiceHead(lb, ub, tuple(elements))

    def parse_choice_element(self) -> ChoiceElement:
        atom = self.parse_atom()
        condition: list[AtomLiteral] = []
        if self.accept(":"):
            condition.append(AtomLiteral(self.parse_atom()))
            while self.accept(","):
                condition.append(AtomLiteral(self.parse_atom()))
        return ChoiceElement(atom, tuple(condition))

    def parse_rule_statement(self) -> list[Rule]:
        """Parse one rule/fact/denial/choice statement (trailing `.` included)
        and expand interval facts; returns one rule per expansion."""
        start = self.peek()
        trace, explicit_id, specific = self.take_pending()
        head: object
        body: tuple[BodyLiteral, ...] = ()
        interval_args: list = []
        if self.peek().kind == ":-":
            self.next()
            head = None
            body = self.parse_body()
        elif self.peek().kind == "{" or (self.peek().kind == "INT" and self.peek(1).kind == "{"):
            head = self.parse_choice_head()
            if self.accept(":-"):
                body = self.parse_body()
        else:
            atom = self.parse_atom(allow_interval=True)
            interval_args = [a for a in atom.args if isinstance(a, _Interval)]
            if interval_args and (self.peek().kind == ":-"):
                self.err("interval terms are only allowed in facts", start)
            head = atom
            if self.accept(":-"):
                body = self.parse_body()
        self.expect(".")

        heads: list[object]
        if interval_args:
            heads = [Atom(head.predicate, combo) for combo in _expand_intervals(head.args)]
        else:
            heads = [head]
        rules: list[Rule] = []
        for idx, h in enumerate(heads):
            if explicit_id is not None:
                rid = explicit_id if idx == 0 else f"{explicit_id}#{idx + 1}"
                if rid in self.used_ids:
                    raise DuplicateRuleIdError(f"duplicate rule id {rid!r}", start.line, start.col, self.path)
                self.used_ids.add(rid)
            else:
                rid = self.allocate_id(None, start.line, start)
            rule = Rule(rid, h, body, annotation=trace, origin=self.origin, specific_over=specific)
            check_safety(rule, start.line, start.col, self.path)
            rules.append(rule)
        return rules


def _expand_intervals(args: tuple) -> list[tuple[Term, ...]]:
    combos: list[list[Term]] = [[]]
    for a in args:
        if isinstance(a, _Interval):
            combos = [c + [Term.integer(v)] for c in combos for v in range(a.lo, a.hi + 1)]
        else:
            combos = [c + [a] for c in combos]
    return [tuple(c) for c in combos]


def parse_program(text: str, path: str = "<input>", origin: str = ORIGIN_ARTICLE) -> Program:
    """Parse `.lp` source into a Program; rejects learning-task constructs."""
    p = _Parser(text, path, origin)
    rules: list[Rule] = []
    while True:
        p.consume_annotations()
        tok = p.peek()
        if tok.kind == "EOF":
            break
        if tok.kind == "HASH":
            p.err(f"#{tok.value} is not allowed in program files (use a .task file)", tok)
        if tok.kind == "INT" and p.peek(1).kind == "~":
            p.err("explicit hypothesis-space entries belong in .task files", tok)
        rules.extend(p.parse_rule_statement())
    if p.pending_trace is not None or p.pending_id is not None:
        p.err("trailing %!trace/%# annotation without a statement")
    return Program(tuple(rules))


def parse_ground_atom(text: str, path: str = "<atom>") -> Atom:
    """Parse a single ground atom (used for queries and fact submission)."""
    p = _Parser(text, path, ORIGIN_ARTICLE)
    atom = p.parse_atom()
    p.accept(".")
    if p.peek().kind != "EOF":
        p.err("trailing input after atom")
    if not atom.is_ground:
        p.err(f"atom {atom} is not ground")
    return atom


def parse_statement(text: str, rule_id: str, path: str = "<statement>", origin: str = ORIGIN_ARTICLE) -> Rule:
    """Parse exactly one statement into a Rule with the given id."""
    p = _Parser(text, path, origin)
    p.consume_annotations()
    rules = p.parse_rule_statement()
    if p.peek().kind != "EOF" or len(rules) != 1:
        p.err("expected exactly one statement")
    return Rule(rule_id, rules[0].head, rules[0].body, rules[0].annotation, origin, rules[0].specific_over)


# -- learning tasks ---------------------------------------------------------


def parse_learning_task(text: str, path: str = "<task>") -> LearningTask:
    p = _Parser(text, path, ORIGIN_ARTICLE)
    background: list[Rule] = []
    explicit: list[tuple[int, Rule]] = []
    modes: list[ModeDecl] = []
    maxv: Optional[int] = None
    constants: list[tuple[str, Term]] = []
    examples: list[ExampleSpec] = []
    n_pos = n_neg = 0

    while True:
        p.consume_annotations()
        tok = p.peek()
        if tok.kind == "EOF":
            break
        if tok.kind == "HASH":
            name = p.next().value
            if name in ("modeh", "modeha"):
                modes.append(_parse_mode_decl(p, name, with_recall=False))
            elif name == "modeb":
                modes.append(_parse_mode_decl(p, name, with_recall=True))
            elif name == "modec":
                modes.append(_parse_modec(p))
            elif name == "maxv":
                p.expect("(")
                v = p.expect("INT")
                p.expect(")")
                p.expect(".")
                maxv = int(v.value)
                if maxv < 1:
                    p.err("#maxv must be >= 1", v)
            elif name == "constant":
                p.expect("(")
                t = p.expect("IDENT")
                p.expect(",")
                term = p.parse_term()
                if isinstance(term, _Interval) or not term.is_ground:
                    p.err("constant pool entries must be ground", tok)
                p.expect(")")
                p.expect(".")
                constants.append((t.value, term))
            elif name in ("pos", "neg"):
                if name == "pos":
                    n_pos += 1
                    label = f"pos{n_pos}"
                else:
                    n_neg += 1
                    label = f"neg{n_neg}"
                examples.append(_parse_example(p, name, label))
            else:
                p.err(f"unknown directive #{name}", tok)
        elif tok.kind == "INT" and p.peek(1).kind == "~":
            length_tok = p.next()
            p.expect("~")
            rules = p.parse_rule_statement()
            if len(rules) != 1:
                p.err("interval facts are not allowed as hypothesis-space entries", tok)
            rule = rules[0]
            declared = int(length_tok.value)
            actual = (0 if rule.is_denial else 1) + len(rule.body)
            if declared != actual:
                p.err(
                    f"declared length {declared} does not match head+body count {actual}"
                    f" for rule: {rule}",
                    length_tok,
                )
            explicit.append((declared, rule))
        else:
            background.extend(p.parse_rule_statement())

    return LearningTask(
        background=Program(tuple(background)),
        explicit_space=tuple(explicit),
        modes=tuple(modes),
        maxv=maxv,
        constants=tuple(constants),
        examples=tuple(examples),
    )


def _parse_schema_arg(p: _Parser) -> SchemaArg:
    tok = p.peek()
    if tok.kind == "IDENT" and tok.value in ("var", "const") and p.peek(1).kind == "(":
        kind = p.next().value
        p.expect("(")
        t = p.expect("IDENT")
        p.expect(")")
        return Placeholder(kind, t.value)
    term = p.parse_term()
    if not term.is_ground:
        p.err("schema arguments must be var(t), const(t) or ground terms", tok)
    return term


def _parse_schema_atom(p: _Parser) -> tuple[str, tuple[SchemaArg, ...]]:
    name = p.expect("IDENT")
    args: list[SchemaArg] = []
    if p.accept("("):
        args.append(_parse_schema_arg(p))
        while p.accept(","):
            args.append(_parse_schema_arg(p))
        p.expect(")")
    return name.value, tuple(args)


def _parse_flags(p: _Parser) -> frozenset[str]:
    flags: set[str] = set()
    if p.accept(","):
        p.expect("(")
        tok = p.expect("IDENT")
        flags.add(tok.value)
        while p.accept(","):
            flags.add(p.expect("IDENT").value)
        p.expect(")")
    return frozenset(flags)


def _parse_mode_decl(p: _Parser, kind: str, with_recall: bool) -> ModeDecl:
    start = p.peek()
    p.expect("(")
    recall = None
    if with_recall:
        recall_tok = p.expect("INT")
        recall = int(recall_tok.value)
        if recall < 1:
            p.err("modeb recall must be >= 1", recall_tok)
        p.expect(",")
    predicate, schema = _parse_schema_atom(p)
    flags = _parse_flags(p)
    p.expect(")")
    p.expect(".")
    try:
        return ModeDecl(kind, predicate=predicate, schema=schema, recall=recall, flags=flags)
    except ValueError as exc:
        p.err(f"malformed mode schema: {exc}", start)


def _parse_modec(p: _Parser) -> ModeDecl:
    start = p.peek()
    p.expect("(")
    left = _parse_schema_arg(p)
    op = p.parse_comparison_op()
    right = _parse_schema_arg(p)
    flags = _parse_flags(p)
    p.expect(")")
    p.expect(".")
    try:
        return ModeDecl("modec", comparison=(left, op, right), flags=flags)
    except ValueError as exc:
        p.err(f"malformed mode schema: {exc}", start)


def _parse_atom_set(p: _Parser) -> frozenset[Atom]:
    p.expect("{")
    atoms: list[Atom] = []
    if p.peek().kind != "}":
        atoms.append(p.parse_atom())
        while p.accept(","):
            atoms.append(p.parse_atom())
    close = p.expect("}")
    for a in atoms:
        if not a.is_ground:
            p.err(f"non-ground atom {a} inside inclusions/exclusions", close)
    return frozenset(atoms)


def _parse_example(p: _Parser, polarity: str, label: str) -> ExampleSpec:
    start = p.peek()
    p.expect("(")
    inclusions = _parse_atom_set(p)
    p.expect(",")
    exclusions = _parse_atom_set(p)
    context_rules: list[Rule] = []
    if p.accept(","):
        p.expect("{")
        k = 0
        while p.peek().kind != "}":
            for rule in p.parse_rule_statement():
                k += 1
                context_rules.append(
                    Rule(f"{label}:ctx{k}", rule.head, rule.body, rule.annotation, rule.origin)
                )
        p.expect("}")
    p.expect(")")
    p.expect(".")
    try:
        return ExampleSpec(
            polarity=polarity,
            inclusions=inclusions,
            exclusions=exclusions,
            context=Program(tuple(context_rules)),
            label=label,
        )
    except ValueError as exc:
        p.err(str(exc), start)
