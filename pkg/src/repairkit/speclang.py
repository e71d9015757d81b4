"""Parser and renderer for the declarative problem language.

Statement forms (``%`` starts a comment, every statement ends with ``.``)::

    relation R(A, B).
    fact R(i1; a4, a3).              % tid before ';', NULL is reserved
    dc k : S(x), R(x, y), S(y).
    query q(x) : S(x).
    query qk() : S(x), R(x, y), S(y).
    view secret vk(x, y) : S(x), R(x, y), S(y).
    feature color { red, green }.
    entity e1 (red, green).
    classifier (red, green) : 1.

Inside rule bodies an identifier denotes a variable when it starts with an
uppercase letter or is a single lowercase letter (``x``, ``y``, ``Town``);
anything else is a constant, and constants that would read as variables can
be quoted (``'x'``).  Fact, feature, entity and classifier arguments are
always constants.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import (ArityMismatch, DuplicateName, SpecSyntaxError,
                     UnknownRelation, UnsafeRule)
from .relational import (Fact, Instance, NULL_TOKEN, Relation, Schema,
                         make_fact, value_str)

# ---------------------------------------------------------------------------
# terms, atoms, rules


@dataclass(frozen=True)
class Variable:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class ConstantTerm:
    symbol: str

    def __str__(self):
        return self.symbol


Term = "Variable | ConstantTerm"


@dataclass(frozen=True)
class Atom:
    relation: str
    args: "tuple[Variable | ConstantTerm, ...]"

    def variables(self) -> "tuple[Variable, ...]":
        return tuple(a for a in self.args if isinstance(a, Variable))


@dataclass(frozen=True)
class Comparison:
    left: "Variable | ConstantTerm"
    op: str  # "=" or "!="
    right: "Variable | ConstantTerm"

    def variables(self) -> "tuple[Variable, ...]":
        return tuple(t for t in (self.left, self.right) if isinstance(t, Variable))


@dataclass(frozen=True)
class DenialConstraint:
    """A forbidden conjunction: no assignment may satisfy body + comparisons."""

    name: str
    body: tuple[Atom, ...]
    comparisons: tuple[Comparison, ...] = ()


@dataclass(frozen=True)
class ConjunctiveQuery:
    name: str
    head_vars: tuple[Variable, ...]
    body: tuple[Atom, ...]
    comparisons: tuple[Comparison, ...] = ()
    secret: bool = False

    @property
    def is_boolean(self) -> bool:
        return not self.head_vars


@dataclass(frozen=True)
class Feature:
    name: str
    domain: tuple[str, ...]


@dataclass(frozen=True)
class EntityDecl:
    id: str
    values: tuple[str, ...]


@dataclass
class ClassifierSpec:
    """Feature space, labeled entities, and an optional total decision table."""

    features: tuple[Feature, ...]
    entities: tuple[EntityDecl, ...] = ()
    table: "dict[tuple[str, ...], int] | None" = None

    def entity(self, entity_id: str) -> EntityDecl:
        for e in self.entities:
            if e.id == entity_id:
                return e
        raise DuplicateName(f"no entity named {entity_id!r}")


@dataclass
class ProblemSpec:
    schema: Schema
    instance: Instance
    dcs: tuple[DenialConstraint, ...] = ()
    queries: tuple[ConjunctiveQuery, ...] = ()
    views: tuple[ConjunctiveQuery, ...] = ()
    classifier: "ClassifierSpec | None" = None

    def query(self, name: str) -> ConjunctiveQuery:
        for q in self.queries:
            if q.name == name:
                return q
        raise DuplicateName(f"no query named {name!r}")

    def view(self, name: str) -> ConjunctiveQuery:
        for v in self.views:
            if v.name == name:
                return v
        raise DuplicateName(f"no view named {name!r}")


# ---------------------------------------------------------------------------
# tokenizer

_KEYWORDS = {"relation", "fact", "dc", "query", "view", "secret",
             "feature", "entity", "classifier"}
_SYMBOL_RE = re.compile(r"[A-Za-z0-9_][A-Za-z0-9_]*")
_VARIABLE_RE = re.compile(r"[A-Z][A-Za-z0-9_]*$|[a-z]$")
_PUNCT = ("!=", "->", "(", ")", "{", "}", ",", ";", ":", ".", "=", "≠")


@dataclass(frozen=True)
class _Token:
    kind: str  # "symbol" | "quoted" | "punct" | "eof"
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col, i = 1, 1, 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "%":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "'":
            end = text.find("'", i + 1)
            if end < 0 or "\n" in text[i + 1:end]:
                raise SpecSyntaxError("unterminated quoted constant", line, col)
            tokens.append(_Token("quoted", text[i + 1:end], line, col))
            col += end - i + 1
            i = end + 1
            continue
        m = _SYMBOL_RE.match(text, i)
        if m:
            tokens.append(_Token("symbol", m.group(), line, col))
            col += len(m.group())
            i = m.end()
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                op = "!=" if p == "≠" else p
                tokens.append(_Token("punct", op, line, col))
                i += len(p)
                col += len(p)
                break
        else:
            raise SpecSyntaxError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("eof", "", line, col))
    return tokens


def _is_variable_name(name: str) -> bool:
    return bool(_VARIABLE_RE.match(name))


# ---------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.relations: list[Relation] = []
        self.facts: list[Fact] = []
        self.dcs: list[DenialConstraint] = []
        self.queries: list[ConjunctiveQuery] = []
        self.views: list[ConjunctiveQuery] = []
        self.features: list[Feature] = []
        self.entities: list[EntityDecl] = []
        self.table_rows: list[tuple[tuple[str, ...], int, _Token]] = []

    # -- token plumbing

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.next()
        if tok.text != text or tok.kind == "quoted":
            raise SpecSyntaxError(f"expected {text!r}, found {tok.text!r}",
                                  tok.line, tok.col)
        return tok

    def expect_symbol(self, what: str) -> _Token:
        tok = self.next()
        if tok.kind != "symbol":
            raise SpecSyntaxError(f"expected {what}, found {tok.text!r}",
                                  tok.line, tok.col)
        return tok

    def fail(self, message: str, tok: _Token):
        raise SpecSyntaxError(message, tok.line, tok.col)

    # -- statements

    def parse(self) -> ProblemSpec:
        while self.peek().kind != "eof":
            tok = self.next()
            if tok.kind != "symbol" or tok.text not in _KEYWORDS:
                self.fail(f"expected a statement keyword, found {tok.text!r}", tok)
            getattr(self, f"_parse_{tok.text}")(tok)
        return self._build()

    def _parse_relation(self, kw: _Token):
        name = self.expect_symbol("relation name")
        self._check_fresh_relation(name)
        self.expect("(")
        attrs = [self.expect_symbol("attribute name").text]
        while self.peek().text == ",":
            self.next()
            attrs.append(self.expect_symbol("attribute name").text)
        self.expect(")")
        self.expect(".")
        if len(set(attrs)) != len(attrs):
            self.fail(f"relation {name.text!r} repeats an attribute", name)
        self.relations.append(Relation(name.text, tuple(attrs)))

    def _parse_fact(self, kw: _Token):
        name = self.expect_symbol("relation name")
        self.expect("(")
        tid = self.expect_symbol("tuple id")
        self.expect(";")
        values: "list[str | None]" = [self._ground_value(allow_null=True)]
        while self.peek().text == ",":
            self.next()
            values.append(self._ground_value(allow_null=True))
        self.expect(")")
        self.expect(".")
        self.facts.append((name, Fact(tid.text, name.text, tuple(values))))

    def _parse_dc(self, kw: _Token):
        name = self.expect_symbol("constraint name")
        self.expect(":")
        body, comparisons = self._parse_body(name.text)
        self.expect(".")
        self.dcs.append(DenialConstraint(name.text, body, comparisons))

    def _parse_query(self, kw: _Token, secret: bool = False):
        name = self.expect_symbol("query name")
        self.expect("(")
        head: list[Variable] = []
        if self.peek().text != ")":
            head.append(self._head_variable())
            while self.peek().text == ",":
                self.next()
                head.append(self._head_variable())
        self.expect(")")
        self.expect(":")
        body, comparisons = self._parse_body(name.text)
        self.expect(".")
        query = ConjunctiveQuery(name.text, tuple(head), body, comparisons,
                                 secret=secret)
        body_vars = {v.name for atom in body for v in atom.variables()}
        for v in head:
            if v.name not in body_vars:
                raise UnsafeRule(name.text, v.name)
        (self.views if secret else self.queries).append(query)

    def _parse_view(self, kw: _Token):
        self.expect("secret")
        self._parse_query(kw, secret=True)

    def _parse_feature(self, kw: _Token):
        name = self.expect_symbol("feature name")
        self.expect("{")
        domain = [self._ground_value(allow_null=False)]
        while self.peek().text == ",":
            self.next()
            domain.append(self._ground_value(allow_null=False))
        self.expect("}")
        self.expect(".")
        if len(set(domain)) != len(domain):
            self.fail(f"feature {name.text!r} repeats a domain value", name)
        self.features.append(Feature(name.text, tuple(domain)))

    def _parse_entity(self, kw: _Token):
        name = self.expect_symbol("entity id")
        self.expect("(")
        values = [self._ground_value(allow_null=False)]
        while self.peek().text == ",":
            self.next()
            values.append(self._ground_value(allow_null=False))
        self.expect(")")
        self.expect(".")
        self.entities.append(EntityDecl(name.text, tuple(values)))

    def _parse_classifier(self, kw: _Token):
        self.expect("(")
        vector = [self._ground_value(allow_null=False)]
        while self.peek().text == ",":
            self.next()
            vector.append(self._ground_value(allow_null=False))
        self.expect(")")
        self.expect(":")
        label = self.expect_symbol("label 0 or 1")
        if label.text not in ("0", "1"):
            self.fail(f"classifier label must be 0 or 1, found {label.text!r}",
                      label)
        self.expect(".")
        self.table_rows.append((tuple(vector), int(label.text), kw))

    # -- shared pieces

    def _head_variable(self) -> Variable:
        tok = self.next()
        if tok.kind != "symbol" or not _is_variable_name(tok.text):
            self.fail(f"expected a head variable, found {tok.text!r}", tok)
        return Variable(tok.text)

    def _ground_value(self, allow_null: bool) -> "str | None":
        tok = self.next()
        if tok.kind == "quoted":
            return tok.text
        if tok.kind != "symbol":
            self.fail(f"expected a constant, found {tok.text!r}", tok)
        if tok.text == NULL_TOKEN:
            if not allow_null:
                self.fail("NULL is not allowed here", tok)
            return None
        return tok.text

    def _term(self) -> "Variable | ConstantTerm":
        tok = self.next()
        if tok.kind == "quoted":
            return ConstantTerm(tok.text)
        if tok.kind != "symbol":
            self.fail(f"expected a term, found {tok.text!r}", tok)
        if tok.text == NULL_TOKEN:
            self.fail("NULL cannot appear in rule bodies", tok)
        if _is_variable_name(tok.text):
            return Variable(tok.text)
        return ConstantTerm(tok.text)

    def _parse_body(self, rule_name: str
                    ) -> tuple[tuple[Atom, ...], tuple[Comparison, ...]]:
        atoms: list[Atom] = []
        comparisons: list[Comparison] = []
        while True:
            start = self.peek()
            if start.kind == "symbol" and self.tokens[self.pos + 1].text == "(" \
                    and self.tokens[self.pos + 1].kind == "punct":
                atoms.append(self._atom())
            else:
                left = self._term()
                op = self.next()
                if op.text not in ("=", "!="):
                    self.fail(f"expected '=' or '!=', found {op.text!r}", op)
                right = self._term()
                self._fold_comparison(left, op, right, comparisons)
            if self.peek().text != ",":
                break
            self.next()
        if not atoms:
            self.fail(f"rule {rule_name!r} needs at least one atom", self.peek())
        body_vars = {v.name for atom in atoms for v in atom.variables()}
        for comp in comparisons:
            for v in comp.variables():
                if v.name not in body_vars:
                    raise UnsafeRule(rule_name, v.name)
        return tuple(atoms), tuple(comparisons)

    def _fold_comparison(self, left, op: _Token, right,
                         comparisons: list[Comparison]):
        if isinstance(left, ConstantTerm) and isinstance(right, ConstantTerm):
            holds = (left.symbol == right.symbol) == (op.text == "=")
            if not holds:
                self.fail("comparison between constants is never satisfied", op)
            return  # true ground comparison folds away
        comparisons.append(Comparison(left, op.text, right))

    def _atom(self) -> Atom:
        name = self.expect_symbol("relation name")
        self.expect("(")
        args = [self._term()]
        while self.peek().text == ",":
            self.next()
            args.append(self._term())
        self.expect(")")
        rel = None
        for r in self.relations:
            if r.name == name.text:
                rel = r
        if rel is None:
            raise UnknownRelation(
                f"{name.line}:{name.col}: relation {name.text!r} is not declared")
        if rel.arity != len(args):
            raise ArityMismatch(
                f"{name.line}:{name.col}: {name.text} expects {rel.arity} "
                f"arguments, got {len(args)}")
        return Atom(name.text, tuple(args))

    def _check_fresh_relation(self, name: _Token):
        if any(r.name == name.text for r in self.relations):
            raise DuplicateName(f"relation {name.text!r} declared twice")

    # -- assembly

    def _build(self) -> ProblemSpec:
        schema = Schema(tuple(self.relations))
        facts = []
        for name_tok, fact in self.facts:
            if not schema.has_relation(fact.relation):
                raise UnknownRelation(
                    f"{name_tok.line}:{name_tok.col}: relation "
                    f"{fact.relation!r} is not declared")
            facts.append(make_fact(schema, fact.relation, fact.tid, fact.values))
        instance = Instance(schema, tuple(facts))

        for group, kind in ((self.dcs, "dc"), (self.queries, "query"),
                            (self.views, "view"), (self.features, "feature"),
                            (self.entities, "entity")):
            names = [getattr(g, "name", getattr(g, "id", None)) for g in group]
            dup = {n for n in names if names.count(n) > 1}
            if dup:
                raise DuplicateName(f"{kind} {sorted(dup)[0]!r} declared twice")

        classifier = self._build_classifier()
        return ProblemSpec(schema, instance, tuple(self.dcs),
                           tuple(self.queries), tuple(self.views), classifier)

    def _build_classifier(self) -> "ClassifierSpec | None":
        if not self.features:
            if self.entities or self.table_rows:
                first = self.table_rows[0][2] if self.table_rows else None
                raise SpecSyntaxError(
                    "entities/classifier rows need feature declarations",
                    first.line if first else 1, first.col if first else 1)
            return None
        domains = [f.domain for f in self.features]
        product_size = 1
        for d in domains:
            product_size *= len(d)
        table: "dict[tuple[str, ...], int] | None" = None
        if self.table_rows:
            table = {}
            for vector, label, tok in self.table_rows:
                self._check_vector(vector, tok)
                if vector in table:
                    raise SpecSyntaxError(
                        f"classifier row {vector} given twice", tok.line, tok.col)
                table[vector] = label
            if len(table) != product_size:
                tok = self.table_rows[0][2]
                raise SpecSyntaxError(
                    f"classifier table has {len(table)} rows but the feature "
                    f"domains yield {product_size} vectors", tok.line, tok.col)
        for e in self.entities:
            if len(e.values) != len(domains):
                raise ArityMismatch(
                    f"entity {e.id!r} has {len(e.values)} values for "
                    f"{len(domains)} features")
            for v, feat in zip(e.values, self.features):
                if v not in feat.domain:
                    raise ArityMismatch(
                        f"entity {e.id!r}: {v!r} not in domain of {feat.name!r}")
        return ClassifierSpec(tuple(self.features), tuple(self.entities), table)

    def _check_vector(self, vector: tuple[str, ...], tok: _Token):
        if len(vector) != len(self.features):
            raise SpecSyntaxError(
                f"classifier row has {len(vector)} values for "
                f"{len(self.features)} features", tok.line, tok.col)
        for v, feat in zip(vector, self.features):
            if v not in feat.domain:
                raise SpecSyntaxError(
                    f"{v!r} not in domain of feature {feat.name!r}",
                    tok.line, tok.col)


def parse_spec(text: str) -> ProblemSpec:
    """Parse a full problem spec; diagnostics carry line:column positions."""
    return _Parser(text).parse()


def parse_inline_query(text: str, schema: Schema) -> ConjunctiveQuery:
    """Parse a bare query body like ``S(x), R(x,y)``.

    The head is the sequence of variables in order of first occurrence, so
    ``S(x)`` asks for all x with S(x).
    """
    parser = _Parser("")
    parser.relations = list(schema.relations)
    parser.tokens = _tokenize(text)
    parser.pos = 0
    body, comparisons = parser._parse_body("inline")
    tok = parser.peek()
    if tok.kind != "eof" and tok.text != ".":
        parser.fail(f"unexpected trailing input {tok.text!r}", tok)
    head: list[Variable] = []
    for atom in body:
        for v in atom.variables():
            if v not in head:
                head.append(v)
    return ConjunctiveQuery("inline", tuple(head), body, comparisons)


# ---------------------------------------------------------------------------
# renderer


def _render_symbol(symbol: str, rule_context: bool) -> str:
    plain = _SYMBOL_RE.fullmatch(symbol) and symbol != NULL_TOKEN
    if rule_context:
        plain = plain and not _is_variable_name(symbol)
    return symbol if plain else f"'{symbol}'"


def _render_term(term: "Variable | ConstantTerm") -> str:
    if isinstance(term, Variable):
        return term.name
    return _render_symbol(term.symbol, rule_context=True)


def _render_body(body: tuple[Atom, ...], comparisons: tuple[Comparison, ...]) -> str:
    parts = [f"{a.relation}({', '.join(_render_term(t) for t in a.args)})"
             for a in body]
    parts += [f"{_render_term(c.left)} {c.op} {_render_term(c.right)}"
              for c in comparisons]
    return ", ".join(parts)


def render_spec(spec: ProblemSpec) -> str:
    """Render a spec to parseable text; parse(render(s)) == s."""
    out = ["% problem spec"]
    for rel in spec.schema.relations:
        out.append(f"relation {rel.name}({', '.join(rel.attributes)}).")
    for fact in spec.instance.facts:  # already in canonical (relation, tid) order
        vals = ", ".join(
            NULL_TOKEN if v is None else _render_symbol(v, rule_context=False)
            for v in fact.values)
        out.append(f"fact {fact.relation}({fact.tid}; {vals}).")
    for dc in spec.dcs:
        out.append(f"dc {dc.name} : {_render_body(dc.body, dc.comparisons)}.")
    for q in spec.queries:
        head = ", ".join(v.name for v in q.head_vars)
        out.append(f"query {q.name}({head}) : {_render_body(q.body, q.comparisons)}.")
    for v in spec.views:
        head = ", ".join(h.name for h in v.head_vars)
        out.append(f"view secret {v.name}({head}) : "
                   f"{_render_body(v.body, v.comparisons)}.")
    if spec.classifier is not None:
        cl = spec.classifier
        for feat in cl.features:
            dom = ", ".join(_render_symbol(d, rule_context=False)
                            for d in feat.domain)
            out.append(f"feature {feat.name} {{ {dom} }}.")
        for e in cl.entities:
            vals = ", ".join(_render_symbol(v, rule_context=False)
                             for v in e.values)
            out.append(f"entity {e.id} ({vals}).")
        if cl.table is not None:
            for vector in sorted(cl.table):
                vals = ", ".join(_render_symbol(v, rule_context=False)
                                 for v in vector)
                out.append(f"classifier ({vals}) : {cl.table[vector]}.")
    return "\n".join(out) + "\n"
