"""Relational value model: constants and NULL, facts with global tuple ids,
schemas, and immutable instances.

A cell value is either an interned symbol (a plain ``str``) or ``None``,
which stands for an SQL-style NULL: no comparison involving NULL is ever
satisfied, so NULL can never be used to satisfy a join.  Use
:func:`same_value` instead of ``==`` wherever join semantics matter.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass

from .errors import (ArityMismatch, DuplicateTid, NotDerivable, UnknownAttribute,
                     UnknownRelation, UnknownTid)

Value = "str | None"  # documentation alias; None is NULL
NULL_TOKEN = "NULL"


def same_value(a: "str | None", b: "str | None") -> bool:
    """Join-level equality: true only for two equal non-NULL symbols."""
    return a is not None and b is not None and a == b


def value_str(v: "str | None") -> str:
    return NULL_TOKEN if v is None else v


@dataclass(frozen=True)
class Relation:
    name: str
    attributes: tuple[str, ...]

    def __post_init__(self):
        if len(self.attributes) < 1:
            raise ArityMismatch(f"relation {self.name!r} must have arity >= 1")
        if len(set(self.attributes)) != len(self.attributes):
            raise DuplicateTid(f"relation {self.name!r} repeats an attribute")

    @property
    def arity(self) -> int:
        return len(self.attributes)


@dataclass(frozen=True)
class Schema:
    relations: tuple[Relation, ...]

    def __post_init__(self):
        names = [r.name for r in self.relations]
        if len(set(names)) != len(names):
            raise UnknownRelation("duplicate relation name in schema")

    def relation(self, name: str) -> Relation:
        for r in self.relations:
            if r.name == name:
                return r
        raise UnknownRelation(f"relation {name!r} is not declared")

    def has_relation(self, name: str) -> bool:
        return any(r.name == name for r in self.relations)


@dataclass(frozen=True)
class Fact:
    """One stored tuple: relation name, global tuple id, cell values."""

    tid: str
    relation: str
    values: tuple["str | None", ...]

    def value_of(self, relation: Relation, attribute: str) -> "str | None":
        return self.values[relation.attributes.index(attribute)]

    def sort_key(self) -> tuple[str, str]:
        return (self.relation, self.tid)


@dataclass(frozen=True)
class CellChange:
    """Replacement of one cell by NULL, addressed as (tid, attribute)."""

    tid: str
    attribute: str

    def sort_key(self) -> tuple[str, str]:
        return (self.tid, self.attribute)


@dataclass(frozen=True)
class Instance:
    """An immutable set of facts over a schema, keyed by globally unique tids."""

    schema: Schema
    facts: tuple[Fact, ...]

    def __post_init__(self):
        # canonical storage order keeps equality and rendering deterministic
        ordered = tuple(sorted(self.facts, key=Fact.sort_key))
        object.__setattr__(self, "facts", ordered)
        seen = set()
        for f in ordered:
            if f.tid in seen:
                raise DuplicateTid(f"tid {f.tid!r} occurs twice")
            seen.add(f.tid)
            rel = self.schema.relation(f.relation)
            if len(f.values) != rel.arity:
                raise ArityMismatch(
                    f"fact {f.tid!r}: {f.relation} expects {rel.arity} values, "
                    f"got {len(f.values)}")

    def by_tid(self) -> dict[str, Fact]:
        return {f.tid: f for f in self.facts}

    def fact(self, tid: str) -> Fact:
        for f in self.facts:
            if f.tid == tid:
                return f
        raise UnknownTid(f"tid {tid!r} not in instance")

    def has_tid(self, tid: str) -> bool:
        return any(f.tid == tid for f in self.facts)

    def tids(self) -> frozenset[str]:
        return frozenset(f.tid for f in self.facts)

    def relation_facts(self, name: str) -> tuple[Fact, ...]:
        return tuple(f for f in self.facts if f.relation == name)


def empty_instance(schema: Schema) -> Instance:
    return Instance(schema, ())


def make_fact(schema: Schema, relation: str, tid: str,
              values: "tuple[str | None, ...]") -> Fact:
    rel = schema.relation(relation)
    if len(values) != rel.arity:
        raise ArityMismatch(
            f"{relation} expects {rel.arity} values, got {len(values)}")
    return Fact(tid, relation, tuple(
        sys.intern(v) if isinstance(v, str) else None for v in values))


def insert(instance: Instance, fact: Fact) -> Instance:
    """Return a new instance extended with ``fact``; the input is unchanged."""
    if instance.has_tid(fact.tid):
        raise DuplicateTid(f"tid {fact.tid!r} already present")
    rel = instance.schema.relation(fact.relation)  # raises UnknownRelation
    if len(fact.values) != rel.arity:
        raise ArityMismatch(
            f"{fact.relation} expects {rel.arity} values, got {len(fact.values)}")
    return Instance(instance.schema, instance.facts + (fact,))


def delete_tids(instance: Instance, tids: "set[str] | frozenset[str]") -> Instance:
    """Return the instance without the named tuples."""
    missing = set(tids) - set(instance.tids())
    if missing:
        raise UnknownTid(f"unknown tids: {sorted(missing)}")
    return Instance(instance.schema,
                    tuple(f for f in instance.facts if f.tid not in tids))


def apply_cell_changes(instance: Instance,
                       changes: "set[CellChange] | frozenset[CellChange]") -> Instance:
    """Return the instance with every named cell replaced by NULL."""
    by_tid: dict[str, list["str | None"]] = {}
    for change in changes:
        fact = instance.fact(change.tid)  # raises UnknownTid
        rel = instance.schema.relation(fact.relation)
        if change.attribute not in rel.attributes:
            raise UnknownAttribute(
                f"{fact.relation} has no attribute {change.attribute!r}")
        cells = by_tid.setdefault(change.tid, list(fact.values))
        cells[rel.attributes.index(change.attribute)] = None
    new_facts = tuple(
        Fact(f.tid, f.relation, tuple(by_tid[f.tid])) if f.tid in by_tid else f
        for f in instance.facts)
    return Instance(instance.schema, new_facts)


def diff(base: Instance, other: Instance
         ) -> "tuple[frozenset[str], frozenset[tuple[str, str, str | None, str | None]]]":
    """Describe ``other`` relative to ``base``.

    Returns (deleted tids, changed cells) where each changed cell is
    (tid, attribute, old value, new value).  ``other`` must be derivable
    from ``base`` by deletions and cell changes.
    """
    base_map = base.by_tid()
    deleted = frozenset(base.tids() - other.tids())
    changed: set[tuple[str, str, "str | None", "str | None"]] = set()
    for f in other.facts:
        if f.tid not in base_map:
            raise NotDerivable(f"tid {f.tid!r} absent from base")
        orig = base_map[f.tid]
        if orig.relation != f.relation or len(orig.values) != len(f.values):
            raise NotDerivable(f"tid {f.tid!r} changed relation or arity")
        rel = base.schema.relation(f.relation)
        for attr, old, new in zip(rel.attributes, orig.values, f.values):
            if old != new:
                changed.add((f.tid, attr, old, new))
    return deleted, frozenset(changed)
