"""Formal concept analysis over an activity/attribute cross table.

The cross table is a triplet of objects (daily activities), attributes
(experiential / temporal / spatial / physiological tags) and a boolean
incidence relation.  A formal concept is a pair (extent, intent) closed under
the two derivation operators; the concepts ordered by extent inclusion form a
complete lattice, which is antitone in the intents: X1 is a subset of X2
exactly when Y1 is a superset of Y2.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

DESK_LIMIT = 64


class UnknownMember(KeyError):
    pass


class TableTooLarge(ValueError):
    pass


class MixedTables(ValueError):
    pass


@dataclass(frozen=True)
class AttributeTag:
    name: str
    kind: str = "experiential"   # experiential | temporal | spatial | physiological

    def __post_init__(self):
        if self.kind not in ("experiential", "temporal", "spatial", "physiological"):
            raise ValueError(f"unknown attribute kind {self.kind!r}")


class CrossTable:
    """Objects x attributes boolean relation with bitmask derivation."""

    def __init__(self, objects: list[str], attributes: list[AttributeTag],
                 relation: list[list[bool]]):
        if len({o for o in objects}) != len(objects):
            raise ValueError("duplicate object names")
        names = [a.name for a in attributes]
        if len(set(names)) != len(names):
            raise ValueError("duplicate attribute names")
        if len(relation) != len(objects) or any(len(r) != len(attributes) for r in relation):
            raise ValueError("relation shape must be |objects| x |attributes|")
        self.objects = list(objects)
        self.attributes = list(attributes)
        self.relation = [list(map(bool, row)) for row in relation]
        self._obj_index = {o: i for i, o in enumerate(objects)}
        self._attr_index = {a.name: i for i, a in enumerate(attributes)}
        # row_bits[i] = bitmask of attributes held by object i; col_bits dual
        self.row_bits = [sum(1 << j for j, v in enumerate(row) if v) for row in self.relation]
        self.col_bits = [sum(1 << i for i in range(len(objects)) if self.relation[i][j])
                         for j in range(len(attributes))]
        self.table_id = hashlib.sha256(json.dumps(
            [objects, names, self.relation]).encode()).hexdigest()[:16]

    @property
    def attribute_names(self) -> list[str]:
        return [a.name for a in self.attributes]

    def object_bit(self, name: str) -> int:
        if name not in self._obj_index:
            raise UnknownMember(f"object {name!r} not in table")
        return self._obj_index[name]

    def attribute_bit(self, name: str) -> int:
        if name not in self._attr_index:
            raise UnknownMember(f"attribute {name!r} not in table")
        return self._attr_index[name]

    def extent_to_intent(self, extent_mask: int) -> int:
        """Attributes shared by every object in the extent (all attrs if empty)."""
        out = (1 << len(self.attributes)) - 1
        i = 0
        mask = extent_mask
        while mask:
            if mask & 1:
                out &= self.row_bits[i]
            mask >>= 1
            i += 1
        return out

    def intent_to_extent(self, intent_mask: int) -> int:
        """Objects holding every attribute in the intent (all objects if empty)."""
        out = (1 << len(self.objects)) - 1
        j = 0
        mask = intent_mask
        while mask:
            if mask & 1:
                out &= self.col_bits[j]
            mask >>= 1
            j += 1
        return out

    def names_from_mask(self, mask: int, side: str) -> frozenset[str]:
        pool = self.objects if side == "objects" else self.attribute_names
        return frozenset(pool[i] for i in range(len(pool)) if mask >> i & 1)

    def mask_from_names(self, names, side: str) -> int:
        f = self.object_bit if side == "objects" else self.attribute_bit
        out = 0
        for n in names:
            out |= 1 << f(n)
        return out

    @classmethod
    def from_csv(cls, path: str | Path,
                 kinds: dict[str, str] | None = None) -> "CrossTable":
        """First column is the activity, remaining columns are attributes, cells 0/1."""
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], rows[1:]
        attr_names = header[1:]
        attrs = [AttributeTag(n, (kinds or {}).get(n, "experiential")) for n in attr_names]
        objects = [r[0] for r in body]
        relation = [[c.strip() in ("1", "x", "X", "true") for c in r[1:]] for r in body]
        return cls(objects, attrs, relation)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["activity"] + self.attribute_names)
            for obj, row in zip(self.objects, self.relation):
                w.writerow([obj] + [int(v) for v in row])


@dataclass(frozen=True)
class FormalConcept:
    extent: frozenset[str]
    intent: frozenset[str]
    table_id: str = ""

    def __str__(self):
        return f"({{{', '.join(sorted(self.extent))}}}, {{{', '.join(sorted(self.intent))}}})"


def derive(table: CrossTable, side: str, subset) -> frozenset[str]:
    """Apply one derivation operator.

    side="extent": from a set of objects to the attributes they all share.
    side="intent": from a set of attributes to the objects that have them all.
    The empty set maps to the full opposite set.
    """
    if side == "extent":
        mask = table.mask_from_names(subset, "objects")
        return table.names_from_mask(table.extent_to_intent(mask), "attributes")
    if side == "intent":
        mask = table.mask_from_names(subset, "attributes")
        return table.names_from_mask(table.intent_to_extent(mask), "objects")
    raise ValueError("side must be 'extent' or 'intent'")


def enumerate_concepts(table: CrossTable) -> list[FormalConcept]:
    """Every closed (extent, intent) pair, ordered by extent size then name.

    Intents form the closure system generated by the object rows: start from
    the full attribute set and intersect with each row until fixpoint.
    """
    if len(table.objects) > DESK_LIMIT or len(table.attributes) > DESK_LIMIT:
        raise TableTooLarge(f"table beyond {DESK_LIMIT}x{DESK_LIMIT}")
    full = (1 << len(table.attributes)) - 1
    intents = {full}
    frontier = [full]
    while frontier:
        nxt = []
        for intent in frontier:
            for row in table.row_bits:
                cand = intent & row
                if cand not in intents:
                    intents.add(cand)
                    nxt.append(cand)
        frontier = nxt
    concepts = []
    for intent in intents:
        extent = table.intent_to_extent(intent)
        # re-derive: keeps only pairs closed both ways (e.g. full-attribute
        # intent with empty extent collapses when some attribute column is full)
        if table.extent_to_intent(extent) != intent:
            continue
        concepts.append(FormalConcept(
            extent=table.names_from_mask(extent, "objects"),
            intent=table.names_from_mask(intent, "attributes"),
            table_id=table.table_id))
    order = {o: i for i, o in enumerate(table.objects)}
    concepts.sort(key=lambda c: (len(c.extent), sorted(order[o] for o in c.extent)))
    return concepts


@dataclass
class ConceptLattice:
    concepts: list[FormalConcept]
    order: set[tuple[int, int]] = field(default_factory=set)   # (i, j): c_i <= c_j
    hasse: set[tuple[int, int]] = field(default_factory=set)   # transitive reduction

    def leq(self, i: int, j: int) -> bool:
        return (i, j) in self.order

    def to_json(self) -> dict:
        return {
            "concepts": [{"extent": sorted(c.extent), "intent": sorted(c.intent)}
                         for c in self.concepts],
            "edges": sorted(self.hasse),
        }


def build_lattice(concepts: list[FormalConcept]) -> ConceptLattice:
    """Order concepts by extent inclusion and emit the Hasse diagram."""
    ids = {c.table_id for c in concepts}
    if len(ids) > 1:
        raise MixedTables(f"concepts from different tables: {sorted(ids)}")
    n = len(concepts)
    order = {(i, j) for i in range(n) for j in range(n)
             if concepts[i].extent <= concepts[j].extent}
    strict = {(i, j) for i, j in order if i != j}
    hasse = {(i, j) for i, j in strict
             if not any((i, k) in strict and (k, j) in strict for k in range(n))}
    return ConceptLattice(concepts=concepts, order=order, hasse=hasse)
