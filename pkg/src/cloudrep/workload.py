"""Seeded query streams.

The generator is :class:`random.Random` (MT19937) seeded with the scenario's
64-bit seed; draws happen in a fixed order, so a seed pins the stream:

1. repeat mode draws one relation set up front (class, then relations);
2. for each query, random mode draws the class and relations, then the
   origin ``(provider, region)`` is drawn uniformly.

Relations are picked per region id (US, UE, ...): one per region id for a
simple query, two for a complex one. The provider of each pick is uniform
among providers that still have an unpicked relation in that region.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple

from .catalog import Relation
from .scenario import WorkloadSpec
from .topology import RegionKey, Topology

PER_REGION = {"simple": 1, "complex": 2}


class WorkloadError(ValueError):
    pass


@dataclass(frozen=True)
class Query:
    id: int
    origin: RegionKey
    relation_ids: Tuple[str, ...]
    kind: str = "complex"

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "origin": list(self.origin),
            "relations": list(self.relation_ids),
            "class": self.kind,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Query":
        try:
            origin = tuple(d["origin"])
            kind = d.get("class", "complex")
            if len(origin) != 2 or kind not in PER_REGION:
                raise ValueError
            return cls(int(d["id"]), origin, tuple(d["relations"]), kind)
        except (KeyError, TypeError, ValueError):
            raise WorkloadError(f"malformed query record: {d!r}") from None


def _index(relations: Iterable[Relation]) -> Dict[RegionKey, List[str]]:
    by_region: Dict[RegionKey, List[str]] = {}
    for rel in relations:
        by_region.setdefault(rel.home.region_key, []).append(rel.id)
    for ids in by_region.values():
        ids.sort()
    return by_region


def _draw_relations(
    rng: random.Random, kind: str, topology: Topology, by_region: Dict[RegionKey, List[str]]
) -> Tuple[str, ...]:
    chosen: List[str] = []
    for region_id in topology.region_ids:
        for _ in range(PER_REGION[kind]):
            providers = [
                p.id
                for p in topology.providers
                if any(r not in chosen for r in by_region.get((p.id, region_id), ()))
            ]
            if not providers:
                raise WorkloadError(f"not enough relations in region {region_id} for a {kind} query")
            provider = rng.choice(providers)
            pool = [r for r in by_region[(provider, region_id)] if r not in chosen]
            chosen.append(rng.choice(pool))
    return tuple(chosen)


def _draw_kind(rng: random.Random, complexity: str) -> str:
    if complexity == "mixed":
        return rng.choice(("simple", "complex"))
    return complexity


def generate(spec: WorkloadSpec, topology: Topology, relations: Sequence[Relation], seed: int) -> List[Query]:
    rng = random.Random(seed)
    by_region = _index(relations)
    origins = topology.region_keys
    fixed = None
    if spec.mode == "repeat":
        kind = _draw_kind(rng, spec.complexity)
        fixed = (kind, _draw_relations(rng, kind, topology, by_region))
    stream = []
    for i in range(spec.count):
        if fixed is None:
            kind = _draw_kind(rng, spec.complexity)
            rels = _draw_relations(rng, kind, topology, by_region)
        else:
            kind, rels = fixed
        stream.append(Query(i + 1, rng.choice(origins), rels, kind))
    return stream


def dump(queries: Sequence[Query], path) -> None:
    Path(path).write_text(json.dumps([q.to_dict() for q in queries], indent=1) + "\n")


def ingest(path) -> List[Query]:
    data = json.loads(Path(path).read_text())
    if not isinstance(data, list):
        raise WorkloadError(f"{path}: expected a JSON array of queries")
    return [Query.from_dict(d) for d in data]
