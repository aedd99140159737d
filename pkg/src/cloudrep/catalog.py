"""Relations, their copies, and access statistics."""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Deque, Dict, Iterable, Iterator, List, Optional

from .topology import Location, RegionKey


class CatalogError(ValueError):
    pass


@dataclass(frozen=True)
class Relation:
    id: str
    size: Decimal  # GB
    home: Location

    def __post_init__(self):
        if not self.size > 0:
            raise CatalogError(f"relation {self.id}: size must be > 0")

    def to_dict(self) -> dict:
        return {"id": self.id, "size_gb": str(self.size), "home": self.home.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "Relation":
        return cls(d["id"], Decimal(str(d["size_gb"])), Location.from_dict(d["home"]))


@dataclass
class Replica:
    relation_id: str
    location: Location
    created_tick: int
    window_len: int
    current_accesses: int = 0
    window_accesses: Deque[int] = field(default_factory=deque)

    def __post_init__(self):
        self.window_accesses = deque(self.window_accesses, maxlen=self.window_len)

    def close_period(self) -> None:
        self.window_accesses.append(self.current_accesses)
        self.current_accesses = 0


@dataclass
class AccessStats:
    request_count: int = 0
    first_access_tick: Optional[int] = None
    last_access_tick: Optional[int] = None


class Catalog:
    """Mutable copy-set of every relation. The engine is the only writer."""

    def __init__(self, relations: Iterable[Relation], window_len: int = 5):
        self.window_len = max(1, window_len)
        self.relations: Dict[str, Relation] = {}
        self.stats: Dict[str, AccessStats] = {}
        self._replicas: Dict[str, Dict[RegionKey, Replica]] = {}
        self.vm_loads: Counter = Counter()
        self.version = 0  # bumped on every copy-set change
        for rel in relations:
            if rel.id in self.relations:
                raise CatalogError(f"duplicate relation id {rel.id}")
            self.relations[rel.id] = rel
            self.stats[rel.id] = AccessStats()
            self._replicas[rel.id] = {}
            self.vm_loads[rel.home] += 1

    def _relation(self, relation_id: str) -> Relation:
        try:
            return self.relations[relation_id]
        except KeyError:
            raise CatalogError(f"unknown relation {relation_id!r}") from None

    # -- access statistics -------------------------------------------------

    def record_access(self, relation_id: str, tick: int, copy: Optional[Location] = None) -> AccessStats:
        self._relation(relation_id)
        st = self.stats[relation_id]
        if st.last_access_tick is not None and tick < st.last_access_tick:
            raise CatalogError(f"{relation_id}: tick {tick} precedes last access {st.last_access_tick}")
        st.request_count += 1
        if st.first_access_tick is None:
            st.first_access_tick = tick
        st.last_access_tick = tick
        if copy is not None:
            rep = self._replicas[relation_id].get(copy.region_key)
            if rep is not None and rep.location == copy:
                rep.current_accesses += 1
        return st

    def popularity(self, relation_id: str, current_tick: int) -> float:
        """Average request rate since the first access; 0 if never accessed."""
        self._relation(relation_id)
        st = self.stats[relation_id]
        if st.first_access_tick is None:
            return 0.0
        if current_tick < st.first_access_tick:
            raise CatalogError(
                f"{relation_id}: current tick {current_tick} precedes first access {st.first_access_tick}"
            )
        return st.request_count / (current_tick - st.first_access_tick + 1)

    # -- copies --------------------------------------------------------------

    def copies_of(self, relation_id: str) -> List[Location]:
        rel = self._relation(relation_id)
        reps = sorted(
            self._replicas[relation_id].values(),
            key=lambda r: (r.created_tick, r.location.sort_key()),
        )
        return [rel.home] + [r.location for r in reps]

    def copy_map(self, relation_ids: Iterable[str]) -> Dict[str, List[Location]]:
        return {rid: self.copies_of(rid) for rid in relation_ids}

    def holds_region(self, relation_id: str, key: RegionKey) -> bool:
        rel = self._relation(relation_id)
        return rel.home.region_key == key or key in self._replicas[relation_id]

    def add_replica(self, relation_id: str, location: Location, tick: int) -> Replica:
        self._relation(relation_id)
        if self.holds_region(relation_id, location.region_key):
            raise CatalogError(
                f"{relation_id}: a copy already exists in {location.provider}/{location.region}"
            )
        rep = Replica(relation_id, location, tick, self.window_len)
        self._replicas[relation_id][location.region_key] = rep
        self.vm_loads[location] += 1
        self.version += 1
        return rep

    def remove_replica(self, relation_id: str, location: Location) -> Replica:
        rel = self._relation(relation_id)
        if location == rel.home or location.region_key == rel.home.region_key:
            raise CatalogError(f"{relation_id}: the home copy cannot be removed")
        rep = self._replicas[relation_id].get(location.region_key)
        if rep is None or rep.location != location:
            raise CatalogError(f"{relation_id}: no replica at {location}")
        del self._replicas[relation_id][location.region_key]
        self.vm_loads[location] -= 1
        if not self.vm_loads[location]:
            del self.vm_loads[location]
        self.version += 1
        return rep

    def replicas(self) -> Iterator[Replica]:
        """All replicas, in deterministic order."""
        for rid in sorted(self._replicas):
            for key in sorted(self._replicas[rid]):
                yield self._replicas[rid][key]

    @property
    def replica_count(self) -> int:
        return sum(len(v) for v in self._replicas.values())

    def close_period(self) -> None:
        for rep in self.replicas():
            rep.close_period()

    def to_dict(self) -> list:
        out = []
        for rid in sorted(self.relations):
            st = self.stats[rid]
            out.append(
                {
                    "id": rid,
                    "size_gb": str(self.relations[rid].size),
                    "copies": [str(loc) for loc in self.copies_of(rid)],
                    "request_count": st.request_count,
                    "first_access_tick": st.first_access_tick,
                    "last_access_tick": st.last_access_tick,
                }
            )
        return out
