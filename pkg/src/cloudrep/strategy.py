"""Replication strategies: TCDRM (trigger, placement, deletion) and the NoRepLc baseline."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Dict, List, Mapping, Sequence, Tuple

from .catalog import Catalog
from .planning import Copies, hypothetical_plan
from .scenario import SlaThresholds
from .topology import Location, RegionKey

__all__ = [
    "SlaThresholds",
    "CandidateEstimate",
    "Placement",
    "ReplicationDecision",
    "is_popular",
    "evaluate_trigger",
    "place_replicas",
    "period_below_threshold",
    "prune_replicas",
    "Strategy",
    "TCDRM",
    "NoRepLc",
    "make_strategy",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CandidateEstimate:
    relation_id: str
    region: RegionKey
    cost: Decimal
    time: float
    verdict: str  # "placed", "over_cost", "over_time", "not_reached"

    def to_dict(self) -> dict:
        return {
            "relation": self.relation_id,
            "region": list(self.region),
            "est_cost": str(self.cost),
            "est_time": self.time,
            "verdict": self.verdict,
        }


@dataclass(frozen=True)
class Placement:
    relation_id: str
    region: RegionKey
    location: Location
    est_cost: Decimal
    est_time: float

    def to_dict(self) -> dict:
        return {
            "relation": self.relation_id,
            "region": list(self.region),
            "location": str(self.location),
            "est_cost": str(self.est_cost),
            "est_time": self.est_time,
        }


@dataclass
class ReplicationDecision:
    candidates: List[str] = field(default_factory=list)
    placements: List[Placement] = field(default_factory=list)
    skipped: List[Tuple[str, str]] = field(default_factory=list)
    evaluated: List[CandidateEstimate] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "candidates": list(self.candidates),
            "placements": [p.to_dict() for p in self.placements],
            "skipped": [{"relation": r, "reason": why} for r, why in self.skipped],
            "evaluated": [e.to_dict() for e in self.evaluated],
        }


# -- creation -------------------------------------------------------------------


def is_popular(catalog: Catalog, relation_id: str, thresholds: SlaThresholds, tick: int) -> bool:
    if thresholds.popularity_mode == "count":
        return catalog.stats[relation_id].request_count > thresholds.p_sla
    return catalog.popularity(relation_id, tick) > thresholds.p_sla


def evaluate_trigger(result, relation_ids: Sequence[str], catalog: Catalog, thresholds: SlaThresholds,
                     tick: int) -> List[str]:
    """Relations to replicate after a query: empty unless the query broke t_sla or c_sla."""
    if not (result.t_q > thresholds.t_sla or result.cost.total > thresholds.c_sla):
        return []
    return [rid for rid in relation_ids if is_popular(catalog, rid, thresholds, tick)]


def place_replicas(
    rd: Sequence[str],
    query,
    copies: Copies,
    loads: Mapping[Location, int],
    scenario,
    thresholds: SlaThresholds,
) -> ReplicationDecision:
    """Pick a region for each relation in ``rd``.

    Candidates are the regions without a copy, visited by ascending estimated
    cost (ties by provider, region). The first one with estimated cost below
    c_sla and estimated time below t_sla wins. Each accepted placement is
    folded into the working copy-set before the next relation is estimated.
    ``copies`` and ``loads`` are not mutated.
    """
    decision = ReplicationDecision(candidates=list(rd))
    work: Dict[str, List[Location]] = {rid: list(locs) for rid, locs in copies.items()}
    work_loads = Counter(loads)
    all_regions = scenario.topology.region_keys
    for rid in rd:
        held = {loc.region_key for loc in work[rid]}
        estimates = []
        for key in all_regions:
            if key in held:
                continue
            plan, loc = hypothetical_plan(query, rid, key, work, work_loads, scenario)
            estimates.append((plan.cost.total, key, plan.time, loc))
        if not estimates:
            decision.skipped.append((rid, "no candidate region"))
            continue
        estimates.sort(key=lambda e: (e[0], e[1]))
        chosen = None
        saw_cheap = False
        for cost, key, t, loc in estimates:
            if chosen is not None:
                verdict = "not_reached"
            elif not cost < thresholds.c_sla:
                verdict = "over_cost"
            elif not t < thresholds.t_sla:
                saw_cheap = True
                verdict = "over_time"
            else:
                chosen = Placement(rid, key, loc, cost, t)
                verdict = "placed"
            decision.evaluated.append(CandidateEstimate(rid, key, cost, t, verdict))
        if chosen is None:
            reason = "no candidate under t_sla" if saw_cheap else "no candidate under c_sla"
            decision.skipped.append((rid, reason))
            continue
        decision.placements.append(chosen)
        work[rid].append(chosen.location)
        work_loads[chosen.location] += 1
    return decision


# -- deletion -------------------------------------------------------------------


def period_below_threshold(accesses: int, thresholds: SlaThresholds) -> bool:
    """Whether one closed period's accesses to a copy count as unpopular.

    rate mode: accesses / period_length < p_sla.
    count mode: the period's accesses, extended over the whole delta_t window,
    fall short of p_sla (accesses * delta_t < p_sla).
    """
    if thresholds.popularity_mode == "rate":
        return accesses < thresholds.p_sla * thresholds.period_length
    return accesses * thresholds.delta_t < thresholds.p_sla


def prune_replicas(catalog: Catalog, thresholds: SlaThresholds, tick: int) -> List[Tuple[str, Location]]:
    """Replicas to delete at a period boundary (after the period was closed).

    A replica goes when it is at least delta_t periods old and every one of
    its last delta_t closed periods was below threshold.
    """
    grace = thresholds.delta_t * thresholds.period_length
    out = []
    for rep in catalog.replicas():
        if tick - rep.created_tick < grace:
            continue
        window = list(rep.window_accesses)[-thresholds.delta_t:]
        if len(window) < thresholds.delta_t:
            continue
        if all(period_below_threshold(n, thresholds) for n in window):
            out.append((rep.relation_id, rep.location))
    return out


# -- strategies -------------------------------------------------------------------


class Strategy:
    name = "base"

    def on_query(self, query, result, catalog: Catalog, scenario, tick: int):
        """Return (RD, ReplicationDecision or None) after a query completed."""
        return [], None

    def on_period(self, catalog: Catalog, scenario, tick: int) -> List[Tuple[str, Location]]:
        return []


class NoRepLc(Strategy):
    """No replication; every query simply runs on the cheapest plan."""

    name = "noreplc"


class TCDRM(Strategy):
    name = "tcdrm"

    def __init__(self):
        # placement search is pure in (RD, query, origin provider, copy-set)
        self._memo: Dict[tuple, ReplicationDecision] = {}

    def on_query(self, query, result, catalog, scenario, tick):
        thresholds = scenario.thresholds_for(query.kind)
        rd = evaluate_trigger(result, query.relation_ids, catalog, thresholds, tick)
        if not rd:
            return rd, None
        key = (tuple(rd), query.relation_ids, query.origin[0], query.kind, catalog.version)
        decision = self._memo.get(key)
        if decision is None:
            if len(self._memo) > 4096:
                self._memo.clear()
            decision = place_replicas(
                rd, query, catalog.copy_map(query.relation_ids), catalog.vm_loads, scenario, thresholds
            )
            self._memo[key] = decision
        logger.debug("tick %d: RD=%s placed=%d skipped=%d", tick, rd, len(decision.placements),
                     len(decision.skipped))
        return rd, decision

    def on_period(self, catalog, scenario, tick):
        return prune_replicas(catalog, scenario.common_thresholds, tick)


STRATEGIES = {"tcdrm": TCDRM, "noreplc": NoRepLc}


def make_strategy(kind: str) -> Strategy:
    try:
        return STRATEGIES[kind.lower()]()
    except KeyError:
        raise ValueError(f"unknown strategy {kind!r}; expected one of {sorted(STRATEGIES)}") from None
