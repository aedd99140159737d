"""Sequential simulation driver.

One tick is one query. Each tick plans and executes the query against the
current catalog, lets the strategy react, and at every period boundary bills
replica storage and runs deletion.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Dict, List, Optional, Sequence, Tuple

from .catalog import Catalog
from .costmodel import ZERO_COST, CostBreakdown, replication_cost, storage_charge
from .metrics import Row, SimReport
from .planning import ExecutionPlan, plan_query
from .scenario import Scenario
from .strategy import Strategy, make_strategy
from .topology import Location, Tier
from .workload import Query, generate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QueryResult:
    query_id: int
    tick: int
    t_q: float
    cost: CostBreakdown
    bytes_by_tier: Dict[Tier, Decimal]
    time_violated: bool
    cost_violated: bool
    plan: ExecutionPlan


@dataclass
class SimulationState:
    catalog: Catalog
    clock: int = 0
    cumulative_cost: CostBreakdown = ZERO_COST
    events: List[dict] = field(default_factory=list)
    keep_events: bool = True

    def log(self, event: dict) -> None:
        if self.keep_events:
            self.events.append(event)


def new_state(scenario: Scenario, keep_events: bool = True) -> SimulationState:
    catalog = Catalog(scenario.relations, window_len=scenario.common_thresholds.delta_t)
    return SimulationState(catalog, keep_events=keep_events)


def execute(plan: ExecutionPlan, query: Query, state: SimulationState, scenario: Scenario, tick: int) -> QueryResult:
    """Account the plan and record one access per relation (and per copy read)."""
    for rid in query.relation_ids:
        state.catalog.record_access(rid, tick, plan.sources[rid])
    th = scenario.thresholds_for(query.kind)
    return QueryResult(
        query_id=query.id,
        tick=tick,
        t_q=plan.time,
        cost=plan.cost,
        bytes_by_tier=plan.bytes_by_tier(),
        time_violated=plan.time > th.t_sla,
        cost_violated=plan.cost.total > th.c_sla,
        plan=plan,
    )


def _replication_source(catalog: Catalog, rid: str, dst: Location, scenario: Scenario) -> Tuple[Location, CostBreakdown]:
    size = scenario.size_of(rid)
    options = [
        (replication_cost(size, src, dst, scenario.pricing), src) for src in catalog.copies_of(rid)
    ]
    cost, src = min(options, key=lambda o: (o[0].total, o[1].sort_key()))
    return src, cost


def step(state: SimulationState, query: Query, strategy: Strategy, scenario: Scenario) -> Tuple[QueryResult, CostBreakdown]:
    catalog = state.catalog
    tick = state.clock + 1
    state.clock = tick
    plan = plan_query(query, catalog.copy_map(query.relation_ids), scenario)
    result = execute(plan, query, state, scenario, tick)
    state.log({
        "type": "query",
        "tick": tick,
        "query_id": query.id,
        "class": query.kind,
        "origin": list(query.origin),
        "relations": list(query.relation_ids),
        "coordinator": str(plan.coordinator.location),
        "sources": {rid: str(loc) for rid, loc in plan.sources.items()},
        "t_q": result.t_q,
        "c_q": str(result.cost.total),
        "time_violated": result.time_violated,
        "cost_violated": result.cost_violated,
    })
    overhead = ZERO_COST

    rd, decision = strategy.on_query(query, result, catalog, scenario, tick)
    if decision is not None:
        state.log({
            "type": "trigger",
            "tick": tick,
            "query_id": query.id,
            "popularity": {
                rid: {"requests": catalog.stats[rid].request_count, "rate": catalog.popularity(rid, tick)}
                for rid in query.relation_ids
            },
            "thresholds": scenario.thresholds_for(query.kind).to_dict(),
            **decision.to_dict(),
        })
        for p in decision.placements:
            src, cost = _replication_source(catalog, p.relation_id, p.location, scenario)
            catalog.add_replica(p.relation_id, p.location, tick)
            overhead = overhead + cost
            state.log({
                "type": "placement",
                "tick": tick,
                "relation": p.relation_id,
                "location": str(p.location),
                "source": str(src),
                "est_cost": str(p.est_cost),
                "est_time": p.est_time,
                "cost": cost.to_dict(),
            })

    period = scenario.common_thresholds.period_length
    if tick % period == 0:
        sizes = [scenario.size_of(rep.relation_id) for rep in catalog.replicas()]
        charge = storage_charge(sizes, period, scenario.pricing)
        if charge:
            overhead = overhead + CostBreakdown(storage=charge)
            state.log({"type": "storage", "tick": tick, "replicas": len(sizes), "cost": str(charge)})
        catalog.close_period()
        for rid, loc in strategy.on_period(catalog, scenario, tick):
            catalog.remove_replica(rid, loc)
            state.log({"type": "deletion", "tick": tick, "relation": rid, "location": str(loc)})

    state.cumulative_cost = state.cumulative_cost + result.cost + overhead
    return result, overhead


def run(
    scenario: Scenario,
    strategy_kind: str,
    queries: Optional[Sequence[Query]] = None,
    keep_events: bool = False,
) -> Tuple[SimReport, SimulationState]:
    """Run the whole workload. ``queries`` overrides the generated stream."""
    strategy = make_strategy(strategy_kind)
    if queries is None:
        queries = generate(scenario.workload, scenario.topology, scenario.relations, scenario.seed)
    state = new_state(scenario, keep_events)
    report = SimReport(strategy.name, scenario.fingerprint)
    for q in queries:
        result, overhead = step(state, q, strategy, scenario)
        b = result.bytes_by_tier
        report.record(Row(
            tick=result.tick,
            query_id=q.id,
            kind=q.kind,
            origin=tuple(q.origin),
            t_q=result.t_q,
            query_cost=result.cost,
            overhead=overhead,
            gb_intradc=b[Tier.INTRA_DC],
            gb_interregion=b[Tier.INTER_REGION],
            gb_interprovider=b[Tier.INTER_PROVIDER],
            replicas=state.catalog.replica_count,
        ))
    logger.info("%s: %d queries, total %s $", strategy.name, len(queries), state.cumulative_cost.total)
    return report, state


def write_events(events: Sequence[dict], path) -> None:
    with open(path, "w") as fh:
        for ev in events:
            fh.write(json.dumps(ev, sort_keys=True) + "\n")
