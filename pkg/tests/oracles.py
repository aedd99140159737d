"""Independent reference computations.

These deliberately avoid the package's planner and cost code: they walk
every coordinator VM and every combination of source copies, price each
transfer straight from the scenario tables in exact Decimal arithmetic and
keep the best (cost, time) pair.
"""

from __future__ import annotations

from decimal import Decimal
from fractions import Fraction
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple


def tier_between(a, b) -> str:
    if a.provider != b.provider:
        return "interProvider"
    if a.region != b.region:
        return "interRegion"
    if a.datacenter == b.datacenter and a.vm == b.vm:
        return "intraVM"
    return "intraDC"


def unit_bandwidth(scenario, tier: str, coord_key) -> Decimal:
    p = scenario.pricing
    return {
        "intraVM": Decimal(0),
        "intraDC": p.intra_dc[coord_key] if tier == "intraDC" else None,
        "interRegion": p.inter_region,
        "interProvider": p.inter_provider,
    }[tier]


def evaluate(query, coordinator, sources: Sequence, scenario) -> Tuple[Decimal, float]:
    """Exact cost and analytic time of running ``query`` on ``coordinator`` with the given sources."""
    p = scenario.pricing
    net = {k.value: v for k, v in scenario.topology.network.items()}
    key = coordinator.location.region_key
    sizes = [scenario.size_of(r) for r in query.relation_ids]
    cpu_mi = Decimal(repr(scenario.compute_intensity)) * sum(sizes)
    cost = cpu_mi / Decimal(1_000_000) * p.cpu[key]
    slowest = 0.0
    for size, src in zip(sizes, sources):
        tier = tier_between(src, coordinator.location)
        cost += size * p.io[src.region_key]
        if tier != "intraVM":
            cost += size * unit_bandwidth(scenario, tier, key)
            slowest = max(slowest, net[tier].latency + float(size) / net[tier].capacity)
    return cost, slowest + float(cpu_mi) / coordinator.mips


def brute_force_plan(query, copies: Dict[str, List], scenario):
    """Minimum (cost, time) over all coordinators in the eligible regions and all source choices."""
    topo = scenario.topology
    regions = {k for k in topo.region_keys if k[0] == query.origin[0]}
    for rid in query.relation_ids:
        regions.update(loc.region_key for loc in copies[rid])
    best = None
    for key in sorted(regions):
        for vm in topo.vms_in(key):
            for combo in product(*(copies[rid] for rid in query.relation_ids)):
                cost, t = evaluate(query, vm, combo, scenario)
                if best is None or (cost, t) < best[:2]:
                    best = (cost, t, vm, combo)
    return best


def least_loaded(scenario, key, loads):
    vms = scenario.topology.vms_in(key)
    return min(vms, key=lambda vm: (loads.get(vm.location, 0), vm.location.provider, vm.location.region,
                                    vm.location.datacenter, vm.location.vm))


def brute_force_placement(query, rid: str, copies, loads, scenario, thresholds) -> Optional[tuple]:
    """Cheapest feasible region for one more copy of ``rid``; None when nothing is feasible."""
    held = {loc.region_key for loc in copies[rid]}
    feasible = []
    for key in scenario.topology.region_keys:
        if key in held:
            continue
        vm = least_loaded(scenario, key, loads)
        trial = {r: list(v) for r, v in copies.items()}
        trial[rid].append(vm.location)
        cost, t, _vm, _combo = brute_force_plan(query, trial, scenario)
        if cost < thresholds.c_sla and t < thresholds.t_sla:
            feasible.append((cost, key, t, vm.location))
    return min(feasible, key=lambda f: (f[0], f[1])) if feasible else None


def popularity_from_log(ticks: Sequence[int], now: int) -> float:
    """Average request rate since first access, from the raw access log."""
    if not ticks:
        return 0.0
    return float(Fraction(len(ticks), now - min(ticks) + 1))
