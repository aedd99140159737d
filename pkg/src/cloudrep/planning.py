"""Query planning: coordinator choice and per-relation source selection.

The same planner serves execution and the placement estimators, so an
estimate made for a hypothetical copy-set is exactly what the engine will
measure once that copy-set is real.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from decimal import Decimal
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .costmodel import MILLION, CostBreakdown, UsageVector, total_cost
from .topology import Location, RegionKey, Tier, VirtualMachine, classify_link

Copies = Mapping[str, Sequence[Location]]


@dataclass(frozen=True)
class ExecutionPlan:
    coordinator: VirtualMachine
    sources: Dict[str, Location]
    transfers: Tuple[Tuple[str, Tier, Decimal], ...]
    cpu_mi: Decimal
    cost: CostBreakdown
    time: float

    @property
    def region_key(self) -> RegionKey:
        return self.coordinator.location.region_key

    def bytes_by_tier(self) -> Dict[Tier, Decimal]:
        out = {t: Decimal(0) for t in (Tier.INTRA_DC, Tier.INTER_REGION, Tier.INTER_PROVIDER)}
        for _rid, tier, gb in self.transfers:
            if tier is not Tier.INTRA_VM:
                out[tier] += gb
        return out


def plan_usages(
    coordinator: Location,
    sources: Mapping[str, Location],
    transfers: Sequence[Tuple[str, Tier, Decimal]],
    cpu_mi: Decimal,
) -> List[UsageVector]:
    """CPU and transfers bill at the coordinator's region, reads at each source's region."""
    moved: Dict[Tier, Decimal] = {}
    reads: Dict[RegionKey, Decimal] = {}
    for rid, tier, gb in transfers:
        if tier is not Tier.INTRA_VM:
            moved[tier] = moved.get(tier, Decimal(0)) + gb
        key = sources[rid].region_key
        reads[key] = reads.get(key, Decimal(0)) + gb
    usages = [UsageVector(coordinator.region_key, cpu_mi=cpu_mi, transfer=moved)]
    usages.extend(UsageVector(key, read_gb=gb) for key, gb in sorted(reads.items()))
    return usages


def _build_plan(vm: VirtualMachine, picks, cpu_mi: Decimal, scenario) -> ExecutionPlan:
    sources = {rid: loc for rid, loc, _tier, _size in picks}
    transfers = tuple((rid, tier, size) for rid, _loc, tier, size in picks)
    cost = total_cost(plan_usages(vm.location, sources, transfers, cpu_mi), scenario.pricing)
    t = _time(transfers, cpu_mi, vm, scenario.topology.network)
    return ExecutionPlan(vm, sources, transfers, cpu_mi, cost, t)


def _time(transfers, cpu_mi: Decimal, vm: VirtualMachine, network) -> float:
    slowest = 0.0
    for _rid, tier, gb in transfers:
        if tier is not Tier.INTRA_VM:
            net = network[tier]
            slowest = max(slowest, net.latency + float(gb) / net.capacity)
    return slowest + float(cpu_mi) / vm.mips


def _region_options(key: RegionKey, rids, copies: Copies, scenario, sizes):
    """Cheapest source per relation for any VM of the region that holds none of its copies."""
    pricing = scenario.pricing
    probe = Location(key[0], key[1], "", None)
    best = {}
    for rid in rids:
        size = sizes[rid]
        pick = None
        for loc in copies[rid]:
            tier = classify_link(loc, probe)
            cost = size * (pricing.bandwidth_price(tier, key) + pricing.io_price(loc.region_key))
            rank = (cost, tier.rank, loc.sort_key())
            if pick is None or rank < pick[0]:
                pick = (rank, loc, tier)
        best[rid] = pick
    return best


def plan_query(query, copies: Copies, scenario) -> ExecutionPlan:
    """Cheapest coordinator VM among the origin provider's regions and every copy-holding region.

    Each relation is read from the copy minimizing transfer + read charges
    (ties: lower tier, then lower location id). Coordinators are ranked by
    exact total cost, then response time, then location id.
    """
    topology = scenario.topology
    pricing = scenario.pricing
    network = topology.network
    rids = query.relation_ids
    sizes = {rid: scenario.size_of(rid) for rid in rids}
    cpu_mi = Decimal(repr(scenario.compute_intensity)) * sum(sizes.values(), Decimal(0))
    regions = set(topology.regions_of(query.origin[0]))
    for rid in rids:
        regions.update(loc.region_key for loc in copies[rid])
    best = None
    for key in sorted(regions):
        generic = _region_options(key, rids, copies, scenario, sizes)
        cpu_cost = cpu_mi / MILLION * pricing.cpu_price(key)
        io_here = pricing.io_price(key)
        on_vm: Dict[Location, List[str]] = {}
        for rid in rids:
            for loc in copies[rid]:
                if loc.region_key == key and loc.vm is not None:
                    on_vm.setdefault(loc, []).append(rid)
        vms = topology.vms_in(key)
        # VMs holding no copy differ only in speed: keep the fastest one
        fastest = min(vms, key=lambda v: (-v.mips, v.location.sort_key()))
        for vm in vms:
            local = on_vm.get(vm.location)
            if local is None and vm is not fastest:
                continue
            picks = []
            cost = cpu_cost
            for rid in rids:
                rank, loc, tier = generic[rid]
                if local and rid in local:
                    vm_rank = (sizes[rid] * io_here, Tier.INTRA_VM.rank, vm.location.sort_key())
                    if vm_rank < rank:
                        rank, loc, tier = vm_rank, vm.location, Tier.INTRA_VM
                cost += rank[0]
                picks.append((rid, loc, tier, sizes[rid]))
            t = _time([(rid, tier, size) for rid, _l, tier, size in picks], cpu_mi, vm, network)
            order = (cost, t, vm.location.sort_key())
            if best is None or order < best[0]:
                best = (order, vm, picks)
    _order, vm, picks = best
    return _build_plan(vm, picks, cpu_mi, scenario)


# -- hypothetical plans --------------------------------------------------------


def placement_vm(topology, key: RegionKey, loads: Mapping[Location, int]) -> VirtualMachine:
    """Least-loaded VM of a region, lowest id on ties."""
    return min(topology.vms_in(key), key=lambda vm: (loads.get(vm.location, 0), vm.location.sort_key()))


def hypothetical_plan(
    query, rid: str, candidate: RegionKey, copies: Copies, loads: Mapping[Location, int], scenario
) -> Tuple[ExecutionPlan, Optional[Location]]:
    """Plan ``query`` as if ``rid`` also had a copy in ``candidate``.

    Returns the plan and the location the copy would occupy (None when the
    region already holds one, in which case nothing is added).
    """
    existing = copies[rid]
    if any(loc.region_key == candidate for loc in existing):
        return plan_query(query, copies, scenario), None
    loc = placement_vm(scenario.topology, candidate, loads).location
    trial = dict(copies)
    trial[rid] = list(existing) + [loc]
    return plan_query(query, trial, scenario), loc


def estimated_monetary_cost(query, rid, candidate, copies, loads, scenario) -> Decimal:
    return hypothetical_plan(query, rid, candidate, copies, loads, scenario)[0].cost.total


def estimated_response_time(query, rid, candidate, copies, loads, scenario) -> float:
    return hypothetical_plan(query, rid, candidate, copies, loads, scenario)[0].time


def working_loads(catalog) -> Counter:
    return Counter(catalog.vm_loads)
