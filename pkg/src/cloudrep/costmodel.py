"""Monetary cost of resource usage and the analytic response-time model.

All money is :class:`~decimal.Decimal`, rounded once per component to 1e-9 $
(half-even). Totals are sums of already-rounded components, so a breakdown
always adds up exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Dict, Iterable, Mapping

from .topology import (
    ConfigError,
    Location,
    NetworkTier,
    PricingScheme,
    RegionKey,
    Tier,
    classify_link,
)

MONEY_QUANTUM = Decimal("0.000000001")
ZERO = Decimal(0)
MILLION = Decimal(1_000_000)


def money(x: Decimal) -> Decimal:
    return x.quantize(MONEY_QUANTUM, rounding=ROUND_HALF_EVEN)


@dataclass(frozen=True)
class UsageVector:
    context: RegionKey
    cpu_mi: Decimal = ZERO
    read_gb: Decimal = ZERO
    written_gb: Decimal = ZERO
    transfer: Mapping[Tier, Decimal] = field(default_factory=dict)

    def __post_init__(self):
        if self.cpu_mi < 0 or self.read_gb < 0 or self.written_gb < 0:
            raise ValueError("usage components must be >= 0")
        if any(v < 0 for v in self.transfer.values()):
            raise ValueError("transfer volumes must be >= 0")


@dataclass(frozen=True)
class CostBreakdown:
    cpu: Decimal = ZERO
    io: Decimal = ZERO
    bandwidth: Decimal = ZERO
    storage: Decimal = ZERO
    total: Decimal = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "total", self.cpu + self.io + self.bandwidth + self.storage)

    def __add__(self, other: "CostBreakdown") -> "CostBreakdown":
        return CostBreakdown(
            self.cpu + other.cpu,
            self.io + other.io,
            self.bandwidth + other.bandwidth,
            self.storage + other.storage,
        )

    def to_dict(self) -> Dict[str, str]:
        return {
            "cpu": str(self.cpu),
            "io": str(self.io),
            "bandwidth": str(self.bandwidth),
            "storage": str(self.storage),
            "total": str(self.total),
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, str]) -> "CostBreakdown":
        out = cls(Decimal(d["cpu"]), Decimal(d["io"]), Decimal(d["bandwidth"]), Decimal(d["storage"]))
        if "total" in d and out.total != Decimal(d["total"]):
            raise ValueError(f"cost breakdown total mismatch: {d}")
        return out


ZERO_COST = CostBreakdown()


def monetary_cost(usage: UsageVector, pricing: PricingScheme) -> CostBreakdown:
    """CPU + I/O + bandwidth charges of one usage vector, billed at its context region."""
    cpu = io = bw = ZERO
    if usage.cpu_mi:
        cpu = usage.cpu_mi / MILLION * pricing.cpu_price(usage.context)
    if usage.read_gb or usage.written_gb:
        io = (usage.read_gb + usage.written_gb) * pricing.io_price(usage.context)
    for tier, gb in usage.transfer.items():
        if gb:
            bw += gb * pricing.bandwidth_price(tier, usage.context)
    return CostBreakdown(money(cpu), money(io), money(bw))


def total_cost(usages: Iterable[UsageVector], pricing: PricingScheme) -> CostBreakdown:
    out = ZERO_COST
    for u in usages:
        out = out + monetary_cost(u, pricing)
    return out


def transfer_time(gb: float, tier: NetworkTier) -> float:
    return tier.latency + gb / tier.capacity


def response_time(plan, network: Mapping[Tier, NetworkTier], vm) -> float:
    """Parallel fetch of remote inputs, then compute on the coordinator.

    ``max(latency + size / capacity)`` over non-local transfers plus
    ``cpu_mi / mips``. Inputs already on the coordinator VM cost no time.
    """
    slowest = 0.0
    for _rid, tier, gb in plan.transfers:
        if tier is Tier.INTRA_VM:
            continue
        slowest = max(slowest, transfer_time(float(gb), network[tier]))
    return slowest + float(plan.cpu_mi) / vm.mips


def replication_cost(size: Decimal, src: Location, dst: Location, pricing: PricingScheme) -> CostBreakdown:
    """Ship one copy from src to dst and write it there."""
    if src.region_key == dst.region_key:
        raise ConfigError(f"replication within one region ({src} -> {dst}) is not allowed")
    tier = classify_link(src, dst)
    bw = size * pricing.bandwidth_price(tier, dst.region_key)
    io = size * pricing.io_price(dst.region_key)
    return CostBreakdown(io=money(io), bandwidth=money(bw))


def storage_charge(sizes: Iterable[Decimal], period_length: int, pricing: PricingScheme) -> Decimal:
    """Holding charge for replicas over ``period_length`` ticks, pro-rated on the billing period."""
    gb = sum(sizes, ZERO)
    return money(gb * pricing.storage * Decimal(period_length) / Decimal(pricing.billing_period))
