"""Multi-cloud hierarchy: providers, regions, datacenters, VMs, network tiers and prices."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum
from typing import Dict, Iterator, List, Optional, Tuple

RegionKey = Tuple[str, str]  # (provider_id, region_id)


class ConfigError(ValueError):
    """Invalid or inconsistent scenario configuration. The message names the key."""


class Tier(str, Enum):
    INTRA_VM = "intraVM"
    INTRA_DC = "intraDC"
    INTER_REGION = "interRegion"
    INTER_PROVIDER = "interProvider"

    @property
    def rank(self) -> int:
        return _TIER_RANK[self]


_TIER_RANK = {
    Tier.INTRA_VM: 0,
    Tier.INTRA_DC: 1,
    Tier.INTER_REGION: 2,
    Tier.INTER_PROVIDER: 3,
}

#: Tiers that move bytes over a network (reported in the per-tier byte columns).
NETWORK_TIERS = (Tier.INTRA_DC, Tier.INTER_REGION, Tier.INTER_PROVIDER)


@dataclass(frozen=True)
class Location:
    provider: str
    region: str
    datacenter: str
    vm: Optional[str] = None

    @property
    def region_key(self) -> RegionKey:
        return (self.provider, self.region)

    def sort_key(self) -> Tuple[str, str, str, str]:
        return (self.provider, self.region, self.datacenter, self.vm or "")

    def __str__(self) -> str:
        parts = [self.provider, self.region, self.datacenter]
        if self.vm is not None:
            parts.append(self.vm)
        return "/".join(parts)

    def to_dict(self) -> dict:
        d = {"provider": self.provider, "region": self.region, "datacenter": self.datacenter}
        if self.vm is not None:
            d["vm"] = self.vm
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Location":
        return cls(d["provider"], d["region"], d["datacenter"], d.get("vm"))


@dataclass(frozen=True)
class VirtualMachine:
    id: str
    mips: float
    location: Location

    def __post_init__(self):
        if not self.mips > 0:
            raise ConfigError(f"vm {self.location}: mips must be > 0, got {self.mips}")


@dataclass(frozen=True)
class NetworkTier:
    kind: Tier
    capacity: float  # GB/s
    latency: float  # s

    def __post_init__(self):
        if not (self.capacity > 0 and math.isfinite(self.capacity)):
            raise ConfigError(f"network.{self.kind.value}.capacity must be > 0")
        if self.latency < 0:
            raise ConfigError(f"network.{self.kind.value}.latency must be >= 0")
        if self.kind is Tier.INTRA_VM and self.latency != 0:
            raise ConfigError("network.intraVM.latency must be 0")


@dataclass(frozen=True)
class PricingScheme:
    """Unit prices. Money is Decimal throughout.

    cpu is $ per 10^6 MI, io is $ per GB read or written, bandwidth is $ per GB,
    storage is $ per GB per billing period (measured in ticks).
    """

    cpu: Dict[RegionKey, Decimal]
    io: Dict[RegionKey, Decimal]
    intra_dc: Dict[RegionKey, Decimal]
    inter_region: Decimal
    inter_provider: Decimal
    storage: Decimal = Decimal("0.02")
    billing_period: int = 1000

    def cpu_price(self, key: RegionKey) -> Decimal:
        return _lookup(self.cpu, key, "pricing.cpu")

    def io_price(self, key: RegionKey) -> Decimal:
        return _lookup(self.io, key, "pricing.io")

    def bandwidth_price(self, kind: Tier, key: Optional[RegionKey] = None) -> Decimal:
        """Per-GB price of a tier. intraDC is priced by the region it happens in."""
        if kind is Tier.INTRA_VM:
            return Decimal(0)
        if kind is Tier.INTRA_DC:
            if key is None:
                raise ConfigError("intraDC bandwidth price needs a region")
            return _lookup(self.intra_dc, key, "pricing.bandwidth.intraDC")
        if kind is Tier.INTER_REGION:
            return self.inter_region
        return self.inter_provider


def _lookup(table: Dict[RegionKey, Decimal], key: RegionKey, name: str) -> Decimal:
    try:
        return table[key]
    except KeyError:
        raise ConfigError(f"{name}.{key[0]}.{key[1]}: missing pricing entry") from None


@dataclass(frozen=True)
class Datacenter:
    id: str
    vms: Tuple[VirtualMachine, ...]


@dataclass(frozen=True)
class Region:
    provider: str
    id: str
    datacenters: Tuple[Datacenter, ...]

    @property
    def key(self) -> RegionKey:
        return (self.provider, self.id)

    @property
    def vms(self) -> Tuple[VirtualMachine, ...]:
        return tuple(vm for dc in self.datacenters for vm in dc.vms)


@dataclass(frozen=True)
class Provider:
    id: str
    regions: Tuple[Region, ...]


@dataclass(frozen=True)
class Topology:
    providers: Tuple[Provider, ...]
    network: Dict[Tier, NetworkTier]
    _regions: Dict[RegionKey, Region] = field(init=False, repr=False, compare=False)
    _vms: Dict[Location, VirtualMachine] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        regions: Dict[RegionKey, Region] = {}
        vms: Dict[Location, VirtualMachine] = {}
        if not self.providers:
            raise ConfigError("topology.providers: at least one provider required")
        for p in self.providers:
            if not p.regions:
                raise ConfigError(f"topology.providers.{p.id}.regions: at least one region required")
            for r in p.regions:
                if r.key in regions:
                    raise ConfigError(f"topology.providers.{p.id}.regions.{r.id}: duplicate region")
                regions[r.key] = r
                if not r.vms:
                    raise ConfigError(f"topology.providers.{p.id}.regions.{r.id}: zero VMs")
                for vm in r.vms:
                    if vm.location in vms:
                        raise ConfigError(f"topology: duplicate vm {vm.location}")
                    vms[vm.location] = vm
        for kind in Tier:
            if kind not in self.network:
                raise ConfigError(f"network.{kind.value}: missing tier")
        object.__setattr__(self, "_regions", regions)
        object.__setattr__(self, "_vms", vms)

    @property
    def region_keys(self) -> List[RegionKey]:
        return sorted(self._regions)

    @property
    def region_ids(self) -> List[str]:
        """Distinct region ids across providers, in first-seen order."""
        seen: Dict[str, None] = {}
        for p in self.providers:
            for r in p.regions:
                seen.setdefault(r.id, None)
        return list(seen)

    def region(self, key: RegionKey) -> Region:
        try:
            return self._regions[key]
        except KeyError:
            raise ConfigError(f"unknown region {key[0]}/{key[1]}") from None

    def regions_of(self, provider: str) -> List[RegionKey]:
        return sorted(k for k in self._regions if k[0] == provider)

    def vm_at(self, loc: Location) -> VirtualMachine:
        try:
            return self._vms[loc]
        except KeyError:
            raise ConfigError(f"unknown vm location {loc}") from None

    def vms_in(self, key: RegionKey) -> Tuple[VirtualMachine, ...]:
        return self.region(key).vms

    def iter_vms(self) -> Iterator[VirtualMachine]:
        return iter(self._vms.values())

    def validate_location(self, loc: Location) -> None:
        region = self.region(loc.region_key)
        dcs = {dc.id: dc for dc in region.datacenters}
        if loc.datacenter not in dcs:
            raise ConfigError(f"location {loc}: unknown datacenter {loc.datacenter!r}")
        if loc.vm is not None and loc not in self._vms:
            raise ConfigError(f"location {loc}: vm {loc.vm!r} not in datacenter")

    def link_params(
        self, kind: Tier, src: RegionKey, dst: RegionKey, pricing: PricingScheme
    ) -> Tuple[Decimal, float, float]:
        """(price $/GB, capacity GB/s, latency s) of moving data from src to dst over kind."""
        self.region(src)
        self.region(dst)
        net = self.network[kind]
        if kind is Tier.INTRA_VM:
            return Decimal(0), net.capacity, 0.0
        return pricing.bandwidth_price(kind, dst), net.capacity, net.latency


def classify_link(a: Location, b: Location) -> Tier:
    if a.provider != b.provider:
        return Tier.INTER_PROVIDER
    if a.region != b.region:
        return Tier.INTER_REGION
    # same-region, different datacenter is folded into intraDC
    if a.datacenter == b.datacenter and a.vm == b.vm:
        return Tier.INTRA_VM
    return Tier.INTRA_DC
