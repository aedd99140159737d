"""Scenario files: parsing, validation, defaults and canonical serialization.

A scenario is a JSON document with the sections ``topology``, ``pricing``,
``network``, ``thresholds``, ``relations``, ``workload`` plus ``seed`` and
``compute_intensity``. Money values may be given as strings or numbers; they
are converted to :class:`~decimal.Decimal` through their string form.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from importlib import resources
from pathlib import Path
from typing import Any, Dict, Tuple

from .catalog import Relation
from .topology import (
    ConfigError,
    Datacenter,
    Location,
    NetworkTier,
    PricingScheme,
    Provider,
    Region,
    Tier,
    Topology,
    VirtualMachine,
)

SCHEMA_VERSION = 1
DEFAULT_SCENARIO = "table1-default.json"

DEFAULT_NETWORK = {
    Tier.INTRA_VM: (1000.0, 0.0),
    Tier.INTRA_DC: (10.0, 0.001),
    Tier.INTER_REGION: (5.0, 0.05),
    Tier.INTER_PROVIDER: (2.0, 0.1),
}
DEFAULT_VM_MIPS = 1_000_000.0
DEFAULT_COMPUTE_INTENSITY = 10_000.0
DEFAULT_STORAGE_PRICE = Decimal("0.02")
DEFAULT_BILLING_PERIOD = 1000
SIZE_QUANTUM = Decimal("0.000001")

QUERY_CLASSES = ("simple", "complex")
POPULARITY_MODES = ("count", "rate")
WORKLOAD_MODES = ("repeat", "random")
COMPLEXITIES = ("simple", "complex", "mixed")


@dataclass(frozen=True)
class SlaThresholds:
    t_sla: float
    c_sla: Decimal
    p_sla: float = 200
    popularity_mode: str = "count"
    delta_t: int = 5
    period_length: int = 100

    def __post_init__(self):
        if not self.t_sla > 0:
            raise ConfigError("thresholds.t_sla must be > 0")
        if not self.c_sla > 0:
            raise ConfigError("thresholds.c_sla must be > 0")
        if self.p_sla < 0:
            raise ConfigError("thresholds.p_sla must be >= 0")
        if self.popularity_mode not in POPULARITY_MODES:
            raise ConfigError(f"thresholds.popularity_mode must be one of {POPULARITY_MODES}")
        if self.delta_t < 1:
            raise ConfigError("thresholds.delta_t must be >= 1")
        if self.period_length < 1:
            raise ConfigError("thresholds.period_length must be >= 1")

    def to_dict(self) -> dict:
        return {
            "t_sla": self.t_sla,
            "c_sla": str(self.c_sla),
            "p_sla": self.p_sla,
            "popularity_mode": self.popularity_mode,
            "delta_t": self.delta_t,
            "period_length": self.period_length,
        }


@dataclass(frozen=True)
class WorkloadSpec:
    mode: str = "repeat"
    count: int = 1000
    complexity: str = "complex"

    def __post_init__(self):
        if self.mode not in WORKLOAD_MODES:
            raise ConfigError(f"workload.mode must be one of {WORKLOAD_MODES}")
        if self.complexity not in COMPLEXITIES:
            raise ConfigError(f"workload.complexity must be one of {COMPLEXITIES}")
        if self.count < 1:
            raise ConfigError("workload.count must be >= 1")


@dataclass(frozen=True)
class Scenario:
    topology: Topology
    pricing: PricingScheme
    thresholds: Dict[str, SlaThresholds]
    workload: WorkloadSpec
    relations: Tuple[Relation, ...]
    seed: int = 0
    compute_intensity: float = DEFAULT_COMPUTE_INTENSITY
    _fingerprint: str = field(default="", init=False, repr=False, compare=False)
    _sizes: Dict[str, Decimal] = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        self._sizes.update((r.id, r.size) for r in self.relations)

    def size_of(self, relation_id: str) -> Decimal:
        return self._sizes[relation_id]

    def thresholds_for(self, query_class: str) -> SlaThresholds:
        return self.thresholds[query_class]

    @property
    def common_thresholds(self) -> SlaThresholds:
        """Thresholds shared by all classes (p_sla, mode, delta_t, period_length)."""
        return self.thresholds[QUERY_CLASSES[0]]

    def with_seed(self, seed: int) -> "Scenario":
        return parse_scenario({**scenario_to_dict(self), "seed": seed})

    def with_workload(self, **changes: Any) -> "Scenario":
        d = scenario_to_dict(self)
        d["workload"] = {**d["workload"], **changes}
        return parse_scenario(d)

    @property
    def fingerprint(self) -> str:
        if not self._fingerprint:
            blob = json.dumps(scenario_to_dict(self), sort_keys=True, separators=(",", ":"))
            digest = hashlib.sha256(blob.encode()).hexdigest()[:16]
            object.__setattr__(self, "_fingerprint", f"seed={self.seed};config={digest}")
        return self._fingerprint


# -- parsing ------------------------------------------------------------------


def _money(value: Any, key: str) -> Decimal:
    if isinstance(value, bool) or value is None:
        raise ConfigError(f"{key}: expected a price, got {value!r}")
    try:
        d = Decimal(str(value))
    except InvalidOperation:
        raise ConfigError(f"{key}: not a number: {value!r}") from None
    if not d.is_finite():
        raise ConfigError(f"{key}: not finite")
    if d < 0:
        raise ConfigError(f"{key}: negative price {value}")
    return d


def _number(value: Any, key: str, *, positive: bool = False, integer: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(f"{key}: expected an integer, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(f"{key}: must be > 0, got {value!r}")
    if value < 0:
        raise ConfigError(f"{key}: must be >= 0, got {value!r}")
    return int(value) if integer else float(value)


def _section(d: dict, name: str, default: Any = None) -> Any:
    if name not in d:
        if default is None:
            raise ConfigError(f"{name}: missing section")
        return default
    return d[name]


def _parse_topology(d: dict) -> Tuple[Tuple[Provider, ...], float]:
    topo = _section(d, "topology")
    vm_mips = _number(topo.get("vm_mips", DEFAULT_VM_MIPS), "topology.vm_mips", positive=True)
    providers = []
    for p in topo.get("providers", []):
        pid = str(p["id"])
        regions = []
        for r in p.get("regions", []):
            rid = str(r["id"])
            dcs = []
            for dc in r.get("datacenters", []):
                dcid = str(dc["id"])
                prefix = f"topology.providers.{pid}.regions.{rid}.datacenters.{dcid}.vms"
                vms_spec = dc.get("vms", 0)
                if isinstance(vms_spec, int) and not isinstance(vms_spec, bool):
                    if vms_spec < 1:
                        raise ConfigError(f"{prefix}: zero VMs")
                    vms_spec = [{"id": f"vm{i + 1:02d}"} for i in range(vms_spec)]
                vms = tuple(
                    VirtualMachine(
                        str(v["id"]),
                        _number(v.get("mips", vm_mips), f"{prefix}.{v['id']}.mips", positive=True),
                        Location(pid, rid, dcid, str(v["id"])),
                    )
                    for v in vms_spec
                )
                if not vms:
                    raise ConfigError(f"{prefix}: zero VMs")
                dcs.append(Datacenter(dcid, vms))
            if not dcs:
                raise ConfigError(f"topology.providers.{pid}.regions.{rid}.datacenters: none defined")
            regions.append(Region(pid, rid, tuple(dcs)))
        providers.append(Provider(pid, tuple(regions)))
    return tuple(providers), vm_mips


def _parse_network(d: dict) -> Dict[Tier, NetworkTier]:
    net = d.get("network", {})
    out = {}
    for kind in Tier:
        cap, lat = DEFAULT_NETWORK[kind]
        spec = net.get(kind.value, {})
        out[kind] = NetworkTier(
            kind,
            _number(spec.get("capacity", cap), f"network.{kind.value}.capacity", positive=True),
            _number(spec.get("latency", lat), f"network.{kind.value}.latency"),
        )
    return out


def _per_region(table: Any, key: str, topology: Topology) -> Dict[Tuple[str, str], Decimal]:
    if not isinstance(table, dict):
        raise ConfigError(f"{key}: expected a provider -> region table")
    out = {}
    for pid, regions in table.items():
        if not isinstance(regions, dict):
            raise ConfigError(f"{key}.{pid}: expected a region table")
        for rid, value in regions.items():
            if (pid, rid) not in set(topology.region_keys):
                raise ConfigError(f"{key}.{pid}.{rid}: region not in topology")
            out[(pid, rid)] = _money(value, f"{key}.{pid}.{rid}")
    for pid, rid in topology.region_keys:
        if (pid, rid) not in out:
            raise ConfigError(f"{key}.{pid}.{rid}: missing pricing entry")
    return out


def _parse_pricing(d: dict, topology: Topology) -> PricingScheme:
    pr = _section(d, "pricing")
    bw = _section(pr, "bandwidth")
    billing = _number(pr.get("billing_period", DEFAULT_BILLING_PERIOD), "pricing.billing_period",
                      positive=True, integer=True)
    return PricingScheme(
        cpu=_per_region(_section(pr, "cpu"), "pricing.cpu", topology),
        io=_per_region(_section(pr, "io"), "pricing.io", topology),
        intra_dc=_per_region(_section(bw, "intraDC"), "pricing.bandwidth.intraDC", topology),
        inter_region=_money(_section(bw, "interRegion"), "pricing.bandwidth.interRegion"),
        inter_provider=_money(_section(bw, "interProvider"), "pricing.bandwidth.interProvider"),
        storage=_money(pr.get("storage", DEFAULT_STORAGE_PRICE), "pricing.storage"),
        billing_period=billing,
    )


def _parse_thresholds(d: dict) -> Dict[str, SlaThresholds]:
    th = _section(d, "thresholds")
    common = dict(
        p_sla=_number(th.get("p_sla", 200), "thresholds.p_sla"),
        popularity_mode=th.get("popularity_mode", "count"),
        delta_t=_number(th.get("delta_t", 5), "thresholds.delta_t", positive=True, integer=True),
        period_length=_number(th.get("period_length", 100), "thresholds.period_length",
                              positive=True, integer=True),
    )
    out = {}
    for cls in QUERY_CLASSES:
        block = _section(th, cls)
        out[cls] = SlaThresholds(
            t_sla=_number(block.get("t_sla"), f"thresholds.{cls}.t_sla", positive=True),
            c_sla=_money(block.get("c_sla"), f"thresholds.{cls}.c_sla"),
            **common,
        )
        if not out[cls].c_sla > 0:
            raise ConfigError(f"thresholds.{cls}.c_sla: must be > 0")
    return out


def _generate_relations(spec: dict, topology: Topology, seed: int) -> Tuple[Relation, ...]:
    per_region = _number(spec.get("per_region", 20), "relations.per_region", positive=True, integer=True)
    size = _money(spec.get("size_gb", "0.45"), "relations.size_gb")
    if size == 0:
        raise ConfigError("relations.size_gb: must be > 0")
    jitter = _number(spec.get("size_jitter", 0.0), "relations.size_jitter")
    if jitter >= 1:
        raise ConfigError("relations.size_jitter: must be < 1")
    rng = random.Random(seed ^ 0x5EED5EED)
    out = []
    for key in topology.region_keys:
        vms = topology.vms_in(key)
        for i in range(per_region):
            vm = vms[i % len(vms)]
            s = size
            if jitter:
                factor = Decimal(repr(rng.uniform(1 - jitter, 1 + jitter)))
                s = (size * factor).quantize(SIZE_QUANTUM)
            out.append(Relation(f"{key[0]}-{key[1]}-r{i + 1:02d}", s, vm.location))
    return tuple(out)


def _parse_relations(d: dict, topology: Topology, seed: int) -> Tuple[Relation, ...]:
    spec = d.get("relations", {})
    if isinstance(spec, dict):
        return _generate_relations(spec, topology, seed)
    rels = []
    seen = set()
    for i, r in enumerate(spec):
        try:
            rel = Relation.from_dict(r)
        except (KeyError, TypeError) as e:
            raise ConfigError(f"relations[{i}]: malformed entry ({e})") from None
        except ValueError as e:
            raise ConfigError(f"relations[{i}]: {e}") from None
        if rel.id in seen:
            raise ConfigError(f"relations[{i}].id: duplicate {rel.id!r}")
        seen.add(rel.id)
        topology.validate_location(rel.home)
        rels.append(rel)
    return tuple(rels)


def parse_scenario(d: dict) -> Scenario:
    if not isinstance(d, dict):
        raise ConfigError("scenario: top level must be an object")
    seed = d.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigError(f"seed: expected an unsigned 64-bit integer, got {seed!r}")
    try:
        providers, _ = _parse_topology(d)
        topology = Topology(providers, _parse_network(d))
    except KeyError as e:
        raise ConfigError(f"topology: missing key {e}") from None
    pricing = _parse_pricing(d, topology)
    thresholds = _parse_thresholds(d)
    wl = d.get("workload", {})
    workload = WorkloadSpec(
        mode=wl.get("mode", "repeat"),
        count=_number(wl.get("count", 1000), "workload.count", positive=True, integer=True),
        complexity=wl.get("complexity", "complex"),
    )
    relations = _parse_relations(d, topology, seed)
    if not relations:
        raise ConfigError("relations: catalog is empty")
    return Scenario(
        topology=topology,
        pricing=pricing,
        thresholds=thresholds,
        workload=workload,
        relations=relations,
        seed=seed,
        compute_intensity=_number(d.get("compute_intensity", DEFAULT_COMPUTE_INTENSITY),
                                  "compute_intensity", positive=True),
    )


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise ConfigError(f"{path}: scenario file not found") from None
    except OSError as e:
        raise ConfigError(f"{path}: cannot read ({e})") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: parse error at line {e.lineno} column {e.colno}: {e.msg}") from None
    return parse_scenario(data)


def default_scenario_text() -> str:
    return resources.files("cloudrep.scenarios").joinpath(DEFAULT_SCENARIO).read_text()


def default_scenario() -> Scenario:
    return parse_scenario(json.loads(default_scenario_text()))


# -- serialization --------------------------------------------------------------


def _region_table(table: Dict[Tuple[str, str], Decimal]) -> dict:
    out: Dict[str, Dict[str, str]] = {}
    for (pid, rid), v in table.items():
        out.setdefault(pid, {})[rid] = str(v)
    return out


def scenario_to_dict(s: Scenario) -> dict:
    """Fully expanded form; ``parse_scenario(scenario_to_dict(s)) == s``."""
    common = s.common_thresholds
    th: Dict[str, Any] = {
        "p_sla": common.p_sla,
        "popularity_mode": common.popularity_mode,
        "delta_t": common.delta_t,
        "period_length": common.period_length,
    }
    for cls in QUERY_CLASSES:
        t = s.thresholds[cls]
        th[cls] = {"t_sla": t.t_sla, "c_sla": str(t.c_sla)}
    return {
        "schema_version": SCHEMA_VERSION,
        "seed": s.seed,
        "compute_intensity": s.compute_intensity,
        "topology": {
            "providers": [
                {
                    "id": p.id,
                    "regions": [
                        {
                            "id": r.id,
                            "datacenters": [
                                {"id": dc.id, "vms": [{"id": vm.id, "mips": vm.mips} for vm in dc.vms]}
                                for dc in r.datacenters
                            ],
                        }
                        for r in p.regions
                    ],
                }
                for p in s.topology.providers
            ]
        },
        "pricing": {
            "cpu": _region_table(s.pricing.cpu),
            "io": _region_table(s.pricing.io),
            "bandwidth": {
                "intraDC": _region_table(s.pricing.intra_dc),
                "interRegion": str(s.pricing.inter_region),
                "interProvider": str(s.pricing.inter_provider),
            },
            "storage": str(s.pricing.storage),
            "billing_period": s.pricing.billing_period,
        },
        "network": {
            k.value: {"capacity": t.capacity, "latency": t.latency} for k, t in s.topology.network.items()
        },
        "thresholds": th,
        "relations": [r.to_dict() for r in s.relations],
        "workload": {"mode": s.workload.mode, "count": s.workload.count, "complexity": s.workload.complexity},
    }
