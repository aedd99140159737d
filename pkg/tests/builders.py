"""Small randomized scenarios for property and oracle tests.

Prices carry at most 3-4 decimals, sizes 2 and compute intensity is a
multiple of 1000, so every charge is exact at the 1e-9 money quantum and an
oracle working in unrounded Decimal arithmetic must agree to the last digit.
Networks are monotone (a farther tier is never faster), as in the default.
"""

from __future__ import annotations

import random
from decimal import Decimal

from cloudrep.catalog import Catalog
from cloudrep.scenario import parse_scenario
from cloudrep.workload import Query

PROVIDER_NAMES = ["P1", "P2", "P3"]
REGION_NAMES = ["R1", "R2", "R3"]


def _price(rng: random.Random, lo: int, hi: int, scale: int) -> str:
    return str(Decimal(rng.randint(lo, hi)) / Decimal(scale))


def random_network(rng: random.Random) -> dict:
    caps = sorted((rng.choice([1.0, 2.0, 4.0, 5.0, 8.0, 10.0]) for _ in range(3)), reverse=True)
    lats = sorted(rng.choice([0.0, 0.001, 0.01, 0.05, 0.1]) for _ in range(3))
    return {
        "intraVM": {"capacity": 1000.0, "latency": 0.0},
        "intraDC": {"capacity": caps[0], "latency": lats[0]},
        "interRegion": {"capacity": caps[1], "latency": lats[1]},
        "interProvider": {"capacity": caps[2], "latency": lats[2]},
    }


def random_scenario_dict(rng: random.Random, *, relations_per_region: int = 2, p_sla: float = 0,
                         mode: str = "count") -> dict:
    n_prov = rng.randint(1, 3)
    n_reg = rng.randint(1, 3)
    if n_prov * n_reg < 2:
        n_reg = 2
    providers = PROVIDER_NAMES[:n_prov]
    regions = REGION_NAMES[:n_reg]
    vms = {(p, r): rng.randint(1, 3) for p in providers for r in regions}
    # intraDC < interRegion < interProvider, as in the bundled prices
    intra = {p: {r: _price(rng, 5, 40, 10000) for r in regions} for p in providers}
    inter_region = _price(rng, 50, 90, 10000)
    inter_provider = _price(rng, 95, 200, 10000)
    relations = []
    for p in providers:
        for r in regions:
            for i in range(relations_per_region):
                vm = f"vm{rng.randint(1, vms[(p, r)]):02d}"
                relations.append({
                    "id": f"{p}-{r}-r{i + 1}",
                    "size_gb": str(Decimal(rng.randint(10, 90)) / 100),
                    "home": {"provider": p, "region": r, "datacenter": "dc1", "vm": vm},
                })
    return {
        "seed": rng.randrange(2**32),
        "compute_intensity": float(1000 * rng.randint(1, 20)),
        "topology": {
            "vm_mips": 1e6,
            "providers": [
                {"id": p, "regions": [{"id": r, "datacenters": [{"id": "dc1", "vms": vms[(p, r)]}]}
                                      for r in regions]}
                for p in providers
            ],
        },
        "pricing": {
            "cpu": {p: {r: _price(rng, 5, 30, 1000) for r in regions} for p in providers},
            "io": {p: {r: _price(rng, 40, 120, 10000) for r in regions} for p in providers},
            "bandwidth": {"intraDC": intra, "interRegion": inter_region, "interProvider": inter_provider},
            "storage": "0.02",
            "billing_period": 1000,
        },
        "network": random_network(rng),
        "thresholds": {
            "p_sla": p_sla,
            "popularity_mode": mode,
            "delta_t": rng.randint(1, 5),
            "period_length": rng.choice([5, 10, 20]),
            "simple": {"t_sla": round(rng.uniform(0.05, 0.6), 3), "c_sla": _price(rng, 5, 60, 1000)},
            "complex": {"t_sla": round(rng.uniform(0.05, 0.6), 3), "c_sla": _price(rng, 5, 60, 1000)},
        },
        "relations": relations,
        "workload": {"mode": "random", "count": 50, "complexity": "simple"},
    }


def random_scenario(rng: random.Random, **kw):
    return parse_scenario(random_scenario_dict(rng, **kw))


def random_query(rng: random.Random, scenario, qid: int = 1, max_relations: int = 3) -> Query:
    ids = sorted(r.id for r in scenario.relations)
    k = rng.randint(1, min(max_relations, len(ids)))
    return Query(qid, rng.choice(scenario.topology.region_keys), tuple(rng.sample(ids, k)),
                 rng.choice(["simple", "complex"]))


def random_catalog(rng: random.Random, scenario, max_extra: int = 2) -> Catalog:
    """Catalog with a few random replicas already in place."""
    cat = Catalog(scenario.relations, window_len=scenario.common_thresholds.delta_t)
    keys = scenario.topology.region_keys
    for rel in scenario.relations:
        free = [k for k in keys if k != rel.home.region_key]
        for key in rng.sample(free, min(len(free), rng.randint(0, max_extra))):
            vm = rng.choice(scenario.topology.vms_in(key))
            cat.add_replica(rel.id, vm.location, 0)
    return cat
