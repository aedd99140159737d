from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cloudrep.scenario import WorkloadSpec
from cloudrep.workload import Query, WorkloadError, dump, generate, ingest

# upper 0.1% point of the chi-square distribution with 8 degrees of freedom
CHI2_8_999 = 26.124


def region_of(rid):
    return rid.split("-")[1]


def test_simple_queries_span_three_regions(scenario):
    for q in generate(WorkloadSpec("random", 200, "simple"), scenario.topology, scenario.relations, 3):
        assert q.kind == "simple"
        assert len(q.relation_ids) == 3
        assert sorted(region_of(r) for r in q.relation_ids) == ["AS", "UE", "US"]


def test_complex_queries_have_two_per_region(scenario):
    for q in generate(WorkloadSpec("random", 200, "complex"), scenario.topology, scenario.relations, 3):
        assert len(q.relation_ids) == 6
        assert len(set(q.relation_ids)) == 6
        assert all(n >= 2 for n in Counter(region_of(r) for r in q.relation_ids).values())


def test_repeat_mode_shares_relation_set(scenario):
    qs = generate(WorkloadSpec("repeat", 1000, "complex"), scenario.topology, scenario.relations, 7)
    assert len(qs) == 1000
    assert len({q.relation_ids for q in qs}) == 1
    assert [q.id for q in qs] == list(range(1, 1001))
    assert len({q.origin for q in qs}) == 9


def test_mixed_complexity(scenario):
    qs = generate(WorkloadSpec("random", 300, "mixed"), scenario.topology, scenario.relations, 5)
    assert {q.kind for q in qs} == {"simple", "complex"}


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**64 - 1), st.sampled_from(["simple", "complex", "mixed"]),
       st.sampled_from(["repeat", "random"]))
def test_same_seed_same_stream_and_constraints(seed, complexity, mode):
    from cloudrep.scenario import default_scenario

    s = default_scenario()
    spec = WorkloadSpec(mode, 40, complexity)
    a = generate(spec, s.topology, s.relations, seed)
    assert a == generate(spec, s.topology, s.relations, seed)
    for q in a:
        per_region = Counter(region_of(r) for r in q.relation_ids)
        need = 1 if q.kind == "simple" else 2
        assert set(per_region) == {"US", "UE", "AS"}
        assert all(n == need for n in per_region.values())
        assert len(set(q.relation_ids)) == len(q.relation_ids)


def test_origins_roughly_uniform(scenario):
    qs = generate(WorkloadSpec("repeat", 9000, "simple"), scenario.topology, scenario.relations, 11)
    counts = Counter(q.origin for q in qs)
    assert len(counts) == 9
    expected = len(qs) / 9
    chi2 = sum((n - expected) ** 2 / expected for n in counts.values())
    assert chi2 < CHI2_8_999


def test_dump_ingest_round_trip(scenario, tmp_path):
    qs = generate(WorkloadSpec("random", 20, "mixed"), scenario.topology, scenario.relations, 1)
    path = tmp_path / "queries.json"
    dump(qs, path)
    assert ingest(path) == qs


def test_malformed_records(tmp_path):
    with pytest.raises(WorkloadError):
        Query.from_dict({"id": 1, "origin": ["AWS"], "relations": []})
    path = tmp_path / "q.json"
    path.write_text('{"id": 1}')
    with pytest.raises(WorkloadError):
        ingest(path)


def test_too_few_relations(scenario):
    few = [r for r in scenario.relations if r.home.region != "AS"]
    with pytest.raises(WorkloadError, match="AS"):
        generate(WorkloadSpec("random", 1, "simple"), scenario.topology, few, 1)
