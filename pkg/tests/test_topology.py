import random

import networkx as nx
import pytest

from mplsagg.config import bundled
from mplsagg.topology import (
    ContractViolation,
    Lsdb,
    MetricClass,
    MetricValues,
    TopologyError,
    dijkstra,
    forward_path,
    load_topology,
    parse_topology,
    reverse_dijkstra,
    set_metric,
    trees_equal,
)

from helpers import digraph_topology, random_digraph, transposed_oracle


def test_reverse_dijkstra_matches_transposed_oracle_on_random_digraphs():
    rng = random.Random(2024)
    for _ in range(1000):
        n, edges = random_digraph(rng)
        root = rng.randrange(n)
        topo = digraph_topology(n, edges, {root})
        tree = reverse_dijkstra(topo, Lsdb(topo), root)
        dist, hop = transposed_oracle(n, edges, root)
        assert tree.dist == dist
        assert tree.next_hop == hop


def test_asymmetric_pair_uses_metric_toward_root():
    topo, lsdb = parse_topology("""
        node 0 P
        node 1 PE
        node 2 P
        link 1 2 1e8 0.001 1
        link 2 1 1e8 0.001 7
    """)
    tree = reverse_dijkstra(topo, lsdb, 1)
    assert tree.dist == {1: 0, 2: 7}
    assert tree.next_hop == {2: 1}
    # forward Dijkstra from 1 sees the other direction
    assert dijkstra(topo, lsdb, 1).dist[2] == 1


def test_root_distance_is_zero_and_tree_is_acyclic():
    topo, lsdb = load_topology(bundled("us_backbone39.topo"))
    for pe in topo.pes:
        tree = reverse_dijkstra(topo, lsdb, pe)
        assert tree.dist[pe] == 0
        assert len(tree.dist) == topo.num_nodes
        for u in tree.dist:
            path = tree.path_to_root(u)
            assert path[-1] == pe
            assert len(set(path)) == len(path)


def test_root_must_be_pe():
    topo, lsdb = parse_topology("node 0 PE\nnode 1 P\nbilink 0 1 1e8 0 1\n")
    with pytest.raises(ContractViolation):
        reverse_dijkstra(topo, lsdb, 1)


def test_equal_cost_ties_pick_lowest_next_hop():
    # 3 reaches root 0 via 1 or 2 at equal cost
    topo, lsdb = parse_topology("""
        node 0 PE
        node 1 P
        node 2 P
        node 3 P
        bilink 3 2 1e8 0 1
        bilink 3 1 1e8 0 1
        bilink 1 0 1e8 0 1
        bilink 2 0 1e8 0 1
    """)
    assert reverse_dijkstra(topo, lsdb, 0).next_hop[3] == 1


def test_metric_asymmetry_is_respected():
    topo, lsdb = parse_topology("""
        node 0 PE
        node 1 P
        node 2 P
        bilink 0 1 1e8 0 1
        bilink 1 2 1e8 0 1
        bilink 0 2 1e8 0 5
    """)
    before = reverse_dijkstra(topo, lsdb, 0)
    # links oriented away from the root are never used by its tree
    set_metric(lsdb, (0, 1), MetricClass.CONG)
    set_metric(lsdb, (0, 2), MetricClass.CONG)
    after = reverse_dijkstra(topo, lsdb, 0)
    assert after.dist == before.dist
    assert trees_equal(before, after)
    set_metric(lsdb, (1, 0), MetricClass.CONG)
    assert reverse_dijkstra(topo, lsdb, 0).next_hop[1] == 2


def test_set_metric_reports_changes():
    topo, lsdb = parse_topology("node 0 PE\nnode 1 PE\nbilink 0 1 1e8 0 3\n")
    assert set_metric(lsdb, (0, 1), MetricClass.CONG)
    assert not set_metric(lsdb, (0, 1), MetricClass.CONG)
    assert lsdb.weight(topo.link_between(0, 1)) == MetricValues().cong
    assert set_metric(lsdb, (0, 1), MetricClass.WARN)
    assert lsdb.weight(topo.link_between(0, 1)) == 1000
    assert set_metric(lsdb, (0, 1), MetricClass.NORM)
    assert lsdb.weight(topo.link_between(0, 1)) == 3  # NORM keeps the base metric
    with pytest.raises(ContractViolation):
        set_metric(lsdb, (1, 5), MetricClass.CONG)


def test_trees_equal():
    topo, lsdb = load_topology(bundled("tiny6.topo"))
    t = reverse_dijkstra(topo, lsdb, 5)
    assert trees_equal(t, t)
    unused = next(i for i, l in enumerate(topo.links) if l.src == 5)
    set_metric(lsdb, unused, MetricClass.CONG)
    assert trees_equal(t, reverse_dijkstra(topo, lsdb, 5))
    used = topo.link_between(2, 5)
    set_metric(lsdb, used, MetricClass.CONG)
    assert not trees_equal(t, reverse_dijkstra(topo, lsdb, 5))
    with pytest.raises(ContractViolation):
        trees_equal(t, reverse_dijkstra(topo, lsdb, 0))


def test_forward_path_follows_legacy_tree():
    topo, lsdb = load_topology(bundled("tiny6.topo"))
    assert forward_path(dijkstra(topo, lsdb, 0), 5) == [0, 1, 2, 5]


def test_shipped_backbone_counts():
    topo, _ = load_topology(bundled("us_backbone39.topo"))
    assert topo.num_nodes == 39
    assert len(topo.links) == 122
    assert len(topo.pes) == 10
    g = nx.Graph([l.key for l in topo.links])
    assert nx.is_connected(g)


def test_degenerate_single_node():
    topo, _ = parse_topology("node 0 P\n")
    assert topo.num_nodes == 1 and topo.links == []


@pytest.mark.parametrize("text, needle", [
    ("node 0 P\nnode 1 P\nlink 0 99 1e8 0 1\n", "line 3: unknown node 99"),
    ("node 0 P\nnode 0 P\n", "line 2: duplicate node"),
    ("node 0 P\nnode 1 P\nlink 0 1 1e8 0 1\nlink 0 1 1e8 0 1\n", "line 4: duplicate link"),
    ("node 0 P\nnode 1 P\nbilink 0 1 0 0 1\n", "capacity must be positive"),
    ("node 0 P\nnode 1 P\nbilink 0 1 1e8 -1 1\n", "negative delay"),
    ("node 0 P\nnode 1 P\nbilink 0 1 1e8 0 1.5\n", "metric must be an integer"),
    ("node 0 P\nnode 1 P\nbilink 0 1 1e8 0 inf\n", "must be finite"),
    ("node 0 P\nnode 1 P\nbilink 1 1 1e8 0 1\n", "self-loop"),
    ("node 0 X\n", "bad node declaration"),
    ("node 0 P\nnode 2 P\n", "contiguous"),
    ("router 0\n", "unknown keyword"),
])
def test_parse_errors_name_the_problem(text, needle):
    with pytest.raises(TopologyError, match=needle):
        parse_topology(text)


def test_comments_and_blank_lines():
    topo, _ = parse_topology("# header\n\nnode 0 PE  # edge\nnode 1 P\nbilink 0 1 1e8 0.002 4 # x\n")
    assert [l.key for l in topo.links] == [(0, 1), (1, 0)]
    assert topo.links[0].delay == 0.002 and topo.links[0].base_metric == 4
