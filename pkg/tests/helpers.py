"""Independent oracles and scripted scenarios shared by the test modules."""

from fractions import Fraction

import networkx as nx

from mplsagg.dataplane import FiveTuple, client_network
from mplsagg.topology import DirectedLink, NodeRole, Topology
from mplsagg.traffic import FlowArrival

MB = 1e6


def digraph_topology(n, edges, pes):
    roles = [NodeRole.PE if i in pes else NodeRole.P for i in range(n)]
    links = [DirectedLink(u, v, 1e8, 0.001, w) for (u, v), w in edges.items()]
    return Topology(roles, links)


def transposed_oracle(n, edges, root):
    """networkx Dijkstra on the transposed graph, lowest-id successor on ties."""
    g = nx.DiGraph()
    g.add_nodes_from(range(n))
    for (u, v), w in edges.items():
        g.add_edge(v, u, weight=w)
    dist = nx.single_source_dijkstra_path_length(g, root, weight="weight")
    hop = {}
    for u in dist:
        if u == root:
            continue
        hop[u] = min(v for (a, v), w in edges.items()
                     if a == u and v in dist and dist[v] + w == dist[u])
    return dict(dist), hop


def random_digraph(rng, max_nodes=50):
    n = rng.randint(1, max_nodes)
    p = rng.uniform(0.02, 0.3)
    edges = {}
    for u in range(n):
        for v in range(n):
            if u != v and rng.random() < p:
                edges[(u, v)] = rng.randint(1, 20)
    return n, edges


def exact_maxmin(flows, capacity):
    """Per-flow progressive filling in exact rational arithmetic."""
    rate = {f: Fraction(0) for f in flows}
    active = set(flows)
    cap = {l: Fraction(c) for l, c in capacity.items()}
    while active:
        inc = None
        for l, c in cap.items():
            users = [f for f in flows if l in flows[f]]
            n = sum(1 for f in users if f in active)
            if n:
                slack = (c - sum(rate[f] for f in users)) / n
                inc = slack if inc is None else min(inc, slack)
        for f in active:
            rate[f] += inc
        for l, c in cap.items():
            users = [f for f in flows if l in flows[f]]
            if any(f in active for f in users) and sum(rate[f] for f in users) == c:
                active -= set(users)
    return rate


def random_fairshare_instance(rng):
    nl = rng.randint(1, 10)
    capacity = {l: rng.randint(1, 1000) for l in range(nl)}
    flows = {}
    for f in range(rng.randint(1, 20)):
        flows[f] = rng.sample(range(nl), rng.randint(1, nl))
    return flows, capacity


def arrival(i, t, size, src, dst, sport=None):
    tup = FiveTuple(int(client_network(src).network_address) + 1,
                    int(client_network(dst).network_address) + 1, sport or 1000 + i, 80)
    return FlowArrival(t, tup, size, src, dst, i)


# S=0 reaches D=1 over disjoint core paths of 2, 3, 4 and 5 hops
MULTIPATH = """
node 0 PE
node 1 PE
""" + "".join(f"node {i} P\n" for i in range(2, 12)) + """
bilink 0 2 100e6 0 1
bilink 2 1 100e6 0 1
bilink 0 3 100e6 0 1
bilink 3 4 100e6 0 1
bilink 4 1 100e6 0 1
bilink 0 5 100e6 0 1
bilink 5 6 100e6 0 1
bilink 6 7 100e6 0 1
bilink 7 1 100e6 0 1
bilink 0 8 100e6 0 1
bilink 8 9 100e6 0 1
bilink 9 10 100e6 0 1
bilink 10 11 100e6 0 1
bilink 11 1 100e6 0 1
"""

MULTIPATH_ROUTES = [[0, 2, 1], [0, 3, 4, 1], [0, 5, 6, 7, 1], [0, 8, 9, 10, 11, 1]]

PATH_RATE = 12.5 * MB  # bytes/s through one 100 Mbps path


def multipath_arrivals():
    """One flow per second that saturates the current path, then a light one.

    The first flow ends at 3.95 s, just before the 4 s tick, so its path
    returns to NORM with no label active on it and no reallocation follows.
    """
    return [
        arrival(0, 0.1, 3.85 * PATH_RATE, 0, 1),
        arrival(1, 1.1, 20 * PATH_RATE, 0, 1),
        arrival(2, 2.1, 20 * PATH_RATE, 0, 1),
        arrival(3, 3.1, 0.3 * PATH_RATE, 0, 1),
    ]
