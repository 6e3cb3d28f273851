import networkx as nx
import numpy as np
import pytest
from networkx.algorithms import bipartite

from rec_feedback.network import (
    BipartiteNetwork, Link, LinkError, recount_cooccurrence, relabel
)


def toy():
    # Item 0: users 0, 1, 2. Item 1: users 0, 1. Item 2: user 3.
    edges = [(0, 0), (0, 1), (1, 0), (1, 1), (2, 0), (3, 2), (3, 3)]
    return BipartiteNetwork.from_edge_list(edges, seed=3)


def test_from_edge_list():
    net = BipartiteNetwork.from_edge_list([(0, 0), (0, 1), (1, 0)])
    assert net.degrees.tolist() == [2, 1]
    assert net.user_degrees.tolist() == [2, 1]
    assert net.n_links == 3
    assert net.clock == 4
    assert sorted(x.timestamp for x in net.links()) == [1, 2, 3]
    assert net.common_neighbors(0, 1) == 1


def test_duplicate_edge():
    with pytest.raises(LinkError) as err:
        BipartiteNetwork.from_edge_list([(0, 0), (0, 0)])
    assert err.value.pair == (0, 0)


def test_empty_edge_list():
    with pytest.raises(LinkError):
        BipartiteNetwork.from_edge_list([])


def test_timestamps_depend_on_seed():
    edges = [(u, i) for u in range(5) for i in range(4)]
    net1 = BipartiteNetwork.from_edge_list(edges, seed=1)
    net2 = BipartiteNetwork.from_edge_list(edges, seed=1)
    net3 = BipartiteNetwork.from_edge_list(edges, seed=2)
    assert net1 == net2
    assert list(net1.links()) != list(net3.links())


def test_oldest_link():
    net = BipartiteNetwork.from_links([Link(0, 0, 3), Link(0, 1, 7)])
    assert net.oldest_link(0) == Link(0, 0, 3)
    assert net.clock == 8

    net = BipartiteNetwork.from_links([Link(0, 0, 1)])
    assert net.oldest_link(0) == Link(0, 0, 1)


def test_oldest_link_without_links():
    net = BipartiteNetwork.from_links([Link(1, 0, 1)], n_users=2)
    with pytest.raises(LinkError):
        net.oldest_link(0)
    with pytest.raises(ValueError):
        net.oldest_link(5)


def test_rewire_link():
    net = BipartiteNetwork.from_links(
        [Link(0, 0, 1), Link(0, 1, 5), Link(1, 2, 2)], n_items=3)
    clock = net.clock

    new = net.rewire_link(0, 0, 2)
    assert new == Link(0, 2, clock)
    assert net.stamps[0] == {1: 5, 2: clock}
    assert net.degrees.tolist() == [0, 1, 2]
    assert net.clock == clock + 1
    assert net.oldest_link(0) == Link(0, 1, 5)
    assert (net.cooccurrence == recount_cooccurrence(net)).all()


def test_rewire_contract():
    net = toy()
    with pytest.raises(LinkError):
        net.rewire_link(0, 2, 3)  # (0, 2) does not exist.
    with pytest.raises(LinkError):
        net.rewire_link(0, 0, 1)  # (0, 1) already exists.
    assert net == toy()


def test_cooccurrence_under_random_rewiring():
    rng = np.random.default_rng(7)
    edges = {(int(u), int(i)) for u, i in rng.integers(0, [12, 9], (40, 2))}
    net = BipartiteNetwork.from_edge_list(sorted(edges), n_users=12)
    n_links = net.n_links
    user_degrees = net.user_degrees.copy()

    for _ in range(200):
        user = int(rng.choice(np.flatnonzero(net.user_degrees)))
        free = [i for i in range(net.n_items) if not net.has_link(user, i)]
        if not free:
            continue
        old = net.oldest_link(user).item
        net.rewire_link(user, old, int(rng.choice(free)))

    assert net.n_links == n_links
    assert (net.user_degrees == user_degrees).all()
    assert (net.cooccurrence == recount_cooccurrence(net)).all()
    assert (np.diag(net.cooccurrence) == 0).all()

    graph = net.to_networkx()
    items = [('i', i) for i in range(net.n_items)]
    projected = bipartite.weighted_projected_graph(graph, items)
    for (_, a), (_, b), weight in projected.edges(data='weight'):
        assert net.common_neighbors(a, b) == weight


def test_to_networkx():
    net = toy()
    graph = net.to_networkx()
    assert graph.number_of_edges() == net.n_links
    assert nx.is_bipartite(graph)
    degrees = [graph.degree(('i', i)) for i in range(net.n_items)]
    assert degrees == net.degrees.tolist()


def test_copy_is_independent():
    net = toy()
    clone = net.copy()
    clone.rewire_link(2, 0, 3)
    assert clone != net
    assert net == toy()


def test_from_links_validation():
    with pytest.raises(LinkError):
        BipartiteNetwork.from_links([Link(0, 0, 1), Link(1, 0, 1)])
    with pytest.raises(LinkError):
        BipartiteNetwork.from_links([Link(0, 0, 4)], clock=4)
    with pytest.raises(LinkError):
        BipartiteNetwork.from_links([Link(0, 3, 1)], n_items=2)


def test_relabel():
    ids = relabel([30, 10, 20, 10])
    assert dict(ids) == {10: 0, 20: 1, 30: 2}
    assert ids.inv[2] == 30
