import math

import numpy as np
import pytest

from rec_feedback.network import BipartiteNetwork
from rec_feedback.recommender import (
    SimilarityParams, icf_scores, item_similarity, rank_reciprocal_pick,
    rank_weights, top_list, RecommendationList
)


EDGES = [(0, 0), (0, 1), (1, 0), (1, 1), (2, 0), (2, 3), (3, 2), (3, 3)]


def neighbours(edges):
    result = {}
    for u, i in edges:
        result.setdefault(i, set()).add(u)
    return result


def brute_force_similarity(edges, a, b, theta):
    gamma = neighbours(edges)
    common = len(gamma.get(a, set()) & gamma.get(b, set()))
    if not common:
        return 0.0
    return common / (len(gamma[a]) * len(gamma[b])) ** theta


def test_similarity_examples():
    net = BipartiteNetwork.from_edge_list(EDGES)
    # Item 0 has users {0, 1, 2}, item 1 has users {0, 1}.
    assert item_similarity(net, 0, 1, 0) == 2
    assert item_similarity(net, 0, 1, 0.5) == pytest.approx(2 / math.sqrt(6))
    assert item_similarity(net, 0, 1, 1) == pytest.approx(2 / 6)
    for theta in (0, 0.5, 1):
        assert item_similarity(net, 1, 2, theta) == 0


def test_similarity_is_symmetric():
    net = BipartiteNetwork.from_edge_list(EDGES)
    for theta in (0, 0.3, 0.5, 1):
        for a in range(4):
            for b in range(4):
                if a == b:
                    continue
                expected = brute_force_similarity(EDGES, a, b, theta)
                assert item_similarity(net, a, b, theta) == \
                    pytest.approx(expected)
                assert item_similarity(net, a, b, theta) == \
                    pytest.approx(item_similarity(net, b, a, theta))


def test_self_similarity():
    net = BipartiteNetwork.from_edge_list(EDGES)
    with pytest.raises(ValueError):
        item_similarity(net, 1, 1, 0)


@pytest.mark.parametrize('theta', [0, 0.5, 1])
def test_icf_scores_brute_force(theta):
    net = BipartiteNetwork.from_edge_list(EDGES)
    for user in range(net.n_users):
        held = {i for u, i in EDGES if u == user}
        scores = icf_scores(net, user, theta).as_dict()
        assert set(scores) == set(range(net.n_items)) - held
        for item, score in scores.items():
            expected = sum(brute_force_similarity(EDGES, item, b, theta)
                           for b in held)
            assert score == pytest.approx(expected)


def test_icf_scores_all_items_held():
    net = BipartiteNetwork.from_edge_list([(0, 0), (0, 1), (1, 1)])
    assert len(icf_scores(net, 0, 0.5)) == 0


def ranked_network():
    # User 0 holds item 0; candidates 1, 2, 3 score 3, 1, 2 at theta = 0.
    edges = [(0, 0),
             (1, 0), (1, 1), (1, 3),
             (2, 0), (2, 1), (2, 3),
             (3, 0), (3, 1), (3, 2),
             (4, 4)]
    return BipartiteNetwork.from_edge_list(edges)


def test_top_list_order():
    net = ranked_network()
    recs = top_list(net, 0, 0, list_length=2)
    assert recs.items == (1, 3)
    assert recs.scores == (3.0, 2.0)

    recs = top_list(net, 0, 0, list_length=20)
    assert recs.items == (1, 3, 2)


def test_top_list_empty():
    net = ranked_network()
    assert len(top_list(net, 4, 0)) == 0
    with pytest.raises(ValueError):
        top_list(net, 0, 0, list_length=0)


def test_top_list_random_ties():
    # Items 1 and 2 tie for user 0.
    net = BipartiteNetwork.from_edge_list([(0, 0), (1, 0), (1, 1), (1, 2)])
    firsts = {top_list(net, 0, 0, 1, np.random.default_rng(s)).items[0]
              for s in range(40)}
    assert firsts == {1, 2}


def test_rank_weights():
    assert rank_weights(3) == pytest.approx([6 / 11, 3 / 11, 2 / 11])
    assert rank_weights(1) == pytest.approx([1])


def test_rank_reciprocal_pick():
    recs = RecommendationList(items=(7, 8, 9), scores=(3.0, 2.0, 1.0))
    rng = np.random.default_rng(0)
    picks = [rank_reciprocal_pick(recs, rng) for _ in range(30000)]
    freqs = [picks.count(x) / len(picks) for x in (7, 8, 9)]
    assert freqs == pytest.approx([6 / 11, 3 / 11, 2 / 11], abs=0.015)

    single = RecommendationList(items=(4,), scores=(1.0,))
    assert rank_reciprocal_pick(single, rng) == 4
    with pytest.raises(ValueError):
        rank_reciprocal_pick(RecommendationList(), rng)


def test_similarity_params():
    assert SimilarityParams(1).theta == 1.0
    with pytest.raises(ValueError):
        SimilarityParams(1.5)


def test_similarity_on_random_networks():
    rng = np.random.default_rng(9)
    for _ in range(20):
        pairs = rng.integers(0, [8, 6], size=(15, 2)).tolist()
        edges = sorted({(u, i) for u, i in pairs})
        net = BipartiteNetwork.from_edge_list(edges, n_items=6)
        for theta in (0, 0.5, 1):
            for a in range(6):
                for b in range(a + 1, 6):
                    assert item_similarity(net, a, b, theta) == \
                        pytest.approx(brute_force_similarity(edges, a, b,
                                                             theta))


def test_classical_indices_on_random_networks():
    rng = np.random.default_rng(11)
    for _ in range(100):
        n_users, n_items = rng.integers(3, 12), rng.integers(2, 9)
        pairs = rng.integers(0, [n_users, n_items], size=(25, 2)).tolist()
        edges = sorted({(u, i) for u, i in pairs})
        net = BipartiteNetwork.from_edge_list(edges, n_users=int(n_users),
                                              n_items=int(n_items))
        gamma = neighbours(edges)
        for a in range(n_items):
            for b in range(a + 1, n_items):
                ga, gb = gamma.get(a, set()), gamma.get(b, set())
                common = len(ga & gb)
                assert item_similarity(net, a, b, 0) == common
                if not common:
                    continue
                assert item_similarity(net, a, b, 0.5) == \
                    pytest.approx(common / math.sqrt(len(ga) * len(gb)),
                                  rel=1e-12)
                assert item_similarity(net, a, b, 1) == \
                    common / (len(ga) * len(gb))
