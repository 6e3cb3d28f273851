import numpy as np
import pytest

from rec_feedback.metrics import (
    InequalitySnapshot, gini, herfindahl, popularity_rank_curve, top_share
)


def mean_absolute_difference_gini(k):
    k = np.asarray(k, dtype=float)
    return np.abs(k[:, None] - k[None, :]).sum() / (2 * len(k) * k.sum())


def test_gini():
    assert gini([5, 5, 5, 5]) == pytest.approx(0)
    assert gini([0, 0, 0, 6]) == pytest.approx(0.75)
    assert gini([1, 2, 3, 4]) == pytest.approx(0.25)
    assert gini([4, 1, 3, 2]) == pytest.approx(0.25)


def test_gini_oracle():
    rng = np.random.default_rng(1)
    for _ in range(10_000):
        k = rng.integers(0, 51, size=rng.integers(1, 201))
        k[rng.integers(len(k))] += 1
        assert gini(k) == pytest.approx(mean_absolute_difference_gini(k),
                                        abs=1e-12)


def random_degrees(rng, max_items=60):
    k = rng.integers(0, 40, size=rng.integers(2, max_items))
    k[0] += 1
    return k


def test_gini_invariances():
    rng = np.random.default_rng(2)
    for _ in range(200):
        k = random_degrees(rng)
        expected = gini(k)
        assert gini(3 * k) == pytest.approx(expected, abs=1e-12)
        assert gini(0.25 * k) == pytest.approx(expected, abs=1e-12)
        assert gini(rng.permutation(k)) == pytest.approx(expected, abs=1e-12)


def test_gini_falls_under_transfer_to_poorer():
    rng = np.random.default_rng(3)
    for _ in range(200):
        k = random_degrees(rng)
        rich, poor = int(np.argmax(k)), int(np.argmin(k))
        if k[rich] - k[poor] < 2:
            continue
        moved = k.copy()
        moved[rich] -= 1
        moved[poor] += 1
        assert gini(moved) < gini(k) - 1e-12


def test_herfindahl():
    assert herfindahl([6, 0, 0]) == pytest.approx(1)
    assert herfindahl([1, 1, 1, 1]) == pytest.approx(0.25)
    assert herfindahl([1, 3]) == pytest.approx(0.625)


def test_top_share():
    assert top_share([4, 3, 2, 1], fraction=1) == pytest.approx(1)
    assert top_share([4, 3, 2, 1], fraction=0.25) == pytest.approx(0.4)
    assert top_share([2, 2, 2, 2], fraction=0.5) == pytest.approx(0.5)
    # Default 1% of 4 items rounds up to the single top item.
    assert top_share([1, 2, 3, 4]) == pytest.approx(0.4)
    with pytest.raises(ValueError):
        top_share([1, 2], fraction=0)


def test_herfindahl_bounds():
    rng = np.random.default_rng(4)
    for _ in range(200):
        k = random_degrees(rng)
        assert 1 / len(k) - 1e-12 <= herfindahl(k) <= 1 + 1e-12


def test_top_share_monotone_in_fraction():
    rng = np.random.default_rng(5)
    fractions = np.linspace(0.01, 1, 40)
    for _ in range(100):
        k = random_degrees(rng)
        shares = [top_share(k, f) for f in fractions]
        assert all(a <= b for a, b in zip(shares, shares[1:]))
        assert shares[-1] == pytest.approx(1)


def test_popularity_rank_curve():
    curve = popularity_rank_curve([1, 4, 2, 3])
    assert curve == pytest.approx(
        [(0.25, 0.4), (0.5, 0.3), (0.75, 0.2), (1.0, 0.1)])

    flat = popularity_rank_curve([3, 3, 3])
    assert [y for _, y in flat] == pytest.approx([1 / 3] * 3)

    single = popularity_rank_curve([0, 9, 0])
    assert [y for _, y in single] == pytest.approx([1, 0, 0])


@pytest.mark.parametrize('metric', [gini, herfindahl, top_share,
                                    popularity_rank_curve])
def test_undefined(metric):
    with pytest.raises(ValueError):
        metric([0, 0, 0])
    with pytest.raises(ValueError):
        metric([])


def test_snapshot():
    snap = InequalitySnapshot.measure(3, [1, 3])
    assert snap.sweep == 3
    assert snap.herfindahl == pytest.approx(0.625)
    assert snap.top1_share == pytest.approx(0.75)
