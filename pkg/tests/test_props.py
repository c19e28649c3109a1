import random

from shrinkcheck.props import SUITES, random_expression, random_monomial, run_all


def test_monomial_leaves_requested_free_labels():
    rng = random.Random(0)
    for free in ((), ("i",), ("i", "j")):
        for _ in range(50):
            facs = random_monomial(rng, 4, 4, free)
            labels = [l for _, idx in facs for l in idx]
            assert sorted(l for l in set(labels) if labels.count(l) == 1) == sorted(free)
            assert all(labels.count(l) <= 2 for l in labels)


def test_expression_generator_is_seeded():
    a = random_expression(random.Random(7), 3, 3, 4, ("i",))
    b = random_expression(random.Random(7), 3, 3, 4, ("i",))
    assert a == b and a.free_indices == {"i"}


def test_small_run_passes():
    results = run_all(20, 1)
    assert [r.name for r in results] == list(SUITES)
    assert all(r.ok for r in results), [r.to_json() for r in results if not r.ok]


def test_scaled_trial_counts():
    counts = {r.name: r.trials for r in run_all(10, 0)}
    assert counts["canonicalize-idempotence"] == 100 and counts["fd-gradients"] == 5
