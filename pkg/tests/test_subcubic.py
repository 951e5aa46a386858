import random
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from simted.cubic import Target, dp_similarity, empty_sim
from simted.forest import Forest, SyncSubforest, parse_forest, random_forest, subtree, sync_slice
from simted.maxplus import broadcast_kernel
from simted.oracle import restricted_matrix_naive, similarity_matrix_naive, zhang_shasha_ed
from simted.subcubic import (
    TYPE1, TYPE2_BASE, TYPE2_FIRST, TYPE2_SECOND, Spine, decompose_compute,
    default_delta, merge_product, plan_decomposition, restricted_matrices,
    ted_subcubic, type2_transition, whole,
)
from _checks import random_pair_forest, similarity_matrix_problems
from conftest import forests


def path_tree(n):
    return Forest([-1] + [0] * n, [0] + list(range(n)),
                  [[1]] + [[u + 1] for u in range(1, n)] + [[]])


def star_tree(n):
    return parse_forest("r(" + ",".join("a" for _ in range(n - 1)) + ")") if n > 1 \
        else parse_forest("r")


def caterpillar(n):
    text, count = "", 0
    while count < n:
        body = "a"
        count += 1
        if count < n:
            body = "a(b," + "{}" + ")"
            count += 1
        text = body if not text else text.replace("{}", body, 1)
    return parse_forest(text.replace(",{}", "").replace("{}", ""))


def binary_tree(n):
    kids = [[] for _ in range(n)]
    for i in range(1, n):
        kids[(i - 1) // 2].append(i)

    def nest(u):
        return "a", [nest(c) for c in kids[u]]
    return Forest.from_nested([nest(0)])


def plan_instances():
    rng = random.Random(12)
    shapes = [path_tree, star_tree, caterpillar, binary_tree]
    out = []
    for n in (50, 300, 1000, 2000):
        for make in shapes:
            out.append(make(n))
        out.append(random_forest(n, rng=rng))
    while len(out) < 50:
        out.append(random_pair_forest(rng, 5, rng.choice([100, 500, 2000])))
    return out


def test_edit_example_all_deltas():
    t1, t2 = parse_forest("a(b,c(d,e),f)"), parse_forest("g(b,d,e,f,h)")
    for delta in (1, 2, 3, 10):
        assert ted_subcubic(t1, t2, delta) == 3


def test_transition_counts_are_bounded():
    instances = plan_instances()
    assert len(instances) >= 50
    for t1 in instances:
        for delta in (4, 16, 64):
            plan = plan_decomposition(t1, delta)
            assert plan.transitions <= 4 * t1.n / delta + 4, (t1.n, delta, plan.counts())


def test_plan_structure():
    rng = random.Random(3)
    for _ in range(40):
        t1 = random_pair_forest(rng, 4, 80)
        delta = rng.choice([1, 2, 5, 9])
        plan = plan_decomposition(t1, delta)
        if t1.n == 0:
            assert plan.transitions == 0
            continue
        assert plan.steps[-1].forest == whole(t1)
        for idx, step in enumerate(plan.steps):
            assert all(c < idx for c in step.children)
            if step.kind == TYPE1:
                a, b = (plan.steps[c] for c in step.children)
                assert a.size + b.size == step.size
                assert min(a.size, b.size) >= delta
            elif step.kind == TYPE2_BASE:
                assert step.inner_size == 0 and step.size <= 3 * delta
            else:
                assert 0 < step.size - step.inner_size <= 2 * delta or step.size <= 3 * delta
                assert plan.steps[step.children[0]].forest == step.inner


def test_rejects_bad_delta():
    with pytest.raises(ValueError):
        plan_decomposition(parse_forest("a"), 0)


@settings(max_examples=60, deadline=None)
@given(forests(max_size=14, alphabet=2), forests(max_size=10, alphabet=2),
       st.sampled_from([1, 2, 3, 5]))
def test_matrix_matches_cubic(f, t2, delta):
    s = decompose_compute(f, t2, delta)
    assert s == dp_similarity(f, t2)
    assert similarity_matrix_problems(s, f.n, t2.n) == []


@settings(max_examples=60, deadline=None)
@given(forests(max_size=18, alphabet=3), forests(max_size=18, alphabet=3),
       st.sampled_from([1, 2, 4, 8, None]))
def test_distance_matches_zhang_shasha(f1, f2, delta):
    assert ted_subcubic(f1, f2, delta) == zhang_shasha_ed(f1, f2)


def test_broadcast_kernel_gives_same_answer():
    rng = random.Random(21)
    for _ in range(30):
        f1, f2 = random_pair_forest(rng, 3, 20), random_pair_forest(rng, 3, 20)
        assert ted_subcubic(f1, f2, 2, broadcast_kernel) == ted_subcubic(f1, f2, 2)


def test_merge_product_both_orientations():
    rng = random.Random(5)
    for _ in range(40):
        a, b = random_pair_forest(rng, 2, 10), random_pair_forest(rng, 2, 10)
        t2 = random_pair_forest(rng, 3, 9)
        target = Target.of(t2)
        got = merge_product(dp_similarity(a, t2), a.n, dp_similarity(b, t2), b.n, target)
        from simted.forest import concat
        assert got == dp_similarity(concat(a, b), t2)


def _spine_instances(seed, count, max_t1=12, max_t2=9, min_k=2):
    """Type 2 steps of random plans whose spine has at least ``min_k`` nodes."""
    rng = random.Random(seed)
    found = 0
    while found < count:
        t1 = random_forest(rng.randint(4, max_t1), 2, rng=rng)
        t2 = random_pair_forest(rng, 3, max_t2)
        for step in plan_decomposition(t1, rng.choice([1, 2, 3])).steps:
            if step.kind == TYPE1:
                continue
            target = Target.of(t2)
            spine = Spine(t1, step.forest, step.inner, target)
            if spine.k < min_k:
                continue
            s_inner = dp_similarity(sync_slice(t1, step.inner), t2)
            yield t1, t2, step, spine, s_inner
            found += 1
            if found >= count:
                return


def test_middle_fast_matches_reference():
    instances = 0
    for t1, t2, step, spine, s_inner in _spine_instances(31, 60):
        fast = restricted_matrices(spine, s_inner, "fast")
        ref = restricted_matrices(Spine(t1, step.forest, step.inner, spine.target),
                                  s_inner, "reference")
        assert fast.keys() == ref.keys()
        for x in fast:
            assert fast[x] == ref[x]
        instances += 1
    assert instances >= 50


def test_restricted_matrices_match_brute_force():
    for t1, t2, step, spine, s_inner in _spine_instances(32, 25, max_t1=10, max_t2=7, min_k=1):
        restricted = restricted_matrices(spine, s_inner)
        for x, mat in restricted.items():
            assert mat == restricted_matrix_naive(subtree(t1, spine.node(x)), t2)


def test_type2_transition_matches_naive():
    for t1, t2, step, spine, s_inner in _spine_instances(33, 25, min_k=1):
        got = type2_transition(t1, step.forest, step.inner, s_inner, t2)
        assert got == similarity_matrix_naive(sync_slice(t1, step.forest), t2)


def test_step_counters():
    rng = random.Random(40)
    t1, t2 = random_forest(60, rng=rng), random_forest(20, rng=rng)
    stats = Counter()
    decompose_compute(t1, t2, 4, stats=stats)
    counts = plan_decomposition(t1, 4).counts()
    for kind in (TYPE1, TYPE2_FIRST, TYPE2_SECOND, TYPE2_BASE):
        assert stats[kind] == counts.get(kind, 0)


def test_default_delta():
    assert default_delta(0) == 1
    assert default_delta(100) == round(100 ** 0.4773)
