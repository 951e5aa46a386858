"""One test per acceptance criterion; each prints a single PASS/FAIL line."""

import math
import random
import time
from collections import Counter

import numpy as np
import pytest

from simted import cubic, subcubic
from simted.cli import ALGORITHMS
from simted.cubic import dp_similarity, ted_cubic
from simted.forest import Forest, all_trees, parse_forest, random_forest, sync_slice
from simted.maxplus import (
    KERNELS, bounded_product, mul1, mul2, mul3, naive_maxplus, neg_inf_fill,
    pad_rows, pad_square,
)
from simted.monotone import MonotoneMatrix, new_neg_inf
from simted.oracle import (
    brute_force_sim_labelings, similarity_matrix_naive, zhang_shasha_ed,
    zhang_shasha_sim_labelings,
)
from simted.persistent import PersistentMonotoneMatrix
from simted.subcubic import (
    Spine, decompose_compute, plan_decomposition, restricted_matrices, ted_subcubic,
)
from _checks import random_pair_forest, similarity_matrix_problems
from conftest import record_acceptance
from test_maxplus import potential_matrix, similarity_pair
from test_monotone import ListModel, _agree, _random_ops
from test_subcubic import _spine_instances, plan_instances


def report(name, ok, detail, gating=True):
    record_acceptance(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    if gating:
        assert ok, detail


def test_reference_vectors():
    start = time.monotonic()
    problems = []
    t1, t2 = parse_forest("a(b,c(d,e),f)"), parse_forest("g(b,d,e,f,h)")
    for name, algo in ALGORITHMS.items():
        ed = algo(t1, t2)
        if (ed, t1.n + t2.n - ed) != (3, 9):
            problems.append(f"{name} gave ed={ed}")
    w1, w2 = parse_forest("a(a(b,c,c))"), parse_forest("d(b,a(a),c,c)")
    cells = [(2, 8), (4, 12), (2, 12), (4, 8)]
    for matrix in (dp_similarity(w1, w2), decompose_compute(w1, w2, 1),
                   decompose_compute(w1, w2, 2)):
        values = [matrix.get(i, j) for i, j in cells]
        if values != [4, 5, 6, 4]:
            problems.append(f"window values {values}")
        if not values[0] + values[1] < values[2] + values[3]:
            problems.append("anti-Monge inequality does not hold")
    elapsed = time.monotonic() - start
    if elapsed >= 1.0:
        problems.append(f"took {elapsed:.2f}s")
    report("reference vectors", not problems,
           "; ".join(problems) or f"ed=3 sim=9 for all algorithms, windows 4 5 6 4, "
           f"9 < 10, {elapsed:.3f}s")


def test_distance_oracle_equivalence():
    rng = random.Random(2024)
    start = time.monotonic()
    pairs, mismatches = 0, []
    for alphabet in (1, 2, 5):
        for _ in range(170):
            if rng.random() < 0.5:
                f1 = random_forest(rng.randint(0, 30), alphabet, rng=rng)
                f2 = random_forest(rng.randint(0, 30), alphabet, rng=rng)
            else:
                f1 = random_pair_forest(rng, 4, 30, alphabet)
                f2 = random_pair_forest(rng, 4, 30, alphabet)
            expected = zhang_shasha_ed(f1, f2)
            got = {"cubic": ted_cubic(f1, f2)}
            for delta in (1, 2, 4, 8, None):
                got[f"subcubic/{delta or 'default'}"] = ted_subcubic(f1, f2, delta)
            bad = {k: v for k, v in got.items() if v != expected}
            if bad:
                mismatches.append((f1, f2, expected, bad))
            pairs += 1
    elapsed = time.monotonic() - start
    ok = not mismatches and pairs >= 500 and elapsed < 300
    report("distance oracle equivalence", ok,
           f"{pairs} pairs, {len(mismatches)} mismatches, {elapsed:.1f}s"
           + (f", first {mismatches[0]}" if mismatches else ""))


def test_matrix_oracle_equivalence():
    rng = random.Random(77)
    pairs, bad = 0, []
    while pairs < 110:
        f = random_pair_forest(rng, 3, 12)
        t2 = random_pair_forest(rng, 3, 12)
        naive = similarity_matrix_naive(f, t2)
        if dp_similarity(f, t2) != naive:
            bad.append(("cubic", f, t2))
        delta = rng.choice([1, 2, 3, 4])
        if decompose_compute(f, t2, delta) != naive:
            bad.append((f"decompose delta={delta}", f, t2))
        pairs += 1
    report("matrix oracle equivalence", not bad,
           f"{pairs} pairs cell-for-cell, {len(bad)} mismatches"
           + (f", first {bad[0]}" if bad else ""))


def _labelled(shape, index, n):
    labels = [(index >> (n - 1 - k)) & 1 for k in range(n)]
    return Forest([-1] + labels, shape.parent, shape.children)


def test_brute_force_grounding():
    shapes = {n: [Forest.from_nested([s]) for s in all_trees(n)] for n in range(1, 10)}
    rng = random.Random(5)
    shape_pairs = labelled = algorithm_checks = 0
    bad = []
    for total in range(2, 11):
        for n1 in range(1, total):
            n2 = total - n1
            for a in shapes[n1]:
                for b in shapes[n2]:
                    truth = brute_force_sim_labelings(a, b)
                    zs = zhang_shasha_sim_labelings(a, b)
                    if not np.array_equal(truth, zs):
                        bad.append(("zhang-shasha", a, b))
                    samples = [(0, 0), (rng.randrange(1 << n1), rng.randrange(1 << n2)),
                               (rng.randrange(1 << n1), rng.randrange(1 << n2))]
                    for k, (i, j) in enumerate(samples):
                        f1, f2 = _labelled(a, i, n1), _labelled(b, j, n2)
                        want = total - int(truth[i, j])
                        if ted_cubic(f1, f2) != want:
                            bad.append(("cubic", f1, f2))
                        if k == 1 and ted_subcubic(f1, f2, 1 + shape_pairs % 3) != want:
                            bad.append(("subcubic", f1, f2))
                        algorithm_checks += 1
                    shape_pairs += 1
                    labelled += truth.size
    report("brute-force grounding", not bad,
           f"{shape_pairs} shape pairs, {labelled} labelled pairs exhaustive, "
           f"{algorithm_checks} algorithm runs, {len(bad)} mismatches"
           + (f", first {bad[0]}" if bad else ""))


def test_maxplus_kernels():
    rng = random.Random(48)
    counts = Counter()
    bad = []

    def instance():
        if rng.random() < 0.5:
            a, na, b, nb, n2 = similarity_pair(rng)
            return a, 2 * min(na, n2), b, 2 * min(nb, n2)
        n = rng.randint(1, 48)
        ma, mb = rng.randint(0, 12), rng.randint(0, 12)
        return potential_matrix(rng, n, ma), ma, potential_matrix(rng, n, mb), mb

    for cutoff_kind in ("4", "8", "16", "n"):
        for _ in range(30):
            a, ma, b, mb = instance()
            n = a.n_rows
            want = naive_maxplus(a, b)
            if not np.array_equal(mul1(a, b, ma, mb).array, want):
                bad.append("mul1")
            counts["mul1"] += 1
            cutoff = n if cutoff_kind == "n" else int(cutoff_kind)
            kernel = KERNELS[rng.choice(sorted(KERNELS))]
            if not np.array_equal(bounded_product(a, b, ma, kernel, cutoff).array, want):
                bad.append(f"bounded_product cutoff={cutoff}")
            counts["bounded_product"] += 1
            size = 1 << max(0, (n - 1).bit_length())
            af, bf = pad_square(neg_inf_fill(a), size), pad_rows(neg_inf_fill(b), size)
            if not np.array_equal(mul3(af, bf, cutoff, kernel, ma), naive_maxplus(af, bf)):
                bad.append(f"mul3 cutoff={cutoff}")
            counts["mul3"] += 1
            if size >= 2:
                h = size // 2
                e, hh = af[:h, h:], bf[h:]
                prev = naive_maxplus(af[:h, :h], bf[:h])
                got = mul2(e, hh, prev, ma).array
                if not np.array_equal(got, np.maximum(prev, naive_maxplus(e, hh))):
                    bad.append("mul2")
                counts["mul2"] += 1
    while counts["mul2"] < 120:
        a, ma, b, mb = instance()
        n = a.n_rows
        size = 1 << max(1, (n - 1).bit_length())
        af, bf = pad_square(neg_inf_fill(a), size), pad_rows(neg_inf_fill(b), size)
        h = size // 2
        prev = naive_maxplus(af[:h, :h], bf[:h])
        got = mul2(af[:h, h:], bf[h:], prev, ma).array
        if not np.array_equal(got, np.maximum(prev, naive_maxplus(af[:h, h:], bf[h:]))):
            bad.append("mul2")
        counts["mul2"] += 1
    ok = not bad and min(counts.values()) >= 100
    report("max-plus kernels", ok,
           ", ".join(f"{k} {v}" for k, v in sorted(counts.items()))
           + f" instances, {len(bad)} mismatches" + (f" ({bad[:3]})" if bad else ""))


def test_structural_invariants(monkeypatch):
    seen = []
    real_product = cubic.product
    real_merge = subcubic.merge_product
    real_type2 = subcubic.type2_transition

    def product(a, size_a, b, size_b, t2, stats=None):
        out = real_product(a, size_a, b, size_b, t2, stats)
        seen.append((out, size_a + size_b, cubic.Target.of(t2).n))
        return out

    def merge_product(a, size_a, b, size_b, target, kernel=None, stats=None):
        out = real_merge(a, size_a, b, size_b, target, kernel or KERNELS["naive"], stats)
        seen.append((out, size_a + size_b, target.n))
        return out

    def type2_transition(t1, outer, inner, s_inner, t2, *args, **kwargs):
        out = real_type2(t1, outer, inner, s_inner, t2, *args, **kwargs)
        seen.append((out, t1.sync_size(outer), cubic.Target.of(t2).n))
        return out

    monkeypatch.setattr(cubic, "product", product)
    monkeypatch.setattr(subcubic, "product", product)
    monkeypatch.setattr(subcubic, "merge_product", merge_product)
    monkeypatch.setattr(subcubic, "type2_transition", type2_transition)

    rng = random.Random(90)
    problems = []
    for _ in range(120):
        f, t2 = random_pair_forest(rng, 3, 20), random_pair_forest(rng, 3, 14)
        for u in range(1, f.n + 1):
            s = cubic.subtree_similarity(f, u, t2)
            seen.append((s, f.size[u], t2.n))
        seen.append((dp_similarity(f, t2), f.n, t2.n))
        seen.append((decompose_compute(f, t2, rng.choice([1, 2, 4])), f.n, t2.n))
    for s, size, n2 in seen:
        problems.extend(similarity_matrix_problems(s, size, n2))

    sequences = 0
    for backend in ("dense", "persistent"):
        for _ in range(300):
            n, m = rng.randint(1, 7), rng.randint(1, 7)
            impl = new_neg_inf(n, m) if backend == "dense" \
                else PersistentMonotoneMatrix.neg_inf(n, m)
            model = ListModel(n, m)
            history = [(model, impl)]
            for i, j, x in _random_ops(rng, n, m, rng.randint(0, 12)):
                model, impl = model.rangemax(i, j, x), impl.rangemax(i, j, x)
                history.append((model, impl))
            try:
                for old in history:
                    _agree(*old, rng)
            except AssertionError:
                problems.append(f"{backend} replay diverged")
            sequences += 1
    ok = not problems and sequences >= 500
    report("structural invariants", ok,
           f"{len(seen)} matrices checked, {sequences} replay sequences, "
           f"{len(problems)} violations" + (f" ({problems[:3]})" if problems else ""))


def test_counter_bounds():
    problems = []
    instances = plan_instances()
    worst = 0.0
    for t1 in instances:
        for delta in (4, 16, 64):
            count = plan_decomposition(t1, delta).transitions
            bound = 4 * t1.n / delta + 4
            worst = max(worst, count / bound)
            if count > bound:
                problems.append(f"n={t1.n} delta={delta}: {count} > {bound:.1f}")

    rng = random.Random(61)
    for _ in range(60):
        f, t2 = random_pair_forest(rng, 4, 30), random_pair_forest(rng, 3, 15)
        stats = Counter()
        dp_similarity(f, t2, stats)
        if stats["pair_count"] > f.n ** 2:
            problems.append(f"pair count {stats['pair_count']} > {f.n ** 2}")

    middle = 0
    for t1, t2, step, spine, s_inner in _spine_instances(62, 55):
        fast = restricted_matrices(spine, s_inner, "fast")
        ref = restricted_matrices(Spine(t1, step.forest, step.inner, spine.target),
                                  s_inner, "reference")
        if any(fast[x] != ref[x] for x in fast):
            problems.append("middle case fast differs from reference")
        middle += 1
    ok = not problems and len(instances) >= 50 and middle >= 50
    report("counter bounds", ok,
           f"{len(instances)} plan instances x 3 deltas (worst count/bound {worst:.2f}), "
           f"60 pair-count checks, {middle} middle-case instances"
           + (f"; {problems[:3]}" if problems else ""))


def test_cubic_scaling():
    rng = random.Random(400)
    sizes, times = [100, 200, 400], []
    for n in sizes:
        f1, f2 = random_forest(n, 2, rng=rng), random_forest(n, 2, rng=rng)
        start = time.monotonic()
        ted_cubic(f1, f2)
        times.append(time.monotonic() - start)
    slope = np.polyfit(np.log(sizes), np.log(times), 1)[0]
    report("cubic scaling (informational)", slope <= 3.5,
           f"times {', '.join(f'{t:.2f}s' for t in times)} at n={sizes}, "
           f"fitted exponent {slope:.2f}", gating=False)
