"""Shared invariant checks for similarity matrices."""

import numpy as np

from simted.monotone import NEG_CUT


def similarity_matrix_problems(s, forest_size, target_size):
    """List every violated invariant of a similarity matrix (empty when fine)."""
    a = s.array if hasattr(s, "array") else np.asarray(s)
    size = 2 * target_size + 1
    problems = []
    if a.shape != (size, size):
        return [f"shape {a.shape} != {(size, size)}"]
    finite = a > NEG_CUT
    upper = np.triu(np.ones_like(finite, dtype=bool))
    if (finite != upper).any():
        problems.append("finite region is not exactly the upper triangle")
    if (np.diagonal(a) != 0).any():
        problems.append("diagonal is not zero")
    if (np.diff(a, axis=1) < 0).any():
        problems.append("rows decrease left to right")
    if (np.diff(a, axis=0) > 0).any():
        problems.append("columns increase top to bottom")
    both_row = finite[:, 1:] & finite[:, :-1]
    both_col = finite[1:, :] & finite[:-1, :]
    if (np.abs(np.diff(a, axis=1))[both_row] > 2).any() or \
            (np.abs(np.diff(a, axis=0))[both_col] > 2).any():
        problems.append("adjacent finite entries differ by more than 2")
    bound = 2 * min(forest_size, target_size)
    if (a[finite] > bound).any() or (a[finite] < 0).any():
        problems.append(f"entries outside [0, {bound}]")
    return problems


def random_pair_forest(rng, max_trees, max_size, alphabet=2):
    """A forest of up to ``max_trees`` random trees with at most ``max_size`` nodes."""
    from simted.forest import concat, random_forest

    total = rng.randint(0, max_size)
    parts = []
    while total > 0 and len(parts) < max_trees:
        size = rng.randint(1, total) if len(parts) < max_trees - 1 else total
        parts.append(random_forest(size, alphabet, rng=rng))
        total -= size
    return concat(*parts)
