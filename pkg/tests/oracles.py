"""Slow, obviously-correct reference implementations used only by tests.

Nothing here imports from cmfs internals, so agreement with the package
is real evidence rather than a tautology.
"""
import math


def pearson_two_pass(x, y):
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    if sxx == 0 or syy == 0:
        return None
    return sxy / math.sqrt(sxx * syy)


def p_values_brute(alpha):
    n = len(alpha)
    return [sum(1 for a in alpha if a > now) / n for now in alpha]


def sq_distances_double_loop(rows):
    n = len(rows)
    out = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            out[i][j] = sum((a - b) ** 2 for a, b in zip(rows[i], rows[j]))
    return out


def knn_brute(train_rows, train_labels, query, k):
    dist = sorted((sum((a - b) ** 2 for a, b in zip(row, query)), i) for i, row in enumerate(train_rows))
    nearest = [train_labels[i] for _, i in dist[:k]]
    counts = {}
    for lbl in nearest:
        counts[lbl] = counts.get(lbl, 0) + 1
    top = max(counts.values())
    tied = {lbl for lbl, c in counts.items() if c == top}
    for lbl in nearest:
        if lbl in tied:
            return lbl
