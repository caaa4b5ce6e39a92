"""Brute-force references, kept independent of the code under test."""

from __future__ import annotations

from fractions import Fraction


def gini_exact(labels) -> Fraction:
    n = len(labels)
    pos = sum(labels)
    p = Fraction(pos, n)
    return 1 - p * p - (1 - p) * (1 - p)


def enumerate_splits(points, labels):
    """Every (feature, midpoint threshold) split with its exact Gini decrease."""
    n = len(points)
    parent = gini_exact(labels)
    out = []
    for f in range(len(points[0])):
        values = sorted({Fraction(p[f]) for p in points})
        for a, b in zip(values, values[1:]):
            t = (a + b) / 2
            left = [y for p, y in zip(points, labels) if Fraction(p[f]) <= t]
            right = [y for p, y in zip(points, labels) if Fraction(p[f]) > t]
            weighted = Fraction(len(left), n) * gini_exact(left) + Fraction(len(right), n) * gini_exact(right)
            out.append((parent - weighted, f, t))
    return out


def best_splits(points, labels):
    """All splits achieving the maximum decrease, in (feature, threshold) order."""
    splits = enumerate_splits(points, labels)
    if not splits:
        return []
    top = max(d for d, _, _ in splits)
    return sorted((f, t, d) for d, f, t in splits if d == top)
