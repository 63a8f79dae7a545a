"""Brute-force reference implementations, written independently of the
library code paths they check."""

import itertools

import numpy as np


def shattered_brute(P, sigma, t):
    """Some level vector drawn from data values realizes all 2^|sigma| patterns."""
    P = np.asarray(P, dtype=float)
    cols = [sorted(set(P[:, i])) for i in sigma]
    for h in itertools.product(*cols):
        h = np.array(h)
        Q = P[:, list(sigma)]
        ok = True
        for pattern in itertools.product((0, 1), repeat=len(sigma)):
            pat = np.array(pattern, dtype=bool)
            hit = np.all(np.where(pat, Q >= h + t, Q <= h), axis=1)
            if not hit.any():
                ok = False
                break
        if ok:
            return True
    return False


def fat_dimension_brute(P, t):
    P = np.asarray(P, dtype=float)
    n = P.shape[1]
    best = 0
    for r in range(1, n + 1):
        if any(shattered_brute(P, s, t) for s in itertools.combinations(range(n), r)):
            best = r
        else:
            break
    return best


def in_cconv(Q, x):
    """Every closed octant at x meets Q."""
    D = Q - x
    for signs in itertools.product((-1, 1), repeat=Q.shape[1]):
        if not np.any(np.all(D * np.array(signs) >= 0, axis=1)):
            return False
    return True


def cell_content_brute(P):
    """Count integer cells a + [0,1]^sigma (sigma may be empty) with every
    vertex in the coordinate convex hull of the projection."""
    P = np.asarray(P, dtype=float)
    n = P.shape[1]
    total = 1
    for r in range(1, n + 1):
        for sigma in itertools.combinations(range(n), r):
            Q = P[:, list(sigma)]
            axes = [range(int(np.floor(Q[:, j].min())), int(np.ceil(Q[:, j].max()))) for j in range(r)]
            for a in itertools.product(*axes):
                a = np.array(a, dtype=float)
                if all(in_cconv(Q, a + np.array(e)) for e in itertools.product((0, 1), repeat=r)):
                    total += 1
    return total


def max_packing_brute(D, t):
    """Largest index set with pairwise D >= t, by subset enumeration."""
    m = D.shape[0]
    for size in range(m, 0, -1):
        for S in itertools.combinations(range(m), size):
            if all(D[i, j] >= t for i, j in itertools.combinations(S, 2)):
                return size
    return 0
