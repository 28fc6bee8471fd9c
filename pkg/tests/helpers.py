"""Shared test utilities: synthetic score functions and ranking comparisons."""

import numpy as np

from ivfs import DataMatrix


def make_dominant_score(omega, weights):
    """Subset score depending only on which dominant features are present.

    s(F) = sum of the weights of F's dominant members, so supersets of a
    dominant intersection never score lower (the monotonicity premise of the
    ensemble optimality guarantee).
    """
    omega_set = frozenset(int(f) for f in omega)
    weight_of = dict(zip(sorted(omega_set), weights))

    def score(X, rows, features, labels=None):
        return sum(weight_of[f] for f in features if f in omega_set)

    return score


def make_monotone_set_score(omega, rng):
    """Random monotone set function of the dominant intersection.

    Assigns a random base value to every subset of omega and closes upward
    under max, which makes h(S) = max over base values of subsets of S
    monotone with respect to inclusion.
    """
    omega_sorted = tuple(sorted(int(f) for f in omega))
    base = {}
    for mask in range(1 << len(omega_sorted)):
        members = frozenset(
            omega_sorted[i] for i in range(len(omega_sorted)) if mask >> i & 1
        )
        base[members] = float(rng.uniform(0.0, 1.0))
    value = {}
    for members, v in base.items():
        value[members] = max(
            base[sub] for sub in base if sub <= members
        )

    def score(X, rows, features, labels=None):
        present = frozenset(f for f in features if f in set(omega_sorted))
        return value[present]

    return score


def kendall_distance_to_oracle(order, oracle_scores, tol=1e-9):
    """Discordant pairs between a strict ranking and a weak oracle ranking.

    Pairs whose oracle values agree within ``tol`` are ties and contribute
    nothing; a strict oracle ordering contradicted by the ranking counts 1.
    """
    pos = {f: r for r, f in enumerate(order)}
    bad = 0
    d = len(oracle_scores)
    for a in range(d):
        for b in range(a + 1, d):
            gap = oracle_scores[a] - oracle_scores[b]
            if abs(gap) <= tol:
                continue
            if gap * (pos[b] - pos[a]) < 0:
                bad += 1
    return bad


def theorem_instance(seed, d=10, omega_size=3):
    """One seeded dominant-set instance: (omega, score function).

    Weights are spaced so the lowest dominant feature sits just above the
    rest: small subset counts misorder it, large ones do not.
    """
    rng = np.random.default_rng(1000 + seed)
    omega = sorted(rng.choice(d, size=omega_size, replace=False).tolist())
    w_low = float(rng.uniform(0.03, 0.05))
    w_mid = w_low + float(rng.uniform(0.015, 0.03))
    w_high = float(rng.uniform(0.5, 0.7))
    weights = [w_low, w_mid, w_high][:omega_size]
    return omega, make_dominant_score(omega, weights)


def small_matrix(n=12, d=10, seed=0):
    rng = np.random.default_rng(seed)
    return DataMatrix(rng.normal(size=(n, d)))
