"""Run-distribution statistics: performance profiles and pairwise
probability of improvement."""

import math

import numpy as np


def performance_profile(scores_by_run, taus):
    """For each threshold tau, the fraction of runs scoring strictly above it.

    taus must be sorted ascending; the resulting curve is nonincreasing with
    values in [0, 1].
    """
    scores = np.asarray(list(scores_by_run), dtype=np.float64)
    if scores.size == 0:
        raise ValueError("scores_by_run must be non-empty")
    taus = list(taus)
    if any(b < a for a, b in zip(taus, taus[1:])):
        raise ValueError("taus must be sorted ascending")
    return [float(np.mean(scores > tau)) for tau in taus]


def probability_of_improvement(x, y):
    """P(random run of x beats random run of y), ties counted as 1/2.

    Computed from integer pair counts, so probability_of_improvement(x, x)
    is exactly 0.5.
    """
    xs = list(x)
    ys = list(y)
    if not xs or not ys:
        raise ValueError("both score lists must be non-empty")
    wins = 0
    ties = 0
    for xi in xs:
        for yj in ys:
            if xi > yj:
                wins += 1
            elif xi == yj:
                ties += 1
    return (wins + 0.5 * ties) / (len(xs) * len(ys))


def probability_of_improvement_tables(table, algorithm_x, algorithm_y):
    """Per-dataset probabilities averaged across the datasets both
    algorithms were run on."""
    common = sorted(
        set(table.datasets(algorithm_x)) & set(table.datasets(algorithm_y))
    )
    if not common:
        raise ValueError(
            f"no shared datasets between {algorithm_x!r} and {algorithm_y!r}"
        )
    per_dataset = [
        probability_of_improvement(
            table.scores(algorithm_x, dataset), table.scores(algorithm_y, dataset)
        )
        for dataset in common
    ]
    return math.fsum(per_dataset) / len(per_dataset)
