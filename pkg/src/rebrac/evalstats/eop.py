"""Expected best score under a deployment budget.

With N swept configurations and a budget of k policies deployed, the deployed
set is a uniformly random k-subset (without replacement) and the quantity of
interest is the expected maximum score in it.  Sorting ascending, the max of
the subset is the i-th smallest score with probability C(i-1, k-1)/C(N, k),
which gives a closed form; eop_oracle enumerates every subset to pin the
semantics exactly.
"""

import itertools
import math
from dataclasses import dataclass

ORACLE_MAX_N = 12


def _checked(scores, k):
    s = [float(v) for v in scores]
    n = len(s)
    if n == 0:
        raise ValueError("scores must be non-empty")
    if not 1 <= int(k) <= n:
        raise ValueError(f"k={k} out of range 1..{n}")
    for v in s:
        if not math.isfinite(v):
            raise ValueError("scores must be finite")
    return sorted(s), int(k)


def _subset_max_moment(sorted_scores, k, power):
    n = len(sorted_scores)
    total = math.fsum(
        (sorted_scores[i - 1] ** power) * math.comb(i - 1, k - 1)
        for i in range(k, n + 1)
    )
    return total / math.comb(n, k)


def eop(scores, k):
    """Expected max score over a uniform k-subset of `scores`."""
    s, k = _checked(scores, k)
    return _subset_max_moment(s, k, 1)


def eop_std(scores, k):
    """Std of the k-subset max: sqrt(E[(max - E[max])^2]).

    The variance is accumulated in central form rather than as
    E[max^2] - E[max]^2; the two moments nearly cancel once the subset
    maximum concentrates (large k), and the lost digits would exceed the
    1e-12 agreement the enumeration oracle pins.
    """
    s, k = _checked(scores, k)
    n = len(s)
    mean = _subset_max_moment(s, k, 1)
    var = math.fsum(
        ((s[i - 1] - mean) ** 2) * math.comb(i - 1, k - 1)
        for i in range(k, n + 1)
    ) / math.comb(n, k)
    return math.sqrt(max(var, 0.0))


def eop_oracle(scores, k):
    """Exhaustive enumeration of all C(N, k) subsets; N <= 12 only."""
    s, k = _checked(scores, k)
    n = len(s)
    if n > ORACLE_MAX_N:
        raise ValueError(f"oracle enumeration limited to N <= {ORACLE_MAX_N}, got {n}")
    maxima = [max(c) for c in itertools.combinations(s, k)]
    return math.fsum(maxima) / len(maxima)


def eop_oracle_std(scores, k):
    """Enumeration counterpart of eop_std (same central-form variance)."""
    s, k = _checked(scores, k)
    n = len(s)
    if n > ORACLE_MAX_N:
        raise ValueError(f"oracle enumeration limited to N <= {ORACLE_MAX_N}, got {n}")
    maxima = [max(c) for c in itertools.combinations(s, k)]
    mean = math.fsum(maxima) / len(maxima)
    var = math.fsum((m - mean) ** 2 for m in maxima) / len(maxima)
    return math.sqrt(max(var, 0.0))


@dataclass(frozen=True)
class EopCurve:
    """Expected best score and its std per deployment budget k = 1..max(ks)."""

    ks: tuple
    values: tuple
    stds: tuple

    def to_csv(self):
        lines = ["k,eop,eop_std"]
        for k, v, s in zip(self.ks, self.values, self.stds):
            lines.append(f"{k},{v:.10g},{s:.10g}")
        return "\n".join(lines) + "\n"


def eop_curve(scores, ks=None) -> EopCurve:
    """Curve over budgets; requesting k > N is an error, not a zero."""
    n = len(list(scores))
    if ks is None:
        ks = range(1, n + 1)
    ks = [int(k) for k in ks]
    for k in ks:
        if k > n:
            raise ValueError(f"not computable: k > N (k={k}, N={n})")
    values = tuple(eop(scores, k) for k in ks)
    stds = tuple(eop_std(scores, k) for k in ks)
    return EopCurve(ks=tuple(ks), values=values, stds=stds)
