"""Score tables keyed by (algorithm, dataset, run), with CSV interchange,
and the percentage-delta formatter used in ablation reports."""

import csv
import io
import math


class ScoreTable:
    """Final normalized scores, one per (algorithm, dataset, run)."""

    def __init__(self):
        self._entries = {}

    def add(self, algorithm, dataset, run, score):
        key = (str(algorithm), str(dataset), int(run))
        if key in self._entries:
            raise ValueError(f"duplicate entry {key}")
        score = float(score)
        if not math.isfinite(score):
            raise ValueError(f"score for {key} must be finite, got {score}")
        self._entries[key] = score

    def __len__(self):
        return len(self._entries)

    def items(self):
        return sorted(self._entries.items())

    def score(self, algorithm, dataset, run):
        return self._entries[(algorithm, dataset, run)]

    def scores(self, algorithm, dataset=None):
        """Scores for one algorithm, ordered by (dataset, run)."""
        return [
            v
            for (a, d, _r), v in self.items()
            if a == algorithm and (dataset is None or d == dataset)
        ]

    def algorithms(self):
        return sorted({a for a, _d, _r in self._entries})

    def datasets(self, algorithm=None):
        return sorted(
            {d for a, d, _r in self._entries if algorithm is None or a == algorithm}
        )

    def mean(self, algorithm, dataset=None):
        vals = self.scores(algorithm, dataset)
        if not vals:
            raise KeyError(f"no scores for {algorithm!r} / {dataset!r}")
        return math.fsum(vals) / len(vals)

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["algorithm", "dataset", "run", "score"])
        for (a, d, r), v in self.items():
            writer.writerow([a, d, r, f"{v:.10g}"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        table = cls()
        reader = csv.DictReader(io.StringIO(text))
        required = {"algorithm", "dataset", "run", "score"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise ValueError(f"score CSV must have columns {sorted(required)}")
        for row in reader:
            table.add(row["algorithm"], row["dataset"], int(row["run"]), float(row["score"]))
        return table


def percent_change(value, base):
    """Relative change of `value` against `base`, in percent."""
    if base == 0:
        raise ValueError("base score must be nonzero")
    return 100.0 * (float(value) - float(base)) / float(base)


def format_percent_change(value, base):
    """Table-style delta like "(-26.5%)": one decimal, truncated toward zero.

    Truncation (not rounding) matches the reference presentation: a change of
    -26.55% prints as (-26.5%).
    """
    pct = percent_change(value, base)
    truncated = math.trunc(pct * 10) / 10
    return f"({truncated:+.1f}%)"
