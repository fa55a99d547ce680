"""Deterministic training-metrics CSV.

Columns: step, critic_loss, actor_loss, q_mean, bc_mse, eval_return.
Floats are written with repr (shortest round-trip form), missing values as
empty fields, so identical runs produce byte-identical files.
"""

import csv

COLUMNS = ("step", "critic_loss", "actor_loss", "q_mean", "bc_mse", "eval_return")


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


class MetricsWriter:
    """Appends one CSV row per training step to an open file."""

    def __init__(self, path):
        self.path = path
        self._f = open(path, "w", newline="")
        self._f.write(",".join(COLUMNS) + "\n")

    def append(self, metrics):
        row = [_fmt(metrics.get(c)) for c in COLUMNS]
        self._f.write(",".join(row) + "\n")

    def close(self):
        if self._f is not None:
            self._f.close()
            self._f = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_metrics(path):
    """Parse a metrics CSV back into a list of dicts (None for blanks)."""
    rows = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames or ()) != COLUMNS:
            raise ValueError(f"{path}: unexpected metrics columns {reader.fieldnames}")
        for raw in reader:
            row = {}
            for key, val in raw.items():
                if val == "":
                    row[key] = None
                elif key == "step":
                    row[key] = int(val)
                else:
                    row[key] = float(val)
            rows.append(row)
    return rows
