"""Per-evaluation run log and its CSV serialization.

File layout::

    # bandit-bo-trace v1 {"fingerprint": ..., "benchmark": ..., ...}
    eval_index,round,slot,category,x_0,...,x_{D-1},value,best_so_far,phase
    ...

Reals are written with 17 significant digits so a read-back is bitwise
identical. Categories with fewer than D dimensions leave trailing
coordinate cells empty.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidInputError

SCHEMA_TAG = "bandit-bo-trace v1"
PHASES = ("init", "optimize")


def _fmt(v):
    return format(float(v), ".17g")


@dataclass(frozen=True)
class TraceRow:
    eval_index: int
    round: int
    slot: int
    category: int
    point_raw: tuple
    value: float
    best_so_far: float
    phase: str

    @classmethod
    def make(cls, eval_index, round, slot, category, point, value, phase, best_so_far=None):
        return cls(int(eval_index), int(round), int(slot), int(category),
                   tuple(float(v) for v in point), float(value),
                   float(value if best_so_far is None else best_so_far), phase)


@dataclass
class RunTrace:
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def append(self, row):
        """Add a row, overwriting its ``best_so_far`` with the running max."""
        if self.rows:
            if row.eval_index <= self.rows[-1].eval_index:
                raise InvalidInputError("eval_index must be strictly increasing")
            best = max(self.rows[-1].best_so_far, row.value)
        else:
            best = row.value
        self.rows.append(TraceRow(row.eval_index, row.round, row.slot, row.category,
                                  row.point_raw, row.value, best, row.phase))

    def __len__(self):
        return len(self.rows)

    @property
    def values(self):
        return np.array([r.value for r in self.rows])

    @property
    def best_so_far(self):
        return np.array([r.best_so_far for r in self.rows])

    @property
    def categories(self):
        return np.array([r.category for r in self.rows], dtype=int)

    @property
    def phases(self):
        return np.array([r.phase for r in self.rows])

    def optimize_rows(self):
        return [r for r in self.rows if r.phase == "optimize"]

    @property
    def fingerprint(self):
        return self.metadata.get("fingerprint")

    def to_csv_text(self):
        width = max((len(r.point_raw) for r in self.rows), default=0)
        buf = io.StringIO()
        buf.write(f"# {SCHEMA_TAG} {json.dumps(self.metadata, sort_keys=True)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eval_index", "round", "slot", "category"]
                   + [f"x_{i}" for i in range(width)]
                   + ["value", "best_so_far", "phase"])
        for r in self.rows:
            xs = [_fmt(v) for v in r.point_raw] + [""] * (width - len(r.point_raw))
            w.writerow([r.eval_index, r.round, r.slot, r.category, *xs,
                        _fmt(r.value), _fmt(r.best_so_far), r.phase])
        return buf.getvalue()

    def write_csv(self, path):
        """Write atomically: a temp file in the target directory, then rename."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(self.to_csv_text())
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return path

    @classmethod
    def from_csv_text(cls, text):
        lines = text.splitlines()
        if not lines or not lines[0].startswith(f"# {SCHEMA_TAG} "):
            raise InvalidInputError("not a bandit-bo trace (missing schema header)")
        metadata = json.loads(lines[0][len(f"# {SCHEMA_TAG} "):])
        reader = csv.reader(lines[1:])
        header = next(reader)
        xcols = [i for i, h in enumerate(header) if h.startswith("x_")]
        col = {h: i for i, h in enumerate(header)}
        trace = cls([], metadata)
        for rec in reader:
            point = tuple(float(rec[i]) for i in xcols if rec[i] != "")
            trace.rows.append(TraceRow(
                int(rec[col["eval_index"]]), int(rec[col["round"]]), int(rec[col["slot"]]),
                int(rec[col["category"]]), point, float(rec[col["value"]]),
                float(rec[col["best_so_far"]]), rec[col["phase"]]))
        return trace

    @classmethod
    def read_csv(cls, path):
        return cls.from_csv_text(Path(path).read_text())

    def validate(self):
        """Check the running-max and index invariants."""
        best = -math.inf
        prev = -1
        for r in self.rows:
            best = max(best, r.value)
            if r.best_so_far != best:
                raise InvalidInputError(f"best_so_far wrong at eval {r.eval_index}")
            if r.eval_index <= prev:
                raise InvalidInputError("eval_index not strictly increasing")
            if r.phase not in PHASES:
                raise InvalidInputError(f"unknown phase {r.phase!r}")
            prev = r.eval_index
        return True
