"""Per-iteration solver records and their CSV form."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import NamedTuple

__all__ = ["TraceRow", "IterationTrace", "TRACE_COLUMNS", "emit_trace", "format_trace", "read_trace"]

TRACE_COLUMNS = ("k", "l", "full_loss", "eq_residual_inf", "ineq_violation_inf", "grad_norm", "N_k")


class TraceRow(NamedTuple):
    k: int
    l: float
    full_loss: float
    eq_residual_inf: float
    ineq_violation_inf: float
    grad_norm: float
    N_k: float


@dataclass
class IterationTrace:
    """Rows in iteration order plus run metadata.

    ``status`` is ``"converged"`` when the stop rule fired, ``"max_iters"``
    on budget exhaustion and ``"diverged"`` when a non-finite value aborted
    the run.
    """

    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    status: str = "running"
    message: str = ""
    wall_time: float = 0.0

    def append(self, row: TraceRow):
        if self.rows and row.k <= self.rows[-1].k:
            raise ValueError("trace rows must have strictly increasing k")
        self.rows.append(row)

    def __len__(self):
        return len(self.rows)

    @property
    def iterations(self):
        return self.rows[-1].k if self.rows else 0

    def column(self, name):
        return [getattr(r, name) for r in self.rows]

    @property
    def final(self) -> TraceRow:
        return self.rows[-1]


def _fmt(value):
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".17g")


def format_trace(trace: IterationTrace) -> str:
    """CSV text: ``#`` metadata lines, header, one row per iteration."""
    buf = io.StringIO()
    for key, value in trace.metadata.items():
        buf.write(f"# {key}: {value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for row in trace.rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def emit_trace(trace: IterationTrace, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(format_trace(trace))


def read_trace(path) -> IterationTrace:
    metadata = {}
    lines = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition(":")
                metadata[key.strip()] = value.strip()
            else:
                lines.append(line)
    reader = csv.reader(lines)
    header = next(reader)
    if tuple(header) != TRACE_COLUMNS:
        raise ValueError(f"unexpected trace header {header}")
    trace = IterationTrace(metadata=metadata, status=metadata.get("status", "unknown"))
    for rec in reader:
        trace.append(TraceRow(int(rec[0]), *(float(v) for v in rec[1:])))
    return trace
