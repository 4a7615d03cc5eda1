"""
Command-line benchmark
======================

``htopt run`` solves one problem file; ``htopt compare`` runs several methods
and prints a CSV table. Traces are CSV files with ``#`` metadata lines.
"""

import subprocess
import sys
import tempfile
from pathlib import Path

from htopt.problemfile import library_path
from htopt.trace import read_trace

cli = [sys.executable, "-m", "htopt"]
workdir = Path(tempfile.mkdtemp())

# %%
# One run with a trace file.
trace_path = workdir / "qp.csv"
proc = subprocess.run(cli + ["run", "--problem", str(library_path("qp_equality")),
                             "--algorithm", "ht1", "--beta", "0.5", "--gamma", "0.08",
                             "--trace", str(trace_path)], capture_output=True, text=True)
print("exit", proc.returncode, "|", proc.stdout.strip())
print("".join(trace_path.read_text().splitlines(keepends=True)[:12]))

# %%
# Gains outside the admissible range are rejected before any iteration.
proc = subprocess.run(cli + ["run", "--problem", str(library_path("qp_equality")),
                             "--gamma", "0.09"], capture_output=True, text=True)
print("exit", proc.returncode, "|", proc.stderr.strip())

# %%
# Ill-conditioned QP (reduced Hessian eigenvalues 1 and 1e4). Exit code 2
# means at least one method used its whole iteration budget.
proc = subprocess.run(cli + ["compare", "--problem", str(library_path("qp_illcond")),
                             "--algorithms", "ht1,gd,nesterov", "--trace", str(workdir / "ill.csv")],
                      capture_output=True, text=True)
print("exit", proc.returncode)
print(proc.stdout)
for method in ("ht1", "gd", "nesterov"):
    trace = read_trace(workdir / f"ill.{method}.csv")
    print(method, "final l", trace.final.l, "rows", len(trace))
