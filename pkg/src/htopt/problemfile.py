"""
JSON problem files.

A file holds one problem::

    {
      "name": "qp_equality",
      "n": 2,
      "objective": {"quadratic": {"Q": [[2, 0], [0, 2]], "c": [0, 0]}},
      "equality": {"A": [[1, 1]], "b": [2]},
      "inequality": {"expressions": ["x1 - 0.8"]},
      "partition": {"dependent": [2]},
      "region": {"kind": "box", "lower": [3], "upper": [10]},
      "weights": {"lambda_h": 1.0, "lambda_g": 1.0},
      "gains": {"beta": 0.5, "gamma": 0.08, "alpha": 0.1},
      "stop": {"max_iters": 100000, "grad_tol": 1e-10},
      "start": {"theta0": [0.0]},
      "smoothness": 2.0,
      "strong_convexity": 2.0,
      "algorithm": "ht1",
      "newton": {"max_iters": 50, "tolerance": 1e-12, "z0": [1.0]}
    }

Only ``n`` and ``objective`` are required. The objective may instead be
``{"expression": "x1^2 + x2^2"}`` and the equality block
``{"expressions": ["x1^2 - x2"]}``. Variable and partition indices are
1-based. Arrays are row-major nested lists. Expressions use the grammar of
:mod:`htopt.expression`. ``region`` is given either in the independent
variables or, for boxes and balls, in all ``n`` variables.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .completion import completion_for
from .expression import ParseFailure
from .loss import PenaltyWeights, ReducedLoss
from .problem import (
    AffineEquality,
    ConvexRegionSpec,
    ExpressionField,
    ExpressionFunction,
    ProblemSpec,
    QuadraticObjective,
    VariablePartition,
    validate,
)
from .tuner import StopRule

__all__ = ["ProblemFile", "ProblemFileError", "load_problem", "load_problem_file",
           "problem_to_dict", "parse_problem", "dump_problem", "library", "library_path"]

LIBRARY_DIR = Path(__file__).parent / "problems"


class ProblemFileError(ValueError):
    """Malformed or invalid problem file."""

    def __init__(self, message, line=None, column=None, diagnostics=()):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.column = column
        self.diagnostics = list(diagnostics)


@dataclass
class ProblemFile:
    spec: ProblemSpec
    region: Optional[ConvexRegionSpec] = None
    weights: PenaltyWeights = field(default_factory=PenaltyWeights)
    gains: dict = field(default_factory=dict)
    stop: StopRule = field(default_factory=StopRule)
    theta0: Optional[np.ndarray] = None
    algorithm: Optional[str] = None
    newton: dict = field(default_factory=dict)

    def reduced_loss(self, seed: int = 0, weights: Optional[PenaltyWeights] = None) -> ReducedLoss:
        """Fresh reduced loss (and completion) for one solver run."""
        completion = completion_for(self.spec, **_newton_options(self.newton))
        return ReducedLoss(self.spec, completion, weights or self.weights, seed=seed)

    def start(self):
        """Initial independent variables; zeros when the file sets none."""
        if self.theta0 is None:
            return np.zeros(self.spec.partition.n_free)
        return self.theta0.copy()


def _newton_options(opts):
    out = {k: opts[k] for k in ("max_iters", "tolerance") if k in opts}
    if "z0" in opts:
        out["z0"] = np.asarray(opts["z0"], dtype=float)
    return out


def _locate(raw, needle):
    """1-based line/column of ``needle`` in ``raw`` or ``(None, None)``."""
    if raw is None:
        return None, None
    idx = raw.find(needle)
    if idx < 0:
        return None, None
    line = raw.count("\n", 0, idx) + 1
    column = idx - (raw.rfind("\n", 0, idx) + 1) + 1
    return line, column


def _expression(text, where, raw):
    if not isinstance(text, str):
        raise ProblemFileError(f"{where} must be a string")
    try:
        return ExpressionFunction(text)
    except ParseFailure as exc:
        line, column = _locate(raw, json.dumps(text))
        if line is not None:
            column += exc.position  # opening quote occupies one column
        raise ProblemFileError(f"{where}: {exc.message} at position {exc.position} of {text!r}",
                               line, column) from None


def _require(doc, key, where="problem"):
    if key not in doc:
        raise ProblemFileError(f"missing required field '{key}' in {where}")
    return doc[key]


def _array(value, where, ndim):
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ProblemFileError(f"{where} must be a numeric array") from None
    if arr.ndim != ndim:
        raise ProblemFileError(f"{where} must be {ndim}-dimensional, got shape {arr.shape}")
    return arr


def _region(doc):
    kind = _require(doc, "kind", "region")
    try:
        if kind == "box":
            return ConvexRegionSpec.box(_require(doc, "lower", "region"), _require(doc, "upper", "region"))
        if kind == "ball":
            return ConvexRegionSpec.ball(_require(doc, "center", "region"), _require(doc, "radius", "region"))
        if kind == "halfspaces":
            return ConvexRegionSpec.halfspaces(_require(doc, "normals", "region"),
                                               _require(doc, "offsets", "region"))
    except ValueError as exc:
        if isinstance(exc, ProblemFileError):
            raise
        raise ProblemFileError(f"region: {exc}") from None
    raise ProblemFileError(f"region: unknown kind {kind!r}")


def parse_problem(doc: dict, raw: Optional[str] = None) -> ProblemFile:
    """Build a :class:`ProblemFile` from a decoded JSON document."""
    if not isinstance(doc, dict):
        raise ProblemFileError("problem file must hold a JSON object")
    n = _require(doc, "n")
    if not isinstance(n, int) or n < 1:
        raise ProblemFileError("'n' must be a positive integer")

    obj = _require(doc, "objective")
    if "quadratic" in obj:
        quad = obj["quadratic"]
        Q = _array(_require(quad, "Q", "objective.quadratic"), "objective.quadratic.Q", 2)
        if Q.shape != (n, n):
            raise ProblemFileError(f"objective.quadratic.Q has shape {Q.shape}, expected ({n}, {n})")
        c = _array(quad.get("c", [0.0] * n), "objective.quadratic.c", 1)
        if c.shape != (n,):
            raise ProblemFileError(f"objective.quadratic.c has {c.size} entries, expected {n}")
        objective = QuadraticObjective(Q, c, quad.get("constant", 0.0))
    elif "expression" in obj:
        objective = _expression(obj["expression"], "objective.expression", raw)
    else:
        raise ProblemFileError("objective needs a 'quadratic' or 'expression' entry")

    equality = None
    if doc.get("equality") is not None:
        eq = doc["equality"]
        if "A" in eq:
            A = _array(eq["A"], "equality.A", 2)
            b = _array(_require(eq, "b", "equality"), "equality.b", 1)
            equality = AffineEquality(A, b)
        elif "expressions" in eq:
            comps = [_expression(e, f"equality.expressions[{i}]", raw)
                     for i, e in enumerate(eq["expressions"])]
            equality = ExpressionField([c.tree for c in comps])
        else:
            raise ProblemFileError("equality needs 'A'/'b' or 'expressions'")

    inequality = None
    if doc.get("inequality") is not None:
        comps = [_expression(e, f"inequality.expressions[{i}]", raw)
                 for i, e in enumerate(_require(doc["inequality"], "expressions", "inequality"))]
        inequality = ExpressionField([c.tree for c in comps])

    for label, field_ in (("objective", objective), ("equality", equality), ("inequality", inequality)):
        top = getattr(field_, "n_min", 0)
        if isinstance(field_, ExpressionField):
            top = max((c.n_min for c in field_.components), default=0)
        if top > n:
            raise ProblemFileError(f"{label} references x{top} but n = {n}")

    partition = None
    if doc.get("partition") is not None:
        dep = _require(doc["partition"], "dependent", "partition")
        try:
            partition = VariablePartition(n, tuple(int(i) - 1 for i in dep))
        except ValueError as exc:
            raise ProblemFileError(f"partition: {exc}") from None

    try:
        spec = ProblemSpec(n, objective, equality, inequality, partition,
                           doc.get("smoothness"), doc.get("strong_convexity"),
                           name=str(doc.get("name", "")))
    except ValueError as exc:
        raise ProblemFileError(str(exc)) from None
    diagnostics = validate(spec)
    if diagnostics:
        raise ProblemFileError("; ".join(f"{d.code}: {d.message}" for d in diagnostics),
                               diagnostics=diagnostics)

    try:
        weights = PenaltyWeights(**doc.get("weights", {}))
        stop = StopRule(**doc.get("stop", {}))
    except (TypeError, ValueError) as exc:
        raise ProblemFileError(str(exc)) from None
    region = _region(doc["region"]) if doc.get("region") is not None else None

    theta0 = None
    start = doc.get("start") or {}
    if "theta0" in start:
        theta0 = _array(start["theta0"], "start.theta0", 1)
    elif "x0" in start:
        theta0 = spec.partition.split(_array(start["x0"], "start.x0", 1))[0]
    if theta0 is not None and theta0.shape != (spec.partition.n_free,):
        raise ProblemFileError(f"start point has {theta0.size} independent entries, "
                               f"expected {spec.partition.n_free}")

    return ProblemFile(spec, region, weights, dict(doc.get("gains", {})), stop, theta0,
                       doc.get("algorithm"), dict(doc.get("newton", {})))


def load_problem_file(path) -> ProblemFile:
    """Read and validate a problem file.

    Raises
    ------
    ProblemFileError
        With line and column for JSON syntax errors and expression errors,
        and with the validation diagnostics for ill-posed problems.
    """
    raw = Path(path).read_text()
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from None
    return parse_problem(doc, raw)


def load_problem(path) -> ProblemSpec:
    return load_problem_file(path).spec


def _field_dict(field_):
    if isinstance(field_, AffineEquality):
        return {"A": field_.A.tolist(), "b": field_.b.tolist()}
    return {"expressions": list(field_.texts)}


def problem_to_dict(pf: ProblemFile) -> dict:
    """Canonical JSON-ready document; ``parse_problem`` inverts it."""
    spec = pf.spec
    doc = {"name": spec.name, "n": spec.n}
    obj = spec.objective
    if isinstance(obj, QuadraticObjective):
        doc["objective"] = {"quadratic": {"Q": obj.Q.tolist(), "c": obj.c.tolist(),
                                          "constant": obj.constant}}
    elif isinstance(obj, ExpressionFunction):
        doc["objective"] = {"expression": obj.text}
    else:
        raise TypeError("only quadratic and expression objectives serialize")
    if spec.equality is not None:
        doc["equality"] = _field_dict(spec.equality)
    if spec.inequality is not None:
        doc["inequality"] = _field_dict(spec.inequality)
    doc["partition"] = {"dependent": [i + 1 for i in spec.partition.dependent]}
    if pf.region is not None:
        doc["region"] = pf.region.to_dict()
    doc["weights"] = {"lambda_h": pf.weights.lambda_h, "lambda_g": pf.weights.lambda_g}
    if pf.gains:
        doc["gains"] = dict(pf.gains)
    stop = {"max_iters": pf.stop.max_iters, "grad_tol": pf.stop.grad_tol}
    if pf.stop.loss_tol is not None:
        stop.update(loss_tol=pf.stop.loss_tol, loss_ref=pf.stop.loss_ref)
    doc["stop"] = stop
    if pf.theta0 is not None:
        doc["start"] = {"theta0": pf.theta0.tolist()}
    if spec.smoothness is not None:
        doc["smoothness"] = spec.smoothness
    if spec.strong_convexity is not None:
        doc["strong_convexity"] = spec.strong_convexity
    if pf.algorithm is not None:
        doc["algorithm"] = pf.algorithm
    if pf.newton:
        doc["newton"] = dict(pf.newton)
    return doc


def dump_problem(pf: ProblemFile, path) -> None:
    Path(path).write_text(json.dumps(problem_to_dict(pf), indent=2) + "\n")


def library_path(name: str) -> Path:
    """Path of a shipped problem file, e.g. ``library_path("qp_equality")``."""
    path = LIBRARY_DIR / (name if name.endswith(".json") else name + ".json")
    if not path.exists():
        raise FileNotFoundError(path)
    return path


def library() -> dict:
    """All shipped problems, keyed by file stem."""
    return {p.stem: load_problem_file(p) for p in sorted(LIBRARY_DIR.glob("*.json"))}
