import json

import numpy as np
import pytest

from htopt.problem import AffineEquality, QuadraticObjective
from htopt.problemfile import (ProblemFileError, dump_problem, library, library_path,
                               load_problem, load_problem_file, problem_to_dict)
from htopt.trace import IterationTrace, TraceRow, TRACE_COLUMNS, emit_trace, read_trace


def _write(tmp_path, doc, name="p.json"):
    path = tmp_path / name
    path.write_text(doc if isinstance(doc, str) else json.dumps(doc, indent=2))
    return path


def test_qp_equality_fixture():
    spec = load_problem(library_path("qp_equality"))
    assert spec.n == 2
    assert isinstance(spec.objective, QuadraticObjective)
    np.testing.assert_array_equal(spec.objective.Q, 2 * np.eye(2))
    assert isinstance(spec.equality, AffineEquality)
    np.testing.assert_array_equal(spec.equality.A, [[1, 1]])
    np.testing.assert_array_equal(spec.equality.b, [2])
    assert spec.partition.dependent == (1,)


def test_library_spans_all_algorithms():
    algorithms = {pf.algorithm for pf in library().values()}
    assert len(library()) >= 6
    assert {"ht1", "ht2", "ht3", "ht4"} <= algorithms


def test_overdetermined_file(tmp_path):
    path = _write(tmp_path, {"n": 1, "objective": {"expression": "x1^2"},
                             "equality": {"A": [[1], [2]], "b": [1, 2]}})
    with pytest.raises(ProblemFileError, match="overdetermined") as info:
        load_problem(path)
    assert info.value.diagnostics[0].code == "overdetermined"


def test_missing_objective(tmp_path):
    with pytest.raises(ProblemFileError, match="objective"):
        load_problem(_write(tmp_path, {"n": 2}))


def test_bad_expression_located(tmp_path):
    text = '{\n  "n": 2,\n  "objective": {"expression": "x1 + (x2"}\n}\n'
    with pytest.raises(ProblemFileError) as info:
        load_problem(_write(tmp_path, text))
    assert info.value.line == 3


def test_json_syntax_error_located(tmp_path):
    with pytest.raises(ProblemFileError) as info:
        load_problem(_write(tmp_path, '{\n  "n": 2,\n  "objective": }\n'))
    assert info.value.line == 3 and info.value.column is not None


def test_variable_beyond_n(tmp_path):
    with pytest.raises(ProblemFileError, match="x3"):
        load_problem(_write(tmp_path, {"n": 2, "objective": {"expression": "x3"}}))


def test_singular_partition_reported(tmp_path):
    doc = {"n": 2, "objective": {"expression": "x1^2"},
           "equality": {"A": [[1, 0]], "b": [1]}, "partition": {"dependent": [2]}}
    with pytest.raises(ProblemFileError, match="singular-dependent-block"):
        load_problem(_write(tmp_path, doc))


@pytest.mark.parametrize("name", sorted(library()))
def test_round_trip(name, tmp_path):
    pf = library()[name]
    first = tmp_path / "a.json"
    dump_problem(pf, first)
    again = load_problem_file(first)
    assert problem_to_dict(again) == problem_to_dict(pf)
    second = tmp_path / "b.json"
    dump_problem(again, second)
    assert first.read_bytes() == second.read_bytes()


def test_trace_format_and_read_back(tmp_path):
    trace = IterationTrace(metadata={"algorithm": "ht1", "seed": 0}, status="converged")
    trace.append(TraceRow(0, 0.1, 0.2, 0.0, 0.0, 1.0 / 3.0, 5.0))
    path = tmp_path / "t.csv"
    emit_trace(trace, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "# algorithm: ht1"
    assert lines[2] == ",".join(TRACE_COLUMNS)
    assert lines[3].split(",")[5] == "0.33333333333333331"
    back = read_trace(path)
    assert back.rows == trace.rows and back.metadata["algorithm"] == "ht1"


def test_trace_k_strictly_increasing():
    trace = IterationTrace()
    trace.append(TraceRow(0, 0, 0, 0, 0, 0, 1))
    with pytest.raises(ValueError):
        trace.append(TraceRow(0, 0, 0, 0, 0, 0, 1))
