import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orbcorr.entanglement import CorrelationTriple
from orbcorr.report import (
    SWEEP_COLUMNS,
    AnalysisReport,
    format_table,
    heatmap_svg,
    matrix_csv,
    single_orbital_csv,
    sweep_csv,
    sweep_svg,
    write_report,
)

MODES = ["none", "parity", "number"]


def synthetic_report(values, n=3):
    rep = AnalysisReport.empty("synthetic", n, MODES, {"seed": 7, "tol": 1e-9})
    it = iter(values)
    for i in range(n):
        for j in range(i + 1, n):
            for m in MODES:
                total = next(it)
                rep.set_pair(i, j, CorrelationTriple(total, total / 2, total / 3, m, j != 2), residual=1e-12)
    for k in range(n):
        for m in MODES:
            rep.set_single(k, CorrelationTriple(0.4, 0.2, None, m))
    rep.intrinsic_correlation = 0.01
    rep.ground_energy = -1.5
    return rep


floats = st.floats(0, 10, allow_nan=False, allow_infinity=False)


@settings(max_examples=50, deadline=None)
@given(st.lists(floats, min_size=9, max_size=9))
def test_json_round_trip_is_field_exact(values):
    rep = synthetic_report(values)
    back = AnalysisReport.from_json(rep.to_json())
    assert back == rep
    assert back.to_json() == rep.to_json()


def test_matrices_symmetric_with_empty_diagonal():
    rep = synthetic_report(np.linspace(0.1, 0.9, 9))
    for m in MODES:
        for k in ("I", "E", "C"):
            mat = rep.matrix(m, k)
            assert np.all(np.isnan(np.diag(mat)))
            assert np.array_equal(np.nan_to_num(mat), np.nan_to_num(mat.T))
    assert rep.pairs() == [(0, 1), (0, 2), (1, 2)]
    assert not rep.converged
    assert rep.pair(0, 1, "none").converged and not rep.pair(0, 2, "none").converged


def test_csv_uses_one_based_headers_and_bits():
    rep = synthetic_report([math.log(2)] * 9)
    rows = list(csv.reader(io.StringIO(matrix_csv(rep, "none", "I", bits=True))))
    assert rows[0] == ["orbital", "1", "2", "3"]
    assert [r[0] for r in rows[1:]] == ["1", "2", "3"]
    assert rows[1][1] == "" and float(rows[1][2]) == pytest.approx(1.0)
    single = list(csv.reader(io.StringIO(single_orbital_csv(rep))))
    assert single[0] == ["orbital", "ssr_mode", "I", "E"] and single[1][0] == "1"


def test_heatmap_svg_is_deterministic(tmp_path):
    rep = synthetic_report(np.linspace(0.1, 0.9, 9))
    a = heatmap_svg(rep, "none", "I", tmp_path / "a.svg").read_bytes()
    b = heatmap_svg(rep, "none", "I", tmp_path / "b.svg").read_bytes()
    assert a == b
    text = a.decode()
    assert "<svg" in text and "dc:date" not in text


def test_sweep_outputs(tmp_path):
    rows = []
    for x in (0.01, 0.1, 1.0):
        row = {"t_over_u": x, "status": "ok"}
        for c in SWEEP_COLUMNS[1:-1]:
            row[c] = x
        rows.append(row)
    text = sweep_csv(rows)
    parsed = list(csv.reader(io.StringIO(text)))
    assert parsed[0] == SWEEP_COLUMNS and len(parsed) == 4
    path = sweep_svg(rows, tmp_path / "s.svg")
    assert path.read_bytes() == sweep_svg(rows, tmp_path / "t.svg").read_bytes()


def test_write_report_formats(tmp_path):
    rep = synthetic_report(np.linspace(0.1, 0.9, 9))
    written = write_report(rep, tmp_path, ["json", "csv", "svg"], stem="x")
    names = {p.name for p in written}
    assert "x.json" in names and "x_single.csv" in names
    assert {f"x_{k}_{m}.csv" for k in "IEC" for m in MODES} <= names
    assert {f"x_{k}_{m}.svg" for k in "IEC" for m in MODES} <= names
    assert AnalysisReport.from_json((tmp_path / "x.json").read_text()) == rep


def test_console_table():
    rep = synthetic_report([1.0] * 9)
    text = format_table(rep, 0, 1)
    assert "orbitals 1,2" in text and "classical" in text and "none SSR" in text
