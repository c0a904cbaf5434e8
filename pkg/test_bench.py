"""
Тесты исследования ошибки Er(K; t) и формата CSV отчёта.
"""

import csv
import io
import math

import numpy as np
import pytest

from bench import (
    CSV_HEADER, REFERENCE_MARGIN, default_setup, emit_report, format_report, is_monotone_improvement, reference_limited,
    run_benchmark, run_setup,
)
from errors import FitError
from expr import parse_nonlin
from forcing import parse_forcing
from models import Forcing


GRID = np.linspace(0.0, 1.0, 101)


@pytest.fixture(scope="module")
def sinh_gordon_report():
    return run_setup(default_setup("sinh-gordon"), 4, GRID)


def test_setups():
    setup = default_setup("sinh-gordon")
    assert str(setup.nonlin) == "sinh(w)"
    assert setup.forcing.kind == "delta"
    assert setup.strategy == "lsq"
    liouville = default_setup("liouville", epsilon=2.0)
    assert liouville.green.left is not None
    with pytest.raises(ValueError):
        default_setup("kdv")


def test_csv_shape(sinh_gordon_report):
    text = format_report(sinh_gordon_report)
    assert "\r" not in text
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == CSV_HEADER
    assert len(rows) == 1 + 4 * GRID.size
    assert {row[3] for row in rows[1:]} == {"1", "2", "3", "4"}
    assert all(row[0] == "sinh(w)" and row[1] == "delta" and row[2] == "lsq" for row in rows[1:])
    first = rows[1]
    assert float(first[4]) == 0.0
    assert repr(float(first[6])) == repr(sinh_gordon_report.rows[0].wref)


def test_er_is_log_of_gap(sinh_gordon_report):
    for row in sinh_gordon_report.rows:
        if row.flag == "exact":
            assert row.er is None
        else:
            assert row.er == pytest.approx(math.log(abs(row.wK - row.wref)))


def test_sinh_gordon_medians_improve(sinh_gordon_report):
    assert sinh_gordon_report.k_values == (1, 2, 3, 4)
    assert is_monotone_improvement(sinh_gordon_report)
    assert set(sinh_gordon_report.alphas) == {1, 2, 3, 4}
    assert len(sinh_gordon_report.alphas[4]) == 5


def test_liouville_medians_improve():
    report = run_setup(default_setup("liouville"), 4, GRID)
    assert is_monotone_improvement(report)
    assert dict(report.reference)["t_start"] == -0.2


def test_repeated_runs_are_identical():
    setup = default_setup("sinh-gordon")
    grid = np.linspace(0.0, 0.5, 11)
    assert format_report(run_setup(setup, 2, grid)) == format_report(run_setup(setup, 2, grid))


def test_header_only_report():
    report = run_benchmark(parse_nonlin("w^3"), Forcing("delta"), 1.0, 0, [0.0, 0.5])
    assert format_report(report) == ",".join(CSV_HEADER) + "\n"


def test_zero_forcing_is_exact():
    report = run_benchmark(parse_nonlin("w^3"), Forcing("zero"), 1.0, 2, [0.0, 0.5, 1.0])
    assert all(row.flag == "exact" and row.er is None for row in report.rows)
    assert report.medians[1] == -math.inf


def test_smooth_forcing_with_derivative_matching():
    report = run_benchmark(parse_nonlin("sin(w)"), parse_forcing("1"), 1.0, 3, np.linspace(0.0, 0.1, 11),
                           strategy="match")
    assert report.strategy == "match"
    assert report.forcing_desc == "1"
    assert dict(report.reference)["t_start"] == 0.0


def test_mollified_forcing_description():
    report = run_benchmark(parse_nonlin("w^3"), parse_forcing("delta_eta", 1e-2), 1.0, 1, np.linspace(0.0, 0.5, 6))
    assert report.forcing_desc == "delta_eta(0.01)"
    assert dict(report.reference)["eta"] == 0.01


def test_benchmark_arguments():
    nonlin = parse_nonlin("w^3")
    with pytest.raises(ValueError):
        run_benchmark(nonlin, Forcing("delta"), 1.0, 9, GRID)
    with pytest.raises(ValueError):
        run_benchmark(nonlin, Forcing("delta"), 1.0, 2, [-0.1, 0.5])
    with pytest.raises(ValueError):
        run_benchmark(nonlin, Forcing("delta"), 1.0, 2, GRID, strategy="newton")
    with pytest.raises(FitError):
        run_benchmark(nonlin, Forcing("delta"), 1.0, 2, GRID, strategy="match")


def test_emit_report(tmp_path, sinh_gordon_report):
    path = tmp_path / "report.csv"
    emit_report(sinh_gordon_report, str(path))
    assert path.read_bytes() == format_report(sinh_gordon_report).encode("utf-8")


def test_reference_limited_cells_are_flagged(sinh_gordon_report):
    meta = dict(sinh_gordon_report.reference)
    for row in sinh_gordon_report.rows:
        if row.er is None:
            continue
        floor = REFERENCE_MARGIN * (meta["rtol"] * abs(row.wref) + meta["atol"])
        assert (row.flag == "ref-limited") == (abs(row.wK - row.wref) <= floor)
    assert meta["ref_limited"] == reference_limited(sinh_gordon_report)


def test_loose_reference_is_flagged():
    report = run_setup(default_setup("sinh-gordon"), 2, np.linspace(0.0, 0.2, 11), ref_rtol=1e-4, ref_atol=1e-6)
    assert reference_limited(report) > 0


def test_tighter_reference_keeps_medians():
    """Уточнение эталона в 10 раз меняет медиану Er меньше чем на 1%."""
    setup = default_setup("sinh-gordon")
    grid = np.linspace(0.0, 0.5, 41)
    loose = run_setup(setup, 3, grid, ref_rtol=1e-11, ref_atol=1e-13)
    tight = run_setup(setup, 3, grid, ref_rtol=1e-12, ref_atol=1e-14)
    for K in loose.k_values:
        assert abs(tight.medians[K] - loose.medians[K]) <= 0.01 * abs(loose.medians[K])
