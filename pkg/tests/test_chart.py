import numpy as np
import pytest

from dyadeval import InputError, MeasureId
from dyadeval import TestResult as Result
from dyadeval.chart import emit_bubble_chart, glyph_radius
from dyadeval.io import ItemReport


def result(measure, p, direction, method="exact", alpha=0.05):
    return Result(measure=measure, observed=1, null_mean=0.0,
                  direction=direction, p_value=p, method=method,
                  alpha=alpha, significant=p < alpha)


def report(item_id, results):
    return ItemReport(item_id=item_id, item_label=item_id, results=tuple(results),
                      dyads_used=10, dyads_dropped=0)


def render(tmp_path, reports, **kwargs):
    out = tmp_path / "chart.svg"
    emit_bubble_chart(reports, out, **kwargs)
    return out.read_text()


def test_all_insignificant_is_empty_grid(tmp_path):
    reports = [report("item1", [result(m, 1.0, "none") for m in MeasureId])]
    svg = render(tmp_path, reports)
    assert svg.count("<circle") == 0
    assert svg.count("<polygon") == 0
    assert "glyphs: 0" in svg


def test_single_positive_is_one_circle(tmp_path):
    results = [result(m, 1.0, "none") for m in list(MeasureId)[1:]]
    results.append(result(MeasureId.M1, 0.001, "positive"))
    svg = render(tmp_path, [report("item1", results)])
    assert svg.count("<circle") == 1
    assert svg.count("<polygon") == 0


def test_mixed_glyph_counts_match_significance(tmp_path):
    reports = []
    expected_circles = expected_triangles = 0
    rng = np.random.default_rng(15)
    for i in range(6):
        results = []
        for m in MeasureId:
            p = float(rng.choice([0.001, 0.03, 0.2, 1.0]))
            direction = "positive" if rng.random() < 0.5 else "negative"
            if p == 1.0:
                direction = "none"
            results.append(result(m, p, direction))
            if p < 0.05:
                if direction == "positive":
                    expected_circles += 1
                else:
                    expected_triangles += 1
        reports.append(report(f"item{i}", results))
    svg = render(tmp_path, reports)
    assert svg.count("<circle") == expected_circles
    assert svg.count("<polygon") == expected_triangles


def test_method_selection(tmp_path):
    results = [result(MeasureId.M1, 0.001, "positive", method="bootstrap"),
               result(MeasureId.M1, 1.0, "none", method="exact")]
    svg_exact = render(tmp_path, [report("a", results)])
    assert svg_exact.count("<circle") == 0  # exact preferred, insignificant
    svg_boot = render(tmp_path, [report("a", results)], method="bootstrap")
    assert svg_boot.count("<circle") == 1


def test_alpha_override(tmp_path):
    results = [result(MeasureId.M1, 0.04, "positive")]
    assert render(tmp_path, [report("a", results)]).count("<circle") == 1
    svg = render(tmp_path, [report("a", results)], alpha=0.01)
    assert svg.count("<circle") == 0


def test_deterministic_bytes(tmp_path):
    reports = [report("item1", [result(m, 0.02, "negative") for m in MeasureId])]
    a = tmp_path / "a.svg"
    b = tmp_path / "b.svg"
    emit_bubble_chart(reports, a)
    emit_bubble_chart(reports, b)
    assert a.read_bytes() == b.read_bytes()


def test_glyph_radius_monotone_and_capped():
    assert glyph_radius(1.0) < glyph_radius(0.05) < glyph_radius(0.001)
    assert glyph_radius(1e-4) == glyph_radius(1e-12) == glyph_radius(0.0)
    assert glyph_radius(0.5) > 0


def test_empty_reports_rejected(tmp_path):
    with pytest.raises(InputError):
        emit_bubble_chart([], tmp_path / "x.svg")
