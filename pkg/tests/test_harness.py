import json

import numpy as np
import pytest

from starcut.artifacts import write_seeds_file
from starcut.engine import SeedPoint, segment
from starcut.harness import (
    CaseRecord,
    CaseReport,
    evaluate_case,
    emit_report,
    load_manifest,
    parse_per_case_csv,
    per_case_csv,
    run_manifest,
    summarize,
)
from starcut.imaging import save_image, save_mask
from starcut.metrics import diameters, dice, hausdorff
from starcut.phantom import DiskSpec, disk_phantom

from oracles import median_mad_ref


@pytest.fixture(scope="module")
def phantom_case(tmp_path_factory):
    base = tmp_path_factory.mktemp("cases")
    img, truth = disk_phantom(160, 160, DiskSpec(80, 80, 26), 60, 160, noise=8, rng_seed=2)
    save_image(img, base / "image.png")
    save_mask(truth, base / "truth.png")
    write_seeds_file(SeedPoint(80, 80), (), base / "seeds.txt")
    record = CaseRecord("c0", "image.png", "truth.png", "seeds.txt")
    return base, record, img, truth


def test_self_comparison_is_perfect(tmp_path, phantom_case):
    base, record, img, truth = phantom_case
    result = segment(img, SeedPoint(80, 80))
    save_image(img, tmp_path / "image.png")
    save_mask(result.mask, tmp_path / "manual.png")  # feed the result back as "manual"
    write_seeds_file(SeedPoint(80, 80), (), tmp_path / "seeds.txt")
    report = evaluate_case(
        CaseRecord("self", "image.png", "manual.png", "seeds.txt"), base_dir=tmp_path
    )
    assert report.error is None
    assert report.dsc == 1.0
    assert report.hd_px == 0.0
    assert report.diff_a_mm == 0.0
    assert report.diff_b_mm == 0.0


def test_report_matches_direct_metric_calls(phantom_case):
    base, record, img, truth = phantom_case
    report = evaluate_case(record, base_dir=base)
    assert report.error is None
    result = segment(img, SeedPoint(80, 80))
    manual_diam = diameters(truth, img.spacing)
    assert report.dsc == dice(truth, result.mask)
    assert report.hd_px == hausdorff(truth, result.mask)
    assert report.diff_a_mm == abs(manual_diam.a - result.diameter_a)
    assert report.diff_b_mm == abs(manual_diam.b - result.diameter_b)


def test_missing_file_becomes_error_row(phantom_case):
    base, record, *_ = phantom_case
    broken = CaseRecord("broken", "missing.png", record.manual_mask, record.seeds)
    report = evaluate_case(broken, base_dir=base)
    assert report.error is not None
    assert "missing.png" in report.error
    assert report.dsc is None


def test_empty_manual_mask_is_an_error_row(tmp_path, phantom_case):
    base, record, img, _ = phantom_case
    save_image(img, tmp_path / "image.png")
    save_mask(
        __import__("starcut.imaging", fromlist=["BinaryMask"]).BinaryMask(
            np.zeros((160, 160), dtype=bool)
        ),
        tmp_path / "empty.png",
    )
    write_seeds_file(SeedPoint(80, 80), (), tmp_path / "seeds.txt")
    report = evaluate_case(
        CaseRecord("empty", "image.png", "empty.png", "seeds.txt"), base_dir=tmp_path
    )
    assert report.error is not None and "empty" in report.error


def make_report(case_id, dsc, satisfied=True, **kw):
    defaults = dict(hd_px=2.0, diff_a_mm=1.0, diff_b_mm=0.5, auto_time_s=0.05)
    defaults.update(kw)
    return CaseReport(case_id=case_id, dsc=dsc, satisfied=satisfied, **defaults)


def test_summarize_single_report():
    s = summarize([make_report("a", 0.9)])
    assert s.stats["dsc"].median == 0.9
    assert s.stats["dsc"].mad == 0.0
    assert s.stats["dsc"].n == 1


def test_summarize_three_reports_hand_math():
    reports = [make_report("a", 0.80), make_report("b", 0.84), make_report("c", 0.90)]
    s = summarize(reports)
    assert s.stats["dsc"].median == pytest.approx(0.84)
    assert s.stats["dsc"].mad == pytest.approx((0.04 + 0.0 + 0.06) / 3)
    assert s.stats["dsc"].n == 3


def test_summarize_matches_reference_and_is_permutation_invariant():
    rng = np.random.default_rng(40)
    reports = [
        make_report(f"c{i}", float(rng.uniform(0.5, 1.0)), auto_time_s=float(rng.uniform(0, 1)))
        for i in range(100)
    ]
    s = summarize(reports)
    med, mad = median_mad_ref([r.dsc for r in reports])
    assert s.stats["dsc"].median == pytest.approx(med, abs=1e-12)
    assert s.stats["dsc"].mad == pytest.approx(mad, abs=1e-12)
    shuffled = list(reports)
    rng.shuffle(shuffled)
    assert summarize(shuffled) == s


def test_summarize_satisfied_only_filter():
    reports = [
        make_report("a", 0.80, satisfied=True),
        make_report("b", 0.90, satisfied=False),
        make_report("c", 0.85, satisfied=True),
    ]
    all_cases = summarize(reports)
    only = summarize(reports, satisfied_only=True)
    assert all_cases.stats["dsc"].n == 3
    assert only.stats["dsc"].n == 2
    assert only.stats["dsc"].median == pytest.approx(0.825)
    assert all_cases.satisfaction_rate == pytest.approx(2 / 3)
    # with everything satisfied both summaries agree
    happy = [make_report("a", 0.8), make_report("b", 0.9)]
    assert summarize(happy) == summarize(happy, satisfied_only=True)


def test_summarize_all_filtered_out_raises():
    with pytest.raises(ValueError):
        summarize([make_report("a", 0.8, satisfied=False)], satisfied_only=True)
    with pytest.raises(ValueError):
        summarize([CaseReport(case_id="x", error="boom")])


def test_error_rows_do_not_contribute():
    reports = [make_report("a", 0.8), CaseReport(case_id="x", error="boom")]
    s = summarize(reports)
    assert s.stats["dsc"].n == 1
    assert s.error_cases == 1
    assert s.total_cases == 2


def test_manual_time_only_counts_cases_that_have_it():
    reports = [
        make_report("a", 0.8, manual_time_s=10.0),
        make_report("b", 0.9),
    ]
    s = summarize(reports)
    assert s.stats["manual_time_s"].n == 1
    assert s.stats["dsc"].n == 2


def test_per_case_csv_round_trip():
    reports = [
        make_report("a", 0.8125, manual_time_s=17.25),
        CaseReport(case_id="bad", satisfied=False, error="no such file"),
        make_report("c", 0.9000001, satisfied=None),
    ]
    text = per_case_csv(reports)
    assert text.splitlines()[0] == (
        "case_id,dsc,hd_px,diff_a_mm,diff_b_mm,auto_time_s,manual_time_s,satisfied,error"
    )
    assert parse_per_case_csv(text) == reports


def test_manifest_loading(tmp_path, phantom_case):
    base, record, *_ = phantom_case
    manifest = {
        "cases": [
            {"case_id": "c1", "image": "image.png", "manual_mask": "truth.png",
             "seeds": "seeds.txt", "satisfied": True, "manual_time_s": 9.5},
            {"case_id": "c2", "image": "image.png", "manual_mask": "truth.png",
             "seeds": "seeds.txt"},
        ]
    }
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(manifest))
    records, base_dir = load_manifest(path)
    assert base_dir == tmp_path
    assert records[0].satisfied is True and records[0].manual_time_s == 9.5
    assert records[1].satisfied is None

    path.write_text(json.dumps({"cases": []}))
    with pytest.raises(ValueError, match="no cases"):
        load_manifest(path)
    manifest["cases"].append(dict(manifest["cases"][0]))
    path.write_text(json.dumps(manifest))
    with pytest.raises(ValueError, match="unique"):
        load_manifest(path)


def test_run_manifest_orders_by_case_id_and_survives_errors(phantom_case):
    base, record, *_ = phantom_case
    records = [
        CaseRecord("zz", record.image, record.manual_mask, record.seeds),
        CaseRecord("aa", "missing.png", record.manual_mask, record.seeds),
    ]
    reports = run_manifest(records, base_dir=base)
    assert [r.case_id for r in reports] == ["aa", "zz"]
    assert reports[0].error is not None
    assert reports[1].error is None


def test_emit_report_csv_and_txt(tmp_path):
    reports = [make_report("a", 0.80), make_report("b", 0.84), make_report("c", 0.90)]
    summary = summarize(reports)
    paths = emit_report(summary, reports, tmp_path / "csv", fmt="csv")
    per_case_text = paths["per_case"].read_text()
    assert parse_per_case_csv(per_case_text)[0].case_id == "a"
    summary_text = paths["summary"].read_text()
    dsc_row = next(l for l in summary_text.splitlines() if l.startswith("dsc,"))
    _, n, med, mad = dsc_row.split(",")
    assert n == "3"
    assert float(med) == pytest.approx(0.84)
    assert float(mad) == pytest.approx((0.04 + 0.0 + 0.06) / 3)
    assert "not directly comparable" in summary_text

    txt_paths = emit_report(summary, reports, tmp_path / "txt", fmt="txt")
    table = txt_paths["summary"].read_text()
    assert "metric" in table and "median" in table and "dsc" in table
    assert "0.8400" in table


def test_batch_determinism_modulo_timing(phantom_case):
    base, record, *_ = phantom_case
    records = [record]
    a = per_case_csv(run_manifest(records, base_dir=base))
    b = per_case_csv(run_manifest(records, base_dir=base))

    def strip_time(text):
        rows = [line.split(",") for line in text.splitlines()]
        idx = rows[0].index("auto_time_s")
        return [[c for i, c in enumerate(row) if i != idx] for row in rows]

    assert strip_time(a) == strip_time(b)
