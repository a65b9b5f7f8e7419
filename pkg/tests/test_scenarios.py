from __future__ import annotations

import pytest

from hallab.scenarios import (lint_transcript, list_bundles,
                              load_bundle, prepare_rig, report_json,
                              run_auto, run_knowledge_prep, run_manual,
                              run_power_sweep, run_qnd_benchmark,
                              run_resonator_characterization)
from hallab.virtlab import Storage, load_dataset


@pytest.fixture
def storage(tmp_path):
    return Storage(tmp_path / "store")


def test_stock_resonator_scenario(storage):
    report = run_resonator_characterization("resonator", seed=42,
                                            storage=storage)
    assert report["passed"], report["assertions"]
    assert report["found_counts"] == [4, 8]
    assert report["signals"][0] == "Success"
    assert report["signals"][1] == "Found 4 resonances"
    assert report["signals"][3] == "Found 8 resonances"
    assert len(report["fits"]["f_r"]) == 8
    truth = sorted(r.f_r for r in load_bundle("resonator").lab_config.resonators)
    for got, want in zip(sorted(report["fits"]["f_r"]), truth):
        assert abs(got - want) / want < 1e-4


def test_wide_from_start_completes_in_three_cycles(storage):
    report = run_resonator_characterization("resonator-wide", seed=5,
                                            storage=storage)
    assert report["passed"], report["assertions"]
    assert report["found_counts"] == [8]
    assert len(report["cycles"]) == 3


def test_zero_resonator_bundle_terminates_clean(storage):
    report = run_resonator_characterization("resonator-empty", seed=1,
                                            storage=storage)
    assert report["passed"], report["assertions"]
    assert report["found_counts"] == [0]
    assert report["fits"]["f_r"] == []
    assert report["signals"][-1] == "Found 0 resonances"


def test_qnd_benchmark_recovers_leak(storage):
    report = run_qnd_benchmark("qnd", seed=7, storage=storage)
    assert report["passed"], report["assertions"]
    fit = report["fit"]
    assert abs(fit["L"] - 0.124) <= 2 * fit["sigma_L"]
    assert fit["sigma_L"] <= 0.02
    assert report["dataset_path"].endswith("qnd_correlation.ds.json")
    assert len(report["series"]["j"]) == 40
    # Correlation must actually decay toward the 1/2 plateau.
    c = report["series"]["c_avg"]
    assert c[0] > 0.85 and c[-1] < 0.62


def test_qnd_zero_leak_control(storage):
    report = run_qnd_benchmark("qnd-zero", seed=11, storage=storage)
    assert report["passed"], report["assertions"]
    assert report["fit"]["L"] < 0.005


def test_knowledge_prep_variant(storage):
    bundle = load_bundle("qnd-prep")
    rig = prepare_rig(bundle, seed=7, storage=storage)
    assert rig.kb.get("qnd-plan") is None  # plan must come from prep
    doc_id = run_knowledge_prep(rig)
    doc = rig.kb.get(doc_id)
    assert doc is not None and doc.kind == "plan"
    assert "(1 - L)^j" in doc.body          # decay model recorded
    assert "save_dataset" in doc.body       # house saving convention
    assert "STATE[\"data_file\"]" in doc.body
    # The generated plan must win retrieval for the benchmark task.
    ranked = rig.kb.search_text("QND readout leakage benchmark", k=1)
    assert ranked[0][0] == doc_id

    run_auto(rig)
    from hallab.scenarios import qnd_report
    report = qnd_report(rig)
    assert report["passed"], report["assertions"]


def test_power_sweep_report(storage):
    report = run_power_sweep("power", seed=9, storage=storage)
    assert report["passed"], report["assertions"]
    one_minus = [row["one_minus_L"] for row in report["rows"]]
    assert all(b < a for a, b in zip(one_minus, one_minus[1:]))
    ds = load_dataset(storage.root / report["dataset_path"])
    assert set(ds.columns) == {"power", "visibility", "repeatability",
                               "one_minus_L", "sigma_L"}
    assert len(ds.columns["power"]) == 5


def test_reports_are_deterministic(tmp_path):
    a = run_resonator_characterization(
        "resonator", seed=9, storage=Storage(tmp_path / "a"))
    b = run_resonator_characterization(
        "resonator", seed=9, storage=Storage(tmp_path / "b"))
    assert report_json(a) == report_json(b)


def test_manual_mode_matches_auto(tmp_path):
    auto = run_resonator_characterization(
        "resonator", seed=12, storage=Storage(tmp_path / "auto"))
    rig = prepare_rig("resonator", seed=12,
                      storage=Storage(tmp_path / "manual"), mode="manual")
    approved = []
    run_manual(rig, lambda rec: approved.append(rec.index) or True)
    from hallab.scenarios import resonator_report
    manual = resonator_report(rig)
    assert approved == [1, 2, 3, 4, 5]
    assert report_json(manual) == report_json(auto)


def test_all_shipped_transcripts_pass_separation_lint():
    for name in list_bundles():
        bundle = load_bundle(name)
        if bundle.transcript_path is None:
            continue
        violations = lint_transcript(bundle.transcript_entries())
        assert violations == [], f"{name}: {violations}"


def test_memorize_resonator_step_end_to_end(storage):
    from hallab.kb import memorize

    rig = prepare_rig("resonator", seed=42, storage=storage)
    run_auto(rig)
    doc_id = memorize(rig.kb, rig.session, 1, "VNA wide scan example")
    ranked = [d for d, _ in rig.kb.search_text("vna wide scan example", k=4)]
    assert doc_id in ranked


def test_unknown_bundle_rejected():
    from hallab.scenarios import ScenarioError

    with pytest.raises(ScenarioError):
        load_bundle("nope")


def test_power_sweep_single_entry_table(storage):
    from hallab.scenarios.bundles import ScenarioBundle
    from hallab.virtlab import LabConfig, PowerPoint, QubitSpec

    config = LabConfig(qubit=QubitSpec(
        leak=0.05, assign_error=0.02, pi_error=0.005,
        power_table=(PowerPoint(power=5000.0, leak=0.08, assign_error=0.02),),
    ))
    bundle = ScenarioBundle(
        name="power-single", kind="power", root=None, lab_config=config,
        transcript_path=None,
        acquisition={"vis_shots": 4000, "qnd_cycles": 20, "qnd_shots": 500,
                     "qnd_randomizations": 6},
    )
    report = run_power_sweep(bundle, seed=2, storage=storage)
    assert len(report["rows"]) == 1
    assert report["rows"][0]["power"] == 5000.0


def test_shipped_generated_scripts_round_trip():
    from hallab.runtime import parse, pretty_print

    checked = 0
    for name in list_bundles():
        bundle = load_bundle(name)
        for role, _match, reply in bundle.transcript_entries():
            if role != "develop":
                continue
            program = parse(reply + "\n")
            assert parse(pretty_print(program)) == program
            checked += 1
    assert checked >= 10
