"""Runnable experiments: bundles, scripted transcripts, drivers, reports."""

from .bundles import (BUNDLES, ScenarioBundle, ScenarioError, lint_transcript,
                      list_bundles, load_bundle)
from .runners import (SessionRig, build_report, prepare_rig, qnd_report,
                      report_json, resonator_report, run_auto,
                      run_knowledge_prep, run_manual, run_power_sweep,
                      run_qnd_benchmark, run_resonator_characterization,
                      run_scenario)

__all__ = [
    "BUNDLES", "ScenarioBundle", "ScenarioError", "SessionRig",
    "build_report", "lint_transcript", "list_bundles", "load_bundle",
    "prepare_rig", "qnd_report", "report_json", "resonator_report",
    "run_auto", "run_knowledge_prep", "run_manual", "run_power_sweep", "run_qnd_benchmark",
    "run_resonator_characterization", "run_scenario",
]
