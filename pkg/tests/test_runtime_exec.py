from __future__ import annotations

import pytest

from hallab.kb import KnowledgeBase
from hallab.runtime import (Budget, Environment, RegistryError, Script,
                            execute, patch_state, register, snapshot_state)
from hallab.virtlab import InProcessLab, LabConfig, ResonatorSpec, Storage


def run(src, env=None):
    env = env or Environment()
    return execute(Script(src), env), env


def test_state_persists_across_executions():
    env = Environment()
    first, _ = run('STATE["a"] = 2\nSIGNAL = "done"\n', env)
    assert first.signal == "done"
    second, _ = run('SIGNAL = str(STATE["a"])\n', env)
    assert second.signal == "2"


def test_signal_takes_last_assignment():
    result, _ = run('SIGNAL = "one"\nSIGNAL = "two"\nSIGNAL = "three"\n')
    assert result.signal == "three"


def test_signal_absent_when_never_assigned():
    result, _ = run("x = 1\n")
    assert result.signal is None


def test_concatenation_equivalence():
    # Executing s1 then s2 leaves the same STATE as their concatenation.
    s1 = 'STATE["x"] = 1\nSTATE["l"] = [1, 2]\n'
    s2 = 'STATE["x"] = STATE["x"] + 1\nSTATE["l"] = STATE["l"] + [3]\n'
    env_a = Environment()
    execute(Script(s1), env_a)
    execute(Script(s2), env_a)
    env_b = Environment()
    execute(Script(s1 + s2), env_b)
    assert env_a.state == env_b.state


def test_step_budget_enforced_and_partial_state_kept():
    env = Environment(budget=Budget(max_steps=500))
    result, _ = run('STATE["n"] = 0\nwhile true {\n'
                    '    STATE["n"] = STATE["n"] + 1\n}\n', env)
    assert result.error["kind"] == "budget"
    assert env.state["n"] > 0  # partial mutations retained


def test_nonfinite_state_write_is_a_runtime_error():
    result, env = run('STATE["big"] = 1e308 * 10.0\n')
    assert result.error["kind"] == "type"
    result2, _ = run('x = 1e308 * 10.0\nSIGNAL = "fine"\n')
    assert result2.error is None  # locals may overflow, STATE may not


def test_aliased_container_checked_at_exit():
    env = Environment()
    run('STATE["m"] = {"v": 1}\n', env)
    result, _ = run('m = STATE["m"]\nm["v"] = 1e308 * 10.0\n', env)
    assert result.error["kind"] == "type"


def test_capability_gating():
    env = Environment(capabilities=frozenset({"core"}))
    env.lab = InProcessLab(LabConfig())
    result, _ = run('r = vna_sweep({"f_start": 1.0, "f_stop": 2.0, '
                    '"points": 3})\n', env)
    assert result.error["kind"] == "capability"
    # Core stays available.
    ok, _ = run('SIGNAL = str(len([1, 2]))\n', env)
    assert ok.signal == "2"


def test_name_and_type_errors_carry_lines():
    result, _ = run("x = 1\ny = nope\n")
    assert result.error["kind"] == "name"
    assert result.error["line"] == 2
    result, _ = run('z = 1 + "s"\n')
    assert result.error["kind"] == "type"


def test_division_by_zero():
    result, _ = run("x = 1.0 / 0.0\n")
    assert result.error["kind"] == "type"


def test_print_goes_to_log():
    result, _ = run('print("a", 1, [2, "b"])\nSIGNAL = "ok"\n')
    assert result.log == ['a 1 [2, "b"]']


def test_invoke_registered_script_shares_state():
    env = Environment()
    register(env, "step-1", Script('STATE["acq"] = STATE["f_start"] * 2\n'))
    patch_state(env, {"f_start": 4.0e9})
    result, _ = run('invoke("step-1")\nSIGNAL = str(STATE["acq"])\n', env)
    assert result.error is None
    assert env.state["acq"] == 8.0e9
    #

    patch_state(env, {"f_start": 5.0e9})
    result2, _ = run('invoke("step-1")\nSIGNAL = str(STATE["acq"])\n', env)
    assert env.state["acq"] == 1.0e10


def test_invoke_unknown_id_is_name_error():
    result, _ = run('invoke("missing")\n')
    assert result.error["kind"] == "name"


def test_self_invoking_script_hits_depth_limit():
    env = Environment()
    register(env, "loop", Script('invoke("loop")\n'))
    result, _ = run('invoke("loop")\n', env)
    assert result.error["kind"] == "budget"
    assert "depth" in result.error["message"]


def test_invoke_kb_example_document():
    kb = KnowledgeBase()
    kb.add_document("ex-1", "Scaling example", "example",
                    "Doubles the input.\n\n```\nSTATE[\"y\"] = "
                    "STATE[\"x\"] * 2\n```\n")
    env = Environment(kb=kb)
    patch_state(env, {"x": 21.0})
    result, _ = run('invoke("ex-1")\nSIGNAL = str(STATE["y"])\n', env)
    assert result.error is None
    assert result.signal == "42"


def test_register_duplicate_id_rejected():
    env = Environment()
    register(env, "step-1", Script("x = 1\n"))
    with pytest.raises(RegistryError):
        register(env, "step-1", Script("x = 2\n"))


def test_snapshot_and_patch():
    env = Environment()
    patch_state(env, {"a": [1.0, 2.0], "b": "keep"})
    snap = snapshot_state(env)
    snap["a"].append(3.0)
    assert env.state["a"] == [1.0, 2.0]  # deep copy
    patch_state(env, {"a": [9.0]})
    assert env.state == {"a": [9.0], "b": "keep"}
    with pytest.raises(Exception):
        patch_state(env, {"bad": float("nan")})


def test_reserved_names_cannot_be_rebound():
    result, _ = run("STATE = 1\n")
    assert result.error["kind"] == "type"


def test_strict_boolean_conditions():
    result, _ = run("if 1 { x = 2 }\n")
    assert result.error["kind"] == "type"


def test_storage_builtins_round_trip(tmp_path):
    env = Environment(session_id="s1")
    env.storage = Storage(tmp_path)
    result, env = run(
        'p = save_dataset("demo", {"meta": {"k": "v"}, '
        '"columns": {"x": [1, 2, 3]}})\n'
        'back = load_dataset(p)\n'
        'STATE["data_file"] = p\n'
        'SIGNAL = str(back["columns"]["x"][2])\n', env)
    assert result.error is None
    assert result.signal == "3"
    assert env.state["data_file"].endswith("s1/demo.ds.json")


def test_lab_builtin_reacquisition_pattern(tmp_path):
    # The cycle-3 pattern: re-run an acquisition step with updated STATE.
    env = Environment(session_id="s2", base_seed=7)
    env.lab = InProcessLab(LabConfig(
        resonators=(ResonatorSpec(f_r=5e9, q_i=2e4, q_c=8e3),),
        noise_sigma=0.0,
    ))
    env.storage = Storage(tmp_path)
    acquisition = (
        'resp = vna_sweep({"f_start": STATE["f_start"], '
        '"f_stop": STATE["f_stop"], "points": 21, "averages": 1})\n'
        'STATE["first_point"] = resp["freq"][0]\n'
        'STATE["data_file"] = save_dataset("scan", '
        '{"columns": {"freq": resp["freq"], "s21_re": resp["s21_re"], '
        '"s21_im": resp["s21_im"]}})\n'
        'SIGNAL = "Success"\n'
    )
    register(env, "step-1", Script(acquisition))
    patch_state(env, {"f_start": 4.0e9, "f_stop": 4.1e9})
    first, _ = run('invoke("step-1")\n', env)
    assert first.signal == "Success"
    assert env.state["first_point"] == 4.0e9

    result, _ = run('STATE["f_start"] = 4.5e9\nSTATE["f_stop"] = 4.6e9\n'
                    'invoke("step-1")\n', env)
    assert result.signal == "Success"
    assert env.state["first_point"] == 4.5e9


def test_sandbox_disabling_every_capability():
    env = Environment(capabilities=frozenset())
    for call in ('len([1])', 'vna_sweep({})', 'save_dataset("x", {})',
                 'find_resonances({})'):
        result, _ = run(call + "\n", env)
        assert result.error["kind"] == "capability"
    # invoke is structural, not capability gated.
    result, _ = run('invoke("nope")\n', env)
    assert result.error["kind"] == "name"
