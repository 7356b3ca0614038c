"""Explicit-state exploration oracle."""

from grafcet_lint import parse_spec
from grafcet_lint.oracle import explore, explore_partial


def test_linear_chain_no_pairs():
    spec = parse_spec({
        "name": "chain",
        "partials": [{
            "id": "P",
            "steps": [{"id": "1", "initial": True}, {"id": "2"}, {"id": "3"}],
            "transitions": [
                {"id": "t1", "from": ["1"], "to": ["2"]},
                {"id": "t2", "from": ["2"], "to": ["3"]},
            ],
        }],
    })
    facts = explore(spec)
    assert facts.reachable == {"P.1", "P.2", "P.3"}
    assert facts.pairs == set()
    assert not facts.inconclusive


def test_parallel_split_pairs():
    spec = parse_spec({
        "name": "split",
        "partials": [{
            "id": "P",
            "steps": [{"id": "1", "initial": True}, {"id": "2"}, {"id": "3"}],
            "transitions": [{"id": "t1", "from": ["1"], "to": ["2", "3"]}],
        }],
    })
    facts = explore(spec)
    assert frozenset({"P.2", "P.3"}) in facts.pairs
    assert frozenset({"P.1", "P.2"}) not in facts.pairs


def test_loop_values_hit_cap(load_fixture):
    spec = load_fixture("fig2_g7.grafcet.json")
    facts = explore(spec, value_cap=8)
    # k := k + 1 in an endless loop: the oracle sees growing values and gives up.
    assert facts.inconclusive
    assert max(facts.var_values["k"]) >= 3


def test_fig5_counter_stays_within_analyzed_bound(load_fixture):
    spec = load_fixture("fig5.grafcet.json")
    facts = explore(spec, track_activations=("c.s5",))
    assert not facts.inconclusive
    # Step s5 never deactivates, so Boolean step semantics admit a single
    # activation; the structural bound of 4 is a sound over-approximation.
    assert 1 <= facts.activations["c.s5"] <= 4
    assert facts.var_values["k"] <= {0, 1, 2, 3, 4}


def test_same_step_writers_conflict(load_fixture):
    spec = load_fixture("fig2_g1.grafcet.json")
    facts = explore(spec)
    assert frozenset({("G1", 0), ("G1", 1)}) in facts.conflicts


def test_sequential_writers_do_not_conflict(load_fixture):
    spec = load_fixture("fig2_g7.grafcet.json")
    facts = explore(spec)
    assert facts.conflicts == set()


def test_enclosing_activates_and_clears(load_fixture):
    spec = load_fixture("fig1.grafcet.json")
    facts = explore(spec)
    assert {"G0.0", "G0.1", "G1.2", "G1.3"} <= facts.reachable
    assert frozenset({"G0.1", "G1.2"}) in facts.pairs
    assert frozenset({"G0.0", "G1.2"}) not in facts.pairs


def test_forcing_pins_target(load_fixture):
    spec = load_fixture("fig4.grafcet.json")
    facts = explore(spec)
    # The forcing order holds {s3, s4, s5} while main.m1 stays active, so
    # the forced partial cannot evolve past it.
    assert facts.reachable == {"main.m1", "c.s3", "c.s4", "c.s5"}


def test_explore_partial_ignores_hierarchy(load_fixture):
    spec = load_fixture("fig4.grafcet.json")
    facts = explore_partial(spec, "c", frozenset({"s3", "s4", "s5"}))
    assert facts.reachable == {f"c.{s}" for s in
                               ("s1", "s2", "s3", "s4", "s5", "s6")}
    assert frozenset({"c.s3", "c.s6"}) in facts.pairs


def test_deactivation_trigger():
    spec = parse_spec({
        "name": "t",
        "variables": [{"name": "k", "kind": "internal", "type": "int", "init": 0}],
        "partials": [{
            "id": "P",
            "steps": [{"id": "1", "initial": True}, {"id": "2"}],
            "transitions": [{"id": "t1", "from": ["1"], "to": ["2"]}],
            "actions": [{"kind": "stored", "step": "1", "var": "k", "value": "5",
                         "trigger": "deactivation"}],
        }],
    })
    facts = explore(spec)
    assert 5 in facts.var_values["k"]


def test_structural_mode_havocs_conditions():
    spec = parse_spec({
        "name": "t",
        "variables": [{"name": "x", "kind": "input", "type": "bool"}],
        "partials": [{
            "id": "P",
            "steps": [{"id": "1", "initial": True}, {"id": "2"}],
            "transitions": [{"id": "t1", "from": ["1"], "to": ["2"],
                             "cond": "x & !x"}],
        }],
    })
    assert "P.2" in explore(spec, mode="structural").reachable
    assert "P.2" not in explore(spec, mode="semantic").reachable


def test_semantic_mode_edges():
    spec = parse_spec({
        "name": "t",
        "variables": [{"name": "x", "kind": "input", "type": "bool"}],
        "partials": [{
            "id": "P",
            "steps": [{"id": "1", "initial": True}, {"id": "2"}],
            "transitions": [{"id": "t1", "from": ["1"], "to": ["2"],
                             "cond": "re(x)"}],
        }],
    })
    facts = explore(spec, mode="semantic")
    assert "P.2" in facts.reachable


def test_semantic_mode_rejects_int_inputs():
    spec = parse_spec({
        "name": "t",
        "variables": [{"name": "n", "kind": "input", "type": "int"}],
        "partials": [{"id": "P", "steps": [{"id": "1", "initial": True}]}],
    })
    try:
        explore(spec, mode="semantic")
    except ValueError as exc:
        assert "integer inputs" in str(exc)
    else:
        raise AssertionError("expected ValueError")


def test_source_transition_reactivates_concurrently(load_fixture):
    spec = load_fixture("fig2_g5.grafcet.json")
    facts = explore(spec)
    # The source transition can re-activate step 1 while step 2 is active.
    assert frozenset({"G5.1", "G5.2"}) in facts.pairs
