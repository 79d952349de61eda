import json
from pathlib import Path

import pytest

import oracle
from robust_planner import blocksworld, parse_domain, parse_scenario
from robust_planner.core import fact
from robust_planner.errors import PlanFormatError
from robust_planner.planner import (
    Planner,
    check_plan,
    dumps_plan,
    export_plan,
    import_plan,
    plan,
    plan_bnb,
)
from robust_planner.utility import normalize, utility

FIXTURES = Path(__file__).parent / "fixtures"

LOTTERY = """
domain lottery
  types t
  operator bet()
    pre: ready
    outcome win prob 0.72:
      add: []
      del: [ready]
      value: 10
    outcome lose prob 0.28:
      add: []
      del: [ready]
      value: 5
"""


def lottery_scenario(depth=1, R=0.0):
    return parse_scenario(
        f"problem p\n domain lottery\n init: ready\n value-model delta\n"
        f" vmin 0 vmax 10\n depth-limit {depth}\n robustness {R}\n",
        parse_domain(LOTTERY),
    )


def from_oracle(sc):
    return parse_scenario(oracle.scenario_text(sc), parse_domain(oracle.domain_text(sc)))


def test_terminal_at_depth_limit():
    sc = blocksworld.slippery_blocks(0.5)
    eu, node = Planner(sc).expected_utility_state(sc.initial, sc.depth_limit)
    assert node.chosen is None
    assert eu == utility(normalize(19, 0, 55), 0.5)


def test_single_lottery_eu():
    p = plan(lottery_scenario())
    assert p.eu == pytest.approx(0.72 * 1 + 0.28 * 0.5, abs=1e-15)
    assert p.root.chosen.action == "bet()"


def test_identical_outcomes_give_child_utility():
    text = LOTTERY.replace("value: 5", "value: 10")
    sc = parse_scenario(
        "problem p\n domain lottery\n init: ready\n value-model delta\n vmin 0 vmax 20\n depth-limit 1\n robustness 0.3\n",
        parse_domain(text),
    )
    assert plan(sc).eu == pytest.approx(0.5 ** 0.7, abs=1e-15)


def test_deterministic_action_eu_is_child_eu():
    d = parse_domain(blocksworld.make_domain(1.0))
    sc = parse_scenario(blocksworld.fig9_scenario(0.5).replace("depth-limit 6", "depth-limit 2"), d)
    p = plan(sc)
    assert p.root.chosen.outcomes[0].probability == 1.0
    assert p.root.chosen.eu == p.root.chosen.outcomes[0].child.eu


def test_stack_b5_on_b1_matches_brute_force():
    sc = blocksworld.slippery_blocks(0.6)
    planner = Planner(sc)
    picked = planner.actions(sc.initial)[0]
    assert picked.text == "pick-up(b5)"
    from robust_planner.core import apply_outcome

    s1 = apply_outcome(sc.initial, picked, 0)
    stack = next(a for a in planner.actions(s1) if a.text == "stack(b5,b1)")
    eu, node = planner.expected_utility_action(stack, s1, 1)
    facts = {(f.predicate, f.args) for f in s1.facts}
    expected = oracle.action_eu(oracle.slippery_blocks(0.72, 0.6), facts, "stack", ("b5", "b1"), 1)
    assert eu == pytest.approx(expected, abs=1e-9)
    assert len(node.outcomes) == 2


def test_depth_zero_plan_is_single_node():
    p = plan(lottery_scenario(depth=0))
    assert p.root.chosen is None and p.root.depth == 0
    assert p.eu == utility(normalize(0, 0, 10), 0.0)


def test_no_applicable_actions_is_terminal():
    sc = parse_scenario(
        "problem p\n domain lottery\n init:\n value-model delta\n vmin 0 vmax 10\n depth-limit 3\n",
        parse_domain(LOTTERY),
    )
    assert plan(sc).root.chosen is None


def test_tie_break_smallest_action_text():
    text = """
domain twins
  types t
  operator zeta()
    pre: s
    outcome o prob 1:
      add: []
      del: [s]
      value: 1
  operator alpha()
    pre: s
    outcome o prob 1:
      add: []
      del: [s]
      value: 1
"""
    sc = parse_scenario(
        "problem p\n domain twins\n init: s\n value-model delta\n vmin 0 vmax 2\n depth-limit 1\n",
        parse_domain(text),
    )
    assert plan(sc).root.chosen.action == "alpha()"
    assert plan_bnb(sc).root.chosen.action == "alpha()"


def test_backed_up_consistency_fig9(fig9_plans):
    for p in fig9_plans.values():
        check_plan(p)
        for node in p.state_nodes():
            assert node.depth <= 6
            if node.chosen is None:
                assert node.depth == 6 or not node.chosen
            else:
                for b in node.chosen.outcomes:
                    assert b.child.depth == node.depth + 1


def test_every_action_node_covers_all_outcomes(fig9_plans):
    for p in fig9_plans.values():
        for a in p.action_nodes():
            assert [b.label for b in a.outcomes] == ["success", "failure"]


@pytest.mark.parametrize("seed", range(30))
def test_matches_oracle(seed):
    sc = oracle.random_scenario(seed)
    p = plan(from_oracle(sc))
    expected, _ = oracle.root_eu(sc)
    assert p.eu == pytest.approx(expected, abs=1e-9)
    check_plan(p)


@pytest.mark.parametrize("seed", range(15))
def test_risk_neutral_is_expected_value(seed):
    sc = dict(oracle.random_scenario(1000 + seed), R=0.0)
    p = plan(from_oracle(sc))
    best_value, _ = oracle.root_eu(sc, risk_neutral_units=True)
    assert p.eu * (sc["vmax"] - sc["vmin"]) + sc["vmin"] == pytest.approx(best_value, abs=1e-9)


@pytest.mark.parametrize("seed", range(30))
def test_bnb_matches_exhaustive(seed):
    scenario = from_oracle(oracle.random_scenario(seed))
    full, bnb = plan(scenario), plan_bnb(scenario)
    assert dumps_plan(full) == dumps_plan(bnb)
    assert bnb.stats.expanded_action_nodes <= full.stats.expanded_action_nodes


def test_bnb_single_action_never_prunes():
    sc = lottery_scenario(depth=1)
    b = plan_bnb(sc)
    assert b.stats.pruned_action_nodes == 0
    assert dumps_plan(b) == dumps_plan(plan(sc))


def test_bnb_fig9(fig9_plans, fig9_bnb_plans):
    for r in (0.5, 0.6):
        full, bnb = fig9_plans[r], fig9_bnb_plans[r]
        assert bnb.success_path() == full.success_path()
        assert abs(bnb.eu - full.eu) <= 1e-12
        assert bnb.stats.pruned_action_nodes > 0
        assert bnb.stats.expanded_action_nodes < full.stats.expanded_action_nodes


def test_pruning_disabled_reproduces_plan(fig9_plans):
    sc = blocksworld.slippery_blocks(0.5)
    off = plan_bnb(sc, prune=False)
    assert off == fig9_plans[0.5]
    assert off.stats == fig9_plans[0.5].stats


def test_memo_is_output_identical(fig9_plans):
    for r, p in fig9_plans.items():
        m = plan(blocksworld.slippery_blocks(r), memo=True)
        assert dumps_plan(m) == dumps_plan(p)
        assert m.stats.expanded_state_nodes < p.stats.expanded_state_nodes


def test_deterministic(fig9_plans):
    assert dumps_plan(plan(blocksworld.slippery_blocks(0.5))) == dumps_plan(fig9_plans[0.5])


def test_export_import_round_trip(fig9_plans):
    p = fig9_plans[0.5]
    back = import_plan(json.loads(dumps_plan(p)))
    assert back == p
    assert dumps_plan(back) == dumps_plan(p)


def test_export_layout(fig9_plans):
    doc = export_plan(fig9_plans[0.5])
    assert set(doc) >= {"facts", "acc_value", "depth", "eu", "chosen"}
    assert set(doc["chosen"]) == {"action", "eu", "outcomes"}
    assert set(doc["chosen"]["outcomes"][0]) == {"label", "prob", "child"}


def test_import_rejects_missing_outcome_child(fig9_plans):
    doc = export_plan(fig9_plans[0.5])
    del doc["chosen"]["outcomes"][1]
    with pytest.raises(PlanFormatError):
        import_plan(doc)
    doc = export_plan(fig9_plans[0.5])
    del doc["chosen"]["outcomes"][0]["child"]
    with pytest.raises(PlanFormatError):
        import_plan(doc)


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d.pop("eu"),
        lambda d: d.update(depth=1),
        lambda d: d.update(facts="on(b1,b2)"),
        lambda d: d["chosen"]["outcomes"][0].update(prob=0.5),
        lambda d: d["chosen"]["outcomes"][0]["child"].update(depth=3),
    ],
)
def test_import_rejects_malformed(fig9_plans, mutate):
    doc = export_plan(fig9_plans[0.6])
    mutate(doc)
    with pytest.raises(PlanFormatError):
        import_plan(doc)


def test_import_hand_written_fixture():
    p = import_plan((FIXTURES / "one_action_plan.json").read_text())
    assert p.root.chosen.action == "lift(b1)"
    assert fact("holding(b1)") in p.root.chosen.outcomes[0].child.state
