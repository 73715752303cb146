import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from reann.rex import (Condition, Rule, RuleExtractionError, RuleSet, Table,
                       classify_all, cluster_rules, covered_mask, default_rule,
                       evaluate_rules, extract_rules, merge_layers, prune_rules,
                       rule_covers, with_stats)


def boolean_table(truth):
    """2-attribute binary table; class = truth(a, b)."""
    codes = np.array([[0, 0], [0, 1], [1, 0], [1, 1]])
    classes = np.array([int(truth(a, b)) for a, b in codes])
    return Table(codes=codes, classes=classes, n_codes=(2, 2),
                 ordinal=(False, False), n_classes=2)


def brute_force_min_conditions(table, class_index, pattern_index):
    """Exhaustive search: fewest conditions of any conjunction of this class
    that covers the given pattern and only allowed patterns."""
    allowed = table.allowed_mask(class_index)
    row = table.codes[pattern_index]
    m = table.codes.shape[1]

    def intervals(a):
        if table.ordinal[a]:
            return [(lo, hi) for lo in range(int(row[a]) + 1)
                    for hi in range(int(row[a]), table.n_codes[a])]
        return [(int(row[a]), int(row[a]))]

    for r in range(m + 1):
        for attrs in itertools.combinations(range(m), r):
            for choice in itertools.product(*(intervals(a) for a in attrs)):
                mask = np.ones(len(table.codes), dtype=bool)
                for a, (lo, hi) in zip(attrs, choice):
                    col = table.codes[:, a]
                    mask &= (col >= lo) & (col <= hi)
                if not (mask & ~allowed).any():
                    return r
    raise AssertionError("unreachable: the full conjunction is consistent")


# ---------------------------------------------------------------------------
# boolean fixtures with an exhaustive minimality oracle
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("name,truth", [
    ("and", lambda a, b: a and b),
    ("or", lambda a, b: a or b),
    ("xor", lambda a, b: a != b),
])
def test_boolean_rules_are_minimal_and_exact(name, truth):
    table = boolean_table(truth)
    rules = extract_rules(table)
    # every pattern is covered, every rule covers only its own class
    union = np.zeros(4, dtype=bool)
    for r in rules:
        mask = covered_mask(r, table.codes)
        union |= mask
        assert np.all(table.classes[mask] == r.class_index)
        # the rule is as short as any consistent conjunction for its patterns
        best = min(brute_force_min_conditions(table, r.class_index, p)
                   for p in np.flatnonzero(mask))
        assert r.condition_count() == best
    assert union.all()
    rs = default_rule(prune_rules(rules, table), table)
    metrics = evaluate_rules(rs, table.codes, table.classes)
    assert metrics.accuracy_train == 1.0


def test_xor_needs_two_conditions_everywhere():
    table = boolean_table(lambda a, b: a != b)
    for p in range(4):
        cls = int(table.classes[p])
        assert brute_force_min_conditions(table, cls, p) == 2
    for r in extract_rules(table):
        assert r.condition_count() == 2


def test_single_class_table_yields_one_unconditional_rule():
    table = Table(codes=np.array([[0, 1], [1, 0], [1, 1]]),
                  classes=np.array([0, 0, 0]), n_codes=(2, 2),
                  ordinal=(False, False), n_classes=1)
    rules = extract_rules(table)
    assert len(rules) == 1
    assert rules[0].conditions == ()
    assert rules[0].covered == rules[0].correct == 3


# ---------------------------------------------------------------------------
# coverage primitives
# ---------------------------------------------------------------------------

def test_rule_covers_uses_inclusive_bounds():
    rule = Rule(conditions=(Condition(0, 1, 3),), class_index=0)
    for code, expected in [(0, False), (1, True), (2, True), (3, True), (4, False)]:
        assert rule_covers(rule, np.array([code])) is expected
    assert rule_covers(Rule(conditions=(), class_index=0), np.array([7])) is True


def test_with_stats_counts_coverage_and_correctness():
    table = boolean_table(lambda a, b: a and b)
    rule = with_stats(Rule((Condition(0, 1, 1),), class_index=1), table)
    assert rule.covered == 2   # (1,0) and (1,1)
    assert rule.correct == 1   # only (1,1)


def test_cluster_rules_orders_by_class_and_drops_duplicates():
    r_a = Rule((Condition(0, 0, 0),), class_index=1)
    r_b = Rule((Condition(1, 1, 1),), class_index=0)
    out = cluster_rules([r_a, r_b, r_a])
    assert out == [r_b, r_a]


def test_empty_table_is_rejected():
    with pytest.raises(RuleExtractionError, match="empty table"):
        Table(codes=np.zeros((0, 2), dtype=int), classes=np.zeros(0, dtype=int),
              n_codes=(2, 2), ordinal=(False, False), n_classes=2)


# ---------------------------------------------------------------------------
# randomized invariants
# ---------------------------------------------------------------------------

@st.composite
def random_tables(draw):
    m = draw(st.integers(1, 4))
    n_codes = tuple(draw(st.integers(2, 3)) for _ in range(m))
    n_classes = draw(st.integers(2, 3))
    n = draw(st.integers(1, 30))
    codes = [[draw(st.integers(0, n_codes[a] - 1)) for a in range(m)]
             for _ in range(n)]
    classes = [draw(st.integers(0, n_classes - 1)) for _ in range(n)]
    ordinal = tuple(draw(st.booleans()) for _ in range(m))
    return Table(codes=np.array(codes), classes=np.array(classes),
                 n_codes=n_codes, ordinal=ordinal, n_classes=n_classes)


def collision_groups(table):
    groups = {}
    for i, row in enumerate(table.codes):
        groups.setdefault(tuple(int(v) for v in row), []).append(i)
    return groups


@settings(max_examples=150, deadline=None)
@given(table=random_tables())
def test_extraction_covers_everything_consistently(table):
    rules = extract_rules(table)
    union = np.zeros(len(table.codes), dtype=bool)
    for r in rules:
        mask = covered_mask(r, table.codes)
        allowed = table.allowed_mask(r.class_index)
        assert not (mask & ~allowed).any()
        assert r.correct >= 1
        union |= mask
    assert union.all()


@settings(max_examples=150, deadline=None)
@given(table=random_tables())
def test_rule_error_stays_within_the_inconsistency_budget(table):
    rules = prune_rules(extract_rules(table), table, noise_floor=1)
    rs = default_rule(rules, table)
    acc = evaluate_rules(rs, table.codes, table.classes).accuracy_train
    assert acc >= 1.0 - table.inconsistency_rate() - 1e-9


@settings(max_examples=150, deadline=None)
@given(table=random_tables())
def test_only_collision_patterns_see_cross_class_coverage(table):
    rules = prune_rules(extract_rules(table), table, noise_floor=1)
    groups = collision_groups(table)
    mixed = {i for members in groups.values()
             if len({int(table.classes[j]) for j in members}) > 1
             for i in members}
    masks = [(r.class_index, covered_mask(r, table.codes)) for r in rules]
    for p in range(len(table.codes)):
        classes_here = {cls for cls, mask in masks if mask[p]}
        if len(classes_here) > 1:
            assert p in mixed


@settings(max_examples=100, deadline=None)
@given(table=random_tables(), seed=st.integers(0, 2 ** 16))
def test_classification_ignores_rule_order(table, seed):
    rules = prune_rules(extract_rules(table), table, noise_floor=1)
    rs = default_rule(rules, table)
    shuffled = list(rs.rules)
    np.random.default_rng(seed).shuffle(shuffled)
    a = classify_all(list(rs.rules), rs.default_class, table.codes)
    b = classify_all(shuffled, rs.default_class, table.codes)
    assert np.array_equal(a, b)


def _at_least_as_general(a, b):
    """a's conditions are all implied by b's conditions."""
    bc = {c.attribute: c for c in b.conditions}
    return all(c.attribute in bc
               and bc[c.attribute].lo >= c.lo and bc[c.attribute].hi <= c.hi
               for c in a.conditions)


@settings(max_examples=100, deadline=None)
@given(table=random_tables())
def test_pruned_rules_are_subsumption_free(table):
    rules = prune_rules(extract_rules(table), table, noise_floor=1)
    masks = [covered_mask(r, table.codes) for r in rules]
    for i, j in itertools.permutations(range(len(rules)), 2):
        if rules[i].class_index != rules[j].class_index:
            continue
        subsumes = (_at_least_as_general(rules[i], rules[j])
                    and not (masks[j] & ~masks[i]).any())
        assert not subsumes


@settings(max_examples=100, deadline=None)
@given(table=random_tables())
def test_pruning_never_loses_own_class_coverage(table):
    extracted = extract_rules(table)
    pruned = prune_rules(extracted, table, noise_floor=1)
    for cls in range(table.n_classes):
        before = np.zeros(len(table.codes), dtype=bool)
        for r in extracted:
            if r.class_index == cls:
                before |= covered_mask(r, table.codes)
        after = np.zeros(len(table.codes), dtype=bool)
        for r in pruned:
            if r.class_index == cls:
                after |= covered_mask(r, table.codes)
        own = table.classes == cls
        assert not (before & own & ~after).any()


# ---------------------------------------------------------------------------
# default rule
# ---------------------------------------------------------------------------

def test_default_rule_takes_majority_of_uncovered_patterns():
    table = Table(codes=np.array([[0], [1], [2], [2]]),
                  classes=np.array([0, 1, 1, 1]), n_codes=(3,),
                  ordinal=(False,), n_classes=2)
    rule = with_stats(Rule((Condition(0, 0, 0),), class_index=0), table)
    rs = default_rule([rule], table)
    assert rs.default_class == 1
    assert rs.rules == (rule,)


def test_default_rule_removes_rules_made_redundant_by_the_default():
    table = Table(codes=np.array([[0], [1], [1]]),
                  classes=np.array([0, 1, 1]), n_codes=(2,),
                  ordinal=(False,), n_classes=2)
    r0 = with_stats(Rule((Condition(0, 0, 0),), class_index=0), table)
    r1 = with_stats(Rule((Condition(0, 1, 1),), class_index=1), table)
    rs = default_rule([r0, r1], table)
    # everything is covered; the majority default absorbs its own rules
    assert rs.default_class == 1
    assert rs.rules == (r0,)


def test_default_rule_tie_falls_back_to_whole_table_majority():
    # uncovered patterns tie 1-1; the whole table leans toward class 1
    table = Table(codes=np.array([[0], [1], [2], [2], [2]]),
                  classes=np.array([0, 1, 1, 1, 1]), n_codes=(3,),
                  ordinal=(False,), n_classes=2)
    rule = with_stats(Rule((Condition(0, 2, 2),), class_index=1), table)
    rs = default_rule([rule], table)
    assert rs.default_class == 1


def test_classification_with_no_rules_uses_default_everywhere():
    codes = np.array([[0], [1]])
    assert list(classify_all([], 3, codes)) == [3, 3]


# ---------------------------------------------------------------------------
# layer merging
# ---------------------------------------------------------------------------

def test_merge_substitutes_hidden_conditions_with_input_rules():
    hidden = [Rule((Condition(0, 0, 0), Condition(1, 1, 1)), class_index=2)]
    input_rules = {
        (0, 0): [Rule((Condition(0, 0, 1),), class_index=0),
                 Rule((Condition(1, 2, 2),), class_index=0)],
        (1, 1): [Rule((Condition(0, 1, 3),), class_index=1)],
    }
    merged = merge_layers(hidden, input_rules)
    assert len(merged) == 2
    assert all(r.class_index == 2 for r in merged)
    # first conjunct: [0,1] on attr 0 intersected with [1,3] -> [1,1]
    assert merged[0].conditions == (Condition(0, 1, 1),)
    # second conjunct: attr 1 = 2 together with attr 0 in [1,3]
    assert merged[1].conditions == (Condition(0, 1, 3), Condition(1, 2, 2))


def test_merge_drops_contradictory_conjuncts():
    hidden = [Rule((Condition(0, 0, 0), Condition(1, 0, 0)), class_index=0)]
    input_rules = {
        (0, 0): [Rule((Condition(0, 0, 0),), class_index=0)],
        (1, 0): [Rule((Condition(0, 2, 2),), class_index=0)],
    }
    assert merge_layers(hidden, input_rules) == []


def test_merge_with_unconditional_input_rule_keeps_the_other_conjunct():
    hidden = [Rule((Condition(0, 0, 0),), class_index=1)]
    input_rules = {(0, 0): [Rule((), class_index=0)]}
    merged = merge_layers(hidden, input_rules)
    assert merged == [Rule((), class_index=1)]


def test_merge_requires_an_explanation_for_every_hidden_code():
    hidden = [Rule((Condition(0, 3, 3),), class_index=0)]
    with pytest.raises(RuleExtractionError, match="no input-layer rules"):
        merge_layers(hidden, {})
    with pytest.raises(RuleExtractionError, match="no input-layer rules"):
        merge_layers(hidden, {(0, 3): []})


def test_merge_rejects_interval_hidden_conditions():
    hidden = [Rule((Condition(0, 0, 1),), class_index=0)]
    with pytest.raises(RuleExtractionError, match="single cluster codes"):
        merge_layers(hidden, {(0, 0): [Rule((), class_index=0)]})


# ---------------------------------------------------------------------------
# serialization and metrics
# ---------------------------------------------------------------------------

def test_rule_set_round_trip():
    rs = RuleSet(rules=(Rule((Condition(0, 1, 2),), class_index=1,
                             covered=5, correct=4),),
                 default_class=0)
    again = RuleSet.from_dict(rs.to_dict())
    assert again == rs
    with pytest.raises(RuleExtractionError, match="unsupported rule format"):
        RuleSet.from_dict({"format": "nope", "rules": [], "default_class": 0})


def test_evaluate_rules_hand_example():
    table = boolean_table(lambda a, b: a and b)
    rule = with_stats(Rule((Condition(0, 1, 1), Condition(1, 1, 1)),
                           class_index=1), table)
    rs = RuleSet(rules=(rule,), default_class=0)
    m = evaluate_rules(rs, table.codes, table.classes)
    assert m.accuracy_train == 1.0
    assert m.accuracy_test == 1.0          # defaults to the train figure
    assert m.rule_count == 1
    assert m.rule_count_with_default == 2
    assert m.avg_conditions == 2.0
    test_codes = np.array([[1, 1], [0, 0]])
    m2 = evaluate_rules(rs, table.codes, table.classes,
                        test_codes, np.array([1, 0]))
    assert m2.accuracy_test == 1.0
    m3 = evaluate_rules(rs, table.codes, table.classes,
                        test_codes, np.array([0, 1]))
    assert m3.accuracy_test == 0.0


def test_table_inconsistency_rate_matches_hand_count():
    table = Table(codes=np.array([[0], [0], [1]]),
                  classes=np.array([0, 1, 1]), n_codes=(2,),
                  ordinal=(False,), n_classes=2)
    assert table.inconsistency_rate() == pytest.approx(1 / 3)
