"""Sequential-covering rule extraction over discrete code tables.

Rules are conjunctions of per-attribute code intervals.  Extraction covers
one unmarked pattern at a time with the shortest consistent conjunction,
rule pruning generalizes and removes noise/subsumed rules, and a default
class catches whatever the surviving rules leave uncovered.  The same
machinery runs over hidden-node cluster codes and over discretized inputs;
:func:`merge_layers` substitutes the hidden-layer conditions by their
input-layer explanations and expands to DNF.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np


class RuleExtractionError(RuntimeError):
    pass


@dataclass(frozen=True)
class Condition:
    """Inclusive code interval [lo, hi] on one attribute.

    Ordinal attributes may widen; categorical (and hidden-cluster) attributes
    always have lo == hi.
    """
    attribute: int
    lo: int
    hi: int

    def holds(self, code: int) -> bool:
        return self.lo <= code <= self.hi


@dataclass(frozen=True)
class Rule:
    conditions: tuple[Condition, ...]   # sorted by attribute, one per attribute
    class_index: int
    covered: int = 0
    correct: int = 0

    def condition_count(self) -> int:
        return len(self.conditions)

    def key(self):
        return (self.class_index,
                tuple((c.attribute, c.lo, c.hi) for c in self.conditions))

    def to_dict(self) -> dict:
        return {"class_index": self.class_index,
                "covered": self.covered, "correct": self.correct,
                "conditions": [
                    {"attribute": c.attribute, "lo": c.lo, "hi": c.hi}
                    for c in self.conditions]}

    @classmethod
    def from_dict(cls, d: dict) -> "Rule":
        conds = tuple(sorted(
            (Condition(c["attribute"], c["lo"], c["hi"]) for c in d["conditions"]),
            key=lambda c: c.attribute))
        return cls(conditions=conds, class_index=d["class_index"],
                   covered=d.get("covered", 0), correct=d.get("correct", 0))


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[Rule, ...]
    default_class: int

    def to_dict(self) -> dict:
        return {"format": "reann-rules-v1",
                "default_class": self.default_class,
                "rules": [r.to_dict() for r in self.rules]}

    @classmethod
    def from_dict(cls, d: dict) -> "RuleSet":
        if d.get("format") != "reann-rules-v1":
            raise RuleExtractionError(f"unsupported rule format {d.get('format')!r}")
        return cls(rules=tuple(Rule.from_dict(r) for r in d["rules"]),
                   default_class=d["default_class"])


@dataclass(frozen=True)
class RuleMetrics:
    rule_count: int            # default rule excluded
    rule_count_with_default: int
    avg_conditions: float      # over non-default rules
    accuracy_train: float
    accuracy_test: float

    def to_dict(self) -> dict:
        return {"rule_count": self.rule_count,
                "rule_count_with_default": self.rule_count_with_default,
                "avg_conditions": self.avg_conditions,
                "accuracy_train": self.accuracy_train,
                "accuracy_test": self.accuracy_test}


@dataclass
class Table:
    """A fully coded pattern table with class labels."""
    codes: np.ndarray            # (n, m) int
    classes: np.ndarray          # (n,) int
    n_codes: tuple[int, ...]     # codes per attribute
    ordinal: tuple[bool, ...]    # widening allowed per attribute
    n_classes: int
    _majority: dict = field(default=None, repr=False)

    def __post_init__(self):
        self.codes = np.asarray(self.codes, dtype=int)
        self.classes = np.asarray(self.classes, dtype=int)
        if len(self.codes) == 0:
            raise RuleExtractionError("empty table")

    def group_majority(self) -> dict[tuple, int]:
        """Majority class per identical code vector (ties: lowest index)."""
        if self._majority is None:
            groups: dict[tuple, np.ndarray] = {}
            for row, cls in zip(self.codes, self.classes):
                key = tuple(int(v) for v in row)
                if key not in groups:
                    groups[key] = np.zeros(self.n_classes, dtype=int)
                groups[key][cls] += 1
            self._majority = {k: int(v.argmax()) for k, v in groups.items()}
        return self._majority

    def allowed_mask(self, class_index: int) -> np.ndarray:
        """Patterns a rule of ``class_index`` may cover: its own class, plus
        other-class patterns inside collision groups whose majority is
        ``class_index`` (the inconsistency allowance)."""
        maj = self.group_majority()
        own = self.classes == class_index
        coll = np.fromiter(
            (maj[tuple(int(v) for v in row)] == class_index for row in self.codes),
            dtype=bool, count=len(self.codes))
        return own | coll

    def inconsistency_rate(self) -> float:
        groups: dict[tuple, dict] = {}
        for row, cls in zip(self.codes, self.classes):
            key = tuple(int(v) for v in row)
            groups.setdefault(key, {})
            groups[key][int(cls)] = groups[key].get(int(cls), 0) + 1
        bad = sum(sum(g.values()) - max(g.values()) for g in groups.values())
        return bad / len(self.classes)


# ---------------------------------------------------------------------------
# coverage
# ---------------------------------------------------------------------------

def rule_covers(rule: Rule, pattern: np.ndarray) -> bool:
    """True iff every condition holds; the empty conjunction holds vacuously."""
    return all(c.holds(int(pattern[c.attribute])) for c in rule.conditions)


def covered_mask(rule: Rule, codes: np.ndarray) -> np.ndarray:
    mask = np.ones(len(codes), dtype=bool)
    for c in rule.conditions:
        col = codes[:, c.attribute]
        mask &= (col >= c.lo) & (col <= c.hi)
    return mask


def with_stats(rule: Rule, table: Table) -> Rule:
    m = covered_mask(rule, table.codes)
    return replace(rule, covered=int(m.sum()),
                   correct=int((table.classes[m] == rule.class_index).sum()))


# ---------------------------------------------------------------------------
# Step 1: covering
# ---------------------------------------------------------------------------

def _conditions_sorted(conds: dict[int, tuple[int, int]]) -> tuple[Condition, ...]:
    return tuple(Condition(a, lo, hi)
                 for a, (lo, hi) in sorted(conds.items()))


def _generalize(conds: dict, class_index: int, table: Table,
                acceptable) -> dict:
    """Greedily weaken a conjunction while ``acceptable(mask)`` stays true.

    Moves: drop a condition, or (ordinal attributes) widen one end of its
    interval by one code.  The least discriminating conditions are weakened
    first — fewest disallowed patterns excluded by the condition on its own —
    so the most discriminating conditions are kept longest; ties keep the
    lowest-indexed attribute.
    """
    allowed = table.allowed_mask(class_index)

    def mask_for(c: dict) -> np.ndarray:
        m = np.ones(len(table.codes), dtype=bool)
        for a, (lo, hi) in c.items():
            col = table.codes[:, a]
            m &= (col >= lo) & (col <= hi)
        return m

    def excluded_alone(a, lo, hi) -> int:
        col = table.codes[:, a]
        return int((~((col >= lo) & (col <= hi)) & ~allowed).sum())

    def step(conds):
        """Attempt one weakening move; None when no move is acceptable."""
        order = sorted((excluded_alone(a, lo, hi), -a)
                       for a, (lo, hi) in conds.items())
        for _, na in order:
            a = -na
            trial = {k: v for k, v in conds.items() if k != a}
            if acceptable(mask_for(trial)):
                return trial
            if not table.ordinal[a]:
                continue
            lo, hi = conds[a]
            if lo > 0:
                t2 = dict(conds)
                t2[a] = (lo - 1, hi)
                if acceptable(mask_for(t2)):
                    return t2
            if hi < table.n_codes[a] - 1:
                t2 = dict(conds)
                t2[a] = (lo, hi + 1)
                if acceptable(mask_for(t2)):
                    return t2
        return None

    while True:
        nxt = step(conds)
        if nxt is None:
            break
        conds = nxt
        # a full-range interval is no condition at all
        for a in list(conds):
            if table.ordinal[a] and conds[a] == (0, table.n_codes[a] - 1):
                del conds[a]
    return conds


def extract_rules(table: Table) -> list[Rule]:
    """Sequential covering: one shortest consistent conjunction per seed.

    The rule's class is the majority class of the seed's code-vector group
    (the seed's own class when it is part of the majority), so that covering
    an inconsistent group never exceeds the group's unavoidable error.
    """
    n = len(table.codes)
    marked = np.zeros(n, dtype=bool)
    maj = table.group_majority()
    rules: list[Rule] = []
    while not marked.all():
        seed = int(np.argmin(marked))
        row = table.codes[seed]
        key = tuple(int(v) for v in row)
        cls = maj[key]
        if table.classes[seed] == cls:
            cls = int(table.classes[seed])
        allowed = table.allowed_mask(cls)
        conds = {a: (int(row[a]), int(row[a])) for a in range(table.codes.shape[1])}

        def acceptable(mask):
            return not (mask & ~allowed).any()

        conds = _generalize(conds, cls, table, acceptable)
        rule = with_stats(Rule(_conditions_sorted(conds), cls), table)
        rules.append(rule)
        marked |= covered_mask(rule, table.codes)
    return rules


# ---------------------------------------------------------------------------
# Steps 2-3: cluster and prune
# ---------------------------------------------------------------------------

def cluster_rules(rules: list[Rule]) -> list[Rule]:
    """Group rules by class (class-index order) and drop exact duplicates."""
    seen = set()
    out = []
    for cls in sorted({r.class_index for r in rules}):
        for r in rules:
            if r.class_index != cls or r.key() in seen:
                continue
            seen.add(r.key())
            out.append(r)
    return out


def _more_general(a: Rule, b: Rule) -> bool:
    """True when a's conditions are implied by b's (a is at least as general)."""
    bc = {c.attribute: c for c in b.conditions}
    for c in a.conditions:
        other = bc.get(c.attribute)
        if other is None or other.lo < c.lo or other.hi > c.hi:
            return False
    return True


def _drop_subsumed(rules: list[Rule], table: Table) -> list[Rule]:
    masks = [covered_mask(r, table.codes) for r in rules]
    keep = [True] * len(rules)
    for i, j in itertools.permutations(range(len(rules)), 2):
        if not (keep[i] and keep[j]):
            continue
        if rules[i].class_index != rules[j].class_index or i == j:
            continue
        # i subsumes j: i is more general and covers everything j covers
        if _more_general(rules[i], rules[j]) and not (masks[j] & ~masks[i]).any():
            keep[j] = False
    return [r for r, k in zip(rules, keep) if k]


def _drop_redundant(rules: list[Rule], table: Table) -> list[Rule]:
    """Keep a minimal cover: a rule is redundant when every pattern of its own
    class that it covers is already covered by kept rules of that class.
    Candidates are ranked by correct coverage (strongest first), then brevity,
    so the order the rules arrived in does not matter."""
    order = sorted(range(len(rules)),
                   key=lambda i: (-rules[i].correct, rules[i].condition_count(),
                                  rules[i].class_index, rules[i].key()))
    masks = [covered_mask(r, table.codes) for r in rules]
    kept: list[int] = []
    class_cover: dict[int, np.ndarray] = {}
    for i in order:
        cls = rules[i].class_index
        have = class_cover.get(cls)
        if have is None:
            have = np.zeros(len(table.codes), dtype=bool)
        if (masks[i] & (table.classes == cls) & ~have).any():
            kept.append(i)
            class_cover[cls] = have | masks[i]
    return [rules[i] for i in sorted(kept)]


def prune_rules(rules: list[Rule], table: Table, noise_floor: int = None,
                extra_error_allowance: int = 0) -> list[Rule]:
    """Drop subsumed rules, generalize the survivors, drop noise rules.

    ``noise_floor`` is the minimum correct-coverage a rule must reach
    (default 2, or 1 for tables under 25 patterns).  A positive
    ``extra_error_allowance`` relaxes generalization: a weakened rule may
    admit up to that many disallowed patterns.
    """
    if noise_floor is None:
        noise_floor = 2 if len(table.codes) >= 25 else 1
    rules = [with_stats(r, table) for r in cluster_rules(rules)]
    rules = _drop_subsumed(rules, table)

    out = []
    for r in rules:
        allowed = table.allowed_mask(r.class_index)
        base_bad = int((covered_mask(r, table.codes) & ~allowed).sum())
        budget = base_bad + extra_error_allowance

        def acceptable(mask, budget=budget, allowed=allowed):
            return int((mask & ~allowed).sum()) <= budget

        conds = {c.attribute: (c.lo, c.hi) for c in r.conditions}
        conds = _generalize(conds, r.class_index, table, acceptable)
        out.append(with_stats(Rule(_conditions_sorted(conds), r.class_index), table))

    out = [r for r in out if r.correct >= noise_floor]
    out = _drop_subsumed(cluster_rules(out), table)
    return _drop_redundant(out, table)


# ---------------------------------------------------------------------------
# Steps 4-5: default rule
# ---------------------------------------------------------------------------

def _classify_pattern(rules, default_class, pattern):
    hits = [r for r in rules if rule_covers(r, pattern)]
    if not hits:
        return default_class
    classes = {r.class_index for r in hits}
    if len(classes) == 1:
        return hits[0].class_index
    # conflicting coverage: defect, fall back to the strongest rule
    best = max(hits, key=lambda r: (r.correct, -r.class_index))
    return best.class_index


def classify_all(rules, default_class, codes: np.ndarray) -> np.ndarray:
    return np.fromiter(
        (_classify_pattern(rules, default_class, row) for row in codes),
        dtype=int, count=len(codes))


def default_rule(rules: list[Rule], table: Table) -> RuleSet:
    """Pick the default class from uncovered patterns, then drop rules of the
    default class whose removal changes no classification."""
    covered = np.zeros(len(table.codes), dtype=bool)
    for r in rules:
        covered |= covered_mask(r, table.codes)
    pool = table.classes[~covered] if (~covered).any() else table.classes
    counts = np.bincount(pool, minlength=table.n_classes)
    best = counts.max()
    tied = np.flatnonzero(counts == best)
    if len(tied) > 1 and (~covered).any():
        # tie among uncovered: fall back to the whole-reference majority
        counts = np.bincount(table.classes, minlength=table.n_classes)
        best = counts.max()
        tied = np.flatnonzero(counts == best)
    default = int(tied[0])

    rules = list(rules)
    baseline = classify_all(rules, default, table.codes)
    i = 0
    while i < len(rules):
        if rules[i].class_index != default:
            i += 1
            continue
        trial = rules[:i] + rules[i + 1:]
        if np.array_equal(classify_all(trial, default, table.codes), baseline):
            rules = trial
        else:
            i += 1
    return RuleSet(rules=tuple(rules), default_class=default)


# ---------------------------------------------------------------------------
# layer merging
# ---------------------------------------------------------------------------

def merge_layers(hidden_rules: list[Rule],
                 input_rules: dict[tuple[int, int], list[Rule]]) -> list[Rule]:
    """Substitute hidden-layer conditions by their input-layer rules.

    Each hidden condition (node h = cluster code c) becomes the disjunction
    of input_rules[(h, c)]; the conjunction distributes into DNF and each
    conjunct merges per-attribute intervals, dropping contradictions.
    """
    merged: list[Rule] = []
    seen = set()
    for hr in hidden_rules:
        groups = []
        for cond in hr.conditions:
            if cond.lo != cond.hi:
                raise RuleExtractionError(
                    "hidden conditions must be single cluster codes")
            key = (cond.attribute, cond.lo)
            if key not in input_rules or not input_rules[key]:
                raise RuleExtractionError(
                    f"no input-layer rules for hidden node {cond.attribute} "
                    f"cluster code {cond.lo}")
            groups.append(input_rules[key])
        for combo in itertools.product(*groups) if groups else [()]:
            conds: dict[int, tuple[int, int]] = {}
            ok = True
            for part in combo:
                for c in part.conditions:
                    lo, hi = conds.get(c.attribute, (c.lo, c.hi))
                    lo, hi = max(lo, c.lo), min(hi, c.hi)
                    if lo > hi:
                        ok = False
                        break
                    conds[c.attribute] = (lo, hi)
                if not ok:
                    break
            if not ok:
                continue
            rule = Rule(_conditions_sorted(conds), hr.class_index)
            if rule.key() not in seen:
                seen.add(rule.key())
                merged.append(rule)
    return merged


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def evaluate_rules(rs: RuleSet, train_codes: np.ndarray, train_classes,
                   test_codes: np.ndarray = None, test_classes=None) -> RuleMetrics:
    pred = classify_all(rs.rules, rs.default_class, train_codes)
    acc_train = float(np.mean(pred == np.asarray(train_classes)))
    if test_codes is not None and len(test_codes):
        pred_t = classify_all(rs.rules, rs.default_class, test_codes)
        acc_test = float(np.mean(pred_t == np.asarray(test_classes)))
    else:
        acc_test = acc_train
    n = len(rs.rules)
    avg = (sum(r.condition_count() for r in rs.rules) / n) if n else 0.0
    return RuleMetrics(rule_count=n, rule_count_with_default=n + 1,
                       avg_conditions=avg, accuracy_train=acc_train,
                       accuracy_test=acc_test)
