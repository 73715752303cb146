"""Human-readable rendering of rule sets over the original attributes."""
from __future__ import annotations

from .dataset import CATEGORICAL, Dataset, DiscretizedView
from .rex import Condition, Rule, RuleSet


def _display_value(train: Dataset, attribute: int, raw_value: float) -> str:
    schema = train.schema
    spec = schema.attributes[attribute]
    if schema.display == "normalized":
        lo, hi = train.normalization_map[attribute]
        v = 0.0 if hi == lo else (raw_value - lo) / (hi - lo)
    else:
        v = raw_value
    return f"{round(v, spec.precision):.{spec.precision}f}"


def render_condition(cond: Condition, train: Dataset, view: DiscretizedView) -> str:
    schema = train.schema
    spec = schema.attributes[cond.attribute]
    label = f"{spec.name} (A{cond.attribute + 1})"
    if spec.kind == CATEGORICAL:
        if cond.lo == cond.hi:
            return f"{label} = {spec.domain[cond.lo]}"
        cats = ", ".join(spec.domain[c] for c in range(cond.lo, cond.hi + 1))
        return f"{label} in {{{cats}}}"
    display = view.cut_display[cond.attribute]
    n_max = view.n_codes[cond.attribute] - 1
    parts = []
    if cond.lo > 0:
        parts.append(f"{label} > {_display_value(train, cond.attribute, display[cond.lo - 1])}")
    if cond.hi < n_max:
        parts.append(f"{label} <= {_display_value(train, cond.attribute, display[cond.hi])}")
    return " and ".join(parts) if parts else f"{label} = any"


def render_rule(rule: Rule, train: Dataset, view: DiscretizedView) -> str:
    cls = train.schema.class_names[rule.class_index]
    if not rule.conditions:
        return f"If (always), then {cls}"
    conds = " and ".join(render_condition(c, train, view) for c in rule.conditions)
    return f"If {conds}, then {cls}"


def render_rule_set(rs: RuleSet, train: Dataset, view: DiscretizedView) -> str:
    lines = []
    for i, rule in enumerate(rs.rules, start=1):
        lines.append(f"Rule {i}: {render_rule(rule, train, view)}")
    lines.append(f"Default Rule: {train.schema.class_names[rs.default_class]}")
    return "\n".join(lines)
