"""Benchmark dataset loading, normalization, splitting and input discretization.

Four small classification tables ship with the package (breast-cancer, iris,
diabetes, season).  Patterns keep both their raw attribute values and a
unit-interval normalized view; a separate :class:`DiscretizedView` maps
continuous/ordinal attributes onto class-boundary bins so that the rule
extractor can work over a finite code table.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Optional, Sequence

import numpy as np

CONTINUOUS = "continuous"
ORDINAL = "ordinal"
CATEGORICAL = "categorical"


class DatasetError(ValueError):
    """Raised for malformed sources, schema mismatches and bad splits."""


@dataclass(frozen=True)
class AttributeSpec:
    name: str
    kind: str  # continuous | ordinal | categorical
    # ordinal: (lo, hi) integer domain; categorical: tuple of category names;
    # continuous: None (bounds come from the data)
    domain: Optional[tuple] = None
    # number of decimals used when rendering thresholds for this attribute
    precision: int = 1


@dataclass(frozen=True)
class DatasetSchema:
    name: str
    attributes: tuple[AttributeSpec, ...]
    class_names: tuple[str, ...]
    missing_marker: str = "?"
    # "scale": divide ordinal values by the domain upper bound (fixed map);
    # "minmax": affine map fitted on the training split
    normalization: str = "minmax"
    # thresholds are displayed on this scale: "raw" or "normalized"
    display: str = "raw"

    def __post_init__(self):
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise DatasetError(f"duplicate attribute names in schema {self.name}")
        if not self.class_names or len(set(self.class_names)) != len(self.class_names):
            raise DatasetError(f"class names must be non-empty and unique in {self.name}")

    @property
    def attribute_count(self) -> int:
        return len(self.attributes)

    @property
    def class_count(self) -> int:
        return len(self.class_names)


@dataclass(frozen=True)
class Pattern:
    raw: np.ndarray
    normalized: np.ndarray
    class_index: int


@dataclass(frozen=True)
class Dataset:
    schema: DatasetSchema
    patterns: tuple[Pattern, ...]
    # per-attribute (lo, hi) affine map used for normalization; None until
    # normalize() has run
    normalization_map: Optional[tuple[tuple[float, float], ...]] = None

    def __len__(self) -> int:
        return len(self.patterns)

    @property
    def raw_matrix(self) -> np.ndarray:
        return np.array([p.raw for p in self.patterns])

    @property
    def normalized_matrix(self) -> np.ndarray:
        return np.array([p.normalized for p in self.patterns])

    @property
    def class_indices(self) -> np.ndarray:
        return np.array([p.class_index for p in self.patterns], dtype=int)


@dataclass(frozen=True)
class DiscretizedView:
    """Per-attribute cut points (raw units) plus the coded pattern table."""

    bin_edges: tuple[tuple[float, ...], ...]
    codes: np.ndarray  # (n_patterns, n_attributes) int
    # for each cut, the largest training value at or below it: this is the
    # value rendered in "attr <= v" conditions
    cut_display: tuple[tuple[float, ...], ...]
    n_codes: tuple[int, ...] = field(default=None)

    def __post_init__(self):
        if self.n_codes is None:
            object.__setattr__(
                self, "n_codes",
                tuple(len(e) + 1 for e in self.bin_edges))

    def code_pattern(self, ds: Dataset, schema: DatasetSchema) -> np.ndarray:
        """Code an arbitrary dataset's patterns with this view's edges."""
        raw = ds.raw_matrix
        out = np.zeros(raw.shape, dtype=int)
        for a, spec in enumerate(schema.attributes):
            if spec.kind == CATEGORICAL:
                out[:, a] = raw[:, a].astype(int)
            else:
                out[:, a] = np.searchsorted(np.asarray(self.bin_edges[a]), raw[:, a])
        return out


# ---------------------------------------------------------------------------
# bundled schemas
# ---------------------------------------------------------------------------

def _ordinal10(name):
    return AttributeSpec(name, ORDINAL, (1, 10), precision=1)


BREAST_CANCER_SCHEMA = DatasetSchema(
    name="breast-cancer",
    attributes=tuple(_ordinal10(n) for n in (
        "Clump thickness", "Uniformity of cell size", "Uniformity of cell shape",
        "Marginal adhesion", "Single epithelial cell size", "Bare nuclei",
        "Bland chromatin", "Normal nucleoli", "Mitosis")),
    class_names=("benign", "malignant"),
    normalization="scale",
    display="normalized",
)

IRIS_SCHEMA = DatasetSchema(
    name="iris",
    attributes=(
        AttributeSpec("Sepal-length", CONTINUOUS, precision=1),
        AttributeSpec("Sepal-width", CONTINUOUS, precision=1),
        AttributeSpec("Petal-length", CONTINUOUS, precision=1),
        AttributeSpec("Petal-width", CONTINUOUS, precision=1),
    ),
    class_names=("Iris-setosa", "Iris-versicolor", "Iris-virginica"),
)

DIABETES_SCHEMA = DatasetSchema(
    name="diabetes",
    attributes=(
        AttributeSpec("Number of times pregnant", CONTINUOUS, precision=2),
        AttributeSpec("Plasma glucose concentration", CONTINUOUS, precision=2),
        AttributeSpec("Diastolic blood pressure", CONTINUOUS, precision=2),
        AttributeSpec("Triceps skin fold thickness", CONTINUOUS, precision=2),
        AttributeSpec("Serum insulin", CONTINUOUS, precision=2),
        AttributeSpec("Body mass index", CONTINUOUS, precision=2),
        AttributeSpec("Diabetes pedigree function", CONTINUOUS, precision=2),
        AttributeSpec("Age", CONTINUOUS, precision=2),
    ),
    class_names=("tested_negative", "tested_positive"),
    display="normalized",
)

SEASON_SCHEMA = DatasetSchema(
    name="season",
    attributes=(
        AttributeSpec("Weather", CATEGORICAL, ("sunny", "rainy", "cloudy")),
        AttributeSpec("Tree", CATEGORICAL, ("green", "yellow", "leafless")),
        AttributeSpec("Temperature", CATEGORICAL, ("low", "medium", "high")),
    ),
    class_names=("spring", "summer", "autumn", "winter"),
)

BUILTIN_SCHEMAS = {
    s.name: s for s in
    (BREAST_CANCER_SCHEMA, IRIS_SCHEMA, DIABETES_SCHEMA, SEASON_SCHEMA)
}

# (examples, attributes, classes) expected for the bundled tables
BUILTIN_SHAPES = {
    "breast-cancer": (699, 9, 2),
    "iris": (150, 4, 3),
    "diabetes": (768, 8, 2),
    "season": (11, 3, 4),
}

# positional split sizes used by the bundled experiments
BUILTIN_TRAIN_COUNTS = {
    "breast-cancer": 350,
    "iris": 75,
    "diabetes": 384,
    "season": 11,
}


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------

def _parse_cell(token: str, spec: AttributeSpec, row_no: int) -> float:
    if spec.kind == CATEGORICAL:
        try:
            return float(spec.domain.index(token))
        except ValueError:
            raise DatasetError(
                f"row {row_no}: unknown category {token!r} for {spec.name}")
    try:
        return float(token)
    except ValueError:
        raise DatasetError(
            f"row {row_no}: unparseable value {token!r} for {spec.name}")


def load_dataset(source, schema: DatasetSchema) -> Dataset:
    """Load a delimiter-separated text source (path or lines) into a Dataset.

    One pattern per line, class label last.  Missing cells (the schema's
    missing marker) are imputed afterwards with the rounded mean of the
    attribute over the first ``train_count`` rows via :func:`impute_missing`;
    this function leaves them as NaN.
    """
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source) as fh:
            lines = fh.read().splitlines()
    else:
        lines = [ln.rstrip("\n") for ln in source]
    lines = [ln for ln in lines if ln.strip()]
    if not lines:
        raise DatasetError("no patterns")

    n_attr = schema.attribute_count
    patterns = []
    for i, line in enumerate(lines, start=1):
        tokens = [t.strip() for t in (line.split(",") if "," in line else line.split())]
        if len(tokens) != n_attr + 1:
            raise DatasetError(
                f"row {i}: expected {n_attr + 1} fields, got {len(tokens)}")
        label = tokens[-1]
        if label not in schema.class_names:
            raise DatasetError(f"row {i}: unknown class label {label!r}")
        raw = np.empty(n_attr)
        for a, tok in enumerate(tokens[:-1]):
            if tok == schema.missing_marker:
                raw[a] = np.nan
            else:
                raw[a] = _parse_cell(tok, schema.attributes[a], i)
        patterns.append(Pattern(raw=raw, normalized=raw.copy(),
                                class_index=schema.class_names.index(label)))
    return Dataset(schema=schema, patterns=tuple(patterns))


def impute_missing(ds: Dataset, train_count: int) -> Dataset:
    """Replace NaN cells with the attribute's rounded mean over the first
    ``train_count`` patterns."""
    raw = ds.raw_matrix
    if not np.isnan(raw).any():
        return ds
    fill = np.zeros(raw.shape[1])
    head = raw[:train_count]
    for a in range(raw.shape[1]):
        col = head[:, a]
        fill[a] = round(float(np.nanmean(col)))
    patterns = []
    for p in ds.patterns:
        r = p.raw.copy()
        miss = np.isnan(r)
        if miss.any():
            r[miss] = fill[miss]
        patterns.append(replace(p, raw=r, normalized=r.copy()))
    return replace(ds, patterns=tuple(patterns))


def load_builtin(name: str) -> Dataset:
    """Load one of the four bundled datasets, with missing values imputed."""
    if name not in BUILTIN_SCHEMAS:
        raise DatasetError(f"unknown bundled dataset {name!r}")
    schema = BUILTIN_SCHEMAS[name]
    with resources.files("reann.data").joinpath(f"{name}.csv").open() as fh:
        ds = load_dataset(fh, schema)
    ds = impute_missing(ds, BUILTIN_TRAIN_COUNTS[name])
    n, a, c = BUILTIN_SHAPES[name]
    if (len(ds), schema.attribute_count, schema.class_count) != (n, a, c):
        raise DatasetError(f"bundled dataset {name} has unexpected shape")
    return ds


# ---------------------------------------------------------------------------
# normalization and splitting
# ---------------------------------------------------------------------------

def fit_normalization(ds: Dataset) -> tuple[tuple[float, float], ...]:
    """Fit the per-attribute (lo, hi) map on ``ds`` (normally the train split)."""
    raw = ds.raw_matrix
    out = []
    for a, spec in enumerate(ds.schema.attributes):
        if spec.kind == CATEGORICAL:
            hi = max(len(spec.domain) - 1, 1)
            out.append((0.0, float(hi)))
        elif ds.schema.normalization == "scale" and spec.kind == ORDINAL:
            out.append((0.0, float(spec.domain[1])))
        else:
            lo, hi = float(raw[:, a].min()), float(raw[:, a].max())
            out.append((lo, hi))
    return tuple(out)


def normalize(ds: Dataset, norm_map=None) -> Dataset:
    """Populate the normalized view; out-of-range values clamp to [0, 1].

    With ``norm_map`` given (e.g. the training split's map) that map is
    applied; otherwise the map is fitted on ``ds`` itself.  Constant
    attributes normalize to 0.0.
    """
    if norm_map is None:
        norm_map = ds.normalization_map or fit_normalization(ds)
    patterns = []
    for p in ds.patterns:
        norm = np.empty_like(p.raw)
        for a, (lo, hi) in enumerate(norm_map):
            if hi == lo:
                norm[a] = 0.0
            else:
                norm[a] = min(1.0, max(0.0, (p.raw[a] - lo) / (hi - lo)))
        patterns.append(replace(p, normalized=norm))
    return replace(ds, patterns=tuple(patterns), normalization_map=norm_map)


def denormalize(ds: Dataset, attribute: int, value: float) -> float:
    lo, hi = ds.normalization_map[attribute]
    return lo + value * (hi - lo)


def split(ds: Dataset, train_count: int) -> tuple[Dataset, Dataset]:
    """Positional split: first ``train_count`` patterns train, rest test."""
    if train_count <= 0 or train_count >= len(ds):
        raise DatasetError(f"degenerate split: train_count={train_count} of {len(ds)}")
    return (replace(ds, patterns=ds.patterns[:train_count]),
            replace(ds, patterns=ds.patterns[train_count:]))


# ---------------------------------------------------------------------------
# input discretization
# ---------------------------------------------------------------------------

def _gini(counts: np.ndarray) -> float:
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts / n
    return float(1.0 - (p * p).sum())


def _boundary_cuts(values: np.ndarray, classes: np.ndarray, n_classes: int,
                   max_cuts: int) -> list[float]:
    """Class-boundary midpoints, impurity-ranked and capped at ``max_cuts``."""
    order = np.argsort(values, kind="stable")
    v, c = values[order], classes[order]
    distinct = np.unique(v)
    if len(distinct) < 2:
        return []
    # class histogram per distinct value
    hist = {}
    for val, cls in zip(v, c):
        hist.setdefault(val, np.zeros(n_classes, dtype=int))[cls] += 1
    candidates = []
    for lo, hi in zip(distinct[:-1], distinct[1:]):
        a, b = hist[lo], hist[hi]
        # boundary point: adjacent distinct values with different class mixes
        if np.array_equal(a != 0, b != 0) and (np.count_nonzero(a) == 1):
            continue
        candidates.append(0.5 * (lo + hi))
    if not candidates:
        return []
    total = np.zeros(n_classes, dtype=int)
    for cls in c:
        total[cls] += 1
    base = _gini(total)
    scored = []
    for cut in candidates:
        left = v <= cut
        lc = np.zeros(n_classes, dtype=int)
        for cls in c[left]:
            lc[cls] += 1
        rc = total - lc
        nl, nr = lc.sum(), rc.sum()
        gain = base - (nl * _gini(lc) + nr * _gini(rc)) / (nl + nr)
        scored.append((gain, cut))
    scored.sort(key=lambda t: (-t[0], t[1]))
    kept = sorted(cut for _, cut in scored[:max_cuts])
    return kept


def discretize_inputs(train: Dataset, bins_per_attribute: int = 5) -> DiscretizedView:
    """Build class-boundary bins on the training split.

    Continuous/ordinal attributes get at most ``bins_per_attribute - 1``
    cut points (in raw units), chosen among class-boundary midpoints by
    impurity reduction.  Categorical attributes pass through as codes.
    """
    if bins_per_attribute < 2:
        raise DatasetError("bins_per_attribute must be >= 2")
    raw = train.raw_matrix
    classes = train.class_indices
    n_classes = train.schema.class_count
    edges, displays = [], []
    for a, spec in enumerate(train.schema.attributes):
        if spec.kind == CATEGORICAL:
            edges.append(())
            displays.append(())
            continue
        cuts = _boundary_cuts(raw[:, a], classes, n_classes,
                              bins_per_attribute - 1)
        vals = raw[:, a]
        disp = tuple(float(vals[vals <= cut].max()) for cut in cuts)
        edges.append(tuple(cuts))
        displays.append(disp)
    codes = np.zeros(raw.shape, dtype=int)
    for a, spec in enumerate(train.schema.attributes):
        if spec.kind == CATEGORICAL:
            codes[:, a] = raw[:, a].astype(int)
        else:
            codes[:, a] = np.searchsorted(np.asarray(edges[a]), raw[:, a])
    n_codes = tuple(
        len(spec.domain) if spec.kind == CATEGORICAL else len(edges[a]) + 1
        for a, spec in enumerate(train.schema.attributes))
    return DiscretizedView(bin_edges=tuple(edges), codes=codes,
                           cut_display=tuple(displays), n_codes=n_codes)


def inconsistency_rate(codes: np.ndarray, classes: Sequence[int]) -> float:
    """Fraction of patterns that collide with differently-labelled duplicates.

    Patterns are grouped by identical code vectors; each group contributes
    its size minus its majority-class count.
    """
    classes = np.asarray(classes)
    groups: dict[tuple, dict[int, int]] = {}
    for row, cls in zip(codes, classes):
        key = tuple(int(x) for x in row)
        groups.setdefault(key, {})
        groups[key][int(cls)] = groups[key].get(int(cls), 0) + 1
    bad = sum(sum(g.values()) - max(g.values()) for g in groups.values())
    return bad / len(classes)
