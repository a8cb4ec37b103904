#!/usr/bin/env python3
"""Generate the bundled synthetic classification datasets.

egg_standin.csv: 14 features, 2 classes, labels from a logistic model.
eye_standin.csv: 26 features, 3 classes, labels from a softmax model.
"""

import argparse
from pathlib import Path

import numpy as np


def correlated_features(rng, n, d):
    g = rng.standard_normal((d, d))
    cov = g @ g.T / d + 0.2 * np.eye(d)
    return rng.multivariate_normal(np.zeros(d), cov, size=n)


def softmax_labels(rng, x, weights):
    logits = x @ weights
    logits -= logits.max(axis=1, keepdims=True)
    p = np.exp(logits)
    p /= p.sum(axis=1, keepdims=True)
    u = rng.random(len(x))[:, None]
    return (u > np.cumsum(p, axis=1)).sum(axis=1)


def write(path, x, labels, class_names):
    d = x.shape[1]
    with open(path, "w") as f:
        f.write(",".join([f"f{j}" for j in range(d)] + ["label"]) + "\n")
        for row, label in zip(x, labels):
            f.write(",".join(f"{v:.6f}" for v in row) + f",{class_names[label]}\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data")
    ap.add_argument("--seed", type=int, default=20240531)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    args.out.mkdir(parents=True, exist_ok=True)

    x = correlated_features(rng, 1500, 14)
    w = rng.standard_normal(14) * 0.8
    labels = (rng.random(1500) < 1.0 / (1.0 + np.exp(-x @ w))).astype(int)
    write(args.out / "egg_standin.csv", x, labels, ["closed", "open"])

    x = correlated_features(rng, 1800, 26)
    w = rng.standard_normal((26, 3)) * 0.5
    labels = softmax_labels(rng, x, w)
    write(args.out / "eye_standin.csv", x, labels, ["a", "b", "c"])


if __name__ == "__main__":
    main()
