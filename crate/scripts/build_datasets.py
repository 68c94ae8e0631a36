#!/usr/bin/env python3
"""Rebuild the vendored benchmark files under data/.

Sources (all offline-installable):
  * heart_scale      -- shipped inside the `liblinear` crate (liblinear/heart_scale)
  * agaricus.txt.*   -- shipped inside the `xgboost-sys` crate (xgboost/demo/data)
                        train + test concatenated gives the full 8124-row mushroom set
  * KEEL raw files   -- shipped inside the `keel-ds` PyPI wheel

KEEL tables are converted to LIBSVM text: numeric columns are min-max scaled to
[-1, 1] (the svm-scale default), nominal columns are coded by their sorted
category rank and then scaled the same way. Zero values are omitted.

Usage:
  pip install keel-ds
  python3 scripts/build_datasets.py --heart-scale PATH --agaricus-dir DIR [--out data]
"""

import argparse
import os
import shutil

import keel_ds

KEEL_RAW = os.path.join(os.path.dirname(keel_ds.__file__), "data", "balanced", "raw")

ACGT = {"A": 1.0, "C": 2.0, "G": 3.0, "T": 4.0}


def read_keel(name):
    with open(os.path.join(KEEL_RAW, name + ".dat")) as fh:
        rows = []
        for line in fh:
            line = line.strip()
            if not line or line.startswith("@"):
                continue
            rows.append([tok.strip() for tok in line.split(",")])
    return rows


def is_number(tok):
    try:
        float(tok)
        return True
    except ValueError:
        return False


def encode_columns(rows):
    """Maps every attribute column to floats: numbers as-is, nominals by sorted rank."""
    ncols = len(rows[0]) - 1
    out = [[0.0] * ncols for _ in rows]
    for c in range(ncols):
        col = [r[c] for r in rows]
        if all(is_number(v) for v in col):
            vals = [float(v) for v in col]
        else:
            cats = sorted(set(col))
            rank = {v: float(i) for i, v in enumerate(cats)}
            vals = [rank[v] for v in col]
        for i, v in enumerate(vals):
            out[i][c] = v
    return out


def scale(matrix):
    ncols = len(matrix[0])
    for c in range(ncols):
        lo = min(r[c] for r in matrix)
        hi = max(r[c] for r in matrix)
        for r in matrix:
            r[c] = 0.0 if hi == lo else -1.0 + 2.0 * (r[c] - lo) / (hi - lo)
    return matrix


def write_libsvm(path, labels, matrix):
    with open(path, "w") as fh:
        for y, row in zip(labels, matrix):
            feats = " ".join(
                f"{i + 1}:{v:.6g}" for i, v in enumerate(row) if abs(v) > 1e-12
            )
            fh.write(f"{y:+d} {feats}".rstrip() + "\n")


def build_keel(name, out, positive):
    rows = read_keel(name)
    labels = [1 if r[-1] == positive else -1 for r in rows]
    write_libsvm(out, labels, scale(encode_columns(rows)))
    return len(rows)


def build_splice(out):
    rows = read_keel("splice")
    # Drop sequences containing ambiguity codes (D, N, R, S); 3175 remain.
    rows = [r for r in rows if all(t in ACGT for t in r[:-1])]
    labels = [1 if r[-1] == "N" else -1 for r in rows]
    matrix = [[ACGT[t] for t in r[:-1]] for r in rows]
    write_libsvm(out, labels, scale(matrix))
    return len(rows)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--heart-scale", required=True)
    ap.add_argument("--agaricus-dir", required=True)
    ap.add_argument("--out", default="data")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    shutil.copyfile(args.heart_scale, os.path.join(args.out, "heart_scale"))
    with open(os.path.join(args.out, "mushrooms"), "w") as fh:
        for part in ("agaricus.txt.train", "agaricus.txt.test"):
            with open(os.path.join(args.agaricus_dir, part)) as src:
                fh.write(src.read())

    counts = {
        "breast-cancer_scale": build_keel("wisconsin", os.path.join(args.out, "breast-cancer_scale"), "4"),
        "diabetes_scale": build_keel("pima", os.path.join(args.out, "diabetes_scale"), "tested_positive"),
        "australian_scale": build_keel("australian", os.path.join(args.out, "australian_scale"), "1"),
        "german_scale": build_keel("german", os.path.join(args.out, "german_scale"), "1"),
        "splice_scale": build_splice(os.path.join(args.out, "splice_scale")),
    }
    for name, n in counts.items():
        print(f"{name}: {n} examples")


if __name__ == "__main__":
    main()
