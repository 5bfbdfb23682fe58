"""Regenerates the fixtures under testdata/. Output is deterministic."""

import json
import pathlib

import numpy as np

ROOT = pathlib.Path(__file__).resolve().parent.parent / "testdata"


def write_matrix(path, a):
    a = np.atleast_2d(a)
    with open(path, "w") as f:
        for row in a:
            f.write(",".join(repr(float(v)) for v in row) + "\n")


def write_instance(name, W, H, pure_sets, scenario):
    d = ROOT / name
    d.mkdir(parents=True, exist_ok=True)
    M = W @ H
    write_matrix(d / "M.csv", M)
    write_matrix(d / "W_true.csv", W)
    write_matrix(d / "H_true.csv", H)
    with open(d / "labels.csv", "w") as f:
        for t, cols in enumerate(pure_sets):
            for j in cols:
                f.write(f"{j},{t}\n")
    meta = {
        "scenario": scenario,
        "seed": 0,
        "eps": 0.0,
        "m": M.shape[0],
        "n": M.shape[1],
        "r": W.shape[1],
        "p_t": [len(s) for s in pure_sets],
        "S_t": pure_sets,
        "col_scale": [1.0] * M.shape[1],
    }
    (d / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")


def example_one():
    rng = np.random.default_rng(20240)
    W = rng.uniform(size=(20, 3))
    W /= W.sum(axis=0)
    H = np.array([
        [1, 1, 0, 0, 0, 0, 0.0, 0.5, 0.5],
        [0, 0, 1, 1, 1, 0, 0.5, 0.0, 0.5],
        [0, 0, 0, 0, 0, 1, 0.5, 0.5, 0.0],
    ])
    write_instance("blockmix", W, H, [[0, 1], [2, 3, 4], [5]], "blockmix")


def separable():
    rng = np.random.default_rng(7)
    r, n = 5, 15
    W = rng.uniform(size=(10, r))
    W /= W.sum(axis=0)
    vertices = [2, 5, 7, 11, 13]
    H = np.zeros((r, n))
    for t, j in enumerate(vertices):
        H[t, j] = 1.0
    for j in range(n):
        if j in vertices:
            continue
        while True:
            h = rng.dirichlet(np.ones(r))
            if h.max() < 0.7:
                break
        H[:, j] = h
    write_instance("separable", W, H, [[j] for j in vertices], "separable")


if __name__ == "__main__":
    example_one()
    separable()
