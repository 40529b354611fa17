#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Convert Planetoid (ind.<name>.*) or Amazon (*.npz) exports into fracprop inputs.

Writes edges.txt (one "u v" pair per line), features.csv (headerless, one node
per row) and labels.csv ("node,class" rows) into the output directory.
"""
import argparse
import pickle
import sys
from pathlib import Path

import numpy as np
import scipy.sparse as sp


def _load_pickle(path):
    with open(path, "rb") as fh:
        if sys.version_info >= (3, 0):
            return pickle.load(fh, encoding="latin1")
        return pickle.load(fh)


def planetoid(root, name):
    parts = {k: _load_pickle(root / f"ind.{name}.{k}") for k in ("x", "y", "tx", "ty", "allx", "ally", "graph")}
    test_index = [int(line) for line in (root / f"ind.{name}.test.index").read_text().split()]
    test_sorted = np.sort(test_index)

    tx, ty = parts["tx"], parts["ty"]
    if name == "citeseer":
        # Some test ids are missing from the export; pad them with zero rows.
        full = range(test_sorted.min(), test_sorted.max() + 1)
        tx_ext = sp.lil_matrix((len(full), tx.shape[1]))
        tx_ext[test_sorted - test_sorted.min(), :] = tx
        ty_ext = np.zeros((len(full), ty.shape[1]))
        ty_ext[test_sorted - test_sorted.min(), :] = ty
        tx, ty = tx_ext, ty_ext

    features = sp.vstack((parts["allx"], tx)).tolil()
    features[test_index, :] = features[test_sorted, :]
    onehot = np.vstack((parts["ally"], ty))
    onehot[test_index, :] = onehot[test_sorted, :]

    n = features.shape[0]
    edges = set()
    for u, nbrs in parts["graph"].items():
        for v in nbrs:
            if u != v and u < n and v < n:
                edges.add((min(u, v), max(u, v)))
    labeled = onehot.sum(axis=1) > 0
    labels = [(i, int(onehot[i].argmax())) for i in range(n) if labeled[i]]
    return sorted(edges), features.toarray(), labels


def amazon(path):
    data = np.load(path, allow_pickle=True)
    adj = sp.csr_matrix((data["adj_data"], data["adj_indices"], data["adj_indptr"]), shape=data["adj_shape"])
    attr = sp.csr_matrix((data["attr_data"], data["attr_indices"], data["attr_indptr"]), shape=data["attr_shape"])
    coo = sp.triu(adj + adj.T, k=1).tocoo()
    edges = sorted(set(zip(coo.row.tolist(), coo.col.tolist())))
    labels = [(i, int(c)) for i, c in enumerate(data["labels"])]
    return edges, attr.toarray(), labels


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("source", type=Path, help="Planetoid directory or Amazon .npz file")
    parser.add_argument("--name", help="Planetoid dataset name (cora, citeseer, pubmed)")
    parser.add_argument("-o", "--out", type=Path, required=True)
    args = parser.parse_args()

    if args.source.suffix == ".npz":
        edges, features, labels = amazon(args.source)
    else:
        if not args.name:
            parser.error("--name is required for Planetoid directories")
        edges, features, labels = planetoid(args.source, args.name)

    args.out.mkdir(parents=True, exist_ok=True)
    with open(args.out / "edges.txt", "w") as fh:
        fh.writelines(f"{u} {v}\n" for u, v in edges)
    np.savetxt(args.out / "features.csv", features, delimiter=",", fmt="%.17g")
    with open(args.out / "labels.csv", "w") as fh:
        fh.writelines(f"{i},{c}\n" for i, c in labels)
    print(f"{features.shape[0]} nodes, {len(edges)} edges, {features.shape[1]} features, {len(labels)} labels")


if __name__ == "__main__":
    main()
