"""Pure-numpy regression tree builder (fallback backend).

Exact greedy splitting under squared loss with presorted feature indices.
The arithmetic mirrors the Cython kernel operation for operation (sequential
prefix sums, identical expression shapes), so both backends grow identical
trees on identical inputs.
"""

import numpy as np


def build_tree(values, sorted_idx, targets, max_depth, min_leaf):
    """Grow one tree; returns (feature, threshold, value, left, right) in preorder.

    values:     (n, k) float64 feature matrix
    sorted_idx: (k, n) int64, rows sorted ascending per feature (stable)
    targets:    (n,) float64 residuals
    Leaves have feature == -1. Splits need a strictly positive squared-error
    reduction; ties break toward the lowest feature index, then the lowest
    threshold.
    """
    values = np.ascontiguousarray(values, dtype=np.float64)
    targets = np.ascontiguousarray(targets, dtype=np.float64)
    n_features = sorted_idx.shape[0]

    feat, thr, val, left, right = [], [], [], [], []

    def grow(idx_block, depth):
        nid = len(feat)
        feat.append(-1)
        thr.append(0.0)
        val.append(0.0)
        left.append(-1)
        right.append(-1)
        nn = idx_block.shape[1]
        s = float(np.cumsum(targets[idx_block[0]])[-1])
        if depth >= max_depth or nn < 2 * min_leaf:
            val[nid] = s / nn
            return nid

        best_red = 0.0
        best = None
        for j in range(n_features):
            idx = idx_block[j]
            vj = values[idx, j]
            pre = np.cumsum(targets[idx])
            tj = float(pre[-1])
            nl = np.arange(1, nn, dtype=np.int64)
            nr = nn - nl
            lsum = pre[:-1]
            rsum = tj - lsum
            red = lsum * lsum / nl + rsum * rsum / nr - tj * tj / nn
            valid = (vj[:-1] != vj[1:]) & (nl >= min_leaf) & (nr >= min_leaf)
            if not valid.any():
                continue
            red = np.where(valid, red, -np.inf)
            i = int(np.argmax(red))
            r = float(red[i])
            if r > best_red:
                a = float(vj[i])
                b = float(vj[i + 1])
                cut = (a + b) / 2.0
                if cut == b:
                    cut = a
                best_red = r
                best = (j, i, cut)

        if best is None:
            val[nid] = s / nn
            return nid

        j, i, cut = best
        mask = values[idx_block, j] <= cut
        nl_count = i + 1
        left_block = idx_block[mask].reshape(n_features, nl_count)
        right_block = idx_block[~mask].reshape(n_features, nn - nl_count)
        feat[nid] = j
        thr[nid] = cut
        left[nid] = grow(left_block, depth + 1)
        right[nid] = grow(right_block, depth + 1)
        return nid

    grow(np.ascontiguousarray(sorted_idx, dtype=np.int64), 0)
    return (
        np.asarray(feat, dtype=np.int64),
        np.asarray(thr, dtype=np.float64),
        np.asarray(val, dtype=np.float64),
        np.asarray(left, dtype=np.int64),
        np.asarray(right, dtype=np.int64),
    )
