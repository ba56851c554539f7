# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled regression tree builder (hot kernel).

Same algorithm and arithmetic as tree_py.build_tree: exact greedy squared
loss splits over presorted feature indices, sequential prefix sums, strict
improvement with lowest-feature / lowest-threshold tie-breaks. Compiled with
-ffp-contract=off so results stay bit-identical to the numpy fallback.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t i64
ctypedef cnp.float64_t f64


cdef Py_ssize_t _grow(
    f64[:, ::1] values,
    i64[:, ::1] idx_ws,
    f64[::1] targets,
    Py_ssize_t start,
    Py_ssize_t end,
    int depth,
    int max_depth,
    int min_leaf,
    i64[::1] feat,
    f64[::1] thr,
    f64[::1] val,
    i64[::1] left,
    i64[::1] right,
    i64[::1] scratch_l,
    i64[::1] scratch_r,
    Py_ssize_t* counter,
):
    cdef Py_ssize_t nid = counter[0]
    cdef Py_ssize_t nn = end - start
    cdef Py_ssize_t n_features = idx_ws.shape[0]
    cdef Py_ssize_t i, j, row, nl, nr, nl_count, li, ri
    cdef double s, tj, run, a, b, lsum, rsum, red, cut
    cdef double best_red, best_thr
    cdef Py_ssize_t best_f, best_pos

    counter[0] += 1
    s = 0.0
    for i in range(start, end):
        s += targets[idx_ws[0, i]]
    if depth >= max_depth or nn < 2 * min_leaf:
        val[nid] = s / nn
        return nid

    best_red = 0.0
    best_f = -1
    best_pos = -1
    best_thr = 0.0
    for j in range(n_features):
        tj = 0.0
        for i in range(start, end):
            tj += targets[idx_ws[j, i]]
        run = 0.0
        for i in range(nn - 1):
            row = idx_ws[j, start + i]
            run += targets[row]
            a = values[row, j]
            b = values[idx_ws[j, start + i + 1], j]
            if a == b:
                continue
            nl = i + 1
            nr = nn - nl
            if nl < min_leaf or nr < min_leaf:
                continue
            lsum = run
            rsum = tj - run
            red = lsum * lsum / nl + rsum * rsum / nr - tj * tj / nn
            if red > best_red:
                cut = (a + b) / 2.0
                if cut == b:
                    cut = a
                best_red = red
                best_f = j
                best_pos = i
                best_thr = cut

    if best_f < 0:
        val[nid] = s / nn
        return nid

    nl_count = best_pos + 1
    for j in range(n_features):
        li = 0
        ri = 0
        for i in range(start, end):
            row = idx_ws[j, i]
            if values[row, best_f] <= best_thr:
                scratch_l[li] = row
                li += 1
            else:
                scratch_r[ri] = row
                ri += 1
        for i in range(li):
            idx_ws[j, start + i] = scratch_l[i]
        for i in range(ri):
            idx_ws[j, start + li + i] = scratch_r[i]

    feat[nid] = best_f
    thr[nid] = best_thr
    left[nid] = _grow(values, idx_ws, targets, start, start + nl_count, depth + 1,
                      max_depth, min_leaf, feat, thr, val, left, right,
                      scratch_l, scratch_r, counter)
    right[nid] = _grow(values, idx_ws, targets, start + nl_count, end, depth + 1,
                       max_depth, min_leaf, feat, thr, val, left, right,
                       scratch_l, scratch_r, counter)
    return nid


def build_tree(values, sorted_idx, targets, int max_depth, int min_leaf):
    """Grow one tree; returns (feature, threshold, value, left, right) in preorder."""
    values_c = np.ascontiguousarray(values, dtype=np.float64)
    targets_c = np.ascontiguousarray(targets, dtype=np.float64)
    idx_ws = np.ascontiguousarray(sorted_idx, dtype=np.int64).copy()

    cdef Py_ssize_t n = values_c.shape[0]
    if max_depth < 1 or max_depth > 30:
        raise ValueError("max_depth must be in [1, 30]")
    cdef Py_ssize_t max_nodes = ((<Py_ssize_t>1) << (max_depth + 1)) - 1

    feat_np = np.full(max_nodes, -1, dtype=np.int64)
    thr_np = np.zeros(max_nodes, dtype=np.float64)
    val_np = np.zeros(max_nodes, dtype=np.float64)
    left_np = np.full(max_nodes, -1, dtype=np.int64)
    right_np = np.full(max_nodes, -1, dtype=np.int64)
    scratch_l = np.empty(n, dtype=np.int64)
    scratch_r = np.empty(n, dtype=np.int64)

    cdef Py_ssize_t counter = 0
    _grow(values_c, idx_ws, targets_c, 0, n, 0, max_depth, min_leaf,
          feat_np, thr_np, val_np, left_np, right_np,
          scratch_l, scratch_r, &counter)
    cdef Py_ssize_t count = counter
    return (
        feat_np[:count].copy(),
        thr_np[:count].copy(),
        val_np[:count].copy(),
        left_np[:count].copy(),
        right_np[:count].copy(),
    )
