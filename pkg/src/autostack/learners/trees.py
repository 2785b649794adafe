"""Exact-threshold regression/classification trees compiled with numba.

A single builder serves both tree families. For 0/1 targets the weighted
squared-error reduction equals half the weighted Gini impurity decrease
(``2 p (1 - p)`` is twice the Bernoulli variance), so random forest trees
use it on the labels and boosting trees use it on the gradient.

Splits are evaluated at midpoints between consecutive distinct values
and a strictly larger gain is required to replace the incumbent, which
makes ties resolve to the lowest feature index, then lowest threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

MIN_GAIN = 1e-12


@numba.njit(cache=True, nogil=True)
def _build(X, target, weight, presorted, max_depth, min_rows, n_try, seed):
    n, p = X.shape
    if n_try < p:
        np.random.seed(seed)

    m = 0
    for i in range(n):
        if weight[i] > 0:
            m += 1

    # Per-feature row order restricted to rows in the sample; each node owns
    # the same [start, end) slice in every feature's order.
    order = np.empty((p, m), dtype=np.int64)
    for f in range(p):
        k = 0
        for j in range(n):
            r = presorted[f, j]
            if weight[r] > 0:
                order[f, k] = r
                k += 1

    max_nodes = 2 * m + 1
    feature = np.full(max_nodes, -1, dtype=np.int64)
    threshold = np.zeros(max_nodes, dtype=np.float64)
    left = np.full(max_nodes, -1, dtype=np.int64)
    right = np.full(max_nodes, -1, dtype=np.int64)
    node_w = np.zeros(max_nodes, dtype=np.float64)
    node_s = np.zeros(max_nodes, dtype=np.float64)
    leaf_of_row = np.full(n, -1, dtype=np.int64)

    stack_node = np.empty(max_nodes, dtype=np.int64)
    stack_start = np.empty(max_nodes, dtype=np.int64)
    stack_end = np.empty(max_nodes, dtype=np.int64)
    stack_depth = np.empty(max_nodes, dtype=np.int64)
    goes_left = np.zeros(n, dtype=np.bool_)
    buf = np.empty(m, dtype=np.int64)
    candidates = np.arange(p)

    n_nodes = 1
    top = 0
    if m > 0:
        stack_node[0] = 0
        stack_start[0] = 0
        stack_end[0] = m
        stack_depth[0] = 0
        top = 1

    while top > 0:
        top -= 1
        node = stack_node[top]
        start = stack_start[top]
        end = stack_end[top]
        depth = stack_depth[top]

        w_tot = 0.0
        s_tot = 0.0
        for j in range(start, end):
            r = order[0, j]
            w_tot += weight[r]
            s_tot += weight[r] * target[r]
        node_w[node] = w_tot
        node_s[node] = s_tot

        best_gain = MIN_GAIN
        best_f = -1
        best_thr = 0.0
        if depth < max_depth and w_tot >= 2 * min_rows and end - start >= 2:
            if n_try < p:
                np.random.shuffle(candidates)
                chosen = np.sort(candidates[:n_try])
            else:
                chosen = np.arange(p)
            parent = s_tot * s_tot / w_tot
            for ci in range(chosen.shape[0]):
                f = chosen[ci]
                wl = 0.0
                sl = 0.0
                for j in range(start, end - 1):
                    r = order[f, j]
                    wl += weight[r]
                    sl += weight[r] * target[r]
                    x_here = X[r, f]
                    x_next = X[order[f, j + 1], f]
                    if x_next <= x_here:
                        continue
                    wr = w_tot - wl
                    if wl < min_rows or wr < min_rows:
                        continue
                    sr = s_tot - sl
                    gain = sl * sl / wl + sr * sr / wr - parent
                    if gain > best_gain:
                        best_gain = gain
                        best_f = f
                        thr = 0.5 * (x_here + x_next)
                        if thr >= x_next:
                            thr = x_here
                        best_thr = thr

        if best_f < 0:
            for j in range(start, end):
                leaf_of_row[order[0, j]] = node
            continue

        feature[node] = best_f
        threshold[node] = best_thr
        n_left = 0
        for j in range(start, end):
            r = order[best_f, j]
            go = X[r, best_f] <= best_thr
            goes_left[r] = go
            if go:
                n_left += 1
        for f in range(p):
            a = 0
            b = n_left
            for j in range(start, end):
                r = order[f, j]
                if goes_left[r]:
                    buf[a] = r
                    a += 1
                else:
                    buf[b] = r
                    b += 1
            for j in range(end - start):
                order[f, start + j] = buf[j]

        lc = n_nodes
        rc = n_nodes + 1
        n_nodes += 2
        left[node] = lc
        right[node] = rc
        stack_node[top] = rc
        stack_start[top] = start + n_left
        stack_end[top] = end
        stack_depth[top] = depth + 1
        top += 1
        stack_node[top] = lc
        stack_start[top] = start
        stack_end[top] = start + n_left
        stack_depth[top] = depth + 1
        top += 1

    return (feature[:n_nodes], threshold[:n_nodes], left[:n_nodes], right[:n_nodes],
            node_w[:n_nodes], node_s[:n_nodes], leaf_of_row)


@numba.njit(cache=True, nogil=True)
def _predict(X, feature, threshold, left, right, value):
    n = X.shape[0]
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = value[node]
    return out


def presort(X: np.ndarray) -> np.ndarray:
    """Row order of every feature column, shape ``(n_features, n_rows)``."""
    if X.shape[1] == 0:
        return np.empty((0, X.shape[0]), dtype=np.int64)
    return np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T.astype(np.int64))


@dataclass(frozen=True)
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for node in range(self.n_nodes):
            if self.feature[node] >= 0:
                depth[self.left[node]] = depth[self.right[node]] = depth[node] + 1
        return int(depth.max())

    def predict(self, X: np.ndarray) -> np.ndarray:
        return _predict(np.ascontiguousarray(X, dtype=np.float64), self.feature,
                        self.threshold, self.left, self.right, self.value)


def grow(X, target, weight, *, max_depth, min_rows=1.0, n_try=None, seed=0, order=None):
    """Grow one tree; returns ``(structure arrays..., node weights, node sums, leaf_of_row)``.

    ``weight`` holds per-row multiplicities (bootstrap counts, subsample
    indicators); rows with zero weight are ignored. Leaf values are left to
    the caller, which is why node statistics and row-to-leaf assignments
    are returned.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    n, p = X.shape
    if order is None:
        order = presort(X)
    if p == 0:
        w = np.asarray(weight, dtype=np.float64)
        leaf_of_row = np.where(w > 0, 0, -1).astype(np.int64)
        return (np.array([-1]), np.zeros(1), np.array([-1]), np.array([-1]),
                np.array([w.sum()]), np.array([np.dot(w, target)]), leaf_of_row)
    n_try = p if n_try is None else int(min(max(n_try, 1), p))
    return _build(X, np.ascontiguousarray(target, dtype=np.float64),
                  np.ascontiguousarray(weight, dtype=np.float64), order,
                  int(max_depth), float(min_rows), n_try, int(seed) % (2**32))
