"""Independent reference computations used as test oracles.

Written as plain loops over Python floats so they share no code path with
the vectorized implementations they check.
"""

import math

import numpy as np


def auc_pairs(labels, scores):
    pos = [s for y, s in zip(labels, scores) if y == 1]
    neg = [s for y, s in zip(labels, scores) if y == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            total += 1.0 if p > q else 0.5 if p == q else 0.0
    return total / (len(pos) * len(neg))


def confusion_loop(labels, scores, t):
    tp = fp = tn = fn = 0
    for y, s in zip(labels, scores):
        if s >= t:
            tp, fp = (tp + 1, fp) if y == 1 else (tp, fp + 1)
        else:
            fn, tn = (fn + 1, tn) if y == 1 else (fn, tn + 1)
    return tp, fp, tn, fn


def accuracy_loop(labels, scores, t=0.5):
    tp, fp, tn, fn = confusion_loop(labels, scores, t)
    return (tp + tn) / (tp + fp + tn + fn)


def f1_loop(labels, scores, t=0.5):
    tp, fp, _, fn = confusion_loop(labels, scores, t)
    if tp == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2 * precision * recall / (precision + recall)


def log_loss_loop(labels, scores, eps=1e-15):
    total = 0.0
    for y, s in zip(labels, scores):
        p = min(max(float(s), eps), 1 - eps)
        total += -math.log(p) if y == 1 else -math.log1p(-p)
    return total / len(labels)


def central_difference(f, x, h):
    """Central finite-difference gradient of scalar ``f`` at array ``x``."""
    x = np.array(x, dtype=float)
    grad = np.zeros_like(x)
    flat, out = x.reshape(-1), grad.reshape(-1)
    for i in range(flat.size):
        keep = flat[i]
        flat[i] = keep + h
        up = f(x)
        flat[i] = keep - h
        down = f(x)
        flat[i] = keep
        out[i] = (up - down) / (2 * h)
    return grad


def relative_error(a, b):
    a, b = np.ravel(a), np.ravel(b)
    scale = max(np.linalg.norm(a), np.linalg.norm(b), 1e-12)
    return float(np.linalg.norm(a - b) / scale)
