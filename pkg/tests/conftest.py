import contextlib
import time

import numpy as np
import pytest

from autostack.frame import CATEGORICAL, NUMERIC, RESPONSE, ColumnSchema, Frame

_CRITERIA: list[tuple[str, str, str]] = []


def numeric_frame(X, y, names=None) -> Frame:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    names = names or [f"x{i}" for i in range(X.shape[1])]
    schema = [ColumnSchema(n, NUMERIC) for n in names] + [ColumnSchema("y", RESPONSE)]
    cols = {n: X[:, i] for i, n in enumerate(names)}
    cols["y"] = np.asarray(y)
    return Frame(schema, cols)


def mixed_frame(numeric: dict, categorical: dict, y) -> Frame:
    schema = [ColumnSchema(n, NUMERIC) for n in numeric]
    schema += [ColumnSchema(n, CATEGORICAL) for n in categorical]
    schema.append(ColumnSchema("y", RESPONSE))
    return Frame(schema, {**numeric, **categorical, "y": np.asarray(y)})


def signal_frame(n=300, p=4, seed=0, strength=1.5) -> Frame:
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, p))
    logits = strength * X[:, 0] - strength * 0.7 * X[:, 1] + 0.5 * X[:, 0] * X[:, 2]
    y = (rng.random(n) < 1 / (1 + np.exp(-logits))).astype(int)
    return numeric_frame(X, y)


@pytest.fixture
def make_numeric_frame():
    return numeric_frame


@pytest.fixture
def toy_frame():
    return signal_frame()


@pytest.fixture
def criterion():
    """``with criterion(n, "what") as note:`` records PASS, FAIL or SKIP for
    criterion ``n``; ``note(text)`` appends measured details to the line."""

    @contextlib.contextmanager
    def run(number, title):
        notes = []
        t0 = time.perf_counter()
        status = "FAIL"
        try:
            yield notes.append
            status = "PASS"
        except pytest.skip.Exception as exc:
            status = "SKIP"
            notes.append(str(exc.msg))
            raise
        finally:
            detail = "; ".join([f"{time.perf_counter() - t0:.1f}s"] + notes)
            _CRITERIA.append((str(number), status, f"{title} ({detail})"))

    return run


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, status, detail in sorted(_CRITERIA, key=lambda c: int(c[0])):
        terminalreporter.write_line(f"criterion {number}: {status}  {detail}")
