"""Shared fixtures and random-model generators."""

import numpy as np
import pytest

from fdi2d.model import Fault, FmiiModel


def random_model(rng, n, q, k=2, p=2, m=1, scale=None, sparse=False):
    """Random FMII model with ``p`` single-column faults.

    ``scale`` bounds the sum of operator spectral norms; ``sparse`` zeroes
    about half of the entries so that nontrivial subspaces appear.
    """
    ops = []
    for _ in range(k):
        A = rng.standard_normal((n, n))
        if sparse:
            A *= rng.random((n, n)) < 0.5
        ops.append(A)
    if scale is not None:
        total = sum(np.linalg.norm(A, 2) for A in ops) or 1.0
        ops = [A * scale / total for A in ops]
    B = tuple(rng.standard_normal((n, m)) for _ in range(k))
    C = rng.standard_normal((q, n))
    faults = []
    for j in range(p):
        sigs = [rng.standard_normal((n, 1)) for _ in range(k)]
        if sparse:
            sigs = [s * (rng.random() < 0.7) for s in sigs]
            if not any(np.any(s) for s in sigs):
                sigs[0] = rng.standard_normal((n, 1))
        faults.append(Fault(f"f{j + 1}", tuple(sigs)))
    return FmiiModel(tuple(ops), B, C, tuple(faults), name="random")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def isolable_models(count, seed, n_max=6):
    """``count`` random models (n <= n_max) in which every fault is isolable."""
    from fdi2d.synthesis import isolability

    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(2, n_max + 1))
        q = int(rng.integers(1, n + 1))
        m = random_model(rng, n, q, m=2, scale=0.9, sparse=bool(rng.integers(2)))
        if isolability(m).all_isolable:
            out.append(m)
    return out


# ---------------------------------------------------------------------------
# acceptance summary: one line per criterion at the end of the run

ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, parts = ACCEPTANCE[number]
        failed = [label for label, ok in parts if not ok]
        status = "PASS" if not failed else "FAIL"
        line = f"criterion {number} {status}: {title}"
        if failed:
            line += " (failing part: " + "; ".join(failed) + ")"
        terminalreporter.write_line(line)
