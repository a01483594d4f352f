import json

import numpy as np
import pytest

from covertbc import BcWardenModel, Channel

ACCEPTANCE_RESULTS = []


def record_acceptance(criterion: str, name: str, ok: bool, detail: str = ""):
    """Collect one pass/fail line per acceptance criterion for the summary."""
    ACCEPTANCE_RESULTS.append((criterion, name, ok, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, name, ok, detail in ACCEPTANCE_RESULTS:
        line = f"ACCEPTANCE {criterion} {name}: {'PASS' if ok else 'FAIL'}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)

# Reference three-input model (strong receiver, degraded receiver, warden).
EX1_P1 = [
    [0.2, 0.28, 0.28, 0.24],
    [0.05, 0.1, 0.45, 0.4],
    [0.07, 0.37, 0.4, 0.16],
]
EX1_P2 = [
    [0.1884, 0.324, 0.232, 0.2556],
    [0.0515, 0.215, 0.331, 0.4025],
    [0.0744, 0.399, 0.326, 0.2006],
]
EX1_Q = [
    [0.20, 0.19, 0.36, 0.25],
    [0.01, 0.37, 0.17, 0.45],
    [0.42, 0.35, 0.05, 0.18],
]
# Published degrading post-channel witness for the model above.
EX1_W = [
    [0.9, 0.1, 0.0, 0.0],
    [0.02, 0.8, 0.12, 0.06],
    [0.01, 0.2, 0.7, 0.09],
    [0.0, 0.1, 0.01, 0.89],
]


def bsc(eps: float) -> np.ndarray:
    return np.array([[1.0 - eps, eps], [eps, 1.0 - eps]])


def ex2_model(c: float) -> BcWardenModel:
    """Binary-input family: strong user BSC(0.2), warden BSC(0.4),
    weak user degraded through [[0.9, 0.1], [c, 1-c]]."""
    p1 = bsc(0.2)
    w = np.array([[0.9, 0.1], [c, 1.0 - c]])
    return BcWardenModel(Channel(p1), Channel(p1 @ w), Channel(bsc(0.4)), 0)


@pytest.fixture(scope="session")
def ex1_model() -> BcWardenModel:
    return BcWardenModel(Channel(EX1_P1), Channel(EX1_P2), Channel(EX1_Q), 0)


@pytest.fixture(scope="session")
def ex1_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("models") / "ex1.json"
    path.write_text(json.dumps({"x0": 0, "P1": EX1_P1, "P2": EX1_P2, "Q": EX1_Q}))
    return path


@pytest.fixture(scope="session")
def ex2_family_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("models") / "ex2_family.json"
    payload = {
        "x0": 0,
        "P1": bsc(0.2).tolist(),
        "Q": bsc(0.4).tolist(),
        "W": [[0.9, 0.1], ["c", "1 - c"]],
        "param": "c",
        "values": [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
    }
    path.write_text(json.dumps(payload))
    return path


def random_degraded_model(rng: np.random.Generator, max_in: int = 3,
                          max_out: int = 4) -> BcWardenModel:
    """Random strictly positive degraded model passing the model conditions.

    P2 = P1 W is degraded by construction; strictly positive entries give
    the absolute-continuity conditions for free; the hull condition is
    enforced by rejection.
    """
    from covertbc import check_conditions

    while True:
        k = int(rng.integers(2, max_in + 1))
        n1 = int(rng.integers(2, max_out + 1))
        n2 = int(rng.integers(2, max_out + 1))
        nz = int(rng.integers(2, max_out + 1))
        p1 = rng.dirichlet(np.ones(n1) * 2.0, size=k)
        w = rng.dirichlet(np.ones(n2) * 2.0, size=n1)
        q = rng.dirichlet(np.ones(nz) * 2.0, size=k)
        model = BcWardenModel(Channel(p1), Channel(p1 @ w), Channel(q),
                              int(rng.integers(0, k)))
        if check_conditions(model).all_hold:
            return model
