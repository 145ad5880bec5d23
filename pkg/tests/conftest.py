import csv
import os
from pathlib import Path

import numpy as np
import pytest

from dualsyll.syllogism import RESPONSES, enumerate_syllogisms

ROOT = Path(__file__).resolve().parents[1]
HUMAN_DATA_ENV = "DUALSYLL_HUMAN_DATA"
DEFAULT_HUMAN_DATA = ROOT / "data" / "human_responses.csv"


def synthetic_percentages(seed=0):
    """Rule-based stand-in for the human table (atmosphere + figure bias + noise).

    Integer percentages; rows sum to 99..101 like a rounded published table.
    """
    rng = np.random.default_rng(seed)
    rows = []
    for s in enumerate_syllogisms():
        moods = s.mood1 + s.mood2
        negative = any(m in "EO" for m in moods)
        particular = any(m in "IO" for m in moods)
        mood = {(False, False): "A", (True, False): "E",
                (False, True): "I", (True, True): "O"}[(negative, particular)]
        base = np.full(9, 0.5)
        ac_share = {1: 0.85, 2: 0.15, 3: 0.5, 4: 0.5}[s.figure]
        base[RESPONSES.index(mood + "ac")] += 40 * ac_share
        base[RESPONSES.index(mood + "ca")] += 40 * (1 - ac_share)
        base[8] += 10 + 25 * (moods.count("I") + moods.count("O"))
        if "E" in moods and "O" in moods:
            base[8] += 15
        p = rng.dirichlet(base * 3)
        pct = np.floor(p * 100)
        pct[np.argmax(p - pct / 100)] += 100 - pct.sum() + rng.integers(-1, 2)
        rows.append(np.maximum(pct, 0))
    return np.array(rows)


def write_table(path, pct, codes=None, header=("code",) + RESPONSES):
    codes = codes or [s.code for s in enumerate_syllogisms()]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for c, row in zip(codes, pct):
            w.writerow([c] + [f"{v:g}" for v in row])
    return Path(path)


@pytest.fixture(scope="session")
def synthetic_pct():
    return synthetic_percentages()


@pytest.fixture
def synthetic_csv(tmp_path, synthetic_pct):
    return write_table(tmp_path / "human.csv", synthetic_pct)


@pytest.fixture(scope="session")
def synthetic_session_csv(tmp_path_factory, synthetic_pct):
    return write_table(tmp_path_factory.mktemp("data") / "human.csv", synthetic_pct)


def human_data_path():
    return Path(os.environ.get(HUMAN_DATA_ENV, DEFAULT_HUMAN_DATA))


ACCEPTANCE_LINES = []


def record_criterion(n, ok, detail):
    """Print and remember one pass/fail line for an acceptance criterion."""
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
