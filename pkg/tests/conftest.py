"""Shared fixtures and the acceptance-criteria reporting hook."""

from __future__ import annotations

import numpy as np
import pytest

from trajacast import SimilarityForecaster, SynthSpec, generate
from trajacast.dataset import split_from_indices
from trajacast.neighbors import CandidateSet

# (criterion number, description, outcome) tuples filled by test_acceptance.
ACCEPTANCE_RESULTS: list[tuple[int, str, str]] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance criteria:")
    for num, desc, outcome in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"[{outcome}] criterion {num}: {desc}")


@pytest.fixture()
def record_criterion():
    """Record one acceptance outcome line; assert on failure."""

    def _record(num: int, desc: str, ok: bool) -> None:
        ACCEPTANCE_RESULTS.append((num, desc, "PASS" if ok else "FAIL"))
        assert ok, f"criterion {num}: {desc}"

    return _record


@pytest.fixture()
def record_skip():
    def _record(num: int, desc: str, reason: str) -> None:
        ACCEPTANCE_RESULTS.append((num, desc, "SKIP"))
        pytest.skip(reason)

    return _record


def make_candidates(values, distances=None, sources=None, k=None) -> CandidateSet:
    """CandidateSet literal for tests; defaults produce valid ordering."""
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    if distances is None:
        distances = np.arange(n, dtype=np.float64)
    if sources is None:
        sources = np.arange(2 * n, n, -1)
    return CandidateSet(
        values=values,
        distances=np.asarray(distances, dtype=np.float64),
        sources=np.asarray(sources),
        k=k or n,
    )


@pytest.fixture(scope="session")
def sinusoid_series():
    """40 days of a noisy daily cycle; shared read-only."""
    return generate(SynthSpec(kind="daily-sinusoid", length=96 * 40, seed=7))


@pytest.fixture(scope="session")
def sinusoid_split(sinusoid_series):
    T = len(sinusoid_series)
    last = T - 14
    s = 96 * 30
    u = s - (last - s + 1)
    return split_from_indices(u=u, s=s, last=last, length=14)


@pytest.fixture(scope="session")
def fitted_mean(sinusoid_series, sinusoid_split):
    return SimilarityForecaster().fit(sinusoid_series, sinusoid_split)
