import time
from pathlib import Path

import pytest

from membrane_wrinkle.bench.benchmarks import default_spec, run_benchmark

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

_RUNS = {}


def cached_run(benchmark, **overrides):
    """Run a benchmark once per session; returns ``(report, seconds)``."""
    key = (benchmark, tuple(sorted((k, repr(v)) for k, v in overrides.items())))
    if key not in _RUNS:
        spec = default_spec(benchmark, **overrides)
        t0 = time.perf_counter()
        rep = run_benchmark(spec)
        _RUNS[key] = (rep, time.perf_counter() - t0)
    return _RUNS[key]


@pytest.fixture(scope="session")
def runs():
    return cached_run


@pytest.fixture(scope="session")
def configs():
    return CONFIGS


# acceptance bookkeeping: one summary line per criterion

_CRITERIA = {}


class _Recorder:
    def __call__(self, number, title, label, passed, detail):
        entry = _CRITERIA.setdefault(number, {"title": title, "items": []})
        entry["items"].append((label, bool(passed), detail))
        return bool(passed)


@pytest.fixture(scope="session")
def criterion():
    return _Recorder()


def criterion_lines():
    lines = []
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        ok = all(p for _, p, _ in entry["items"])
        failed = [f"{label}: {detail}" for label, p, detail in entry["items"] if not p]
        passed = [f"{label}: {detail}" for label, p, detail in entry["items"] if p]
        detail = "; ".join(failed if failed else passed)
        lines.append(f"{'PASS' if ok else 'FAIL'} criterion {number} ({entry['title']}): {detail}")
    return lines


def pytest_terminal_summary(terminalreporter):
    lines = criterion_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
