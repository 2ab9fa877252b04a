import os

from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=300, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


import pytest  # noqa: E402

from monocone.convexity import convexity_check_second_order, convexity_oracle_sampling  # noqa: E402
from monocone.fixtures import catalog_functions  # noqa: E402


@pytest.fixture(scope="session")
def catalog_results():
    """(name, f, convex, second-order verdict, oracle result) per catalog function."""
    out = []
    for name, f, convex in catalog_functions():
        out.append((name, f, convex, convexity_check_second_order(f), convexity_oracle_sampling(f, 1000, seed=0)))
    return out


ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


@pytest.fixture
def criterion(request):
    """``criterion(n, checks, seconds)`` prints and records one pass/fail line;
    ``checks`` is a list of ``(label, ok)``."""
    def record(n, checks, seconds):
        bad = [label for label, ok in checks if not ok]
        status = "PASS" if not bad else "FAIL"
        detail = f"{len(checks) - len(bad)}/{len(checks)} checks, {seconds:.2f}s"
        if bad:
            detail += "; failing: " + ", ".join(bad)
        line = f"criterion {n}: {status}  ({detail})"
        print(line)
        request.config.stash[ACCEPTANCE].append((n, line))
        return not bad
    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
