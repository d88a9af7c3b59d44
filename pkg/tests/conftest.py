import pytest


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    """Print one pass/fail line per acceptance criterion."""
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and item.fspath.basename == "test_acceptance.py":
        doc = item.function.__doc__
        label = doc.strip().splitlines()[0] if doc else item.name
        status = "PASS" if report.passed else "FAIL"
        print(f"\n[{status}] {label}", flush=True)
