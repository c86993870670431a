import re

import pytest

_AC_PATTERN = re.compile(r"::test_(ac\d+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Print one PASS/FAIL line per acceptance criterion."""
    results: dict[str, tuple[int, str]] = {}
    for outcome, label in (("passed", "PASS"), ("failed", "FAIL"), ("skipped", "SKIP")):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" not in nodeid:
                continue
            m = _AC_PATTERN.search(nodeid)
            if m is None:
                continue
            ac = m.group(1).upper()
            key = int(ac[2:])
            # a parametrized criterion fails if any of its cases fail
            prev = results.get(ac, (key, "PASS"))[1]
            if label == "FAIL" or prev == "FAIL":
                results[ac] = (key, "FAIL")
            elif label == "SKIP" and prev != "PASS":
                results[ac] = (key, "SKIP")
            elif ac not in results:
                results[ac] = (key, label)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for ac, (_, label) in sorted(results.items(), key=lambda kv: kv[1][0]):
        terminalreporter.write_line(f"{label}: {ac}")


@pytest.fixture(scope="session")
def catalog_models():
    from lblab import catalog

    return {b.id: b.model for b in catalog()}
