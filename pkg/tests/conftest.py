import numpy as np
import pytest
from scipy import stats


def chi2_pvalue(observed, expected_prob, min_expected=5.0):
    """Pearson chi-square p-value, pooling bins whose expected count is below ``min_expected``."""
    observed = np.asarray(observed, dtype=float)
    expected = np.asarray(expected_prob, dtype=float) * observed.sum()
    small = expected < min_expected
    if small.any():
        observed = np.append(observed[~small], observed[small].sum())
        expected = np.append(expected[~small], expected[small].sum())
        if expected[-1] == 0:
            assert observed[-1] == 0
            observed, expected = observed[:-1], expected[:-1]
    if observed.size < 2:
        return 1.0
    return float(stats.chisquare(observed, expected * observed.sum() / expected.sum()).pvalue)


def binomial_sigma(p, n):
    return np.sqrt(p * (1 - p) / n)


# ---- acceptance summary: one line per criterion --------------------------

_CRITERIA = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    num = dict(report.user_properties).get("criterion")
    if num is None:
        return
    title = dict(report.user_properties).get("title", "")
    detail = dict(report.user_properties).get("detail", "")
    entry = _CRITERIA.setdefault(num, {"title": title, "ok": True, "details": []})
    entry["ok"] &= report.outcome == "passed"
    entry["details"].append(f"{report.head_line.split('::')[-1]}: {report.outcome}{' - ' + detail if detail else ''}")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        e = _CRITERIA[num]
        terminalreporter.write_line(f"[{'PASS' if e['ok'] else 'FAIL'}] criterion {num}: {e['title']}")
        for d in e["details"]:
            terminalreporter.write_line(f"        {d}")


@pytest.fixture
def criterion(request):
    """Tag a test with its criterion number/title and attach a detail string."""
    marker = request.node.get_closest_marker("criterion")
    request.node.user_properties.append(("criterion", marker.args[0]))
    request.node.user_properties.append(("title", marker.args[1]))

    def detail(text):
        request.node.user_properties.append(("detail", text))
        print(f"criterion {marker.args[0]}: {text}")

    return detail
