import pytest

CRITERIA = {
    1: "catalog spectra",
    2: "Fourier parity",
    3: "d=4 family always has -1",
    4: "Lüders construction validity",
    5: "Gram rank oracle equivalence",
    6: "gamma-point certification end to end",
    7: "vertex certification",
    8: "qubit case",
    9: "region geometry",
}

_outcomes: dict[int, list[bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number the test covers")


def pytest_collection_modifyitems(config, items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            item.user_properties.append(("criterion", mark.args[0]))


def pytest_runtest_logreport(report):
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    if report.when == "call":
        _outcomes.setdefault(crit, []).append(report.passed)
    elif report.failed or report.skipped:
        _outcomes.setdefault(crit, []).append(False)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n, name in CRITERIA.items():
        results = _outcomes.get(n)
        if not results:
            tr.write_line(f"criterion {n}: NOT RUN  {name}")
            continue
        status = "PASS" if all(results) else "FAIL"
        tr.write_line(f"criterion {n}: {status}  {name} ({sum(results)}/{len(results)} checks)")
