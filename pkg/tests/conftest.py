import pytest

CRITERIA = {
    1: "weight recurrence agrees with the log/exp series route",
    2: "consistency defect is second order",
    3: "smooth-data convergence table",
    4: "nonsmooth-data convergence table",
    5: "theta = -1/2 corrected and standard runs coincide",
    6: "error stays bounded as alpha -> 0",
    7: "shift weights decay exponentially",
    8: "omega_n decays like n^(-alpha-1)",
    9: "discrete-equation residual of accepted runs",
    10: "Mittag-Leffler evaluation",
}

_outcomes: dict[int, list[tuple[str, bool]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    # a failing fixture fails the criterion too
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        _outcomes.setdefault(mark.args[0], []).append((item.name, rep.passed))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(CRITERIA):
        results = _outcomes.get(n)
        if not results:
            continue
        ok = all(p for _, p in results)
        line = f"C{n:<3}{'PASS' if ok else 'FAIL'}  {CRITERIA[n]}"
        if not ok:
            failed = [name for name, p in results if not p]
            line += f"  (failed: {', '.join(failed)})"
        tr.write_line(line)
