ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion, reported in the summary")


def pytest_runtest_logreport(report):
    num_title = getattr(report, "criterion", None)
    if num_title is None or (report.when != "call" and report.passed):
        return
    num, title = num_title
    ACCEPTANCE_LINES[num] = f"{'PASS' if report.passed else 'FAIL'} criterion {num:2d}: {title}"


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return None
    from _pytest.reports import TestReport

    report = TestReport.from_item_and_call(item, call)
    report.criterion = marker.args
    return report


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[num])
