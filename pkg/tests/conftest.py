# one summary line per acceptance criterion, printed after the run
ACCEPTANCE: dict = {}
# outcome of every test call in this session, keyed by node id
OUTCOMES: dict = {}


def pytest_collection_modifyitems(items):
    # acceptance runs last so it can reuse results of the property suites
    items.sort(key=lambda it: it.module.__name__ == "test_acceptance")


def pytest_runtest_logreport(report):
    if report.when == "call":
        OUTCOMES[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
