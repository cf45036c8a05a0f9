import sys


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    keys = sorted(results, key=lambda k: (not k.isdigit(), int(k) if k.isdigit() else 0, k))
    for key in keys:
        terminalreporter.write_line(results[key])
