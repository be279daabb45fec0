ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
        terminalreporter.write_line(line)
    npass = sum(line.startswith("[PASS]") for line in ACCEPTANCE_LINES)
    terminalreporter.write_line(f"{npass}/{len(ACCEPTANCE_LINES)} criteria passed")
