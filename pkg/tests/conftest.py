"""Shared pytest hooks: surface the acceptance pass/fail lines.

The acceptance tests register one line per criterion; printing them from
the terminal-summary hook keeps them visible in every capture mode.
"""

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
