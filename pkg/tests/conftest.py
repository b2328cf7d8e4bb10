from contextlib import contextmanager

import pytest

RESULTS = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Context manager recording one acceptance criterion as PASS or FAIL.

    The body may fill the yielded dict with numbers worth printing.
    """
    lines = request.config.stash.setdefault(RESULTS, [])

    @contextmanager
    def run(number, title):
        detail = {}
        try:
            yield detail
        except BaseException as exc:
            reason = str(exc).strip().splitlines()[0] if str(exc).strip() else type(exc).__name__
            lines.append((number, f"criterion {number:2d} FAIL  {title}  [{_fmt(detail)}] {reason}"))
            raise
        lines.append((number, f"criterion {number:2d} PASS  {title}  [{_fmt(detail)}]"))

    return run


def _fmt(detail):
    return ", ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}" for k, v in detail.items())


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(RESULTS, [])
    if not lines:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for _, line in sorted(lines):
        terminalreporter.write_line(line)
