"""Shared fixtures and the acceptance-criteria summary reporter."""

from __future__ import annotations

import pytest

from bdmreg import CtmTable, bdm_string, build_ctm_table

# ---------------------------------------------------------------------------
# Tables


@pytest.fixture(scope="session")
def full_2x2_table():
    """Deterministic 2-D table covering all 16 possible 2x2 blocks."""
    return CtmTable(2, {f"2x2:{k:04b}": 3.0 + 0.7 * k for k in range(16)})


@pytest.fixture(scope="session")
def table_1d_22():
    """The 1-D table built by enumerating the 2-state machine class."""
    return build_ctm_table(2, 10)


@pytest.fixture(scope="session")
def flip_fixture_table():
    """Two-entry 4x4 table: the zero block and the block with a single one
    in its top-left corner. Missing blocks price at max + 1."""
    return CtmTable(2, {"4x4:" + "0" * 16: 22.0, "4x4:1" + "0" * 15: 30.0})


@pytest.fixture(scope="session")
def composed_4x4_table(table_1d_22):
    """Desk-scale 4x4 table: each block priced by the block decomposition
    of its row-major bits into 4-bit slices over the enumerated 1-D table.

    Stands in for externally published 4x4 tables, which cannot be
    regenerated at desk scale.
    """
    entries = {}
    for key in range(1 << 16):
        bits = format(key, "016b")
        entries[f"4x4:{bits}"] = bdm_string(bits, 4, table_1d_22)
    return CtmTable(2, entries)


@pytest.fixture(scope="session")
def composed_table_path(composed_4x4_table, tmp_path_factory):
    from bdmreg import save_ctm_table

    path = tmp_path_factory.mktemp("tables") / "composed4.ctm"
    save_ctm_table(composed_4x4_table, path)
    return str(path)


# ---------------------------------------------------------------------------
# Acceptance criteria reporting: tests marked criterion(n, title) get one
# [PASS]/[FAIL]/[SKIP] line each in the terminal summary.

_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "criterion(num, title): acceptance criterion covered by this test",
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    num, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.skipped):
        reason = ""
        if report.skipped and report.longrepr:
            reason = str(report.longrepr[-1])
        _CRITERIA[num] = (report.outcome, title, reason)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    labels = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}
    for num in sorted(_CRITERIA):
        outcome, title, reason = _CRITERIA[num]
        label = labels.get(outcome, outcome.upper())
        line = f"[{label}] criterion {num}: {title}"
        if reason and label == "SKIP":
            line += f" ({reason})"
        terminalreporter.write_line(line)
