import os

import pytest
from hypothesis import HealthCheck, settings

from notesections.corpus import Corpus, Document
from notesections.segmenter import DEFAULT_TITLES
from notesections.synthetic import generate_documents

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=300)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def make_corpus(*texts, labels=None):
    labels = labels or [()] * len(texts)
    return Corpus(tuple(Document.from_text(f"d{i}", t, l) for i, (t, l) in enumerate(zip(texts, labels))))


@pytest.fixture(scope="session")
def default_title_docs():
    return generate_documents(200, DEFAULT_TITLES, seed=7)


@pytest.fixture
def write_lines(tmp_path):
    def write(name, lines):
        path = tmp_path / name
        path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
        return path
    return write


_ACCEPTANCE = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker and report.when == "call":
        number, title = marker.args
        _ACCEPTANCE.append((number, title, report.outcome, report.duration))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, outcome, duration in sorted(_ACCEPTANCE):
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{verdict}] {number:>2}. {title} ({duration:.2f}s)")
