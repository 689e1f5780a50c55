"""Shared fixtures plus the per-criterion acceptance report.

Tests in ``test_acceptance.py`` are named ``test_criterion_<n>_...``; every
criterion gets one PASS/FAIL line in the terminal summary, aggregated over
its tests, with any ``detail`` user-properties the tests attached.
"""
import re
import time
from collections import defaultdict

import pytest

from ucast.synthetic import write_corpus
from ucast.trainer import Trainer, desk_config, load_dataset

DESK_STYLES = ("ember", "tide")

_outcomes = defaultdict(list)
_details = defaultdict(list)
_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    if report.when == "call" or report.outcome != "passed":
        _outcomes[n].append(report.outcome)
    if report.when == "call":
        _details[n].extend(v for k, v in report.user_properties if k == "detail")


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        ok = all(o == "passed" for o in _outcomes[n])
        detail = "; ".join(_details[n])
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}" + (f"  ({detail})" if detail else ""))


@pytest.fixture(scope="session")
def desk_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("desk_corpus")
    return write_corpus(root, n_content=256, n_per_style=256, styles=DESK_STYLES, size=64, seed=0)


def _desk_trainer(corpus, **overrides):
    cfg = desk_config(**overrides)
    content = load_dataset(corpus["real"], "realistic", cfg.batch_size, cfg.resolution, seed=cfg.seed + 1)
    style = load_dataset(corpus["art"], "artistic", cfg.batch_size, cfg.resolution, seed=cfg.seed + 2)
    return Trainer(cfg, content, style)


@pytest.fixture(scope="session")
def desk_trainer_factory(desk_corpus):
    return lambda **overrides: _desk_trainer(desk_corpus, **overrides)


def _train(trainer):
    start = time.perf_counter()
    records = trainer.run()
    return {"trainer": trainer, "records": records, "seconds": time.perf_counter() - start}


@pytest.fixture(scope="session")
def desk_run(desk_corpus):
    """The full desk-scale schedule with adaptive temperatures (trained once per session)."""
    return _train(_desk_trainer(desk_corpus))


@pytest.fixture(scope="session")
def desk_fixed_run(desk_corpus):
    """Same schedule with the fixed-temperature ablation."""
    return _train(_desk_trainer(desk_corpus, fixed_temperature=True))
