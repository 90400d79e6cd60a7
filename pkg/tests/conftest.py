import numpy as np
import pytest

from hkopa.cli import main
from hkopa.configspace import AmbientShape, Configuration, enumerate_configurations
from hkopa.terms import HKopaModel, normalize_term


def random_term(rng, config, lam=None):
    a = rng.standard_normal(config.a_shape)
    b = rng.standard_normal(config.b_shape)
    lam = rng.uniform(0.5, 3.0) if lam is None else lam
    return normalize_term(lam, a, b)


def random_model(rng, shape, pairs, lams=None):
    """Model with one random term per ``(p, q)`` in ``pairs``."""
    terms = []
    for i, (p, q) in enumerate(pairs):
        lam = None if lams is None else lams[i]
        terms.append(random_term(rng, Configuration(p, q, shape), lam))
    return HKopaModel(shape, terms, canonical=False)


def random_mixed_model(rng, shape=AmbientShape(16, 16)):
    configs = enumerate_configurations(shape)
    k = int(rng.integers(2, 6))
    picks = [configs[i] for i in rng.choice(len(configs), size=k)]
    if rng.random() < 0.5:
        picks.append(picks[0])  # force an equal-configuration pair
    return HKopaModel(shape, [random_term(rng, c) for c in picks], canonical=False)


def run_all_commands(workdir, src):
    """Every subcommand once, writing into ``workdir``; returns the produced files."""
    w = workdir
    w.mkdir()
    commands = [
        ["fit", str(src), "--max-terms", "3", "--seed", "5", "--out", str(w / "fit.json"),
         "--report", str(w / "fit.csv")],
        ["backfit", str(src), "--configs", "2x2,4x4", "--restarts", "2", "--seed", "5",
         "--out", str(w / "bf.json"), "--report", str(w / "bf.csv")],
        ["reconstruct", str(w / "fit.json"), "--out", str(w / "rec.pgm")],
        ["noise", str(src), "--sigma", "0.3", "--seed", "5", "--out", str(w / "noisy.mat")],
        ["simulate", "--alpha", "0.5", "--sigma0", "1", "--seed", "5", "--out", str(w / "sim")],
        ["compare", "--clean", str(src), "--noisy", str(w / "noisy.mat"), "--max-terms", "4",
         "--out", str(w / "curve.csv")],
    ]
    assert [main(c) for c in commands] == [0] * len(commands)
    return sorted(p for p in w.rglob("*") if p.is_file())


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def shape8():
    return AmbientShape(8, 8)


_VERDICTS = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """Record and print one PASS/FAIL line for an acceptance criterion, then assert it."""
    store = request.config.stash.setdefault(_VERDICTS, [])

    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        store.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
