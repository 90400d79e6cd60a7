"""Acceptance gate.

Each test checks one acceptance criterion at its stated tolerance and
records a single ``criterion N: PASS|FAIL`` line; the lines are repeated in
the terminal summary.  Run just this gate with::

    pytest tests/test_acceptance.py -v
"""

import math
import time

import numpy as np

from hkopa.baseline import compare, svd_approximation
from hkopa.bench import ALPHA_GRID, SIGMA0_GRID, SimulationSpec, generate, run_cell
from hkopa.configspace import AmbientShape, Configuration, enumerate_configurations, parameter_count
from hkopa.io import write_matrix, write_pgm
from hkopa.kopa_fit import (MONOTONE_RTOL, FitOptions, ICSpec, Stopping, fit_single_given_config,
                            fit_single_select_config, greedy_fit, stopping_threshold)
from hkopa.matrix import frobenius_norm, kron
from hkopa.orthogonalize import check_assumption2, gram_schmidt
from hkopa.rearrange import rearrange, unrearrange, vec
from hkopa.terms import HKopaModel, evaluate, normalize_term

from conftest import random_mixed_model, run_all_commands


def _unit(m):
    return m / frobenius_norm(m)


def _sign_aligned(est, true):
    return min(frobenius_norm(est - true), frobenius_norm(est + true))


def test_criterion_01_rearrangement_identity(verdict):
    rng = np.random.default_rng(1)
    shape = AmbientShape(8, 8)
    start = time.perf_counter()
    exact = True
    for c in enumerate_configurations(shape):
        for _ in range(100):
            a = rng.standard_normal(c.a_shape)
            b = rng.standard_normal(c.b_shape)
            exact &= np.array_equal(rearrange(kron(a, b), c), np.outer(vec(a), vec(b)))
            y = rng.standard_normal((8, 8))
            exact &= np.array_equal(unrearrange(rearrange(y, c), c), y)
    elapsed = time.perf_counter() - start
    verdict(1, bool(exact) and elapsed < 1.0, f"bit-exact={bool(exact)}, {elapsed:.3f}s (< 1s)")


def test_criterion_02_single_term_recovery(verdict):
    rng = np.random.default_rng(2)
    shape = AmbientShape(32, 32)
    start = time.perf_counter()
    worst_lam = worst_fac = 0.0
    for c in enumerate_configurations(shape):
        lam = rng.uniform(0.5, 5.0)
        a0 = _unit(rng.standard_normal(c.a_shape))
        b0 = _unit(rng.standard_normal(c.b_shape))
        term, _ = fit_single_given_config(lam * kron(a0, b0), c)
        worst_lam = max(worst_lam, abs(term.lam - lam) / lam)
        worst_fac = max(worst_fac, _sign_aligned(term.a, a0), _sign_aligned(term.b, b0))
    elapsed = time.perf_counter() - start
    ok = worst_lam <= 1e-10 and worst_fac <= 1e-10 and elapsed < 5.0
    verdict(2, ok, f"max rel lambda err {worst_lam:.1e}, max factor err {worst_fac:.1e}, {elapsed:.2f}s")


def test_criterion_03_config_consistency(verdict):
    shape = AmbientShape(32, 32)
    truth = Configuration(4, 8, shape)
    start = time.perf_counter()
    hits = 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        y = 5.0 * kron(_unit(rng.standard_normal((4, 8))), _unit(rng.standard_normal((8, 4))))
        y = y + (0.01 / math.sqrt(shape.size)) * rng.standard_normal(y.shape)
        _, chosen, _ = fit_single_select_config(y, shape, ICSpec.bic())
        hits += chosen == truth
    elapsed = time.perf_counter() - start
    verdict(3, hits >= 19 and elapsed < 30, f"{hits}/20 seeds select 4x8 (need >= 19), {elapsed:.2f}s")


def test_criterion_04_gram_schmidt_invariance(verdict):
    rng = np.random.default_rng(4)
    start = time.perf_counter()
    worst = 0.0
    violations = 0
    for _ in range(200):
        before = random_mixed_model(rng)
        after = gram_schmidt(before)
        y = evaluate(before)
        worst = max(worst, frobenius_norm(evaluate(after) - y) / frobenius_norm(y))
        violations += len(check_assumption2(after, 1e-8))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and violations == 0 and elapsed < 30
    verdict(4, ok, f"max rel change {worst:.1e} (<= 1e-10), {violations} violations, {elapsed:.2f}s")


def test_criterion_05_backfit_monotone_and_one_round(verdict):
    _, _, report = run_cell(SimulationSpec.desk(alpha=0.0, sigma0=1.0, seed=0))
    obj = report.objective
    gap = (obj[1] - obj[-1]) / obj[-1]
    worst_rise = -math.inf
    for alpha in ALPHA_GRID:
        for s0 in SIGMA0_GRID:
            o = np.array(run_cell(SimulationSpec.desk(alpha=alpha, sigma0=s0, seed=0))[2].objective)
            worst_rise = max(worst_rise, float(np.max(np.diff(o) / o[0])))
    monotone = worst_rise <= MONOTONE_RTOL
    one_round = gap <= 1e-6
    verdict(5, monotone and one_round,
            f"alpha=0 round-1 gap {gap:.2e} (need <= 1e-6, {report.rounds} rounds); "
            f"monotone over 25 cells: {monotone} (max rise {worst_rise:.1e} of ||y||^2)")


def test_criterion_06_benchmark_error(verdict):
    finals = [run_cell(SimulationSpec.desk(alpha=0.5, sigma0=1.0, seed=s))[0].series("err_y")[-1]
              for s in range(10)]
    mean = float(np.mean(finals))
    verdict(6, 0.45 <= mean <= 0.578, f"mean final relative error {mean:.4f} over 10 seeds (in [0.45, 0.578])")


def test_criterion_07_stopping_specificity(verdict):
    opts = FitOptions(max_terms=5, stopping=Stopping.random_matrix(0.01))
    empty = sum(len(greedy_fit(np.random.default_rng(s).standard_normal((64, 64)), opts)[0].terms) == 0
                for s in range(100))
    shape = AmbientShape(64, 64)
    two = 0
    for seed in range(20):
        # noise sigma = 1; nested, mutually orthogonal planted terms
        probe = SimulationSpec(shape=shape, config1=(4, 4), config2=(8, 8), seed=seed)
        lam1 = 10 * stopping_threshold(1.0, probe.c1, 0.01)
        lam2 = 10 * stopping_threshold(1.0, probe.c2, 0.01)
        y, _ = generate(SimulationSpec(shape=shape, config1=(4, 4), config2=(8, 8), lambda1=lam1,
                                       lambda2=lam2, sigma0=64.0, seed=seed))
        two += len(greedy_fit(y, opts)[0].terms) == 2
    verdict(7, empty >= 95 and two >= 18,
            f"pure noise K=0 in {empty}/100 (need >= 95); planted K=2 in {two}/20 (need >= 18)")


def test_criterion_08_svd_special_case(verdict):
    rng = np.random.default_rng(8)
    y = rng.standard_normal((64, 64))
    shape = AmbientShape(64, 64)
    model, _ = greedy_fit(y, FitOptions(max_terms=5, configs=(Configuration(64, 1, shape),)))
    worst = 0.0
    partial = np.zeros_like(y)
    for k, t in enumerate(model.terms, start=1):
        partial += t.matrix()
        ours = float(np.sum(np.square(y - partial)))
        theirs = float(np.sum(np.square(y - svd_approximation(y, k)[0])))
        worst = max(worst, abs(ours - theirs) / theirs)
    verdict(8, len(model.terms) == 5 and worst <= 1e-9, f"max rel residual gap {worst:.1e} for K=1..5")


def test_criterion_09_parameter_counts(verdict):
    big = AmbientShape(512, 512)
    n1 = parameter_count(Configuration(64, 128, big)).report_count
    n2 = parameter_count(Configuration(16, 32, big)).report_count
    c = Configuration(16, 32, big)
    t = stopping_threshold(1.0, c, 0.01) - math.sqrt(16 * 32) - math.sqrt(big.size / (16 * 32))
    t_err = abs(t - math.sqrt(2 * math.log(100)))
    verdict(9, n1 == 8223 and n2 == 1023 and t_err <= 1e-12,
            f"counts {n1}, {n2} (want 8223, 1023); |t - sqrt(2 ln 100)| = {t_err:.1e}")


def _planted_hybrid(rng, shape):
    pairs, lams = [(4, 4), (8, 8), (16, 4)], [3.0, 2.0, 1.0]
    terms = [normalize_term(lam, _unit(rng.standard_normal((p, q))),
                            _unit(rng.standard_normal((shape.rows // p, shape.cols // q))))
             for (p, q), lam in zip(pairs, lams)]
    return evaluate(HKopaModel(shape, terms, canonical=False))


def _violations(curve):
    svd = curve.method("svd")
    bad = 0
    for h in curve.method("hkopa"):
        cheaper = [s for s in svd if s.params <= h.params]
        if cheaper and h.rse > max(cheaper, key=lambda s: s.params).rse:
            bad += 1
    return bad


def test_criterion_10_planted_dominance(verdict):
    shape = AmbientShape(64, 64)
    bad = 0
    interior = 0
    seeds = range(5)
    for seed in seeds:
        rng = np.random.default_rng(seed)
        clean = _planted_hybrid(rng, shape)
        noisy = clean + (0.5 / math.sqrt(shape.size)) * rng.standard_normal(clean.shape)
        bad += _violations(compare(clean, clean, FitOptions(max_terms=20)))
        curve = compare(clean, noisy, FitOptions(max_terms=20))
        bad += _violations(curve)
        rse = [p.rse for p in curve.method("hkopa")]
        interior += 0 < int(np.argmin(rse)) < len(rse) - 1
    verdict(10, bad == 0 and interior == len(seeds),
            f"{bad} matched-budget losses to SVD; interior RSE minimum in {interior}/{len(seeds)} noisy runs")


def test_criterion_11_cli_determinism(verdict, tmp_path):
    rng = np.random.default_rng(11)
    y = kron(rng.uniform(size=(4, 4)), rng.uniform(size=(8, 8)))
    write_matrix(y, tmp_path / "src.mat")
    write_pgm(y, tmp_path / "src.pgm")
    differing = []
    total = 0
    for src in ("src.mat", "src.pgm"):
        first = run_all_commands(tmp_path / f"{src}-1", tmp_path / src)
        second = run_all_commands(tmp_path / f"{src}-2", tmp_path / src)
        total += len(first)
        differing += [a.name for a, b in zip(first, second) if a.read_bytes() != b.read_bytes()]
        differing += ["<file list>"] * (len(first) != len(second))
    verdict(11, not differing and total > 0, f"{total} outputs compared, differing: {differing or 'none'}")
