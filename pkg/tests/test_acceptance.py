"""Exit criteria. Each test records one PASS/FAIL line shown in the terminal summary."""

import time
from contextlib import contextmanager

import numpy as np
import pytest

from cegof import (
    EntropyConfig,
    GumbelCopulaParams,
    bootstrap_p_value,
    fit_gaussian,
    fit_gumbel,
    gumbel_log_density,
    hypothesis_ce,
    kendall_tau,
    knn_entropy,
    test_statistic,
    to_pseudo_obs,
    true_ce,
)
from cegof.copulas import fit_gaussian as _fit_gaussian, gumbel_cdf
from cegof.simulation import gaussian_paper_grid, gumbel_paper_grid, run_experiment, summarize

from _mc import null_bootstrap_pvalues
from conftest import ACCEPTANCE_LINES, gaussian_ce, gaussian_data, gumbel_data

pytestmark = pytest.mark.acceptance


@contextmanager
def criterion(number, title, budget):
    """Time the body, then record and enforce checks collected in ``checks``."""
    checks = []
    start = time.perf_counter()
    yield checks
    elapsed = time.perf_counter() - start
    checks.append((f"runtime {elapsed:.1f}s < {budget}s", elapsed < budget))
    ok = all(passed for _, passed in checks)
    failed = [name for name, passed in checks if not passed]
    detail = "; ".join(name for name, _ in checks)
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'} [{number}] {title}: {detail}")
    print(ACCEPTANCE_LINES[-1])
    assert ok, "failed checks: " + "; ".join(failed)


def _pseudo(rho, s):
    return to_pseudo_obs(gaussian_data(rho, 300, s), s)


RHOS = (0.3, 0.5, 0.8)


def test_1_gaussian_hypothesis_ce():
    with criterion(1, "Gaussian hypothesis CE vs closed form", 10) as checks:
        for rho in RHOS:
            vals = [hypothesis_ce(u, fit_gaussian(u)) for u in (_pseudo(rho, s) for s in range(20))]
            err = np.mean(vals) - gaussian_ce(rho)
            checks.append((f"rho={rho} mean={np.mean(vals):.4f} err={err:+.4f} (tol 0.08)",
                           abs(err) <= 0.08))


def test_2_true_ce_estimator():
    with criterion(2, "kNN true CE vs closed form", 10) as checks:
        for rho in RHOS:
            vals = [true_ce(_pseudo(rho, s)) for s in range(20)]
            err = np.mean(vals) - gaussian_ce(rho)
            checks.append((f"rho={rho} mean={np.mean(vals):.4f} err={err:+.4f} (tol 0.10)",
                           abs(err) <= 0.10))
        gen = np.random.default_rng(77)
        vals = [true_ce(to_pseudo_obs(gen.random((300, 2)), s)) for s in range(20)]
        checks.append((f"independent mean={np.mean(vals):+.4f} (tol 0.10)",
                       abs(np.mean(vals)) <= 0.10))


def _fd(u, v, p, h=1e-4):
    c = lambda a, b: gumbel_cdf([a, b], p)
    return (c(u + h, v + h) - c(u + h, v - h) - c(u - h, v + h) + c(u - h, v - h)) / (4 * h * h)


def test_3_gumbel_density_oracle():
    with criterion(3, "Gumbel density vs finite differences and quadrature", 5) as checks:
        m = (np.arange(400) + 0.5) / 400
        grid = np.stack(np.meshgrid(m, m), -1).reshape(-1, 2)
        for alpha in (1.5, 2.0, 5.0):
            p = GumbelCopulaParams(alpha)
            rel = max(abs(np.exp(gumbel_log_density(np.array([u, v]), p)) / _fd(u, v, p) - 1)
                      for u in (0.2, 0.5, 0.8) for v in (0.2, 0.5, 0.8))
            mass = float(np.exp(gumbel_log_density(grid, p)).mean())
            checks.append((f"alpha={alpha} max rel err={rel:.1e} (tol 1e-4)", rel <= 1e-4))
            checks.append((f"alpha={alpha} mass={mass:.5f} (tol 5e-3)", abs(mass - 1) <= 5e-3))


def _selection_rates(rows):
    return {s["param"]: s["correct_rate"] for s in summarize(rows)}


def test_4_experiment_gaussian():
    with criterion(4, "Gaussian grid: Gaussian statistic smaller", 180) as checks:
        rates = _selection_rates(run_experiment(gaussian_paper_grid(replicates=50)))
        for rho, rate in rates.items():
            gated = rho >= 0.3 - 1e-12
            label = f"rho={rho} rate={rate:.2f}" + (" (>=0.80)" if gated else " (ungated)")
            checks.append((label, rate >= 0.8 or not gated))


def test_5_experiment_gumbel():
    with criterion(5, "Gumbel grids: Gumbel statistic smaller, margins irrelevant", 180) as checks:
        tables = {m: run_experiment(gumbel_paper_grid(m, replicates=50))
                  for m in ("standard-normal", "exponential")}
        for margins, rows in tables.items():
            rates = _selection_rates(rows)
            low = min(rates, key=rates.get)
            checks.append((f"{margins}: min rate={rates[low]:.2f} at alpha={low} (>=0.80)",
                           all(r >= 0.8 for r in rates.values())))
        same = [r["t_stat"] for r in tables["standard-normal"]] == \
            [r["t_stat"] for r in tables["exponential"]]
        checks.append(("t_stat columns bit-identical", same))


def test_6_bootstrap_size():
    with criterion(6, "Bootstrap size at level 0.05", 900) as checks:
        p = null_bootstrap_pvalues(outer=200, b=200, rho=0.5, n=300)
        rate = float(np.mean(p <= 0.05))
        checks.append((f"rejection rate={rate:.3f} over {p.size} (in [0.01, 0.11])",
                       0.01 <= rate <= 0.11))


def test_7_invariance_suite():
    with criterion(7, "Invariances and determinism", 30) as checks:
        x = gumbel_data(4.0, 300, 3)
        g = np.column_stack([np.exp(x[:, 0]), x[:, 1] ** 3 + 2 * x[:, 1]])
        same = all(test_statistic(x, f, seed=11).to_dict() == test_statistic(g, f, seed=11).to_dict()
                   for f in ("gaussian", "gumbel"))
        checks.append(("monotone margins bit-exact", same))

        gen = np.random.default_rng(5)
        pts = gen.random((300, 2))
        perm_ok = knn_entropy(pts[gen.permutation(300)]) == knn_entropy(pts)
        checks.append(("row permutation exact", perm_ok))

        worst = max(abs(knn_entropy(s * pts) - knn_entropy(pts) - 2 * np.log(s))
                    for s in (1e-3, 0.5, 3.0, 1e3))
        checks.append((f"scaling covariance err={worst:.1e} (tol 1e-9)", worst <= 1e-9))

        y = gaussian_data(0.5, 300, 9)
        one = bootstrap_p_value(y, "gaussian", b=40, seed=3, n_jobs=1)
        four = bootstrap_p_value(y, "gaussian", b=40, seed=3, n_jobs=4)
        grid = gaussian_paper_grid(replicates=2, param_values=(0.4, 0.7))
        sim_same = run_experiment(grid, n_jobs=1) == run_experiment(grid, n_jobs=4)
        checks.append(("1 vs 4 workers identical", one == four and sim_same))


def test_8_fit_oracles():
    with criterion(8, "Fitting and Kendall tau oracles", 30) as checks:
        for alpha in (2.0, 5.0):
            u = to_pseudo_obs(gumbel_data(alpha, 2000, 21), 0)
            est = fit_gumbel(u).params.alpha
            checks.append((f"alpha={alpha} fit={est:.3f} (±10%)", abs(est / alpha - 1) <= 0.10))
            tau = kendall_tau(gumbel_data(alpha, 5000, 22))
            checks.append((f"alpha={alpha} tau={tau:.4f} vs {1 - 1 / alpha:.4f} (±0.03)",
                           abs(tau - (1 - 1 / alpha)) <= 0.03))
        for rho in RHOS:
            hits = np.mean([abs(_fit_gaussian(_pseudo(rho, 100 + s)).params.summary() - rho) <= 0.15
                            for s in range(100)])
            checks.append((f"rho={rho} within ±0.15 in {hits:.0%} (>=95%)", hits >= 0.95))
