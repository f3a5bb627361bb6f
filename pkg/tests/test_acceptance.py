"""Acceptance criteria, each checked at its stated tolerance.

Every test logs one PASS/FAIL line; the lines are repeated in the pytest
terminal summary under "acceptance criteria".
"""

import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from spectral_clt.centering import (
    centering_value,
    closed_form_log,
    closed_form_lrt_g,
    closed_form_mean,
    contour_terms,
    build_contour,
    mp_integral_contour,
)
from spectral_clt.clt_test import clt_params_g, null_centering_g, power
from spectral_clt.functions import from_name, identity, log, lrt_g, square
from spectral_clt.mc_lab import (
    ExperimentConfig,
    empirical_size_power,
    run_clt_experiment,
    simulate_spectra,
)
from spectral_clt.spike_model import classify_spikes, new_model

SEED = 20260101
P, N, REPS, ALPHA = 200, 400, 2000, 0.05

CUBIC = from_name("poly:0.5,-1,0.25,0.2")


def _cubic_moment(y):
    # MP moments: E x = 1, E x^2 = 1 + y, E x^3 = 1 + 3y + y^2
    return 0.5 - 1.0 + 0.25 * (1 + y) + 0.2 * (1 + 3 * y + y * y)


# 20 models mixing distant and close spikes, y in {0.2, 0.5, 0.8}
ORACLE_MODELS = [
    (100, 500, [(3.0, 1), (1.3, 1)]),
    (100, 500, [(5.0, 2), (0.8, 1)]),
    (100, 500, [(2.0, 1), (1.2, 2), (0.3, 1)]),
    (200, 1000, [(10.0, 1), (1.4, 3)]),
    (100, 500, [(1.45, 1), (0.56, 2)]),
    (150, 750, [(4.0, 1), (0.2, 2)]),
    (100, 500, [(8.0, 3)]),
    (200, 400, [(3.0, 1), (1.5, 1)]),
    (200, 400, [(6.0, 2), (1.2, 2), (0.5, 1)]),
    (100, 200, [(1.7, 1), (0.4, 1)]),
    (100, 200, [(2.5, 1), (0.1, 1)]),
    (300, 600, [(12.0, 1), (3.0, 2), (1.1, 1)]),
    (200, 400, [(1.5, 1)]),
    (200, 400, [(0.15, 2), (0.6, 1)]),
    (100, 125, [(3.0, 1), (1.8, 1)]),
    (200, 250, [(5.0, 1), (0.5, 2)]),
    (100, 125, [(2.2, 2), (0.08, 1)]),
    (160, 200, [(1.89, 1), (1.3, 1), (0.2, 1)]),
    (200, 250, [(9.0, 1), (4.0, 1), (0.7, 3)]),
    (100, 125, [(0.05, 1), (1.6, 2)]),
]


def _oracle_models():
    return [new_model(p, n, s) for p, n, s in ORACLE_MODELS]


def test_oracle_grid_mixes_spike_classes():
    ms = _oracle_models()
    assert len(ms) == 20
    assert {m.y for m in ms} == {0.2, 0.5, 0.8}
    assert any(classify_spikes(m).distant and classify_spikes(m).close for m in ms)


@pytest.mark.criterion("1 no-spike reduction")
def test_no_spike_reduction(acceptance):
    from spectral_clt.stieltjes import mp_integral

    start = time.perf_counter()
    worst = 0.0
    for y, p, n in [(0.3, 90, 300), (0.5, 90, 180), (0.9, 90, 100), (1.0, 90, 90), (1.5, 90, 60), (2.0, 90, 45)]:
        model = new_model(p, n, [])
        cases = [(identity(), 1.0), (square(), 1.0 + y), (CUBIC, _cubic_moment(y))]
        if y < 1:
            cases.append((lrt_g(), null_centering_g(y)))
        for f, moment in cases:
            total = centering_value(f, model).total
            gap = abs(total - mp_integral(f, y))
            worst = max(worst, gap)
            acceptance.check(gap < 1e-9, f"y={y} f={f.name} |total - G(f)|={gap:.2e}")
            # independent routes: known MP moments and the m-plane contour
            acceptance.check(abs(total - moment) < 1e-9, f"y={y} f={f.name} vs moment gap {abs(total - moment):.2e}")
            cgap = abs(total - mp_integral_contour(f, y))
            acceptance.check(cgap < 1e-9, f"y={y} f={f.name} vs contour route gap {cgap:.2e}")
    elapsed = time.perf_counter() - start
    acceptance.check(elapsed < 5.0, f"max gap {worst:.1e}, runtime {elapsed:.2f}s (< 5 s)")
    acceptance.finish()


@pytest.mark.criterion("2 closed-form oracle equality")
def test_closed_form_oracles(acceptance):
    start = time.perf_counter()
    worst = 0.0
    for model in _oracle_models():
        gx = abs(centering_value(identity(), model).total - closed_form_mean(model))
        gl = abs(centering_value(log(), model).total - closed_form_log(model))
        worst = max(worst, gx, gl)
        acceptance.check(gx < 1e-8, f"{model} f=x gap {gx:.2e}")
        acceptance.check(gl < 1e-8, f"{model} f=log gap {gl:.2e}")
    elapsed = time.perf_counter() - start
    acceptance.check(elapsed < 30.0, f"20 models, max gap {worst:.1e}, runtime {elapsed:.2f}s (< 30 s)")
    acceptance.finish()


@pytest.mark.criterion("3 contour invariance")
def test_contour_invariance(acceptance):
    worst = 0.0
    for model in _oracle_models():
        for f in (identity(), square(), log(), lrt_g()):
            a = sum(contour_terms(f, model, build_contour(model, 0.5)))
            b = sum(contour_terms(f, model, build_contour(model, 1.0)))
            worst = max(worst, abs(a - b))
            acceptance.check(abs(a - b) < 1e-9, f"{model} f={f.name} change {abs(a - b):.2e}")
    acceptance.check(True, f"max change of term1+term2 under margin doubling {worst:.1e} (< 1e-9)")
    acceptance.finish()


@pytest.fixture(scope="module")
def spectra():
    """Shared Monte Carlo spectra, one set per model, p=200, n=400, 2000 reps."""
    out = {}
    for key, spikes in (("null", []), ("close", [(1.5, 1)]), ("distant", [(3.0, 1)])):
        cfg = ExperimentConfig(new_model(P, N, spikes), reps=REPS, seed=SEED, alpha=ALPHA)
        out[key] = (cfg, simulate_spectra(cfg))
    return out


@pytest.mark.slow
@pytest.mark.criterion("4 CLT mean and variance")
def test_clt_mean_variance(acceptance, spectra):
    m_g, v_g = clt_params_g(P / N)
    for key in ("null", "close"):
        cfg, draws = spectra[key]
        rep = run_clt_experiment(cfg, draws)
        z = (rep.emp_mean - m_g) / rep.mean_se
        ratio = rep.emp_var / v_g
        acceptance.check(abs(z) <= 3, f"{key}: mean {rep.emp_mean:.4f} vs m(g) {m_g:.6f}, z={z:.2f}")
        acceptance.check(abs(ratio - 1) <= 0.10, f"{key}: var {rep.emp_var:.4f} vs v(g) {v_g:.6f}, ratio {ratio:.3f}")

    # negative control: null centering on the spiked data
    cfg, draws = spectra["close"]
    naive = empirical_size_power(cfg, draws)
    proper = run_clt_experiment(cfg, draws)
    shift = naive.emp_mean - proper.emp_mean
    expected = 1.5 - 1 - math.log(1.5)
    acceptance.check(abs(shift - expected) < 1e-9, f"null-centering shift {shift:.6f} vs {expected:.6f}")
    z_naive = (naive.emp_mean - m_g) / naive.mean_se
    acceptance.check(abs(z_naive) > 3, f"null-centered mean leaves the 3 SE band (z={z_naive:.2f})")
    acceptance.finish()


def _binomial_se(rate, reps):
    return math.sqrt(rate * (1 - rate) / reps)


@pytest.mark.slow
@pytest.mark.criterion("5 size")
def test_size(acceptance, spectra):
    cfg, draws = spectra["null"]
    rate = empirical_size_power(cfg, draws).reject_rate
    acceptance.check(0.035 <= rate <= 0.065, f"null rejection rate {rate:.4f} in [0.035, 0.065]")
    acceptance.finish()


@pytest.mark.slow
@pytest.mark.criterion("6 power reproduction")
def test_power_reproduction(acceptance, spectra):
    cfg, draws = spectra["close"]
    beta = power(cfg.model, ALPHA)
    acceptance.check(abs(beta - 0.0678) < 5e-5, f"formula power a=1.5: {beta:.5f} (~0.0678)")
    for key in ("close", "distant"):
        cfg, draws = spectra[key]
        theory = power(cfg.model, ALPHA)
        rate = empirical_size_power(cfg, draws).reject_rate
        z = (rate - theory) / _binomial_se(theory, REPS)
        acceptance.check(abs(z) <= 3, f"{key} a={cfg.model.spikes[0][0]}: MC {rate:.4f} vs power {theory:.4f}, z={z:.2f}")
    acceptance.finish()


@pytest.mark.criterion("7 property suites")
def test_property_suites(acceptance):
    path = Path(__file__).with_name("test_properties.py")
    start = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", str(path)],
        capture_output=True,
        text=True,
        cwd=path.parent.parent,
    )
    elapsed = time.perf_counter() - start
    tail = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    acceptance.check(proc.returncode == 0, f"standalone run: {tail}")
    acceptance.check(elapsed < 120, f"runtime {elapsed:.1f}s (< 120 s)")
    acceptance.finish()
