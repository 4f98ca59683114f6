"""Acceptance gate: one test per criterion, printed pass/fail per line.

Run with ``pytest -v -s tests/test_acceptance.py``.  Three tests
(c02, c03, c05) assert reference values that this implementation
demonstrably cannot reproduce at the stated settings; they fail red with
the measured evidence printed, and the ``*_supplement`` tests pin the
attainable behaviour.  See README.md for the summary of why.
"""

import math

import numpy as np
import pytest
from scipy import integrate

import ergmcmc as e
from ergmcmc.adaptcov import RunningCovariance, batch_covariance, scale_proposal
from ergmcmc.cli import load_config
from ergmcmc.samplers import SamplerConfig, run

SEED = 20260810

FLO_MODEL = e.ModelSpec((e.Edges(), e.KStar(2), e.KStar(3)))
PRIOR3 = e.GaussianPrior.vague(3)


@pytest.fixture(scope="module")
def florentine_graph():
    return e.load_builtin("florentine")


@pytest.fixture(scope="module")
def florentine_supplement_report(florentine_graph):
    """ADS-AEA at the published tuning but auxiliary runs long enough to
    remove most approximation bias (400 tie flips)."""
    cfg = SamplerConfig(variant="ads", chains=6, main_iters=4000, burn_in=800,
                        gamma=0.8, eps_covariance=0.025, aux_iters=400, seed=SEED)
    return e.summarize(run(cfg, FLO_MODEL, PRIOR3, florentine_graph))


def _edges_posterior_truth():
    """Quadrature oracle for the edges-only posterior on 4 nodes, s(y) = 2."""
    def unnorm(t):
        return math.exp(2 * t) / (1 + math.exp(t)) ** 6 * math.exp(-t * t / 200.0)

    z, _ = integrate.quad(unnorm, -60, 60)
    m1, _ = integrate.quad(lambda t: t * unnorm(t), -60, 60)
    m2, _ = integrate.quad(lambda t: t * t * unnorm(t), -60, 60)
    mean = m1 / z
    sd = math.sqrt(m2 / z - mean ** 2)
    return mean, sd


ALL_VARIANTS = [("ads", False), ("ads", True), ("vertical", False), ("vertical", True),
                ("horizontal", False), ("horizontal", True),
                ("rectangular", False), ("rectangular", True)]


def test_c01_exact_posterior_oracle_all_variants():
    """Every variant matches the enumerable posterior to Monte-Carlo error."""
    mean_true, sd_true = _edges_posterior_truth()
    y = e.Graph.from_edge_list(4, [(0, 1), (2, 3)])
    model = e.ModelSpec((e.Edges(),))
    prior = e.GaussianPrior.vague(1)
    for variant, dr in ALL_VARIANTS:
        cfg = SamplerConfig(variant=variant, dr_enabled=dr, chains=6,
                            main_iters=4000, burn_in=800, gamma=0.8,
                            eps_covariance=0.25, aux_method="exact", seed=42)
        store = run(cfg, model, prior, y)
        rep = e.summarize(store)
        se = sd_true / math.sqrt(rep.ess_pooled[0])
        label = variant + ("+DR" if dr else "")
        assert store.wall_time < 120.0, f"{label} exceeded the runtime target"
        assert abs(rep.mean[0] - mean_true) < 3 * se, (
            f"{label}: mean {rep.mean[0]:.4f} vs {mean_true:.4f} (3se = {3 * se:.4f})")
        assert abs(rep.sd[0] - sd_true) < 0.1 * sd_true, (
            f"{label}: sd {rep.sd[0]:.4f} vs {sd_true:.4f}")
    print("criterion 01 PASS: all 8 variants match the quadrature posterior "
          f"(truth mean {mean_true:.4f}, sd {sd_true:.4f})")


@pytest.mark.slow
def test_c02_florentine_reproduction(florentine_graph):
    """Published Florentine estimates at the stated tuning constants.

    Expected to fail: the acceptance bracket is unattainable at move factor
    0.8 for any auxiliary-run length (measured 9.6%-13.7%), and at 50
    auxiliary tie flips the posterior is over-dispersed.
    """
    cfg = SamplerConfig(variant="ads", chains=6, main_iters=4000, burn_in=800,
                        gamma=0.8, eps_covariance=0.025, aux_iters=50, seed=SEED)
    rep = e.summarize(run(cfg, FLO_MODEL, PRIOR3, florentine_graph))
    target_mean = np.array([-1.57, 0.08, -0.07])
    target_sd = np.array([1.93, 0.71, 0.34])
    acc = rep.acceptance["overall_rate"]
    print(f"criterion 02 measured: mean {np.round(rep.mean, 3)} "
          f"sd {np.round(rep.sd, 3)} acceptance {acc:.3f}")
    ok_mean = np.all(np.abs(rep.mean - target_mean) < 0.35)
    ok_sd = np.all(np.abs(rep.sd - target_sd) < 0.30 * target_sd)
    ok_acc = 0.15 <= acc <= 0.28
    print(f"criterion 02 {'PASS' if ok_mean and ok_sd and ok_acc else 'FAIL'}: "
          f"means within 0.35: {ok_mean}; sds within 30%: {ok_sd}; "
          f"acceptance in [0.15, 0.28]: {ok_acc}")
    assert ok_mean, f"posterior means {rep.mean} outside +-0.35 of {target_mean}"
    assert ok_sd, f"posterior sds {rep.sd} outside 30% of {target_sd}"
    assert ok_acc, f"acceptance {acc:.3f} outside [0.15, 0.28]"


@pytest.mark.slow
def test_c02_supplement_posterior_match(florentine_supplement_report):
    """Attainable Florentine reproduction: same tuning, 400-flip auxiliary."""
    rep = florentine_supplement_report
    target_mean = np.array([-1.57, 0.08, -0.07])
    target_sd = np.array([1.93, 0.71, 0.34])
    assert np.all(np.abs(rep.mean - target_mean) < 0.35), rep.mean
    assert np.all(np.abs(rep.sd - target_sd) < 0.30 * target_sd), rep.sd
    print(f"criterion 02 supplement PASS: mean {np.round(rep.mean, 3)}, "
          f"sd {np.round(rep.sd, 3)}, acceptance {rep.acceptance['overall_rate']:.3f}")


@pytest.mark.slow
def test_c03_florentine_correlations(florentine_supplement_report):
    """Published correlation triple. Expected to fail: (-0.94, -0.80, -0.94)
    is not positive semidefinite (with the outer entries at -0.94, the middle
    one must exceed +0.767), so the quoted rho13 sign cannot occur."""
    corr = florentine_supplement_report.correlation
    got = np.array([corr[0, 1], corr[0, 2], corr[1, 2]])
    target = np.array([-0.94, -0.80, -0.94])
    print(f"criterion 03 measured: (rho12, rho13, rho23) = {np.round(got, 3)}")
    ok = np.all(np.abs(got - target) < 0.08)
    print(f"criterion 03 {'PASS' if ok else 'FAIL'}: target {target} +-0.08")
    assert ok, f"correlations {got} outside +-0.08 of {target}"


@pytest.mark.slow
def test_c03_supplement_feasible_signs(florentine_supplement_report):
    """Same magnitudes with the only PSD-feasible sign for rho13."""
    corr = florentine_supplement_report.correlation
    got = np.array([corr[0, 1], corr[0, 2], corr[1, 2]])
    target = np.array([-0.94, 0.80, -0.94])
    assert np.all(np.abs(got - target) < 0.08), got
    print(f"criterion 03 supplement PASS: correlations {np.round(got, 3)} "
          f"within +-0.08 of {target}")


@pytest.mark.slow
def test_c04_peskun_dominance(florentine_graph):
    """Each delayed-rejection variant beats its base variant in mean ESS
    over 10 seeded replicates on the Florentine posterior."""
    seeds = [1000 + 7 * r for r in range(10)]
    results = {}
    for variant in ("ads", "vertical", "horizontal", "rectangular"):
        chains, iters, burn = (24, 1000, 200) if variant == "horizontal" else (6, 4000, 800)
        for dr in (False, True):
            values = []
            for seed in seeds:
                cfg = SamplerConfig(variant=variant, dr_enabled=dr, chains=chains,
                                    main_iters=iters, burn_in=burn, gamma=0.8,
                                    eps_covariance=0.025, aux_iters=50, seed=seed)
                rep = e.summarize(run(cfg, FLO_MODEL, PRIOR3, florentine_graph))
                values.append(float(np.mean(rep.ess_pooled)))
            results[(variant, dr)] = float(np.mean(values))
    lines = []
    for variant in ("ads", "vertical", "horizontal", "rectangular"):
        base, plus = results[(variant, False)], results[(variant, True)]
        lines.append(f"{variant}: {base:.0f} -> {plus:.0f}")
    print("criterion 04 mean ESS (base -> +DR): " + "; ".join(lines))
    for variant in ("ads", "vertical", "horizontal", "rectangular"):
        assert results[(variant, True)] > results[(variant, False)], (
            f"{variant}+DR mean ESS {results[(variant, True)]:.1f} "
            f"not above base {results[(variant, False)]:.1f}")
    print("criterion 04 PASS: every +DR variant exceeds its base in mean ESS")


@pytest.mark.slow
def test_c05_karate_reproduction():
    """Published karate-club estimates at the stated settings.

    Expected to fail: at 100 auxiliary tie flips (0.18 sweeps of the
    561-dyad graph) the GWD posterior mean equilibrates near 0.5, outside
    the +-0.4 band around 1.18, for any burn-in length."""
    g = e.load_builtin("karate")
    model = e.ModelSpec((e.Edges(), e.Gwesp(math.log(2)), e.Gwd(math.log(2))))
    cfg = SamplerConfig(variant="ads", chains=6, main_iters=4000, burn_in=800,
                        gamma=0.9, eps_covariance=0.0025, aux_iters=100, seed=SEED)
    rep = e.summarize(run(cfg, model, PRIOR3, g))
    target = np.array([-3.51, 0.74, 1.18])
    print(f"criterion 05 measured: mean {np.round(rep.mean, 3)} "
          f"(acceptance {rep.acceptance['overall_rate']:.3f})")
    ok = np.all(np.abs(rep.mean - target) < 0.4)
    print(f"criterion 05 {'PASS' if ok else 'FAIL'}: target {target} +-0.4")
    assert ok, f"karate means {rep.mean} outside +-0.4 of {target}"


@pytest.mark.slow
def test_c05_supplement_converged_auxiliary():
    """Published karate means are reproduced once auxiliary runs converge."""
    g = e.load_builtin("karate")
    model = e.ModelSpec((e.Edges(), e.Gwesp(math.log(2)), e.Gwd(math.log(2))))
    cfg = SamplerConfig(variant="ads", chains=6, main_iters=1500, burn_in=400,
                        gamma=0.9, eps_covariance=0.0025, aux_iters=2000, seed=SEED)
    rep = e.summarize(run(cfg, model, PRIOR3, g))
    target = np.array([-3.51, 0.74, 1.18])
    assert np.all(np.abs(rep.mean - target) < 0.4), rep.mean
    print(f"criterion 05 supplement PASS: mean {np.round(rep.mean, 3)} "
          f"within +-0.4 of {target} at 2000-flip auxiliary runs")


def test_c06_fauxmesa_smoke():
    """Scaled-down school-network run completes with 9 finite estimates and
    a strongly negative edges parameter; the full-scale config ships."""
    cfg = load_config("fauxmesa-smoke")
    model = cfg.build_model()
    assert model.d == 9
    smoke = cfg.build_sampler()
    total_iters = smoke.chains * smoke.main_iters
    assert total_iters == 6000 and smoke.aux_iters == 1000
    g = e.load_builtin("fauxmesa")
    rep = e.summarize(run(smoke, model, cfg.build_prior(model.d), g))
    assert np.all(np.isfinite(rep.mean)) and np.all(np.isfinite(rep.sd))
    assert rep.mean[0] < -4.0, f"edges parameter {rep.mean[0]:.2f} not below -4"
    full = load_config("fauxmesa-full")
    full_sampler = full.build_sampler()
    assert full_sampler.chains * full_sampler.main_iters == 60000
    assert full_sampler.aux_iters == 5000
    print(f"criterion 06 PASS: smoke run edges mean {rep.mean[0]:.2f}, "
          f"9 finite estimates; full-scale config ships for manual runs")


def test_c07_dr_detailed_balance_random_instances(rng):
    """Two-stage kernels on a 3-state target satisfy detailed balance to
    1e-12 for 100 randomized proposal-table instances."""
    from test_drcore import dr_transition_matrix, random_target_and_tables

    worst = 0.0
    for _ in range(100):
        pi, h1, h2 = random_target_and_tables(rng)
        P = dr_transition_matrix(pi, h1, h2)
        flow = pi[:, None] * P
        worst = max(worst, float(np.max(np.abs(flow - flow.T))))
    assert worst < 1e-12
    print(f"criterion 07 PASS: worst detailed-balance violation {worst:.2e}")


def test_c08_change_score_oracle(rng):
    """change scores == evaluate-difference oracle over 1000 random triples."""
    from conftest import random_graph

    stats = [e.Edges(), e.KStar(2), e.KStar(3), e.Gwesp(0.5),
             e.Gwesp(math.log(2)), e.Gwd(1.0), e.Gwd(math.log(2))]
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(3, 9))
        g = random_graph(rng, n, p=float(rng.uniform(0.1, 0.9)))
        i, j = (int(v) for v in rng.choice(n, size=2, replace=False))
        stat = stats[int(rng.integers(len(stats)))]
        with_edge = g.copy()
        if not with_edge.has_edge(i, j):
            with_edge.toggle(i, j)
        without = with_edge.copy()
        without.toggle(i, j)
        oracle = stat.evaluate(with_edge) - stat.evaluate(without)
        got = stat.change(g, i, j)
        err = abs(got - oracle)
        if isinstance(stat, (e.Edges, e.KStar)):
            assert err == 0.0, (stat, n, i, j)
        else:
            assert err < 1e-10, (stat, n, i, j)
            worst = max(worst, err)
    print(f"criterion 08 PASS: 1000 triples, worst weighted-statistic error {worst:.2e}")


def test_c09_ess_on_ar1_family():
    """ESS within 15% of the analytic value for AR(1) chains."""
    rng = np.random.default_rng(2)
    size = 100_000
    for phi in (0.0, 0.5, 0.8, 0.95):
        noise = rng.standard_normal(size) * math.sqrt(1 - phi * phi) if phi else rng.standard_normal(size)
        x = np.empty(size)
        x[0] = rng.standard_normal()
        for t in range(1, size):
            x[t] = phi * x[t - 1] + noise[t]
        expected = size * (1 - phi) / (1 + phi)
        got = e.ess(x)
        assert abs(got - expected) < 0.15 * expected, (phi, got, expected)
    print("criterion 09 PASS: AR(1) ESS within 15% for phi in {0, 0.5, 0.8, 0.95}")


def test_c10_adaptation_correctness(rng):
    """Recursive covariance == batch covariance to 1e-10; scaling rule exact."""
    for _ in range(5):
        pts = rng.normal(size=(500, 3)) @ np.diag(rng.uniform(0.2, 2.0, size=3))
        acc = RunningCovariance(3)
        for p in pts:
            acc.update(p)
        assert np.max(np.abs(acc.cov - batch_covariance(pts))) < 1e-10
    cloud = rng.normal(size=(40, 4))
    sigma = batch_covariance(cloud)
    scaled = scale_proposal(sigma, 4, jitter=1e-6)
    assert np.max(np.abs(scaled - ((2.38 ** 2 / 4) * sigma + 1e-6 * np.eye(4)))) < 1e-15
    print("criterion 10 PASS: recursive covariance and scaling rule exact")


def test_c11_thread_count_reproducibility(florentine_graph):
    """Identical seeds give bit-identical sample stores for any thread count."""
    stores = []
    for threads in (1, 2, 4):
        cfg = SamplerConfig(variant="horizontal", dr_enabled=True, chains=6,
                            main_iters=150, burn_in=40, gamma=0.8,
                            eps_covariance=0.025, aux_iters=40, seed=SEED,
                            threads=threads)
        stores.append(run(cfg, FLO_MODEL, PRIOR3, florentine_graph))
    for other in stores[1:]:
        assert np.array_equal(stores[0].chains, other.chains)
        assert stores[0].acceptance == other.acceptance
    print("criterion 11 PASS: bit-identical stores across 1, 2 and 4 threads")
