"""Acceptance suite: every criterion prints one PASS/FAIL line.

Run with  pytest tests/test_acceptance.py -v -s  to see the lines.
"""

import json
import math
import time
from dataclasses import replace

import numpy as np
import pytest

from schwarz1d.cli import main as cli_main
from schwarz1d.geometry import Partition, build_grid, build_uniform_partition, validate_partition
from schwarz1d.oracle import (
    AnalyticCase,
    asymptotic_tau_large_q,
    classical_laplace_rate,
    divergence_threshold_L1,
    step_interface,
    tau_factors,
    InterfaceState,
)
from schwarz1d.problem import catalog_ids, catalog_lookup
from schwarz1d.schwarz import (
    SchwarzConfig,
    laplace_seminorm,
    run_elliptic,
    run_parabolic,
)
from schwarz1d.transmission import TransmissionSpec, extract

DIVERGENT = dict(L1=1.9, L2=1.95, p=1.0, q=50.0)  # large-q regime past L1*


def _report(num: int, name: str, ok: bool, detail: str = "") -> None:
    line = f"ACCEPTANCE {num} ({name}): {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f" -- {detail}"
    print(line)
    assert ok, line


def two_subdomain_cfg(L1, L2, p, q, h, rho=None, **kw):
    prob = catalog_lookup("example31")
    part = Partition(length=2.0, subdomains=((0.0, L2), (L1, 2.0)))
    table = {(0, 1): p, (1, 0): q}
    tsp = (TransmissionSpec.scaled_robin(table, rho=rho) if rho is not None
           else TransmissionSpec.robin(table))
    base = dict(problem=prob, partition=part, h_target=h, transmission=tsp,
                u0="one", stop_tol=1e-8, k_max=250, rate_window=10)
    base.update(kw)
    return SchwarzConfig(**base)


# --------------------------------------------------------------------------
# 1. oracle-engine agreement on the closed-form model
# --------------------------------------------------------------------------

def test_criterion_1_oracle_engine_agreement():
    cases = [
        dict(L1=1.7, L2=1.9, p=1.0, q=50.0),    # mandated set
        dict(**DIVERGENT),                       # tau > 1
        dict(L1=1.85, L2=1.95, p=0.5, q=200.0),  # near the threshold
        dict(L1=1.9, L2=1.95, p=2.0, q=50.0),
        dict(L1=0.9, L2=1.1, p=2.0, q=3.0),      # strong contraction
    ]
    taus = [tau_factors(AnalyticCase(L=2.0, **c)).tau for c in cases]
    ok = min(taus) < 1.0 < max(taus)
    details = []
    for c, tau in zip(cases, taus):
        tic = time.perf_counter()
        r_h = run_elliptic(two_subdomain_cfg(**c, h=1e-3)).rate_per_double
        r_h2 = run_elliptic(two_subdomain_cfg(**c, h=5e-4)).rate_per_double
        elapsed = time.perf_counter() - tic
        rich = (4.0 * r_h2 - r_h) / 3.0
        rel_h = abs(r_h - tau) / tau
        rel_rich = abs(rich - tau) / tau
        ok &= rel_h <= 0.05 and rel_rich <= 0.01 and elapsed <= 30.0
        details.append(f"tau={tau:.4g} rel={rel_h:.1e} rich={rel_rich:.1e} {elapsed:.1f}s")
    _report(1, "oracle-engine agreement", ok, "; ".join(details))


# --------------------------------------------------------------------------
# 2. divergence reproduction
# --------------------------------------------------------------------------

def test_criterion_2_divergence_reproduction(tmp_path):
    hist = run_elliptic(two_subdomain_cfg(**DIVERGENT, h=1e-3, stop_tol=1e-10))
    tau = tau_factors(AnalyticCase(L=2.0, **DIVERGENT)).tau
    rel = abs(hist.rate_per_double - tau) / tau
    # the two interface factors differ hugely in magnitude, so E oscillates
    # between parities; growth is monotone per double sweep
    growing = all(hist.E[k + 2] > hist.E[k] * (1 - 1e-9)
                  for k in range(len(hist.E) - 2))
    asym = asymptotic_tau_large_q(2.0, DIVERGENT["L1"])

    out = tmp_path / "out"
    cfg = {
        "schema_version": 1,
        "problem": "example31",
        "partition": {"intervals": [[0.0, DIVERGENT["L2"]], [DIVERGENT["L1"], 2.0]]},
        "grid": {"h": 1e-3},
        "transmission": {"robin": {"p": {"0,1": DIVERGENT["p"], "1,0": DIVERGENT["q"]}}},
        "run": {"u0": "one", "max_iters": 250, "stop_tol": 1e-10, "rate_window": 10},
        "output": {"dir": str(out)},
    }
    cfg_path = tmp_path / "divergent.json"
    cfg_path.write_text(json.dumps(cfg))
    exit_code = cli_main(["--quiet", "run", "--config", str(cfg_path)])

    ok = (hist.verdict == "diverged" and exit_code == 2 and growing
          and asym > 1.0 and tau > 1.0 and rel <= 0.05)
    _report(2, "divergence reproduction", ok,
            f"verdict={hist.verdict} exit={exit_code} tau={tau:.4f} "
            f"asymptotic={asym:.4f} rel={rel:.1e} monotone(double)={growing}")


# --------------------------------------------------------------------------
# 3. rescue by rescaling the Robin parameters
# --------------------------------------------------------------------------

def test_criterion_3_rho_rescue():
    rhos = [2.0 ** k for k in range(11)]
    verdicts = []
    for rho in rhos:
        cfg = two_subdomain_cfg(**DIVERGENT, h=1e-3, rho=rho,
                                stop_tol=1e-9, k_max=200)
        verdicts.append(run_elliptic(cfg).verdict)
    taus = [tau_factors(AnalyticCase(L=2.0, **DIVERGENT, rho=rho)).tau for rho in rhos]

    converged_idx = [i for i, v in enumerate(verdicts) if v == "converged"]
    oracle_idx = [i for i, t in enumerate(taus) if t < 1.0]
    ok = bool(converged_idx) and bool(oracle_idx)
    agree = ok and abs(converged_idx[0] - oracle_idx[0]) <= 1
    monotone = all(verdicts[i] == "converged" for i in range(converged_idx[0], 11)) \
        if converged_idx else False
    if not monotone:
        print("finding: engine verdicts not monotone in rho:", verdicts)
    _report(3, "rho rescue", ok and agree,
            f"empirical rho0=2^{converged_idx[0] if converged_idx else '-'} "
            f"oracle crossing=2^{oracle_idx[0] if oracle_idx else '-'} "
            f"verdicts={verdicts}")


# --------------------------------------------------------------------------
# 4. classical elliptic convergence across the catalog
# --------------------------------------------------------------------------

def test_criterion_4_classical_elliptic_convergence():
    elliptic_ids = [i for i in catalog_ids()
                    if catalog_lookup(i).mode == "elliptic"]
    ok = True
    details = []
    laplace_rel = None
    for problem_id in elliptic_ids:
        prob = catalog_lookup(problem_id)
        for count in (2, 3, 4):
            overlap = 0.4 * prob.length / count
            part = build_uniform_partition(prob.length, count, overlap)
            cfg = SchwarzConfig(problem=prob, partition=part,
                                h_target=prob.length / 200,
                                transmission=TransmissionSpec.dirichlet(),
                                u0="one", stop_tol=1e-9, k_max=400)
            hist = run_elliptic(cfg)
            good = hist.verdict == "converged" and hist.rate_per_double < 1.0
            ok &= good
            details.append(f"{problem_id}/I={count}:{hist.verdict}"
                           f"@{hist.rate_per_double:.3f}")
            if problem_id == "laplace1d" and count == 2:
                expected = classical_laplace_rate(1.0, 0.4, 0.6)
                laplace_rel = abs(hist.rate_per_double - expected) / expected
                ok &= laplace_rel <= 0.02
    _report(4, "classical elliptic convergence", ok,
            f"laplace rel={laplace_rel:.1e}; " + " ".join(details))


# --------------------------------------------------------------------------
# 5. parabolic convergence in the weighted norms
# --------------------------------------------------------------------------

@pytest.mark.parametrize("kind", ["dirichlet", "robin"])
def test_criterion_5_parabolic_convergence(kind):
    prob = catalog_lookup("heat-semilinear")
    part = build_uniform_partition(1.0, 3, 0.15)
    tsp = TransmissionSpec.dirichlet() if kind == "dirichlet" else TransmissionSpec.robin(1.0)
    cfg = SchwarzConfig(problem=prob, partition=part, h_target=5e-3, dt_target=1e-3,
                        transmission=tsp, u0="one", stop_tol=1e-8, k_max=40,
                        alpha=10.0)
    hist = run_parabolic(cfg)
    ratios = [hist.rate_so_far(k) for k in range(3, hist.iterations + 1)]
    ok = (hist.verdict == "converged" and hist.iterations <= 40
          and hist.E[-1] <= 1e-8 and all(r < 1.0 for r in ratios))
    _report(5, f"parabolic convergence ({kind})", ok,
            f"iters={hist.iterations} E={hist.E[-1]:.2e} norm={hist.norm_kind} "
            f"max ratio(k>=3)={max(ratios):.3f}")


# --------------------------------------------------------------------------
# 6. discretization orders
# --------------------------------------------------------------------------

def test_criterion_6_discretization_order():
    from helpers import fitted_order, manufactured_elliptic, manufactured_parabolic
    from schwarz1d.discretize import DirichletBC, solve_semilinear_elliptic, \
        solve_semilinear_parabolic
    from schwarz1d.geometry import SubGrid

    def subgrid(length, n):
        x = np.linspace(0.0, length, n + 1)
        return SubGrid(x=x, h=length / n, lo=0, hi=n)

    ok = True
    details = []
    for problem_id in [i for i in catalog_ids() if catalog_lookup(i).mode == "elliptic"]:
        spec, sol = manufactured_elliptic(catalog_lookup(problem_id))
        errs, hs = [], []
        for n in (50, 100, 200):
            sg = subgrid(spec.length, n)
            u, _ = solve_semilinear_elliptic(spec, sg, DirichletBC(0.0), DirichletBC(0.0))
            errs.append(float(np.max(np.abs(u - sol.u(sg.x)))))
            hs.append(sg.h)
        order = fitted_order(hs, errs)
        ok &= order >= 1.9
        details.append(f"{problem_id}: {order:.2f}")

    spec, sol = manufactured_parabolic(replace(catalog_lookup("heat-semilinear"),
                                               time_horizon=1.0))
    sg = subgrid(1.0, 400)
    errs, dts = [], []
    for steps in (25, 50, 100):
        t = np.linspace(0.0, 1.0, steps + 1)
        zeros = np.zeros(steps + 1)
        field = solve_semilinear_parabolic(spec, sg, DirichletBC(zeros), DirichletBC(zeros),
                                           np.sin(np.pi * sg.x), 1.0 / steps, t)
        exact = np.exp(-t)[None, :] * np.sin(np.pi * sg.x)[:, None]
        errs.append(float(np.max(np.abs(field - exact))))
        dts.append(1.0 / steps)
    t_order = fitted_order(dts, errs)
    ok &= t_order >= 0.9
    details.append(f"heat-semilinear dt: {t_order:.2f}")
    _report(6, "discretization order", ok, "; ".join(details))


# --------------------------------------------------------------------------
# 7. property suites
# --------------------------------------------------------------------------

def test_criterion_7_property_suites():
    checks = {}

    # transmission linearity and the scaled-Robin identity, machine precision
    prob = catalog_lookup("example31")
    part = Partition(length=2.0, subdomains=((0.0, 1.2), (0.8, 2.0)))
    grid = build_grid(part, 0.01)
    rng = np.random.default_rng(2)
    lo, hi = grid.sub_ranges[1]
    u, v = rng.normal(size=hi - lo + 1), rng.normal(size=hi - lo + 1)
    tsp = TransmissionSpec.robin(3.0)
    lin = abs(extract(tsp, grid, prob, 0, 1, 2.0 * u - 0.5 * v)
              - (2.0 * extract(tsp, grid, prob, 0, 1, u)
                 - 0.5 * extract(tsp, grid, prob, 0, 1, v)))
    checks["linearity"] = lin < 1e-12
    same = extract(TransmissionSpec.scaled_robin(3.0, rho=8.0), grid, prob, 0, 1, u) \
        == extract(TransmissionSpec.robin(24.0), grid, prob, 0, 1, u)
    checks["scaled==robin(rho p)"] = bool(same)

    # fixed-point invariance (elliptic Robin + parabolic Dirichlet)
    cfg = two_subdomain_cfg(1.7, 1.9, 1.0, 50.0, h=0.01, u0="reference",
                            k_max=3, stop_tol=1e-300)
    checks["fixed point elliptic"] = max(run_elliptic(cfg).E) <= 10 * cfg.picard_tol
    hp = catalog_lookup("heat-semilinear")
    pp = build_uniform_partition(1.0, 2, 0.2)
    pcfg = SchwarzConfig(problem=replace(hp, time_horizon=1.0), partition=pp,
                         h_target=0.02, dt_target=0.01,
                         transmission=TransmissionSpec.dirichlet(),
                         u0="reference", k_max=3, stop_tol=1e-300)
    checks["fixed point parabolic"] = max(run_parabolic(pcfg).E) <= 10 * pcfg.picard_tol

    # deterministic sweeps regardless of worker count
    base = dict(problem=catalog_lookup("elliptic-semilinear"),
                partition=build_uniform_partition(1.0, 3, 0.08), h_target=0.01,
                transmission=TransmissionSpec.robin(2.0), u0="one",
                stop_tol=1e-9, k_max=30)
    h1 = run_elliptic(SchwarzConfig(**base, max_workers=1))
    h4 = run_elliptic(SchwarzConfig(**base, max_workers=4))
    checks["determinism"] = h1.E == h4.E and all(
        np.array_equal(a, b) for a, b in zip(h1.final_fields, h4.final_fields))

    # partition validation accepts the plain overlap, rejects mutual overlap
    good = Partition(length=2.0, subdomains=((0.0, 1.2), (0.8, 2.0)))
    bad = Partition(length=1.0, subdomains=((0.0, 0.6), (0.3, 0.8), (0.5, 1.0)))
    checks["partition rules"] = (validate_partition(good) == []
                                 and any("triple overlap" in v
                                         for v in validate_partition(bad)))

    # oracle self-consistency: iterated map vs closed form
    worst = 0.0
    rng = np.random.default_rng(6)
    for _ in range(20):
        L = float(rng.uniform(0.8, 2.5))
        L1, L2 = np.sort(rng.uniform(0.1 * L, 0.9 * L, size=2))
        if L2 - L1 < 0.05 * L:
            continue
        case = AnalyticCase(L=L, L1=float(L1), L2=float(L2),
                            p=float(rng.uniform(0.5, 20)), q=float(rng.uniform(0.5, 20)))
        tau = tau_factors(case).tau
        if not 1e-10 < tau < 1e8:
            continue
        s = InterfaceState(A=1.0, B=1.0)
        for _ in range(20):
            s = step_interface(case, s)
        worst = max(worst, abs(abs(s.A) ** 0.1 - tau) / tau)
    checks["oracle self-consistency"] = worst <= 1e-8

    # seminorm closed form at quadrature accuracy
    beta, alpha = 2.0, 8.0
    t = np.linspace(0.0, 3.0, 6001)
    got = laplace_seminorm(np.exp(-beta * t), alpha, t) ** 2
    expected = 1.0 / (beta + alpha) - 1.0 / (beta + alpha + 1.0)
    checks["seminorm closed form"] = abs(got - expected) < 1e-6

    ok = all(checks.values())
    _report(7, "property suites", ok,
            " ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in checks.items()))


# --------------------------------------------------------------------------
# 8. corrected large-q divergence threshold
# --------------------------------------------------------------------------

def test_criterion_8_threshold_flip():
    L = 2.0
    L1_star = divergence_threshold_L1(L)
    expected = math.log((math.exp(5 * L) + 1) / 2) / 5
    q = 1e6
    below = tau_factors(AnalyticCase(L=L, L1=L1_star - 0.01, L2=1.93, p=1.0, q=q)).tau
    above = tau_factors(AnalyticCase(L=L, L1=L1_star + 0.01, L2=1.93, p=1.0, q=q)).tau
    ok = (abs(L1_star - expected) < 1e-12 and below < 1.0 < above)
    _report(8, "large-q threshold flip", ok,
            f"L1*={L1_star:.6f} tau(L1*-0.01)={below:.4f} tau(L1*+0.01)={above:.4f}")
