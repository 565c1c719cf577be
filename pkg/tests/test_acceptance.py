"""Acceptance gate: every criterion at its stated tolerance, one printed
pass/fail line each.  Run with ``pytest tests/test_acceptance.py -v -s``.
"""

import itertools
import time

import numpy as np
import pytest

import structid as si
from structid import benchmarks as bm
from structid.data import build_linear_system
from structid.dictionary import truth_model
from structid.libraries import index_of
from structid.noise import add_noise, tpr, trial_seed
from structid.regression import (
    PipelineConfig,
    identify,
    least_squares,
    subspace_pursuit,
    trim,
)
from structid.simulate import allen_cahn_energy, simulate


def _report(num, ok, msg, elapsed, budget):
    print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {num}: {msg} "
          f"({elapsed:.1f}s of {budget:.0f}s budget)")
    assert ok, f"criterion {num}: {msg}"
    assert elapsed <= budget, f"criterion {num} exceeded its runtime budget"


def _median_tpr_sweep(bench, clean, libs, conf, levels, trials=20):
    truth = truth_model(libs["prior"])
    medians = {}
    for nsr in levels:
        vals = []
        for trial in range(trials):
            noisy = add_noise(clean, nsr, trial_seed(0, bench.system, nsr, trial))
            model, _ = bm.run_configuration(bench, noisy, conf, libs)
            vals.append(tpr(truth, model))
        medians[nsr] = float(np.median(vals))
    return medians


def test_criterion_1_burgers_flux_identification():
    t0 = time.time()
    bench = bm.benchmark("burgers")
    clean = simulate(bench.sim)
    libs = bm.libraries_for(bench)
    model, dic = bm.run_configuration(bench, clean, "conf4", libs)
    names = [dic.terms[j].name for j in model.support]
    coef = model.coefficient_of(index_of(dic, "(u^2)_x"))
    support_ok = names == ["(u^2)_x"]
    coef_ok = abs(coef - (-0.5)) / 0.5 <= 0.01
    medians = _median_tpr_sweep(bench, clean, libs, "conf4", (0.01, 0.05, 0.10, 0.25))
    noise_ok = all(m == 1.0 for m in medians.values())
    elapsed = time.time() - t0
    _report(1, support_ok and coef_ok and noise_ok,
            f"support={names}, coefficient={coef:.5f} "
            f"(err {abs(coef+0.5)/0.5*100:.2f}%), medians {medians}",
            elapsed, 120)


def test_criterion_2_diffusion():
    t0 = time.time()
    bench = bm.benchmark("diffusion")
    clean = simulate(bench.sim)
    libs = bm.libraries_for(bench)
    model, dic = bm.run_configuration(bench, clean, "conf4", libs)
    nu = bm.diffusion_coefficient(dic, model)
    names = [dic.terms[j].name for j in model.support]
    clean_ok = names == ["u_xx"] and abs(nu - 0.02) / 0.02 <= 0.01
    medians = _median_tpr_sweep(bench, clean, libs, "conf4",
                                (0.01, 0.05, 0.10, 0.25, 0.50))
    noise_ok = all(m == 1.0 for m in medians.values())
    elapsed = time.time() - t0
    _report(2, clean_ok and noise_ok,
            f"recovered u_t = {nu:.6f} u_xx (err {abs(nu-0.02)/0.02*100:.2f}%), "
            f"medians {medians}", elapsed, 120)


def test_criterion_3_allen_cahn():
    t0 = time.time()
    bench = bm.benchmark("allen_cahn")
    clean = simulate(bench.sim)
    libs = bm.libraries_for(bench)
    model, dic = bm.run_configuration(bench, clean, "conf4", libs)
    theta_ok = model.trace.theta_star == 3
    ro = bm.allen_cahn_readout(dic, model)
    coef_ok = (abs(ro["gamma"] - 1.0) <= 0.05
               and abs(ro["kappa_cubic"] - 1.0) <= 0.05
               and abs(ro["kappa_linear"] - 1.0) <= 0.05)
    noisy = add_noise(clean, 0.10, trial_seed(0, "allen_cahn", 0.10, 0))
    model10, dic10 = bm.run_configuration(bench, noisy, "conf4", libs)
    err = bm.resimulation_error(bench, model10, dic10, clean).total
    resim_ok = err <= 3 * 1.41e-2
    elapsed = time.time() - t0
    _report(3, theta_ok and coef_ok and resim_ok,
            f"theta*={model.trace.theta_star}, gamma={ro['gamma']:.4f}, "
            f"kappa=({ro['kappa_linear']:.4f}, {ro['kappa_cubic']:.4f}), "
            f"10%-noise trajectory error {err:.3e} (limit {3*1.41e-2:.3e})",
            elapsed, 180)


def test_criterion_4_harmonic_oscillator():
    t0 = time.time()
    bench = bm.benchmark("harmonic")
    clean = simulate(bench.sim)
    libs = bm.libraries_for(bench)
    model, dic = bm.run_configuration(bench, clean, "conf4", libs)
    names = {dic.terms[j].name: c for j, c in zip(model.support, model.coefficients)}
    tied_ok = (set(names) == {"Jgrad(p^2)", "Jgrad(q^2)"}
               and all(abs(c - 1.0) <= 0.01 for c in names.values()))
    medians = _median_tpr_sweep(bench, clean, libs, "conf4", bench.noise_levels)
    noise_ok = all(m == 1.0 for m in medians.values())
    elapsed = time.time() - t0
    _report(4, tied_ok and noise_ok,
            f"tied coefficients {dict((k, round(v, 4)) for k, v in names.items())}, "
            f"medians {medians}", elapsed, 60)


def test_criterion_5_three_body():
    t0 = time.time()
    bench = bm.benchmark("three_body")
    clean = simulate(bench.sim)
    libs = bm.libraries_for(bench)
    truth = truth_model(libs["prior"])
    model, dic = bm.run_configuration(bench, clean, "conf4", libs)
    clean_tpr = tpr(truth, model)
    # the 10%-noise median is reported alongside but does not gate
    vals = []
    for trial in range(20):
        noisy = add_noise(clean, 0.10, trial_seed(0, "three_body", 0.10, trial))
        m, _ = bm.run_configuration(bench, noisy, "conf4", libs)
        vals.append(tpr(truth, m))
    median10 = float(np.median(vals))
    elapsed = time.time() - t0
    _report(5, clean_tpr == 1.0,
            f"clean TPR={clean_tpr:.2f} on 12 tied terms; "
            f"10%-noise median TPR={median10:.2f} "
            f"({'meets' if median10 >= 0.9 else 'misses'} the reported 0.9; not gated)",
            elapsed, 300)


def test_criterion_6_shallow_water():
    t0 = time.time()
    bench = bm.benchmark("swe")
    clean = simulate(bench.sim)
    libs = bm.libraries_for(bench)
    truth = truth_model(libs["prior"])
    model, dic = bm.run_configuration(bench, clean, "conf4", libs)
    support_ok = tpr(truth, model) == 1.0 and model.sparsity == 8
    cx, cy = bm.swe_pressure_coefficients(dic, model)
    half_g = 0.5 * bench.sim.g
    pressure_ok = (abs(abs(cx) - half_g) / half_g <= 0.05
                   and abs(abs(cy) - half_g) / half_g <= 0.05)
    err = bm.resimulation_error(bench, model, dic, clean).total
    resim_ok = err <= 3 * 1.748e-2
    elapsed = time.time() - t0
    _report(6, support_ok and pressure_ok and resim_ok,
            f"8 conservative terms recovered, pressure=({cx:.4f}, {cy:.4f}) vs "
            f"-{half_g:.4f}, state error {err:.3e} (limit {3*1.748e-2:.3e})",
            elapsed, 600)


def test_criterion_7_property_suites():
    t0 = time.time()
    from structid.algebra import evaluate_poly, grad_poly
    from structid.dictionary import EnergyDensityTerm, expand_pieces, variational_derivative
    from structid.differentiate import spectral_diff
    from structid.libraries import (
        harmonic_energy_basis,
        three_body_energy_basis,
        three_body_names,
    )
    from structid.weakform import make_test_family, subdomain_integrals

    # -- skew-gradient orthogonality on 1e3 random points per term
    rng = np.random.default_rng(0)
    checks = []
    for basis, n, names, sampler in (
        (harmonic_energy_basis(), 1, ("q", "p"),
         lambda: rng.uniform(-1.2, 1.2, size=(2, 1000))),
        (three_body_energy_basis(), 9, three_body_names(),
         lambda: rng.uniform(-1.2, 1.2, size=(18, 1000))),
    ):
        from structid.dictionary import build_hamiltonian_library

        lib = build_hamiltonian_library(basis, n_pairs=n, coord_names=names)
        by_source = {phi.name(names): phi for phi in basis}
        z = sampler()
        for term in lib.terms:
            phi_poly = by_source[term.source].to_polynomial()
            dot = np.zeros(z.shape[1])
            norm_g = np.zeros(z.shape[1])
            norm_f = np.zeros(z.shape[1])
            for comp in range(2 * n):
                grad_c = evaluate_poly(grad_poly(phi_poly, comp), lambda c: z[c], None,
                                       (z.shape[1],))
                field_c = np.zeros(z.shape[1])
                for rc, pieces in term.rows:
                    if rc == comp:
                        field_c = evaluate_poly(pieces[0].inner, lambda c: z[c], None,
                                                (z.shape[1],))
                dot += grad_c * field_c
                norm_g += grad_c**2
                norm_f += field_c**2
            scale = np.sqrt(norm_g * norm_f) + 1e-300
            checks.append(np.max(np.abs(dot) / scale))
    orth_ok = max(checks) <= 1e-12
    orth_max = max(checks)

    # -- variational derivative vs Gateaux difference on the 6 density atoms
    n = 256
    length = 2 * np.pi
    dx = length / n
    x = np.arange(n) * dx
    u = np.cos(x) + 0.3 * np.sin(2 * x)
    # random smooth test direction with spectral overlap against u
    vr = np.random.default_rng(1)
    v = np.fft.irfft(np.fft.rfft(vr.normal(size=n)) * (np.arange(n // 2 + 1) < 6), n=n)
    v /= np.max(np.abs(v))
    gateaux_errs = []
    for orders_powers in (((0, 2),), ((0, 4),), ((1, 2),), ((1, 4),), ((2, 2),), ((2, 4),)):
        term = variational_derivative(EnergyDensityTerm(orders_powers))
        expanded = expand_pieces(term.expression(0), 1)
        minus_vd = evaluate_poly(
            expanded, lambda c: u,
            lambda c, deriv: spectral_diff(u, 0, deriv[0], length), (n,))

        def energy(field):
            total = np.ones(n)
            for order, power in orders_powers:
                arr = field if order == 0 else spectral_diff(field, 0, order, length)
                total = total * arr**power
            return np.sum(total) * dx

        h = 1e-6
        fd = (energy(u + h * v) - energy(u - h * v)) / (2 * h)
        inner = np.sum(-minus_vd * v) * dx
        gateaux_errs.append(abs(fd - inner) / max(abs(inner), 1e-12))
    gateaux_ok = max(gateaux_errs) <= 1e-4

    # -- integration-by-parts residual on a smooth field
    nx, nt = 256, 60
    xs = np.arange(nx)[:, None] / nx
    ts = np.arange(nt)[None, :] * 0.01
    f = np.sin(2 * np.pi * xs) * (1 + 0.5 * ts) + np.cos(6 * np.pi * xs)
    fx = 2 * np.pi * np.cos(2 * np.pi * xs) * (1 + 0.5 * ts) - 6 * np.pi * np.sin(6 * np.pi * xs)
    from structid.data import GridDataset

    df = GridDataset(f[None], dx=(1.0 / nx,), dt=0.01, periodic=(True,),
                     component_names=("u",))
    fam = make_test_family(df, half_widths=(40, 20), n_centers=(8, 4))
    resid = subdomain_integrals(fx, fam, (0,), 0) + subdomain_integrals(f, fam, (1,), 0)
    volume = (2 * 40 / nx) * (2 * 20 * 0.01)
    ibp_ok = np.max(np.abs(resid)) <= 1e-6 * np.max(np.abs(f)) * volume

    # -- discrete conservation for Burgers and shallow water; the Burgers
    # signed total is ~0 by construction, so scale by the absolute mass
    bb = bm.benchmark("burgers")
    db = simulate(bb.sim)
    mass_b = db.values[0].sum(axis=0) * db.dx[0]
    scale_b = np.abs(db.values[0, :, 0]).sum() * db.dx[0]
    bs = bm.benchmark("swe")
    ds = simulate(bs.sim)
    mass_s = ds.values[0].sum(axis=(0, 1)) * ds.dx[0] * ds.dx[1]
    mass_ok = (np.max(np.abs(mass_b - mass_b[0])) <= 1e-12 * scale_b
               and np.max(np.abs(mass_s - mass_s[0])) <= 1e-12 * abs(mass_s[0]))

    # -- Allen-Cahn discrete energy never increases beyond rounding
    ba = bm.benchmark("allen_cahn")
    da = simulate(ba.sim)
    ua = da.values[0]
    energies = np.array([allen_cahn_energy(ua[:, k], da.dx[0], 2 * np.pi)
                         for k in range(ua.shape[1])])
    energy_ok = np.diff(energies).max() <= 1e-8

    elapsed = time.time() - t0
    _report(7, orth_ok and gateaux_ok and ibp_ok and mass_ok and energy_ok,
            f"orthogonality max {orth_max:.1e}, Gateaux max {max(gateaux_errs):.1e}, "
            f"IBP ok={ibp_ok}, conservation ok={mass_ok}, "
            f"energy max increase {np.diff(energies).max():.2e}",
            elapsed, 600)


def test_criterion_8_oracle_equivalence_and_contracts():
    t0 = time.time()

    # -- identify vs exhaustive best subset on 200 planted systems
    hits = 0
    for i in range(200):
        rng = np.random.default_rng(5000 + i)
        p = int(rng.integers(4, 11))
        k = int(rng.integers(1, 4))
        m = 6 * p
        theta = rng.normal(size=(m, p))
        support = sorted(rng.choice(p, size=k, replace=False).tolist())
        coefs = rng.uniform(1.0, 3.0, size=k) * rng.choice([-1.0, 1.0], size=k)
        b = theta[:, support] @ coefs
        b = b + 0.01 * np.linalg.norm(b) / np.sqrt(m) * rng.normal(size=m)
        system = build_linear_system(theta, b)
        model = identify(system, PipelineConfig())
        best = min(itertools.combinations(range(p), k),
                   key=lambda s: least_squares(system, s)[1])
        if model.support == tuple(best):
            hits += 1
    oracle_ok = hits >= 190  # 95% of 200

    # -- trim and selection contracts on 1000 randomized inputs
    contract_failures = 0
    for i in range(1000):
        rng = np.random.default_rng(9000 + i)
        p = int(rng.integers(3, 11))
        m = 5 * p
        theta = rng.normal(size=(m, p))
        k = int(rng.integers(1, 4))
        support = sorted(rng.choice(p, size=k, replace=False).tolist())
        coefs = rng.uniform(0.5, 3.0, size=k) * rng.choice([-1.0, 1.0], size=k)
        b = theta[:, support] @ coefs
        b = b + float(rng.uniform(0, 0.3)) * np.linalg.norm(b) / np.sqrt(m) * rng.normal(size=m)
        system = build_linear_system(theta, b)
        cfg = PipelineConfig()
        sp_theta = int(rng.integers(1, min(p, 8) + 1))
        raw = subspace_pursuit(system, sp_theta, cfg)
        tau = float(rng.uniform(0.01, 0.6))
        cut = trim(system, raw, tau)
        if not set(cut.support) <= set(raw.support):
            contract_failures += 1
            continue
        coef_norm = np.abs(raw.coefficients * system.column_scales[list(raw.support)])
        chi = coef_norm / coef_norm.max()
        survivors = {j for j, c in zip(raw.support, chi) if c >= tau}
        expected = survivors if survivors else {raw.support[int(np.argmax(chi))]}
        if set(cut.support) != expected:
            contract_failures += 1
            continue
        # selection minimality on the full pipeline trace
        model = identify(system, cfg)
        ratios = model.trace.reduction_ratios
        star = model.trace.theta_star
        for th in range(1, star):
            s = ratios[th - 1]
            if not np.isnan(s) and s < cfg.rr_tolerance:
                contract_failures += 1
                break
    contracts_ok = contract_failures == 0

    elapsed = time.time() - t0
    _report(8, oracle_ok and contracts_ok,
            f"best-subset agreement {hits}/200, contract failures "
            f"{contract_failures}/1000", elapsed, 120)
