"""End-to-end acceptance checks at their contractual tolerances.

Every test prints exactly one ``PASS``/``FAIL`` line (run with ``-s`` to see
them) before asserting, so the summary survives even when a check fails.
"""

import math
import time

import numpy as np
from ngmoe.channel import apply_kraus, build_kraus, decay_fraction, propagate_closed_form, propagate_ode
from ngmoe.entropy import (crossing_curve, dimension_bound, entropy_sweep, kappa_output_entropy,
                           kappa_output_spectrum, random_search, t_star_closed_form)
from ngmoe.fock import ChannelParams, pure_to_density, random_density_matrix
from ngmoe.selftest import format_table, run_selftest
from ngmoe.states import kappa0

N = 0.6
K3 = 3
EPS51 = np.linspace(0.0, 1.0, 51)


def report(number, name, ok, detail):
    print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'}  {name}: {detail}")
    assert ok, f"criterion {number} ({name}) failed: {detail}"


def test_criterion_1_oracle_triangle():
    rng = np.random.default_rng(1)
    worst, worst_trace = 0.0, 0.0
    for i in range(200):
        K = (1, 2, 3, 8, 16)[i % 5]
        p = ChannelParams(rng.uniform(0, 1), rng.uniform(0, 3))
        rho = random_density_matrix(K, rng)
        outs = [apply_kraus(rho, build_kraus(p, K)).entries, propagate_closed_form(rho, p).entries,
                propagate_ode(rho, p).entries]
        for a in range(3):
            worst_trace = max(worst_trace, abs(np.trace(outs[a]) - 1))
            for b in range(a):
                worst = max(worst, float(np.max(np.abs(outs[a] - outs[b]))))
    report(1, "oracle triangle", worst <= 1e-8 and worst_trace <= 1e-10,
           f"max entrywise disagreement {worst:.2e} (tol 1e-8), max trace error {worst_trace:.2e} (tol 1e-10)")


def test_criterion_2_closed_form_spectrum():
    worst = 0.0
    for K in (1, 3, 8, 16):
        psi = pure_to_density(kappa0(N, K))
        for eps in np.linspace(0, 1, 10):
            for t in np.linspace(0, 3, 10):
                p = ChannelParams(eps, t)
                numeric = np.linalg.eigvalsh(propagate_closed_form(psi, p).entries)
                closed = np.sort(kappa_output_spectrum(N, K, p))
                worst = max(worst, float(np.max(np.abs(numeric - closed))))
    report(2, "closed-form kappa spectrum", worst <= 1e-10, f"max eigenvalue error {worst:.2e} (tol 1e-10)")


def _gaps(t):
    recs = entropy_sweep(N, K3, t, EPS51)
    kappa = np.array([r.entropy_bits for r in recs if r.family == "kappa"])
    binom = np.array([r.entropy_bits for r in recs if r.family == "binomial"])
    return binom - kappa


def test_criterion_3_fig1_panels():
    early, late = _gaps(0.5), _gaps(1.5)
    changes = int(np.sum(np.sign(late[1:]) != np.sign(late[:-1])))
    report(3, "entropy panels at t=0.5 and t=1.5", bool(np.all(early < 0)) and changes >= 1,
           f"t=0.5: max(S_bin - S_kappa) = {early.max():.4f} (< 0 required); "
           f"t=1.5: {changes} sign change(s) (>= 1 required)")


def test_criterion_4_crossing_curve():
    curve = crossing_curve(N, K3, EPS51, (0.1, 3.0))
    closed = t_star_closed_form(N, K3, EPS51, (0.1, 3.0))
    ok = (not curve.empty and 0.5 < curve.t_star < 1.5 and closed is not None
          and abs(closed - curve.t_star) <= 5e-3)
    report(4, "crossing curve and t_star", ok,
           f"{len(curve.points)} curve points, t_star = {curve.t_star}, closed-form t_star = {closed}")


def test_criterion_5_trend_and_bound():
    trend_ok, lines = True, []
    for eps in (0.25, 0.75):
        for t in (0.5, 1.5):
            p = ChannelParams(eps, t)
            s = [kappa_output_entropy(N, K, p) for K in (4, 10, 20, 40)]
            trend_ok &= all(b < a for a, b in zip(s, s[1:]))
            lines.append(f"({eps},{t}): " + " > ".join(f"{v:.4g}" for v in s))
    bound_ok = True
    for eps in (0.25, 0.75):
        for t in (0.5, 1.5):
            p = ChannelParams(eps, t)
            for target in (0.2, 0.1):
                K = dimension_bound(N, target, decay_fraction(p)) + 1
                s = kappa_output_entropy(N, K, p)
                bound_ok &= s < target
                lines.append(f"({eps},{t}) E={target}: S(K={K}) = {s:.4g}")
    report(5, "entropy decreases with K; dimension bound", trend_ok and bound_ok, "; ".join(lines))


def test_criterion_6_random_search():
    t0 = time.perf_counter()
    rows, ok = [], True
    for eps in (0.0, 0.5, 1.0):
        for t in (0.5, 1.0, 1.5):
            r = random_search(N, K3, ChannelParams(eps, t), 100_000, seed=0, workers=4)
            ok &= r.verdict
            rows.append(f"({eps},{t}) min={r.min_entropy:.6f} baseline={r.baseline:.6f} "
                        f"{'ok' if r.verdict else 'VIOLATED'}")
    report(6, "random search never beats min(kappa, best binomial) - 1e-9", ok,
           f"{time.perf_counter() - t0:.1f}s; " + "; ".join(rows))


def test_criterion_7_selftest():
    t0 = time.perf_counter()
    results = run_selftest()
    elapsed = time.perf_counter() - t0
    failed = [r for r in results if not r.passed]
    print("\n" + format_table(results))
    report(7, "invariant selftest", not failed and elapsed < 60,
           f"{len(results) - len(failed)}/{len(results)} checks pass in {elapsed:.1f}s (< 60 s required)")
