"""Invariant checks run by ``ngmoe selftest``.

Each check reports the worst residual it saw next to its tolerance. Setting
``NGMOE_TOL_OVERRIDE`` replaces every tolerance (used to test the failure path).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .channel import (apply_amplitude_damping, apply_dephasing, apply_kraus, build_kraus,
                      propagate_closed_form, propagate_ode)
from .entropy import kappa_output_spectrum, shannon_entropy, von_neumann_entropy
from .fock import ChannelParams, DensityMatrix, phase_unitary, pure_to_density, random_density_matrix
from .states import kappa0, make_rng, sample_pure_batch

TOL_ENV = "NGMOE_TOL_OVERRIDE"
N_MEAN = 0.6


@dataclass(frozen=True)
class CheckResult:
    name: str
    K: int
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)


def _max_abs(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def _random_params(rng):
    return ChannelParams(rng.uniform(0, 1), rng.uniform(0, 3))


def _checks_for(K: int, rng: np.random.Generator, trials: int):
    """Yield (name, residual, tolerance) for one truncation."""
    params = [_random_params(rng) for _ in range(trials)]
    rhos = [random_density_matrix(K, rng) for _ in range(trials)]

    amp_res, deph_res = 0.0, 0.0
    tri, trace, psd, cov, semi, comm = 0.0, 0.0, 0.0, 0.0, 0.0, 0.0
    for rho, p in zip(rhos, params):
        kraus = build_kraus(p, K)
        a, d = kraus.completeness_residuals()
        amp_res, deph_res = max(amp_res, a), max(deph_res, d)

        out_k = apply_kraus(rho, kraus).entries
        out_c = propagate_closed_form(rho, p).entries
        out_o = propagate_ode(rho, p).entries
        tri = max(tri, _max_abs(out_k, out_c), _max_abs(out_c, out_o), _max_abs(out_k, out_o))
        for out in (out_k, out_c, out_o):
            trace = max(trace, abs(np.trace(out) - 1.0))
            psd = max(psd, -float(np.linalg.eigvalsh(out)[0]), _max_abs(out, out.conj().T))

        u = phase_unitary(rng.uniform(0, 2 * np.pi), K)
        rotated = propagate_closed_form(DensityMatrix.hermitized(u @ rho.entries @ u.conj().T), p).entries
        cov = max(cov, _max_abs(rotated, u @ out_c @ u.conj().T))

        t1 = rng.uniform(0, p.time)
        two_step = propagate_closed_form(propagate_closed_form(rho, ChannelParams(p.epsilon, t1)),
                                         ChannelParams(p.epsilon, p.time - t1)).entries
        semi = max(semi, _max_abs(two_step, out_c))

        ad_pd = apply_dephasing(apply_amplitude_damping(rho, kraus), kraus).entries
        pd_ad = apply_amplitude_damping(apply_dephasing(rho, kraus), kraus).entries
        comm = max(comm, _max_abs(ad_pd, pd_ad))

    yield "kraus completeness (amplitude damping)", amp_res, 1e-12
    yield "kraus completeness (dephasing)", deph_res, 1e-10
    yield "oracle triangle", tri, 1e-8
    yield "trace preservation", trace, 1e-10
    yield "hermiticity / PSD of outputs", max(psd, 0.0), 1e-10
    yield "phase covariance", cov, 1e-10
    yield "semigroup composition", semi, 1e-10
    yield "AD/PD commutation", comm, 1e-10

    spec, bounds, shannon = 0.0, 0.0, 0.0
    psi = pure_to_density(kappa0(N_MEAN, K))
    for p in params:
        out = propagate_closed_form(psi, p)
        spec = max(spec, _max_abs(np.sort(kappa_output_spectrum(N_MEAN, K, p)), np.linalg.eigvalsh(out.entries)))
        s = von_neumann_entropy(out)
        bounds = max(bounds, -s, s - math.log2(K + 1))
        shannon = max(shannon, s - shannon_entropy(np.clip(out.populations, 0, None)))
    yield "closed-form kappa spectrum", spec, 1e-10
    yield "entropy bounds", max(bounds, 0.0), 1e-10
    yield "shannon dominance", max(shannon, 0.0), 1e-12

    concavity = 0.0
    if K > N_MEAN:
        for p in params:
            amps, _ = sample_pure_batch(K, 4, rng, N_MEAN)
            weights = rng.dirichlet(np.ones(len(amps)))
            pures = [np.outer(v, v.conj()) for v in amps]
            mixture = DensityMatrix.hermitized(sum(w * r for w, r in zip(weights, pures)))
            lhs = von_neumann_entropy(propagate_closed_form(mixture, p))
            rhs = sum(w * von_neumann_entropy(propagate_closed_form(DensityMatrix.hermitized(r), p))
                      for w, r in zip(weights, pures))
            concavity = max(concavity, rhs - lhs)
    yield "concavity", max(concavity, 0.0), 1e-10


def run_selftest(truncations=(1, 3, 8), seed: int = 0, trials: int = 25,
                 tol_override: float | None = None) -> list[CheckResult]:
    if tol_override is None and os.environ.get(TOL_ENV):
        tol_override = float(os.environ[TOL_ENV])
    results = []
    for K in truncations:
        rng = make_rng([seed, K])
        for name, residual, tol in _checks_for(K, rng, trials):
            results.append(CheckResult(name, K, float(residual), tol if tol_override is None else tol_override))
    return results


def format_table(results: list[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  {'K':>3}  {'residual':>10}  {'tol':>8}  result"]
    for r in results:
        lines.append(f"{r.name:<{width}}  {r.K:>3}  {r.residual:>10.3e}  {r.tolerance:>8.1e}  "
                     f"{'PASS' if r.passed else 'FAIL'}")
    return "\n".join(lines)
