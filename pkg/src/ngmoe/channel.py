"""The combined amplitude-damping / dephasing channel on a truncated ladder.

Three independent routes to the same map are provided so they can check
each other:

* :func:`apply_kraus` sums the amplitude-damping and dephasing Kraus families,
* :func:`propagate_closed_form` evaluates the closed-form propagator for the
  matrix elements (the default, cutoff-free path),
* :func:`propagate_ode` integrates the coupled linear equations for the
  matrix elements with an adaptive Runge-Kutta scheme.

Amplitude damping only lowers the photon number, so states supported on
{0..K} stay there and truncation is exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.stats import poisson

from ._numerics import log_binom
from .fock import ChannelParams, DensityMatrix, require_valid

POISSON_TAIL = 1e-12
MAX_DEPHASING_OPS = 10**6


class ParameterRangeError(ValueError):
    pass


class StepBudgetExceeded(RuntimeError):
    pass


def decay_fraction(params: ChannelParams) -> float:
    """f = 1 - exp(-2 (1 - epsilon) t), the damping probability per photon."""
    return float(-np.expm1(-2.0 * (1.0 - params.epsilon) * params.time))


def dephasing_rate(m, n, epsilon: float):
    """Decay rate (1-eps)(m+n) + eps (m-n)^2 of the element <m|rho|n>."""
    return (1.0 - epsilon) * (m + n) + epsilon * (m - n) ** 2


def dephasing_cutoff(K: int, params: ChannelParams) -> int:
    """Smallest k_max whose Poisson(2 K^2 eps t) upper tail is below 1e-12."""
    lam = 2.0 * K * K * params.epsilon * params.time
    if lam == 0.0:
        return 0
    k = max(int(poisson.isf(POISSON_TAIL, lam)), 0)
    while poisson.sf(k, lam) >= POISSON_TAIL:
        k += 1
        if k > MAX_DEPHASING_OPS:
            break
    if k > MAX_DEPHASING_OPS:
        raise ParameterRangeError(
            f"dephasing Kraus family needs k_max={k} > {MAX_DEPHASING_OPS} (2K^2 eps t = {lam:.3g})")
    return k


@dataclass(frozen=True)
class KrausSet:
    """Amplitude-damping operators A_j (j = 0..K) and diagonal dephasing
    operators P_k (k = 0..k_max), stored as stacked real arrays.

    ``dephasing_diagonals[k, l]`` is the l-th diagonal entry of P_k.
    """

    amplitude_ops: np.ndarray
    dephasing_diagonals: np.ndarray
    params: ChannelParams

    @property
    def truncation(self) -> int:
        return self.amplitude_ops.shape[1] - 1

    @property
    def dephasing_ops(self) -> np.ndarray:
        return np.stack([np.diag(p) for p in self.dephasing_diagonals])

    def completeness_residuals(self) -> tuple[float, float]:
        """Max deviation of sum A^T A and sum P^T P from the identity."""
        eye = np.eye(self.truncation + 1)
        a = np.einsum("jml,jmn->ln", self.amplitude_ops, self.amplitude_ops)
        p = np.sum(self.dephasing_diagonals ** 2, axis=0)
        return float(np.max(np.abs(a - eye))), float(np.max(np.abs(p - 1.0)))


def build_kraus(params: ChannelParams, K: int | None = None) -> KrausSet:
    K = params.truncation if K is None else K
    if K is None:
        raise ValueError("truncation must be given either in params or explicitly")
    params.check_truncation(K)
    f = decay_fraction(params)
    d = K + 1

    amp = np.zeros((d, d, d))
    for j in range(d):
        l = np.arange(j, d)
        amp[j, l - j, l] = np.exp(0.5 * log_binom(l, j)) * (1.0 - f) ** ((l - j) / 2) * f ** (j / 2)

    k_max = dephasing_cutoff(K, params)
    k = np.arange(k_max + 1)[:, None]
    lam = 2.0 * np.arange(d) ** 2 * params.epsilon * params.time
    deph = np.sqrt(poisson.pmf(k, lam[None, :]))
    amp.setflags(write=False)
    deph.setflags(write=False)
    return KrausSet(amp, deph, params)


def _check_kraus_dims(rho: DensityMatrix, kraus: KrausSet) -> None:
    if rho.truncation != kraus.truncation:
        raise ValueError(f"dimension mismatch: state K={rho.truncation}, Kraus K={kraus.truncation}")


def _amplitude_damp(rho: np.ndarray, kraus: KrausSet) -> np.ndarray:
    a = kraus.amplitude_ops
    return np.einsum("jab,bc,jdc->ad", a, rho, a)


def _dephase(rho: np.ndarray, kraus: KrausSet) -> np.ndarray:
    # sum_k P_k rho P_k with diagonal P_k is an entrywise product
    p = kraus.dephasing_diagonals
    return rho * (p.T @ p)


def apply_amplitude_damping(rho: DensityMatrix, kraus: KrausSet) -> DensityMatrix:
    _check_kraus_dims(rho, kraus)
    return DensityMatrix.hermitized(_amplitude_damp(rho.entries, kraus))


def apply_dephasing(rho: DensityMatrix, kraus: KrausSet) -> DensityMatrix:
    _check_kraus_dims(rho, kraus)
    return DensityMatrix.hermitized(_dephase(rho.entries, kraus))


def apply_kraus(rho: DensityMatrix, kraus: KrausSet) -> DensityMatrix:
    """sum_{j,k} A_j P_k rho P_k^T A_j^T."""
    _check_kraus_dims(rho, kraus)
    require_valid(rho)
    out = DensityMatrix.hermitized(_amplitude_damp(_dephase(rho.entries, kraus), kraus))
    require_valid(out, trace_atol=1e-10)
    return out


def closed_form_weights(K: int, params: ChannelParams) -> np.ndarray:
    """Weights ``w[l, m, n]`` such that the propagated element is
    ``sum_l w[l, m, n] * rho[m + l, n + l]`` (zero whenever max(m, n) + l > K).
    """
    f = decay_fraction(params)
    d = K + 1
    m = np.arange(d)[:, None]
    n = np.arange(d)[None, :]
    decay = np.exp(-dephasing_rate(m, n, params.epsilon) * params.time)
    w = np.zeros((d, d, d))
    for l in range(d):
        valid = np.maximum(m, n) + l <= K
        shift = np.exp(0.5 * (log_binom(m + l, l) + log_binom(n + l, l))) * f ** l
        w[l] = np.where(valid, decay * shift, 0.0)
    return w


def propagate_weights(entries: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Apply precomputed :func:`closed_form_weights` to a stack ``(..., d, d)``."""
    d = entries.shape[-1]
    out = weights[0] * entries
    for l in range(1, d):
        shifted = np.zeros_like(entries)
        shifted[..., : d - l, : d - l] = entries[..., l:, l:]
        out = out + weights[l] * shifted
    return out


def propagate_closed_form(rho: DensityMatrix, params: ChannelParams) -> DensityMatrix:
    require_valid(rho)
    params.check_truncation(rho.truncation)
    if params.time == 0.0:
        return rho
    w = closed_form_weights(rho.truncation, params)
    out = DensityMatrix.hermitized(propagate_weights(rho.entries, w))
    require_valid(out, trace_atol=1e-10)
    return out


def propagate_ode(rho: DensityMatrix, params: ChannelParams, rtol: float = 1e-10,
                  atol: float = 1e-12, max_evals: int = 2_000_000) -> DensityMatrix:
    """Integrate d/dt C[m,n] = 2(1-eps) sqrt((m+1)(n+1)) C[m+1,n+1] - Y[m,n] C[m,n]."""
    require_valid(rho)
    params.check_truncation(rho.truncation)
    if params.time == 0.0:
        return rho
    d = rho.truncation + 1
    m = np.arange(d)[:, None]
    n = np.arange(d)[None, :]
    rate = dephasing_rate(m, n, params.epsilon)
    gain = 2.0 * (1.0 - params.epsilon) * np.sqrt((m + 1.0) * (n + 1.0))[:-1, :-1]
    evals = 0

    def rhs(_t, y):
        nonlocal evals
        evals += 1
        if evals > max_evals:
            raise StepBudgetExceeded(f"ODE integration exceeded {max_evals} right-hand-side evaluations")
        c = y.reshape(d, d)
        dc = -rate * c
        dc[:-1, :-1] += gain * c[1:, 1:]
        return dc.ravel()

    sol = solve_ivp(rhs, (0.0, params.time), rho.entries.ravel().copy(), method="DOP853",
                    rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError(f"ODE integration failed: {sol.message}")
    out = DensityMatrix.hermitized(sol.y[:, -1].reshape(d, d))
    require_valid(out, trace_atol=1e-10)
    return out
