"""Candidate input states and the energy-constrained random pure-state sampler."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._numerics import binomial_pmf
from .channel import propagate_closed_form
from .fock import ChannelParams, DensityMatrix, PureState, ValidationError, Violation, pure_to_density


class SamplingError(RuntimeError):
    """The rejection sampler ran out of attempts."""

    def __init__(self, message, acceptance_rate):
        self.acceptance_rate = acceptance_rate
        super().__init__(f"{message} (acceptance rate {acceptance_rate:.3g})")


@dataclass(frozen=True)
class KappaParams:
    """Two-level superposition of |0> and |K> carrying mean energy N."""

    mean_energy: float
    top_level: int
    phase: float = 0.0

    def __post_init__(self):
        if self.top_level < 1:
            raise ValidationError([Violation("K >= 1", 1 - self.top_level)])
        if not self.mean_energy > 0:
            raise ValidationError([Violation("N > 0", -self.mean_energy)])
        if self.mean_energy > self.top_level:
            raise ValidationError([Violation("N <= K", self.mean_energy - self.top_level)])


@dataclass(frozen=True)
class BinomialParams:
    M: int
    mu: float

    def __post_init__(self):
        if self.M < 0:
            raise ValidationError([Violation("M >= 0", -self.M)])
        if not 0.0 <= self.mu <= 1.0:
            raise ValidationError([Violation("0 <= mu <= 1", abs(self.mu - min(max(self.mu, 0), 1)))])


@dataclass(frozen=True)
class SamplerConfig:
    truncation: int
    mean_energy: float
    seed: int | None = None
    max_attempts: int = 10_000

    def __post_init__(self):
        K, N = self.truncation, self.mean_energy
        if K < 1:
            raise ValidationError([Violation("K >= 1", 1 - K)])
        if not 0 < N < K:
            raise ValidationError([Violation("0 < N < K", max(-N, N - K))])
        if self.max_attempts < 1:
            raise ValidationError([Violation("max_attempts >= 1", 1 - self.max_attempts)])


def kappa_state(p: KappaParams, truncation: int | None = None) -> PureState:
    """sqrt(1 - N/K) |0> + sqrt(N/K) exp(i alpha K) |K>, padded up to ``truncation``."""
    K = p.top_level
    dim = K if truncation is None else truncation
    if dim < K:
        raise ValueError(f"truncation {dim} is below the top level {K}")
    q = p.mean_energy / K
    amps = np.zeros(dim + 1, dtype=complex)
    amps[0] = math.sqrt(1.0 - q)
    amps[K] = math.sqrt(q) * np.exp(1j * p.phase * K)
    return PureState(amps)


def kappa0(N: float, K: int) -> PureState:
    """The alpha = 0 member of the kappa family on the ladder {0..K}."""
    return kappa_state(KappaParams(N, K))


def binomial_state(p: BinomialParams, truncation: int) -> PureState:
    if p.M > truncation:
        raise ValueError(f"binomial order M={p.M} exceeds truncation K={truncation}")
    amps = np.zeros(truncation + 1, dtype=complex)
    amps[: p.M + 1] = np.sqrt(binomial_pmf(np.arange(p.M + 1), p.M, p.mu))
    return PureState(amps)


def _assemble(s: np.ndarray, phases: np.ndarray) -> np.ndarray:
    """Amplitudes from squared sines ``s[:, n-1] = sin^2(theta_n)``, n = 1..K.

    |nu_0|^2 = 1 - s_K and |nu_n|^2 = (1 - s_{K-n}) s_K ... s_{K-n+1}, with s_0 = 0.
    """
    rows, K = s.shape
    pops = np.empty((rows, K + 1))
    tail = np.ones(rows)
    for n in range(K + 1):
        inner = s[:, K - n - 1] if n < K else 0.0
        pops[:, n] = tail * (1.0 - inner)
        tail = tail * (s[:, K - n - 1] if n < K else 1.0)
    amps = np.sqrt(pops).astype(complex)
    amps[:, 1:] *= np.exp(1j * phases)
    return amps


def _energy_denominator(s_inner: np.ndarray) -> np.ndarray:
    # 1 + s_{K-1}(1 + s_{K-2}(... (1 + s_1)))
    den = np.ones(s_inner.shape[0])
    for j in range(s_inner.shape[1]):
        den = 1.0 + s_inner[:, j] * den
    return den


def sample_pure_batch(K: int, size: int, rng: np.random.Generator, mean_energy: float | None = None,
                      max_attempts: int = 10_000) -> tuple[np.ndarray, int]:
    """Draw ``size`` pure states in the hyperspherical parametrization.

    With ``mean_energy`` set, xi_1..xi_{K-1} are uniform and sin^2(theta_K) is
    solved from the energy constraint; draws with a solution outside [0, 1] are
    redrawn. Without it all K coordinates are uniform, which reproduces the
    unitarily invariant measure. Returns the amplitudes ``(size, K+1)`` and the
    number of draws consumed.
    """
    exponents = 1.0 / np.arange(1, K + 1)
    chunks = []
    accepted = 0
    drawn = 0
    rounds = 0
    while accepted < size:
        rounds += 1
        if rounds > max_attempts:
            raise SamplingError(f"could not fill {size} samples within {max_attempts} rounds", accepted / drawn)
        need = size - accepted
        if mean_energy is None:
            xi = rng.random((need, K))
            s = xi ** exponents
        else:
            xi = rng.random((need, K - 1))
            s_inner = xi ** exponents[: K - 1]
            s_top = mean_energy / _energy_denominator(s_inner)
            s = np.concatenate([s_inner, s_top[:, None]], axis=1)
        phases = 2.0 * np.pi * rng.random((need, K))
        drawn += need
        keep = np.all((s >= 0.0) & (s <= 1.0), axis=1)
        if np.any(keep):
            chunks.append(_assemble(s[keep], phases[keep]))
            accepted += int(keep.sum())
    return np.concatenate(chunks)[:size], drawn


def sample_constrained_pure(cfg: SamplerConfig, rng: np.random.Generator) -> PureState:
    amps, _ = sample_pure_batch(cfg.truncation, 1, rng, cfg.mean_energy, cfg.max_attempts)
    state = PureState(amps[0])
    energy = float(np.arange(cfg.truncation + 1) @ state.populations)
    if abs(energy - cfg.mean_energy) > 1e-10:
        raise ValidationError([Violation("energy constraint", abs(energy - cfg.mean_energy))])
    return state


def make_rng(seed) -> np.random.Generator:
    """Counter-based generator; splits with ``np.random.SeedSequence.spawn``."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.Philox(seed))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def best_binomial(N: float, K: int, params: ChannelParams,
                  entropy_fn: Callable[[DensityMatrix], float] | None = None) -> tuple[BinomialParams, float]:
    """Lowest output entropy over binomial states with M mu = N, M = ceil(N)..K.

    Ties go to the smaller M.
    """
    if entropy_fn is None:
        from .entropy import von_neumann_entropy as entropy_fn
    if N > K:
        raise ValueError(f"N={N} exceeds truncation K={K}")
    best = None
    for M in range(max(math.ceil(N), 1), K + 1):
        bp = BinomialParams(M, N / M)
        rho = propagate_closed_form(pure_to_density(binomial_state(bp, K)), params)
        s = entropy_fn(rho)
        if best is None or s < best[1]:
            best = (bp, s)
    return best
