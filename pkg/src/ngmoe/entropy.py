"""Output-entropy functionals, closed-form spectra and bounds, and the
sweep / crossing / random-search analyses built on them.

All entropies are in bits unless ``base`` is given.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._numerics import binomial_pmf
from .channel import closed_form_weights, decay_fraction, propagate_closed_form, propagate_weights
from .fock import PSD_ATOL, ChannelParams, DensityMatrix, PureState, ValidationError, Violation, \
    pure_to_density, require_valid
from .states import BinomialParams, KappaParams, best_binomial, binomial_state, make_rng, sample_pure_batch

ROOT_TOL = 1e-8
SEARCH_TOL = 1e-9


def _log(x, base):
    return np.log2(x) if base == 2 else np.log(x) / np.log(base)


def entropy_of_spectrum(eigenvalues, base: float = 2) -> float:
    """-sum lambda log lambda with 0 log 0 = 0.

    Values in [-1e-10, 0) are round-off and clamp to zero; anything more
    negative is rejected.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.size and lam.min() < -PSD_ATOL:
        raise ValidationError([Violation("positive semidefinite", -float(lam.min()))])
    lam = np.clip(lam, 0.0, 1.0)
    lam = lam[lam > 0]
    return float(max(-np.sum(lam * _log(lam, base)), 0.0))


def von_neumann_entropy(rho: DensityMatrix, base: float = 2) -> float:
    require_valid(rho, trace_atol=1e-10)
    return entropy_of_spectrum(np.linalg.eigvalsh(rho.entries), base)


def batch_entropy(stack: np.ndarray, base: float = 2) -> np.ndarray:
    """Entropies of a stack of Hermitian matrices ``(..., d, d)``."""
    lam = np.linalg.eigvalsh(stack)
    if lam.size and lam.min() < -PSD_ATOL:
        raise ValidationError([Violation("positive semidefinite", -float(lam.min()))])
    lam = np.clip(lam, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(lam > 0, -lam * _log(np.where(lam > 0, lam, 1.0), base), 0.0)
    return np.maximum(terms.sum(axis=-1), 0.0)


def shannon_entropy(p, base: float = 2) -> float:
    p = np.asarray(p, dtype=float)
    if p.size == 0 or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-10:
        raise ValueError("not a probability vector")
    p = p[p > 0]
    return float(max(-np.sum(p * _log(p, base)), 0.0))


def _check_kappa_args(N, K):
    KappaParams(N, K)


def kappa_output_spectrum(N: float, K: int, params: ChannelParams) -> np.ndarray:
    """Output eigenvalues for the kappa_0 input, indexed (lambda_0, lambda_1, ..., lambda_K).

    The {|0>, |K>} block gives lambda_0 and lambda_K; the remaining number
    states are eigenvectors with binomial weights.
    """
    _check_kappa_args(N, K)
    f = decay_fraction(params)
    q = N / K
    a = 1.0 - q * (1.0 - f ** K)
    b = q * (1.0 - f) ** K
    # the |0><K| coherence decays with (1-f)^(K/2), see A_0
    c = math.sqrt(q * (1.0 - q)) * (1.0 - f) ** (K / 2) * math.exp(-params.epsilon * K * K * params.time)
    root = math.sqrt((a - b) ** 2 + 4.0 * c * c)
    lam0 = 0.5 * (a + b + root)
    lamK = (a * b - c * c) / lam0 if lam0 > 0 else 0.0
    out = np.empty(K + 1)
    out[0] = lam0
    out[K] = lamK
    if K > 1:
        m = np.arange(1, K)
        out[1:K] = q * binomial_pmf(m, K, 1.0 - f)
    return out


def kappa_output_entropy(N: float, K: int, params: ChannelParams, base: float = 2) -> float:
    return entropy_of_spectrum(kappa_output_spectrum(N, K, params), base)


def kappa_output_entropy_asymptotic(N: float, K: int, params: ChannelParams) -> float:
    """Large-K expression (bits) with the inner binomial entropy replaced by its
    Gaussian approximation; differs from the exact value at O(1/K).

    Needs 0 < f < 1.
    """
    f = decay_fraction(params)
    if not 0.0 < f < 1.0:
        raise ValueError("asymptotic form needs 0 < f < 1")
    lam = kappa_output_spectrum(N, K, params)
    q = N / K
    fk, gk = f ** K, (1.0 - f) ** K

    def xlog2x(x):
        return x * math.log2(x) if x > 0 else 0.0

    return (-xlog2x(lam[0]) - xlog2x(lam[K])
            - q * (1.0 - fk - gk) * math.log2(q)
            + q * (xlog2x(fk) + xlog2x(gk))
            + q * 0.5 * math.log2(2.0 * math.pi * math.e * K * f * (1.0 - f)))


def dimension_bound(N: float, target_entropy: float, f: float) -> int:
    """Truncation beyond which the kappa_0 output entropy is below ``target_entropy``."""
    if not target_entropy > 0:
        raise ValueError("target entropy must be positive")
    if not 0.0 <= f <= 1.0:
        raise ValueError("f must lie in [0, 1]")
    return math.ceil(N / target_entropy ** 2 * (2.0 + math.sqrt(math.pi / 2 * math.e * N * f * (1.0 - f))) ** 2)


def binomial_m1_eigenvalues(N: float, params: ChannelParams) -> tuple[float, float]:
    if not 0.0 <= N <= 1.0:
        raise ValueError(f"M=1 binomial needs N <= 1, got N={N}")
    f = decay_fraction(params)
    root = math.sqrt((1.0 - 2.0 * N * (1.0 - f)) ** 2 + 4.0 * N * (1.0 - N) * math.exp(-2.0 * params.time))
    hi = 0.5 * (1.0 + root)
    lo = (N * (1.0 - f) * (1.0 - N * (1.0 - f)) - N * (1.0 - N) * math.exp(-2.0 * params.time)) / hi
    return hi, lo


def binomial_m1_entropy(N: float, params: ChannelParams, base: float = 2) -> float:
    """Output entropy of sqrt(1-N)|0> + sqrt(N)|1>, from its 2x2 output block."""
    return entropy_of_spectrum(binomial_m1_eigenvalues(N, params), base)


@dataclass(frozen=True)
class EntropyRecord:
    epsilon: float
    time: float
    family: str
    params: dict
    entropy_bits: float
    N: float
    K: int

    def __post_init__(self):
        if self.family not in ("kappa", "binomial", "random", "custom"):
            raise ValueError(f"unknown family {self.family!r}")
        if not -1e-10 <= self.entropy_bits <= math.log2(self.K + 1) + 1e-10:
            raise ValidationError([Violation("0 <= S <= log2(K+1)", self.entropy_bits)])


def _sweep_point(N, K, t, eps):
    params = ChannelParams(eps, t)
    s_k = kappa_output_entropy(N, K, params)
    bp, s_b = best_binomial(N, K, params)
    return [
        EntropyRecord(eps, t, "kappa", {"K": K, "alpha": 0.0}, s_k, N, K),
        EntropyRecord(eps, t, "binomial", {"M": bp.M, "mu": bp.mu}, s_b, N, K),
    ]


def entropy_sweep(N: float, K: int, t: float, epsilon_grid, workers: int = 1) -> list[EntropyRecord]:
    """kappa_0 and best-binomial output entropies at each epsilon, in grid order."""
    grid = [float(e) for e in epsilon_grid]
    if not grid:
        raise ValueError("epsilon grid is empty")
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(lambda e: _sweep_point(N, K, t, e), grid))
    else:
        rows = [_sweep_point(N, K, t, e) for e in grid]
    return [r for pair in rows for r in pair]


def entropy_gap(N: float, K: int, epsilon: float, t: float) -> float:
    """S(best binomial) - S(kappa_0); negative where the binomial input is better."""
    params = ChannelParams(epsilon, t)
    return best_binomial(N, K, params)[1] - kappa_output_entropy(N, K, params)


def closed_form_gap(N: float, K: int, epsilon: float, t: float) -> float:
    """Gap against the binomial state with M fixed at ceil(N).

    For N <= 1 this uses the two-level closed form; otherwise the M = ceil(N)
    state is propagated numerically.
    """
    params = ChannelParams(epsilon, t)
    M = math.ceil(N)
    if M <= 1:
        s_b = binomial_m1_entropy(N, params)
    else:
        rho = pure_to_density(binomial_state(BinomialParams(M, N / M), K))
        s_b = von_neumann_entropy(propagate_closed_form(rho, params))
    return s_b - kappa_output_entropy(N, K, params)


def bisect(fn, lo: float, hi: float, f_lo: float | None = None, tol: float = ROOT_TOL,
           max_iter: int = 200) -> float:
    """Bracketed bisection until |fn(x)| < tol."""
    f_lo = fn(lo) if f_lo is None else f_lo
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        if abs(f_mid) < tol or hi - lo < 1e-15:
            return mid
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def bracketed_roots(fn, lo: float, hi: float, scan_points: int = 60, tol: float = ROOT_TOL) -> list[float]:
    """All roots of ``fn`` found by scanning [lo, hi] for sign changes, then bisecting."""
    ts = np.linspace(lo, hi, scan_points + 1)
    vals = [fn(t) for t in ts]
    roots = []
    for a, b, fa, fb in zip(ts[:-1], ts[1:], vals[:-1], vals[1:]):
        if fa == 0.0:
            roots.append(float(a))
        elif fa * fb < 0:
            roots.append(bisect(fn, float(a), float(b), fa, tol))
    if vals[-1] == 0.0:
        roots.append(float(ts[-1]))
    return roots


@dataclass(frozen=True)
class CrossingCurve:
    points: list
    t_star: float | None
    warning: str | None = None

    @property
    def empty(self) -> bool:
        return not self.points


def _curve(gap_fn, N, K, epsilon_grid, t_bracket, scan_points):
    lo, hi = t_bracket
    points = []
    for eps in epsilon_grid:
        eps = float(eps)
        for t in bracketed_roots(lambda t: gap_fn(N, K, eps, t), lo, hi, scan_points):
            points.append((eps, t))
    if not points:
        return CrossingCurve([], None, f"no sign change of the entropy gap for t in [{lo}, {hi}]")
    return CrossingCurve(points, min(t for _, t in points))


def crossing_curve(N: float, K: int, epsilon_grid, t_bracket, scan_points: int = 60) -> CrossingCurve:
    """Points of the (epsilon, t) plane where kappa_0 and the best binomial state
    give the same output entropy; ``t_star`` is the lowest time on the curve."""
    return _curve(entropy_gap, N, K, epsilon_grid, t_bracket, scan_points)


def t_star_closed_form(N: float, K: int, epsilon_grid, t_bracket, scan_points: int = 60) -> float | None:
    """Threshold time from the M = ceil(N) binomial entropy against the kappa_0 spectrum."""
    return _curve(closed_form_gap, N, K, epsilon_grid, t_bracket, scan_points).t_star


@dataclass
class SearchReport:
    N: float
    K: int
    epsilon: float
    time: float
    n_samples: int
    seed: int | None
    min_entropy: float
    argmin: np.ndarray
    kappa_entropy: float
    binomial_entropy: float
    binomial_params: dict
    acceptance_rate: float
    tolerance: float = SEARCH_TOL
    injected: int = 0
    verdict: bool = field(init=False)

    def __post_init__(self):
        self.verdict = bool(self.min_entropy >= min(self.kappa_entropy, self.binomial_entropy) - self.tolerance)

    @property
    def baseline(self) -> float:
        return min(self.kappa_entropy, self.binomial_entropy)

    def to_dict(self) -> dict:
        return {
            "N": self.N, "K": self.K, "epsilon": self.epsilon, "t": self.time,
            "n_samples": self.n_samples, "seed": self.seed, "acceptance_rate": self.acceptance_rate,
            "min_entropy": self.min_entropy,
            "argmin_amplitudes": [[float(z.real), float(z.imag)] for z in self.argmin],
            "kappa_entropy": self.kappa_entropy, "binomial_entropy": self.binomial_entropy,
            "binomial_params": self.binomial_params, "tolerance": self.tolerance,
            "injected": self.injected, "verdict": self.verdict,
        }


SEARCH_CHUNK = 8192


def _search_chunk(K, N, weights, seed_seq, size, base):
    rng = make_rng(seed_seq)
    amps, drawn = sample_pure_batch(K, size, rng, N)
    rho = np.einsum("bi,bj->bij", amps, amps.conj())
    out = propagate_weights(rho, weights)
    out = 0.5 * (out + np.conj(np.swapaxes(out, -1, -2)))
    s = batch_entropy(out, base)
    i = int(np.argmin(s))
    return s[i], amps[i], drawn


def random_search(N: float, K: int, params: ChannelParams, n_samples: int, seed: int | None,
                  inject: list[PureState] | None = None, workers: int = 1, base: float = 2) -> SearchReport:
    """Minimum output entropy over ``n_samples`` energy-constrained random pure
    states, compared against kappa_0 and the best binomial state.

    Samples are generated in fixed-size chunks, each with its own spawned
    stream, so results do not depend on ``workers``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    params.check_truncation(K)
    weights = closed_form_weights(K, params)
    sizes = [SEARCH_CHUNK] * (n_samples // SEARCH_CHUNK)
    if n_samples % SEARCH_CHUNK:
        sizes.append(n_samples % SEARCH_CHUNK)
    streams = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = list(zip(streams, sizes))

    def run(job):
        return _search_chunk(K, N, weights, job[0], job[1], base)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(j) for j in jobs]

    best_s, best_psi = math.inf, None
    drawn = 0
    for s, psi, d in results:
        drawn += d
        if s < best_s:
            best_s, best_psi = float(s), psi
    injected = list(inject or [])
    for state in injected:
        if state.truncation != K:
            raise ValueError("injected state has the wrong truncation")
        s = von_neumann_entropy(propagate_closed_form(pure_to_density(state), params), base)
        if s < best_s:
            best_s, best_psi = s, np.array(state.amplitudes)

    s_kappa = kappa_output_entropy(N, K, params, base) if N <= K else math.inf
    bp, s_bin = best_binomial(N, K, params, lambda r: von_neumann_entropy(r, base))
    return SearchReport(N=N, K=K, epsilon=params.epsilon, time=params.time, n_samples=n_samples,
                        seed=seed, min_entropy=best_s, argmin=best_psi, kappa_entropy=s_kappa,
                        binomial_entropy=s_bin, binomial_params={"M": bp.M, "mu": bp.mu},
                        acceptance_rate=n_samples / drawn, injected=len(injected))

