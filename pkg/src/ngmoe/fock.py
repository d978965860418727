"""Fock-basis state containers, validation and the photon-number observable.

States live on the truncated ladder {|0>, ..., |K>}; the Fock index is the
array index. Containers are frozen and hold read-only arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

# algebraic identities
ATOL = 1e-12
# eigen-solver noise on positivity
PSD_ATOL = 1e-10


class ValidationError(ValueError):
    """Raised when a state or parameter set breaks one of its invariants."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


@dataclass(frozen=True)
class Violation:
    invariant: str
    residual: float

    def __str__(self):
        return f"{self.invariant} violated (residual {self.residual:.3e})"


def _frozen_array(values, ndim):
    arr = np.array(values, dtype=complex)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PureState:
    """Amplitude vector over the Fock basis; ``amplitudes[n]`` multiplies |n>."""

    amplitudes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", _frozen_array(self.amplitudes, 1))

    @property
    def truncation(self) -> int:
        return self.amplitudes.shape[0] - 1

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class DensityMatrix:
    """Square matrix ``entries[m, n]`` = <m| rho |n> on the truncated ladder."""

    entries: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.entries, 2)
        if arr.shape[0] != arr.shape[1]:
            raise ValueError(f"density matrix must be square, got {arr.shape}")
        object.__setattr__(self, "entries", arr)

    @property
    def truncation(self) -> int:
        return self.entries.shape[0] - 1

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.entries)).copy()

    @classmethod
    def hermitized(cls, matrix) -> "DensityMatrix":
        """Build from ``matrix`` after stripping round-off asymmetry."""
        matrix = np.asarray(matrix, dtype=complex)
        return cls(0.5 * (matrix + matrix.conj().T))


State = Union[PureState, DensityMatrix]


@dataclass(frozen=True)
class ChannelParams:
    """Channel settings: mixing ``epsilon`` in [0, 1] and dimensionless ``time``.

    ``truncation`` is optional; when set, propagators check it against the
    state they are handed.
    """

    epsilon: float
    time: float
    truncation: int | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "time", float(self.time))
        problems = []
        if not 0.0 <= self.epsilon <= 1.0:
            problems.append(Violation("0 <= epsilon <= 1", abs(self.epsilon - np.clip(self.epsilon, 0, 1))))
        if not self.time >= 0.0:
            problems.append(Violation("time >= 0", -self.time))
        if self.truncation is not None and self.truncation < 1:
            problems.append(Violation("truncation >= 1", 1 - self.truncation))
        if problems:
            raise ValidationError(problems)

    def check_truncation(self, K: int) -> None:
        if self.truncation is not None and self.truncation != K:
            raise ValueError(f"params truncation {self.truncation} does not match state truncation {K}")


def validate(state: State, *, atol: float = ATOL, trace_atol: float | None = None,
             psd_atol: float = PSD_ATOL) -> list[Violation]:
    """Return the list of broken invariants; empty when ``state`` is valid."""
    out = []
    if isinstance(state, PureState):
        if state.truncation < 1:
            out.append(Violation("truncation K >= 1", 1 - state.truncation))
        norm_res = abs(float(np.sum(state.populations)) - 1.0)
        if not norm_res <= atol:
            out.append(Violation("unit norm", norm_res))
        return out

    rho = state.entries
    if state.truncation < 1:
        out.append(Violation("truncation K >= 1", 1 - state.truncation))
    herm_res = float(np.max(np.abs(rho - rho.conj().T)))
    if not herm_res <= atol:
        out.append(Violation("hermiticity", herm_res))
    trace_res = abs(complex(np.trace(rho)) - 1.0)
    if not trace_res <= (atol if trace_atol is None else trace_atol):
        out.append(Violation("unit trace", trace_res))
    if np.all(np.isfinite(rho)):
        lowest = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
        if lowest < -psd_atol:
            out.append(Violation("positive semidefinite", -lowest))
    else:
        out.append(Violation("finite entries", float("inf")))
    return out


def require_valid(state: State, **tolerances) -> None:
    problems = validate(state, **tolerances)
    if problems:
        raise ValidationError(problems)


def pure_to_density(state: PureState) -> DensityMatrix:
    """Projector |psi><psi|."""
    require_valid(state)
    psi = state.amplitudes
    return DensityMatrix(np.outer(psi, psi.conj()))


def mean_energy(state: State) -> float:
    """Mean photon number Tr(rho a^dagger a)."""
    require_valid(state)
    n = np.arange(state.truncation + 1)
    return float(n @ state.populations)


def number_state(n: int, K: int) -> PureState:
    amps = np.zeros(K + 1, dtype=complex)
    amps[n] = 1.0
    return PureState(amps)


def phase_unitary(alpha: float, K: int) -> np.ndarray:
    """Diagonal phase rotation sum_n exp(i alpha n) |n><n|."""
    return np.diag(np.exp(1j * alpha * np.arange(K + 1)))


def random_density_matrix(K: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Random full-rank (or given-rank) density matrix from a Ginibre draw."""
    d = K + 1
    r = d if rank is None else rank
    g = rng.standard_normal((d, r)) + 1j * rng.standard_normal((d, r))
    rho = g @ g.conj().T
    return DensityMatrix.hermitized(rho / np.trace(rho).real)
