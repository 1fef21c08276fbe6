"""Time evolution: analytic under the oscillator alone, Chebyshev under the full H.

The full propagator expands exp(-i H tau) in Chebyshev polynomials of the
rescaled Hamiltonian (H - c)/r, where [c - r, c + r] encloses the spectrum
(Gershgorin bounds).  The vectors T_k((H - c)/r) psi do not depend on tau, so
one recurrence serves every output time inside a block: the states at all
requested times are a single (times x terms) @ (terms x dim) product.  Block
lengths are capped so that r * tau stays below ``max_phase``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy.special import jv

from .errors import ContractError, ConvergenceError
from .model import (
    Hamiltonian,
    ModelParams,
    StateVector,
    _check_dim,
    check_tail,
    hamiltonian_matrix,
    spectral_bounds,
)


@dataclass(frozen=True)
class EvolutionConfig:
    """Propagation accuracy and output sampling.

    Attributes:
        tol: amplitude error allowed per unit time.
        dt_out: spacing of the output time grid.
        t_max: final time.
        check_tail: run the truncation guard at every output time.
        max_phase: largest r * tau handled by one Chebyshev block.
        max_terms: hard limit on the expansion length.
    """

    tol: float = 1e-9
    dt_out: float = 0.01
    t_max: float = 0.0
    check_tail: bool = True
    max_phase: float = 150.0
    max_terms: int = 4000

    def __post_init__(self):
        if not self.tol > 0:
            raise ContractError("tol must be positive")
        if not self.dt_out > 0:
            raise ContractError("dt_out must be positive")
        if not self.t_max >= 0:
            raise ContractError("t_max must be non-negative")
        if not self.max_phase > 0:
            raise ContractError("max_phase must be positive")


def time_grid(cfg: EvolutionConfig) -> np.ndarray:
    """Uniform grid from 0 to t_max with spacing at most dt_out."""
    steps = int(math.ceil(cfg.t_max / cfg.dt_out - 1e-9))
    if steps <= 0:
        return np.zeros(1)
    return np.linspace(0.0, cfg.t_max, steps + 1)


def evolve_free(psi0: StateVector, t: float) -> StateVector:
    """Exact evolution under the oscillator Hamiltonian: phases exp(-i (n + 1/2) t)."""
    phase = np.exp(-1j * (np.arange(psi0.cutoff + 1) + 0.5) * t)
    return StateVector(psi0.up * phase, psi0.down * phase)


class ChebyshevPropagator:
    """exp(-i H tau) acting on stacked vectors, for one fixed Hamiltonian."""

    def __init__(self, p: ModelParams, which: Hamiltonian | str = Hamiltonian.FULL,
                 tol: float = 1e-9, max_phase: float = 150.0, max_terms: int = 4000):
        self.params = p
        self.matrix = hamiltonian_matrix(p, which)
        lo, hi = spectral_bounds(p, which)
        self.center = 0.5 * (hi + lo)
        # a small margin keeps the rescaled spectrum strictly inside [-1, 1]
        self.radius = 0.5 * (hi - lo) * (1.0 + 1e-6) + 1e-12
        self.tol = tol
        self.max_phase = max_phase
        self.max_terms = max_terms

    def _terms(self, x: float, eps: float) -> int:
        """Expansion length such that the neglected Bessel weights are below eps."""
        k_max = int(x + 12.0 * x ** (1.0 / 3.0) + 40)
        if k_max > self.max_terms:
            raise ConvergenceError(f"Chebyshev expansion would need more than {self.max_terms} terms")
        weights = np.abs(jv(np.arange(k_max + 1), x))
        above = np.nonzero(weights > eps)[0]
        k = int(above[-1]) + 2 if above.size else 2
        if k >= k_max:
            raise ConvergenceError(f"Chebyshev expansion did not converge within {k_max} terms")
        return k

    def block(self, vec: np.ndarray, taus: np.ndarray) -> np.ndarray:
        """States exp(-i H tau) vec for each tau in ``taus`` (all >= 0); shape (len, dim)."""
        taus = np.asarray(taus, dtype=float)
        x_max = self.radius * float(taus.max(initial=0.0))
        eps = max(1e-3 * self.tol * max(float(taus.max(initial=0.0)), 1e-3), 1e-17)
        order = self._terms(x_max, eps)

        basis = np.empty((order, vec.shape[0]), dtype=complex)
        basis[0] = vec
        inv_r = 1.0 / self.radius
        c = self.center
        if order > 1:
            basis[1] = (self.matrix @ vec - c * vec) * inv_r
        for k in range(2, order):
            prev = basis[k - 1]
            basis[k] = 2.0 * inv_r * (self.matrix @ prev - c * prev) - basis[k - 2]

        k = np.arange(order)
        bessel = jv(k[None, :], self.radius * taus[:, None])
        coef = bessel * ((-1j) ** k)[None, :]
        coef[:, 1:] *= 2.0
        coef *= np.exp(-1j * c * taus)[:, None]
        return coef @ basis

    def run(self, vec: np.ndarray, times) -> Iterator[tuple[float, np.ndarray]]:
        """Yield (t, state) at every requested time, starting from ``vec`` at t = 0."""
        times = np.asarray(times, dtype=float)
        if times.size and (times[0] < 0 or np.any(np.diff(times) < 0)):
            raise ContractError("times must be non-negative and non-decreasing")
        span = self.max_phase / self.radius
        t_now = 0.0
        i = 0
        while i < times.size:
            # long gaps with no output inside are crossed in silent sub-blocks
            while times[i] - t_now > span:
                vec = self.block(vec, np.array([span]))[0]
                t_now += span
            j = i
            while j + 1 < times.size and times[j + 1] - t_now <= span:
                j += 1
            taus = times[i:j + 1] - t_now
            states = self.block(vec, taus)
            for t, state in zip(times[i:j + 1], states):
                yield float(t), state
            vec = states[-1]
            t_now = float(times[j])
            i = j + 1


def evolve_samples(psi0: StateVector, times, p: ModelParams, cfg: EvolutionConfig | None = None,
                   which: Hamiltonian | str = Hamiltonian.FULL) -> Iterator[tuple[float, StateVector]]:
    """Yield (t, psi(t)) under the full (or free) Hamiltonian on a time grid."""
    cfg = cfg or EvolutionConfig()
    _check_dim(psi0, p)
    prop = ChebyshevPropagator(p, which, tol=cfg.tol, max_phase=cfg.max_phase, max_terms=cfg.max_terms)
    for t, vec in prop.run(psi0.vector, times):
        state = StateVector.from_vector(vec)
        if cfg.check_tail:
            check_tail(state, where=f"t = {t:.6g}")
        yield t, state


def evolve_full(psi0: StateVector, t: float, p: ModelParams, cfg: EvolutionConfig | None = None) -> StateVector:
    """exp(-i H t)|psi0> for the full Hamiltonian."""
    if t < 0:
        raise ContractError("only forward evolution is supported")
    *_, (_, state) = evolve_samples(psi0, [float(t)], p, cfg)
    return state
