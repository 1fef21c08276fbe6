"""Initial states: semiclassical (coherent), cat and incoherent superpositions.

All states live in the up sector.  Displacements are real, so every packet
starts at a turning point q = sqrt(2) * alpha with zero velocity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import ContractError
from .model import ModelParams, StateVector, check_tail


@dataclass(frozen=True)
class CatSpec:
    """Two real displacements alpha1, alpha2 of a two-packet superposition."""

    alpha1: float
    alpha2: float

    def __post_init__(self):
        for name in ("alpha1", "alpha2"):
            value = getattr(self, name)
            if isinstance(value, complex) or not math.isfinite(value):
                raise ContractError(f"{name} must be a finite real number")
            object.__setattr__(self, name, float(value))

    @property
    def energies(self) -> tuple[float, float]:
        return self.alpha1**2 + 0.5, self.alpha2**2 + 0.5

    @property
    def e_bar(self) -> float:
        return 0.5 * (self.alpha1**2 + self.alpha2**2 + 1.0)

    @property
    def delta_e(self) -> float:
        return abs(self.alpha1**2 - self.alpha2**2)

    @classmethod
    def from_energies(cls, e_bar: float, delta_e: float, opposite_signs: bool = True) -> "CatSpec":
        """Displacements with mean energy ``e_bar`` and separation ``delta_e``.

        alpha1**2 = e_bar + delta_e/2 - 1/2 and alpha2**2 = e_bar - delta_e/2 - 1/2.
        With ``opposite_signs`` the lower-energy packet starts on the far side
        (alpha2 < 0), otherwise both start on the same side.
        """
        a1_sq = e_bar + 0.5 * delta_e - 0.5
        a2_sq = e_bar - 0.5 * delta_e - 0.5
        if a1_sq < 0 or a2_sq < 0 or delta_e < 0:
            raise ContractError(f"(e_bar={e_bar}, delta_e={delta_e}) is not reachable with real alphas")
        a2 = math.sqrt(a2_sq)
        return cls(math.sqrt(a1_sq), -a2 if opposite_signs else a2)

    @property
    def max_energy(self) -> float:
        return max(self.energies)


def coherent_amplitudes(alpha: float, cutoff: int) -> np.ndarray:
    """e^{-alpha^2/2} alpha^n / sqrt(n!) for n = 0..cutoff.

    The value at the Poisson mode comes from log space; the rest follow from
    the ratio alpha / sqrt(n) by cumulative products running outward from the
    mode, which keeps neighbouring levels consistent to a few ulps.  Not
    renormalized; the truncation loss is whatever lies above ``cutoff``.
    """
    alpha = float(alpha)
    out = np.zeros(cutoff + 1)
    if alpha == 0.0:
        out[0] = 1.0
        return out
    mag = abs(alpha)
    mode = min(int(mag * mag), cutoff)
    peak = math.exp(-0.5 * mag * mag + mode * math.log(mag) - 0.5 * gammaln(mode + 1))
    up = np.arange(mode + 1, cutoff + 1)
    out[mode] = peak
    out[mode + 1:] = peak * np.cumprod(mag / np.sqrt(up))
    down = np.arange(mode, 0, -1)
    out[:mode] = (peak * np.cumprod(np.sqrt(down) / mag))[::-1]
    if alpha < 0:
        out[1::2] *= -1.0
    return out


def coherent_state(alpha: float, p: ModelParams) -> StateVector:
    """Semiclassical state |up, alpha>, renormalized on the truncated basis."""
    if isinstance(alpha, complex):
        raise ContractError("only real displacements are supported")
    amp = coherent_amplitudes(alpha, p.cutoff)
    psi = StateVector(amp, np.zeros_like(amp)).normalized()
    check_tail(psi, where=f"coherent state alpha={alpha}")
    return psi


def cat_state(spec: CatSpec, p: ModelParams) -> StateVector:
    """Coherent superposition (|alpha1> + |alpha2>), normalized numerically."""
    a = coherent_state(spec.alpha1, p)
    b = coherent_state(spec.alpha2, p)
    return (a + b).normalized()


@dataclass(frozen=True)
class IncoherentBranches:
    """The two packets of a random-phase superposition and its weights.

    ``delta_sq_over_n2`` is Delta^2 / N^2 = 2 (3 + |<alpha1|alpha2>|^2); the
    number N of random phases never appears on its own.
    """

    branch1: StateVector
    branch2: StateVector
    overlap_sq: float
    delta_sq_over_n2: float
    spec: CatSpec | None = None


def incoherent_branches(spec: CatSpec, p: ModelParams) -> IncoherentBranches:
    overlap_sq = math.exp(-(spec.alpha1 - spec.alpha2) ** 2)
    return IncoherentBranches(
        branch1=coherent_state(spec.alpha1, p),
        branch2=coherent_state(spec.alpha2, p),
        overlap_sq=overlap_sq,
        delta_sq_over_n2=2.0 * (3.0 + overlap_sq),
        spec=spec,
    )
