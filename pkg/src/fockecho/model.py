"""Oscillator + two-level environment in a truncated Fock basis.

The system is a harmonic oscillator (levels n = 0..cutoff) and the environment a
single spin with states up/down.  Natural units are used throughout:
hbar = m = omega0 = 1, so energies are in units of hbar*omega0, lengths in
sqrt(hbar/(m*omega0)) and times in 1/omega0.

Full Hamiltonian, acting on amplitudes (up_n, down_n)::

    (H psi)_up,n   = (n + 1/2 + e_up) up_n + v_flip down_n
    (H psi)_down,n = (n + 1/2 + e_down) down_n + v_flip up_n
                     - v_g (sqrt(n) down_{n-1} + sqrt(n+1) down_{n+1})

The displacement coupling acts only on the down sector.  The basis is cut with a
hard wall at n = cutoff.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .errors import BelowBarrierError, ContractError, TruncationError

#: Largest probability tolerated in the top levels of the basis.
TAIL_EPS = 1e-10
#: Fraction of the basis (top levels) watched by the tail guard.
TAIL_FRACTION = 0.05


class Hamiltonian(str, enum.Enum):
    FREE = "free"
    FULL = "full"


@dataclass(frozen=True)
class ModelParams:
    """Hamiltonian constants and Fock cutoff.

    Attributes:
        e_up: energy of the up state.
        e_down: energy of the down state.
        v_flip: spin-flip amplitude; the avoided crossing has a gap 2*v_flip.
        v_g: oscillator displacement coupling in the down sector.
        cutoff: highest oscillator level kept.
        omega0: oscillator frequency, fixed to 1.
    """

    e_up: float = 0.0
    e_down: float = 100.0
    v_flip: float = 2.0
    v_g: float = 10.0
    cutoff: int = 64
    omega0: float = 1.0

    def __post_init__(self):
        if self.omega0 != 1.0:
            raise ContractError("omega0 is fixed to 1 (natural units)")
        if int(self.cutoff) != self.cutoff or self.cutoff < 1:
            raise ContractError(f"cutoff must be an integer >= 1, got {self.cutoff!r}")
        object.__setattr__(self, "cutoff", int(self.cutoff))
        for name in ("e_up", "e_down", "v_flip", "v_g"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ContractError(f"{name} must be finite")
            object.__setattr__(self, name, value)

    @classmethod
    def symmetric(cls, e_down: float = 100.0, v_g: float = 10.0, v_flip: float = 2.0,
                  cutoff: int = 64) -> "ModelParams":
        """Parameters whose two parabolas have the same minimum energy.

        Sets e_up = e_down - v_g**2, i.e. the displaced down parabola bottoms out
        at the energy of the up parabola.
        """
        if v_g <= 0:
            raise ContractError("the symmetric convention needs v_g > 0")
        return cls(e_up=e_down - v_g**2, e_down=e_down, v_flip=v_flip, v_g=v_g, cutoff=cutoff)

    @property
    def levels(self) -> int:
        return self.cutoff + 1

    @property
    def dim(self) -> int:
        return 2 * self.levels

    def with_cutoff(self, cutoff: int) -> "ModelParams":
        return replace(self, cutoff=cutoff)

    def with_cutoff_for(self, e_max: float, alphas=()) -> "ModelParams":
        return replace(self, cutoff=recommended_cutoff(self, e_max, alphas))

    def as_dict(self) -> dict:
        return {"e_up": self.e_up, "e_down": self.e_down, "v_flip": self.v_flip,
                "v_g": self.v_g, "cutoff": self.cutoff}


def default_params(v_flip: float = 2.0, cutoff: int = 64) -> ModelParams:
    """The default preset: e_up = 0, e_down = 100, v_g = 10 (symmetric parabolas)."""
    return ModelParams.symmetric(e_down=100.0, v_g=10.0, v_flip=v_flip, cutoff=cutoff)


def classical_reach(p: ModelParams, energy: float, alphas=()) -> float:
    """Largest oscillator energy n + 1/2 reachable classically at total ``energy``.

    On the up parabola this is energy - e_up.  A packet that flips to the down
    parabola at the crossing oscillates about q = sqrt(2) v_g and swings further
    out.  A pure-up packet released at rest from q0 = sqrt(2) alpha also sheds a
    small down component at t = 0 (it is not dressed by the spin flip); that
    component starts high on the down parabola when q0 lies on the far side.
    """
    reach = energy - p.e_up
    q_down = math.sqrt(2.0) * p.v_g
    floor_down = p.e_down - p.v_g**2
    if energy > floor_down:
        q_max = abs(q_down) + math.sqrt(2.0 * (energy - floor_down))
        reach = max(reach, 0.5 * q_max**2)
    for alpha in alphas:
        q0 = math.sqrt(2.0) * float(alpha)
        q_max = abs(q_down) + abs(q0 - q_down)
        reach = max(reach, 0.5 * q_max**2)
    return max(reach, 0.0)


def recommended_cutoff(p: ModelParams, e_max: float, alphas=()) -> int:
    """Fock cutoff for states with component energies up to ``e_max``.

    ``alphas`` are the displacements of the packets in the initial state.
    """
    n_peak = classical_reach(p, e_max, alphas)
    return int(math.ceil(n_peak + 12.0 * math.sqrt(n_peak) + 20.0))


@dataclass(frozen=True, eq=False)
class StateVector:
    """Complex amplitudes over (spin) x (Fock level)."""

    up: np.ndarray
    down: np.ndarray

    def __post_init__(self):
        up = np.asarray(self.up, dtype=complex)
        down = np.asarray(self.down, dtype=complex)
        if up.ndim != 1 or up.shape != down.shape:
            raise ContractError("up and down must be 1-d arrays of equal length")
        object.__setattr__(self, "up", up)
        object.__setattr__(self, "down", down)

    @classmethod
    def zeros(cls, cutoff: int) -> "StateVector":
        return cls(np.zeros(cutoff + 1, complex), np.zeros(cutoff + 1, complex))

    @classmethod
    def basis(cls, cutoff: int, spin: str, n: int) -> "StateVector":
        psi = cls.zeros(cutoff)
        {"up": psi.up, "down": psi.down}[spin][n] = 1.0
        return psi

    @classmethod
    def from_vector(cls, vec: np.ndarray) -> "StateVector":
        vec = np.asarray(vec)
        half = vec.shape[0] // 2
        return cls(vec[:half].copy(), vec[half:].copy())

    @property
    def cutoff(self) -> int:
        return self.up.shape[0] - 1

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.up, self.down])

    def norm(self) -> float:
        return math.sqrt(float(np.vdot(self.up, self.up).real + np.vdot(self.down, self.down).real))

    def normalized(self) -> "StateVector":
        nrm = self.norm()
        if nrm == 0.0:
            raise ContractError("cannot normalize the zero vector")
        return StateVector(self.up / nrm, self.down / nrm)

    def inner(self, other: "StateVector") -> complex:
        """<self|other> over the full spin x Fock space."""
        return complex(np.vdot(self.up, other.up) + np.vdot(self.down, other.down))

    def __add__(self, other: "StateVector") -> "StateVector":
        return StateVector(self.up + other.up, self.down + other.down)

    def __mul__(self, scalar) -> "StateVector":
        return StateVector(self.up * scalar, self.down * scalar)

    __rmul__ = __mul__


def _check_dim(psi: StateVector, p: ModelParams):
    if psi.cutoff != p.cutoff:
        raise ContractError(f"state has cutoff {psi.cutoff}, parameters expect {p.cutoff}")


def tail_mass(psi: StateVector, fraction: float = TAIL_FRACTION) -> float:
    """Probability in the top ``fraction`` of the levels, both spin sectors."""
    start = min(int(math.floor((1.0 - fraction) * psi.cutoff)) + 1, psi.cutoff)
    up, down = psi.up[start:], psi.down[start:]
    return float(np.vdot(up, up).real + np.vdot(down, down).real)


def check_tail(psi: StateVector, eps: float = TAIL_EPS, where: str = "") -> None:
    mass = tail_mass(psi)
    if mass >= eps:
        suffix = f" ({where})" if where else ""
        raise TruncationError(
            f"tail probability {mass:.3e} in the top {TAIL_FRACTION:.0%} of "
            f"{psi.cutoff + 1} levels exceeds {eps:.0e}{suffix}; raise the cutoff")


def apply_hamiltonian(psi: StateVector, which: Hamiltonian | str, p: ModelParams) -> StateVector:
    """Return H|psi> for the free (oscillator only) or full Hamiltonian."""
    _check_dim(psi, p)
    which = Hamiltonian(which)
    n = np.arange(p.levels)
    up = (n + 0.5) * psi.up
    down = (n + 0.5) * psi.down
    if which is Hamiltonian.FREE:
        return StateVector(up, down)

    up = up + p.e_up * psi.up + p.v_flip * psi.down
    down = down + p.e_down * psi.down + p.v_flip * psi.up
    sq = np.sqrt(n[1:])
    # b^dagger: down_{n-1} -> n ; b: down_{n+1} -> n.  Nothing is raised past the cutoff.
    down[1:] -= p.v_g * sq * psi.down[:-1]
    down[:-1] -= p.v_g * sq * psi.down[1:]
    return StateVector(up, down)


def hamiltonian_matrix(p: ModelParams, which: Hamiltonian | str = Hamiltonian.FULL) -> sp.csr_matrix:
    """Sparse Hamiltonian on the stacked basis [up_0..up_N, down_0..down_N]."""
    which = Hamiltonian(which)
    levels = p.levels
    n = np.arange(levels, dtype=float)
    if which is Hamiltonian.FREE:
        return sp.diags(np.concatenate([n + 0.5, n + 0.5]), format="csr")

    diag = np.concatenate([n + 0.5 + p.e_up, n + 0.5 + p.e_down])
    hop = np.concatenate([np.zeros(levels - 1), -p.v_g * np.sqrt(n[1:])])
    # the (up_N, down_0) pair is not a neighbour pair
    hop_full = np.insert(hop, levels - 1, 0.0)
    flip = np.full(levels, p.v_flip)
    return sp.diags(
        [diag, hop_full, hop_full, flip, flip],
        [0, 1, -1, levels, -levels],
        shape=(2 * levels, 2 * levels),
        format="csr",
    )


def spectral_bounds(p: ModelParams, which: Hamiltonian | str = Hamiltonian.FULL) -> tuple[float, float]:
    """Guaranteed (Gershgorin) lower and upper bounds on the spectrum."""
    which = Hamiltonian(which)
    n = np.arange(p.levels, dtype=float)
    if which is Hamiltonian.FREE:
        return 0.5, p.cutoff + 0.5
    hop = np.zeros(p.levels)
    hop[1:] += np.sqrt(n[1:])
    hop[:-1] += np.sqrt(n[1:])
    radius_up = abs(p.v_flip)
    radius_down = abs(p.v_flip) + abs(p.v_g) * hop
    lo = min(np.min(n + 0.5 + p.e_up - radius_up), np.min(n + 0.5 + p.e_down - radius_down))
    hi = max(np.max(n + 0.5 + p.e_up + radius_up), np.max(n + 0.5 + p.e_down + radius_down))
    return float(lo), float(hi)


def expectation(psi: StateVector, which: Hamiltonian | str, p: ModelParams) -> float:
    """<psi|H|psi> (real part; H is Hermitian)."""
    return psi.inner(apply_hamiltonian(psi, which, p)).real


def mean_position(psi: StateVector) -> float:
    """<q> with q = (b + b^dagger)/sqrt(2), summed over both spin sectors."""
    sq = np.sqrt(np.arange(1, psi.cutoff + 1))
    b_up = np.vdot(psi.up[:-1], sq * psi.up[1:])
    b_down = np.vdot(psi.down[:-1], sq * psi.down[1:])
    return float(math.sqrt(2.0) * (b_up + b_down).real)


def down_population(psi: StateVector) -> float:
    return float(np.vdot(psi.down, psi.down).real)


@dataclass(frozen=True)
class CrossingInfo:
    """Geometry of the avoided crossing as seen by a packet of energy ``e0``.

    ``q_dot_c`` is the classical speed at the crossing and ``p_lz`` the
    asymptotic probability of staying in the up (diabatic) state after one passage.
    """

    q_c: float
    e_c: float
    q_dot_c: float
    p_lz: float
    e0: float = field(default=float("nan"))

    @property
    def sweep_rate(self) -> float:
        """|d(eps_up - eps_down)/dt| at the crossing for linearized parabolas."""
        return 2.0 * self.q_c * self.q_dot_c


def crossing_point(p: ModelParams) -> tuple[float, float]:
    """Crossing coordinate q_C and crossing energy E_C."""
    if p.v_g <= 0:
        raise ContractError("crossing geometry needs v_g > 0")
    q_c = (p.e_down - p.e_up) / (math.sqrt(2.0) * p.v_g)
    e_c = p.e_up + 0.5 * q_c**2
    return q_c, e_c


def crossing_parameters(p: ModelParams, e0: float) -> CrossingInfo:
    q_c, e_c = crossing_point(p)
    if not e0 > e_c:
        raise BelowBarrierError(f"e0 = {e0} does not exceed the crossing energy {e_c}")
    q_dot_c = math.sqrt(2.0 * (e0 - e_c))
    p_lz = landau_zener_probability(p.v_flip, q_c, q_dot_c)
    return CrossingInfo(q_c=q_c, e_c=e_c, q_dot_c=q_dot_c, p_lz=p_lz, e0=float(e0))


def landau_zener_probability(v_flip: float, q_c: float, q_dot_c: float) -> float:
    """exp(-2 pi V^2 / |d(eps_up - eps_down)/dt|) with the linearized sweep rate 2 q_C qdot_C."""
    rate = 2.0 * abs(q_c) * q_dot_c
    if v_flip == 0.0:
        return 1.0
    return math.exp(-2.0 * math.pi * v_flip**2 / rate)


# --------------------------------------------------------------------------
# position representation

_RESCALE_AT = 1e100
_LOG_RESCALE = math.log(_RESCALE_AT)


def _oscillator_series(coeffs: np.ndarray, q: np.ndarray) -> np.ndarray:
    """sum_n coeffs[k, n] phi_n(q) for every row k.

    Uses the normalized recurrence
    phi_n = sqrt(2/n) q phi_{n-1} - sqrt((n-1)/n) phi_{n-2}
    with the Gaussian factor kept as a separate per-point log scale, so that
    large |q| and large n neither underflow nor overflow.
    """
    coeffs = np.atleast_2d(coeffs)
    log_scale = -0.5 * q**2 - 0.25 * math.log(math.pi)
    f_prev = np.zeros_like(q)
    f = np.ones_like(q)
    acc = coeffs[:, :1] * f
    for n in range(1, coeffs.shape[1]):
        f_next = math.sqrt(2.0 / n) * q * f - math.sqrt((n - 1) / n) * f_prev
        f_prev, f = f, f_next
        acc += coeffs[:, n:n + 1] * f
        big = np.abs(f) > _RESCALE_AT
        if big.any():
            scale = np.where(big, 1.0 / _RESCALE_AT, 1.0)
            f *= scale
            f_prev *= scale
            acc *= scale
            log_scale = log_scale + np.where(big, _LOG_RESCALE, 0.0)
    return acc * np.exp(log_scale)


def hermite_functions(n_max: int, q) -> np.ndarray:
    """Oscillator eigenfunctions phi_0..phi_{n_max} at ``q``; shape (n_max + 1, len(q))."""
    q = np.atleast_1d(np.asarray(q, dtype=float))
    out = np.empty((n_max + 1, q.size))
    log_scale = -0.5 * q**2 - 0.25 * math.log(math.pi)
    f_prev = np.zeros_like(q)
    f = np.ones_like(q)
    with np.errstate(divide="ignore"):
        for n in range(n_max + 1):
            if n > 0:
                f_next = math.sqrt(2.0 / n) * q * f - math.sqrt((n - 1) / n) * f_prev
                f_prev, f = f, f_next
                big = np.abs(f) > _RESCALE_AT
                if big.any():
                    scale = np.where(big, 1.0 / _RESCALE_AT, 1.0)
                    f *= scale
                    f_prev *= scale
                    log_scale = log_scale + np.where(big, _LOG_RESCALE, 0.0)
            out[n] = np.sign(f) * np.exp(np.log(np.abs(f)) + log_scale)
    return out


def wavefunction(psi: StateVector, q) -> tuple[np.ndarray, np.ndarray]:
    """Position-space amplitudes (psi_up(q), psi_down(q))."""
    q = np.atleast_1d(np.asarray(q, dtype=float))
    if not np.all(np.isfinite(q)):
        raise ContractError("grid must be finite")
    both = _oscillator_series(np.vstack([psi.up, psi.down]), q)
    return both[0], both[1]


def position_density(psi: StateVector, q) -> np.ndarray:
    """|psi_up(q)|^2 + |psi_down(q)|^2 on the grid ``q``."""
    up, down = wavefunction(psi, q)
    return up.real**2 + up.imag**2 + down.real**2 + down.imag**2
