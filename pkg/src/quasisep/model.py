"""Coupled single fermion / single boson mode model and its quasiparticles.

Energies are returned in units of hbar (E / hbar). Modes are ordered
(fermion, boson) throughout, i.e. kets are ``(n_f, n_b)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property

from .fock import (
    ModeMismatchError,
    StateVector,
    apply_annihilation,
    apply_creation,
    apply_mixed_creation,
    boson,
    canonical_phase,
    fermion,
    vacuum,
)

PLUS = "+"
MINUS = "-"
BRANCHES = (PLUS, MINUS)


def _check_branch(branch: str) -> str:
    if branch not in BRANCHES:
        raise ValueError(f"branch must be '+' or '-', got {branch!r}")
    return branch


def _mixing(delta: float, coupling: float) -> tuple[float, float, float]:
    """Return (Delta, phi, beta) for the splitting sqrt(delta^2 + coupling^2).

    The smaller of phi/beta is recovered from phi*beta = coupling/(2 Delta) to
    avoid cancellation in Delta - |delta|.
    """
    rabi = math.hypot(delta, coupling)
    if rabi == 0:
        raise ValueError("degenerate parameters: detuning and coupling both vanish")
    if delta >= 0:
        phi = math.sqrt((rabi + delta) / (2 * rabi))
        beta = coupling / (2 * rabi * phi)
    else:
        beta = math.sqrt((rabi - delta) / (2 * rabi))
        phi = coupling / (2 * rabi * beta)
    return rabi, phi, beta


@dataclass(frozen=True)
class IndexedParams:
    N: int
    Delta_N: float
    phi_N: float
    beta_N: float


@dataclass(frozen=True)
class EnergyPair:
    e_plus: float
    e_minus: float


@dataclass(frozen=True)
class JCParams:
    """Frequencies and coupling of the fermion-boson Hamiltonian.

    ``kappa`` may be zero only for nonzero detuning; the coupling phase is
    then taken as zero, which makes the quasiparticle transform the identity.
    """

    omega_f: float
    omega_b: float
    kappa: complex

    def __post_init__(self):
        object.__setattr__(self, "omega_f", float(self.omega_f))
        object.__setattr__(self, "omega_b", float(self.omega_b))
        object.__setattr__(self, "kappa", complex(self.kappa))
        if self.delta == 0 and self.kappa == 0:
            raise ValueError("degenerate parameters: detuning and coupling both vanish")

    @property
    def Omega(self) -> float:
        return self.omega_f + self.omega_b

    @property
    def delta(self) -> float:
        return self.omega_f - self.omega_b

    @property
    def theta(self) -> float:
        return cmath.phase(self.kappa) if self.kappa != 0 else 0.0

    @cached_property
    def _mix(self) -> tuple[float, float, float]:
        return _mixing(self.delta, abs(self.kappa))

    @property
    def Delta(self) -> float:
        return self._mix[0]

    @property
    def phi(self) -> float:
        return self._mix[1]

    @property
    def beta(self) -> float:
        return self._mix[2]

    def indexed(self, N: int) -> IndexedParams:
        if N < 1:
            raise ValueError("N must be a positive integer")
        rabi, phi, beta = _mixing(self.delta, math.sqrt(N) * abs(self.kappa))
        return IndexedParams(N, rabi, phi, beta)

    @classmethod
    def resonant(cls, omega: float = 1.0, kappa: complex = 1.0) -> JCParams:
        return cls(omega, omega, kappa)


def derive_params(omega_f: float, omega_b: float, kappa: complex) -> JCParams:
    return JCParams(omega_f, omega_b, kappa)


def default_cutoff(N: int) -> int:
    return max(2 * N, 8)


def fb_modes(cutoff: int) -> tuple:
    return (fermion(), boson(cutoff))


def energy_bands(params: JCParams) -> EnergyPair:
    return EnergyPair(
        (params.Omega + params.Delta) / 2,
        (params.Omega - params.Delta) / 2,
    )


def quasiparticle_weights(params: JCParams) -> tuple[tuple[complex, complex], tuple[complex, complex]]:
    """Creation weights over (f^dagger, b^dagger) for p_+^dagger and p_-^dagger."""
    phase = cmath.exp(1j * params.theta)
    plus = (complex(params.phi), params.beta * phase.conjugate())
    minus = (-params.beta * phase, complex(params.phi))
    return plus, minus


def hamiltonian_apply(state: StateVector, params: JCParams) -> StateVector:
    """H/hbar = w_F f'f + w_B b'b + (k/2) f'b + (k*/2) b'f applied to ``state``."""
    if len(state.modes) != 2 or not state.modes[0].fermionic or state.modes[1].fermionic:
        raise ModeMismatchError("the Hamiltonian acts on (fermion, boson) states")
    f_part = apply_creation(apply_annihilation(state, 0), 0)
    b_part = apply_creation(apply_annihilation(state, 1), 1)
    fb = apply_creation(apply_annihilation(state, 1), 0)
    bf = apply_creation(apply_annihilation(state, 0), 1)
    return (params.omega_f * f_part + params.omega_b * b_part
            + (params.kappa / 2) * fb + (params.kappa.conjugate() / 2) * bf)


def eigenstate(N: int, branch: str, params: JCParams, cutoff: int | None = None) -> StateVector:
    """Dressed eigenstate in the N-excitation sector."""
    _check_branch(branch)
    if N < 1:
        raise ValueError("N must be a positive integer")
    cutoff = default_cutoff(N) if cutoff is None else cutoff
    if cutoff < N:
        raise ValueError(f"boson cutoff {cutoff} too small for N={N}")
    ip = params.indexed(N)
    phase = cmath.exp(1j * params.theta)
    if branch == PLUS:
        amps = {(0, N): ip.beta_N, (1, N - 1): ip.phi_N * phase}
    else:
        amps = {(0, N): ip.phi_N, (1, N - 1): -ip.beta_N * phase}
    return StateVector(fb_modes(cutoff), amps)


def eigenenergy(N: int, branch: str, params: JCParams) -> float:
    _check_branch(branch)
    if N < 1:
        raise ValueError("N must be a positive integer")
    sign = 1 if branch == PLUS else -1
    rabi = params.indexed(N).Delta_N
    return (N * params.Omega - N * params.delta + params.delta + sign * rabi) / 2


def pm_monomial(m: int, n: int, params: JCParams, cutoff: int | None = None,
                rescale: bool = False) -> StateVector:
    """p_+^dagger^m p_-^dagger^n |vac> by operator application.

    With ``rescale`` the state is renormalized after every factor, which keeps
    the ray but stops tiny amplitudes (small phi or beta at large N) from
    falling under the pruning threshold.
    """
    if m < 0 or n < 0:
        raise ValueError("m and n must be nonnegative")
    cutoff = default_cutoff(m + n) if cutoff is None else cutoff
    if cutoff < m + n:
        raise ValueError(f"boson cutoff {cutoff} too small for N={m + n}")
    plus, minus = quasiparticle_weights(params)
    state = vacuum(fb_modes(cutoff))
    for weights in [minus] * n + [plus] * m:
        state = apply_mixed_creation(state, weights)
        if rescale and not state.is_zero:
            state = state.normalize()
    return state


def product_state_pm(m: int, n: int, params: JCParams, cutoff: int | None = None) -> StateVector:
    """Normalized, canonically phased quasiparticle product state |m, n>_pm."""
    state = pm_monomial(m, n, params, cutoff, rescale=True)
    if state.is_zero:
        # only reachable at kappa = 0, where one quasiparticle is a fermion
        raise ValueError(f"p_+^{m} p_-^{n} annihilates the vacuum for these parameters")
    return canonical_phase(state.normalize())


def pm_closed_form(m: int, n: int, params: JCParams, cutoff: int | None = None) -> StateVector:
    """Normalized FB expansion of |m, n>_pm from the ratio formula.

    Requires phi * beta != 0. The |0, N> amplitude is real and positive.
    """
    N = m + n
    cutoff = default_cutoff(N) if cutoff is None else cutoff
    modes = fb_modes(cutoff)
    if N == 0:
        return vacuum(modes)
    phi, beta = params.phi, params.beta
    if phi * beta == 0:
        raise ValueError("closed form needs a nonvanishing coupling")
    ratio = (m * phi**2 - n * beta**2) / (beta * phi * math.sqrt(N))
    norm = math.sqrt(1 + ratio**2)
    return StateVector(modes, {
        (0, N): 1 / norm,
        (1, N - 1): ratio * cmath.exp(1j * params.theta) / norm,
    })


def noon_coefficients(m: int, n: int, params: JCParams) -> tuple[float, float]:
    """Real coefficients (c_N0, c_0N) with |m,n> = c_N0 |N,0> + c_0N |0,N>.

    The two reference states are not orthogonal, so the squares need not
    add up to one. All three states carry the canonical phase.
    """
    if m < 1 or n < 1:
        raise ValueError("both m and n must be positive")
    N = m + n
    p2, b2 = params.phi**2, params.beta**2
    denom = N * p2 * b2 + (m * p2 - n * b2) ** 2
    c_n0 = (m / N) * math.sqrt((N * p2 * b2 + N**2 * p2**2) / denom)
    c_0n = (n / N) * math.sqrt((N * p2 * b2 + N**2 * b2**2) / denom)
    return c_n0, c_0n


def noon_state(psi_0: complex, psi_N: complex, N: int, params: JCParams,
               cutoff: int | None = None) -> StateVector:
    """psi_0 |N,0>_pm + psi_N |0,N>_pm (not renormalized)."""
    return (psi_0 * product_state_pm(N, 0, params, cutoff)
            + psi_N * product_state_pm(0, N, params, cutoff))


def fb_state(n_f: int, n_b: int, cutoff: int | None = None) -> StateVector:
    cutoff = default_cutoff(n_f + n_b) if cutoff is None else cutoff
    return StateVector(fb_modes(cutoff), {(n_f, n_b): 1.0})


__all__ = [
    "BRANCHES", "MINUS", "PLUS", "EnergyPair", "IndexedParams", "JCParams",
    "default_cutoff", "derive_params", "eigenenergy", "eigenstate", "energy_bands",
    "fb_modes", "fb_state", "hamiltonian_apply", "noon_coefficients", "noon_state",
    "pm_closed_form", "pm_monomial", "product_state_pm", "quasiparticle_weights",
]
