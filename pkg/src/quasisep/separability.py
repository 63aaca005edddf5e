"""Separability of states over dependent degrees of freedom.

A pure state is nonentangled when it equals a projected product
``P (|x> (x) |y>)`` for some local vectors ``x`` and ``y``, where ``P`` is a
diagonal projector encoding a physical constraint. Two constraint families
are supported:

* :class:`Constraint`, an explicit 0/1 predicate on a product label basis
  (angular momentum labels, the bosonic truncation projector, ...);
* :class:`~quasisep.model.JCParams`, the quasiparticle picture, where
  ``x`` and ``y`` are number-basis coefficients for the two eigenmodes and the
  product is ``sum_ab x_a y_b p_+^dag^a p_-^dag^b / sqrt(a! b!) |vac>``.

Only the finite enumeration in the fixed-N test ever declares a state
entangled. The bilinear solver reports ``inconclusive`` when it cannot find a
witness.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Hashable, Sequence

import numpy as np

from .fock import (
    StateVector,
    boson,
    full_basis,
    phase_distance,
)
from .model import (
    BRANCHES,
    MINUS,
    PLUS,
    JCParams,
    eigenstate,
    fb_modes,
    quasiparticle_weights,
)

RATIO_TOL = 1e-9
BILINEAR_TOL = 1e-9
DEFAULT_RESTARTS = 32
DEFAULT_MAX_ITER = 500
DEFAULT_LM_ITER = 100
CONVERGENCE_TOL = 1e-12
WEIGHT_TOL = 1e-12
AXIS_SPREAD = 0.1


class Status(str, Enum):
    SEPARABLE = "separable"
    ENTANGLED = "entangled"
    INCONCLUSIVE = "inconclusive"


class Method(str, Enum):
    CLOSED_FORM_FIXED_N = "closed_form_fixed_N"
    FACTORIZATION_CONDITION = "condition_eq25"
    BILINEAR = "bilinear"


class ZeroProjectionError(ValueError):
    """The projector annihilates the requested product."""


@dataclass(frozen=True)
class Constraint:
    """Diagonal projector on a two-factor label basis.

    Index ``(i, k)`` of the product basis corresponds to the label pair
    ``(left_labels[i], right_labels[k])``. States on this basis are stored as
    two bosonic modes whose occupation is the label index.
    """

    left_labels: tuple[Hashable, ...]
    right_labels: tuple[Hashable, ...]
    keep: Callable[[Any, Any], bool]
    name: str = "custom"

    @property
    def left_dim(self) -> int:
        return len(self.left_labels)

    @property
    def right_dim(self) -> int:
        return len(self.right_labels)

    @property
    def mask(self) -> np.ndarray:
        return np.array([[bool(self.keep(l, r)) for r in self.right_labels]
                         for l in self.left_labels])

    @property
    def modes(self) -> tuple:
        return (boson(self.left_dim - 1), boson(self.right_dim - 1))

    def keeps(self, i: int, k: int) -> bool:
        return bool(self.keep(self.left_labels[i], self.right_labels[k]))

    def project(self, state: StateVector) -> StateVector:
        return StateVector(state.modes, {
            ket: amp for ket, amp in state.amplitudes.items() if self.keeps(*ket)
        })

    def state_from_labels(self, amplitudes: dict) -> StateVector:
        """Build a state from ``{(left_label, right_label): amplitude}``."""
        li = {l: i for i, l in enumerate(self.left_labels)}
        ri = {r: i for i, r in enumerate(self.right_labels)}
        return StateVector(self.modes, {(li[l], ri[r]): a for (l, r), a in amplitudes.items()})

    def coefficient_matrix(self, state: StateVector) -> np.ndarray:
        out = np.zeros((self.left_dim, self.right_dim), dtype=complex)
        for (i, k), amp in state.amplitudes.items():
            out[i, k] = amp
        return out


def all_pass(left_dim: int, right_dim: int) -> Constraint:
    return Constraint(tuple(range(left_dim)), tuple(range(right_dim)),
                      lambda l, r: True, name="identity")


def angular_momentum_constraint(j_max: float, half_integer: bool = False) -> Constraint:
    """Keep ``(j, m)`` only when ``j >= 0`` and ``-j <= m <= j``.

    Labels run over ``0 .. j_max`` for ``j`` and ``-j_max .. j_max`` for ``m``
    with step 1, or step 1/2 when ``half_integer`` is set.
    """
    if j_max < 0:
        raise ValueError("j_max must be nonnegative")
    step = 0.5 if half_integer else 1.0
    steps = int(round(j_max / step))
    if not math.isclose(steps * step, j_max):
        raise ValueError(f"j_max={j_max} is not on the grid with step {step}")
    js = tuple(step * k for k in range(steps + 1))
    ms = tuple(step * k for k in range(-steps, steps + 1))
    return Constraint(js, ms, lambda j, m: j >= 0 and -j <= m <= j,
                      name="angular_momentum")


def _as_vector(v: Sequence[complex], dim: int, what: str) -> np.ndarray:
    arr = np.asarray(v, dtype=complex).ravel()
    if arr.shape != (dim,):
        raise ValueError(f"{what} has length {arr.size}, expected {dim}")
    return arr


def projected_product(x: Sequence[complex], y: Sequence[complex],
                      constraint: Constraint) -> StateVector:
    """Normalized ``P(|x> (x) |y>)``."""
    x = _as_vector(x, constraint.left_dim, "x")
    y = _as_vector(y, constraint.right_dim, "y")
    coeffs = np.outer(x, y) * constraint.mask
    state = StateVector(constraint.modes, {
        (i, k): coeffs[i, k] for i, k in zip(*np.nonzero(coeffs))
    })
    if state.norm == 0:
        raise ZeroProjectionError("the projection annihilates the product")
    return state.normalize()


def _pm_dictionary(params: JCParams, left_degree: int, right_degree: int,
                   cutoff: int) -> np.ndarray:
    """Dense ``p_+^dag^a p_-^dag^b / sqrt(a! b!) |vac>`` as V[a, b, n_f, n_b].

    Built densely so no amplitude is pruned; the fermion is the first mode,
    so creation operators pick up no Jordan-Wigner sign here.
    """
    plus, minus = quasiparticle_weights(params)
    ladder = np.sqrt(np.arange(1, cutoff + 1))

    def create(C, w, k):
        new = np.zeros_like(C)
        new[1, :] += w[0] * C[0, :]
        new[:, 1:] += w[1] * ladder[None, :] * C[:, :-1]
        return new / math.sqrt(k)

    V = np.zeros((left_degree + 1, right_degree + 1, 2, cutoff + 1), dtype=complex)
    column = np.zeros((2, cutoff + 1), dtype=complex)
    column[0, 0] = 1.0
    for b in range(right_degree + 1):
        if b:
            column = create(column, minus, b)
        row = column
        for a in range(left_degree + 1):
            if a:
                row = create(row, plus, a)
            V[a, b] = row
    return V


def pm_product(x: Sequence[complex], y: Sequence[complex], params: JCParams,
               cutoff: int | None = None) -> StateVector:
    """Normalized quasiparticle product with number-basis coefficients.

    Equivalent to ``P (|x>_+ (x) |y>_-)`` with the truncation projector of the
    two-boson embedding. Exact when ``cutoff >= len(x) + len(y) - 2``.
    """
    x = np.asarray(x, dtype=complex).ravel()
    y = np.asarray(y, dtype=complex).ravel()
    L, R = len(x) - 1, len(y) - 1
    cutoff = max(L + R, 1) if cutoff is None else cutoff
    coeffs = np.einsum("a,b,abfk->fk", x, y, _pm_dictionary(params, L, R, cutoff))
    norm = np.linalg.norm(coeffs)
    if norm == 0:
        raise ZeroProjectionError("the quasiparticle product vanishes")
    coeffs = coeffs / norm
    return StateVector(fb_modes(cutoff), {
        (f, k): coeffs[f, k] for f, k in zip(*np.nonzero(coeffs))
    })


@dataclass
class SeparabilityVerdict:
    status: Status
    method: Method
    residual: float
    witness: dict | None = None
    witnesses: list[tuple[int, int]] = field(default_factory=list)

    @property
    def separable(self) -> bool:
        return self.status is Status.SEPARABLE

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"status": self.status.value, "method": self.method.value}
        if self.witness is not None:
            out["witness"] = self.witness
        if len(self.witnesses) > 1:
            out["witnesses"] = [{"m": m, "n": n} for m, n in self.witnesses]
        out["residual"] = self.residual
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _sector_candidates(N: int, params: JCParams) -> list[tuple[int, complex, complex]]:
    """(m, A_m, C_m) with p_+^m p_-^n |vac> proportional to A|0,N> + C|1,N-1>.

    Common factors e^{-i m theta} sqrt((N-1)!) are dropped. Monomials that
    vanish (only possible without coupling) are omitted.
    """
    phi, beta = params.phi, params.beta
    phase = np.exp(1j * params.theta)
    out = []
    for m in range(N + 1):
        n = N - m
        a = beta**m * phi**n * math.sqrt(N)
        c = 0.0
        if m:
            c += m * phi ** (n + 1) * beta ** (m - 1)
        if n:
            c -= n * beta ** (m + 1) * phi ** (n - 1)
        if a != 0 or c != 0:
            out.append((m, complex(a), c * phase))
    return out


def _projective_sine(a: complex, c: complex, A: complex, C: complex) -> float:
    """Sine of the angle between the rays of (a, c) and (A, C)."""
    return abs(a * C - c * A) / (math.hypot(abs(a), abs(c)) * math.hypot(abs(A), abs(C)))


def _sector_of(state: StateVector) -> int:
    if len(state.modes) != 2 or not state.modes[0].fermionic or state.modes[1].fermionic:
        raise ValueError("fixed-N test needs a (fermion, boson) state")
    if state.is_zero:
        raise ValueError("the zero state has no separability verdict")
    sectors = state.total_numbers()
    if len(sectors) != 1:
        raise ValueError(f"state spans sectors {sorted(sectors)}; use the bilinear method")
    (N,) = sectors
    if N < 1:
        raise ValueError("the vacuum sector is trivially separable; N must be >= 1")
    return N


def separability_fixed_N(state: StateVector, params: JCParams,
                         tol: float = RATIO_TOL) -> SeparabilityVerdict:
    """Exact test for a state confined to one excitation sector.

    The sector is two dimensional, so the state is a product exactly when its
    ray coincides with one of the N + 1 rays of |m, N - m>_pm.
    """
    N = _sector_of(state)
    a, c = state[(0, N)], state[(1, N - 1)]
    target = state.normalize()
    matches = []
    best = math.inf
    for m, A, C in _sector_candidates(N, params):
        cand = StateVector(state.modes, {(0, N): A, (1, N - 1): C}).normalize()
        dist = phase_distance(target, cand)
        if _projective_sine(a, c, A, C) <= tol:
            matches.append(((m, N - m), dist))
        best = min(best, dist)
    if matches:
        witnesses = [w for w, _ in matches]
        m, n = witnesses[0]
        return SeparabilityVerdict(Status.SEPARABLE, Method.CLOSED_FORM_FIXED_N,
                                   min(d for _, d in matches), {"m": m, "n": n}, witnesses)
    return SeparabilityVerdict(Status.ENTANGLED, Method.CLOSED_FORM_FIXED_N, best)


def eigenstate_factorization_conditions(N: int, params: JCParams, branch: str | None = None,
                                        tol: float = RATIO_TOL) -> list[tuple[int, int]]:
    """Pairs (m, n), m + n = N, for which a dressed eigenstate is a product.

    With ``branch=None`` both eigenstates of the sector are checked and the
    union is returned. An empty list means the requested eigenstate(s) are
    entangled in the quasiparticle picture.
    """
    if N < 1:
        raise ValueError("N must be a positive integer")
    branches = BRANCHES if branch is None else (branch,)
    ip = params.indexed(N)
    phase = np.exp(1j * params.theta)
    found = set()
    for br in branches:
        if br == PLUS:
            a, c = ip.beta_N, ip.phi_N * phase
        elif br == MINUS:
            a, c = ip.phi_N, -ip.beta_N * phase
        else:
            raise ValueError(f"unknown branch {br!r}")
        for m, A, C in _sector_candidates(N, params):
            if _projective_sine(a, c, A, C) <= tol:
                found.add((m, N - m))
    return sorted(found, reverse=True)


def eigenstate_verdict(N: int, branch: str, params: JCParams,
                       tol: float = RATIO_TOL) -> SeparabilityVerdict:
    """Verdict for a dressed eigenstate from the factorization conditions."""
    pairs = eigenstate_factorization_conditions(N, params, branch, tol)
    state = eigenstate(N, branch, params)
    exact = separability_fixed_N(state, params, tol)
    if pairs:
        m, n = pairs[0]
        return SeparabilityVerdict(Status.SEPARABLE, Method.FACTORIZATION_CONDITION, exact.residual,
                                   {"m": m, "n": n}, pairs)
    return SeparabilityVerdict(Status.ENTANGLED, Method.FACTORIZATION_CONDITION, exact.residual)


def _dictionary(state: StateVector, left_degree: int | None, right_degree: int | None,
                params_or_constraint) -> tuple[np.ndarray, list]:
    """Dense tensor V[a, b, :] with product(x, y) = sum_ab x_a y_b V[a, b]."""
    basis = full_basis(state.modes)
    if isinstance(params_or_constraint, Constraint):
        con = params_or_constraint
        if state.modes != con.modes:
            raise ValueError("state modes do not match the constraint basis")
        L = con.left_dim - 1 if left_degree is None else left_degree
        R = con.right_dim - 1 if right_degree is None else right_degree
        if L >= con.left_dim or R >= con.right_dim:
            raise ValueError("degree bounds exceed the constraint dimensions")
        index = {k: i for i, k in enumerate(basis)}
        V = np.zeros((L + 1, R + 1, len(basis)), dtype=complex)
        for a in range(L + 1):
            for b in range(R + 1):
                if con.keeps(a, b):
                    V[a, b, index[(a, b)]] = 1.0
        return V, basis
    params = params_or_constraint
    if len(state.modes) != 2 or not state.modes[0].fermionic:
        raise ValueError("quasiparticle products need a (fermion, boson) state")
    cutoff = state.modes[1].cutoff
    top = max(state.total_numbers())
    L = top if left_degree is None else left_degree
    R = top if right_degree is None else right_degree
    if L + R > cutoff:
        raise ValueError(f"degrees ({L}, {R}) exceed boson cutoff {cutoff}")
    V = _pm_dictionary(params, L, R, cutoff).reshape(L + 1, R + 1, -1)
    return V, basis


def _lstsq_batched(W: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Minimize ||W[k] z - target|| for each k of a (K, D, P) stack."""
    return np.einsum("kpd,d->kp", np.linalg.pinv(W), target)


def _residuals(W: np.ndarray, z: np.ndarray, target: np.ndarray) -> np.ndarray:
    return np.linalg.norm(target[None, :] - np.einsum("kdp,kp->kd", W, z), axis=1)


def separability_bilinear(state: StateVector, left_degree: int | None = None,
                          right_degree: int | None = None, params_or_constraint=None,
                          tol: float = BILINEAR_TOL, restarts: int = DEFAULT_RESTARTS,
                          seed: int = 0, max_iter: int = DEFAULT_MAX_ITER) -> SeparabilityVerdict:
    """Search for a projected-product witness by alternating least squares.

    Each restart starts from a complex Gaussian ``x`` (every other one
    concentrated around a coordinate axis), then alternately solves the linear
    least-squares problems for ``y`` (``x`` fixed) and ``x`` (``y`` fixed) in
    an equilibrated metric, followed by a damped Gauss-Newton polish. All
    restarts run as one batch; the best one wins, ties going to the lowest
    restart index. Never returns ``entangled``.
    """
    if params_or_constraint is None:
        raise ValueError("need JCParams or a Constraint")
    if state.is_zero:
        raise ValueError("the zero state has no separability verdict")
    if restarts < 1:
        raise ValueError("need at least one restart")
    V, basis = _dictionary(state, left_degree, right_degree, params_or_constraint)
    target = state.normalize().to_dense(basis)
    rows = np.flatnonzero(np.any(V != 0, axis=(0, 1)) | (target != 0))
    V, target = V[:, :, rows], target[rows]

    # search in an equilibrated metric; zero-residual fits are unaffected
    g, h, r = _equilibrate(V)
    Vs = V * g[:, None, None] * h[None, :, None] * r[None, None, :]
    ts = target * r

    rng = np.random.default_rng(seed)
    K, P, Q = restarts, V.shape[0], V.shape[1]
    x = (rng.standard_normal((K, P)) + 1j * rng.standard_normal((K, P))) / math.sqrt(2)
    # even restarts: small draws around a coordinate axis (monomial-like basins)
    even = np.arange(0, K, 2)
    x[even] *= AXIS_SPREAD
    x[even, (even // 2) % P] += 1.0
    y = np.zeros((K, Q), dtype=complex)
    res = np.full(K, np.inf)
    active = np.ones(K, dtype=bool)
    floor = tol * 1e-3
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        Wy = np.einsum("ka,abd->kdb", x[idx], Vs)
        y[idx] = _lstsq_batched(Wy, ts)
        Wx = np.einsum("kb,abd->kda", y[idx], Vs)
        xi = _lstsq_batched(Wx, ts)
        new = _residuals(Wx, xi, ts)
        scale = np.linalg.norm(xi, axis=1)
        scale[scale == 0] = 1.0
        x[idx] = xi / scale[:, None]
        y[idx] = y[idx] * scale[:, None]
        done = (res[idx] - new < CONVERGENCE_TOL) | (new <= floor)
        res[idx] = np.minimum(res[idx], new)
        active[idx[done]] = False

    x, y = _lm_polish(x, y, Vs, ts, floor)
    x, y = _lm_polish(x * g, y * h, V, target, floor)

    # stable argmin: first index among the minima
    order = sorted(range(K), key=lambda k: (_final_residual(x[k], y[k], V, target), k))
    best = order[0]
    residual = _final_residual(x[best], y[best], V, target)
    witness = {"x": _pairs(x[best]), "y": _pairs(y[best])}
    status = Status.SEPARABLE if residual <= tol else Status.INCONCLUSIVE
    return SeparabilityVerdict(status, Method.BILINEAR, residual, witness)


def _equilibrate(V: np.ndarray, sweeps: int = 3) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Positive column scales (g, h) and row weights r balancing |V| entries."""
    P, Q, D = V.shape
    g, h, r = np.ones(P), np.ones(Q), np.ones(D)
    mag = np.abs(V)
    for _ in range(sweeps):
        cur = mag * g[:, None, None] * h[None, :, None]
        peak = cur.max(axis=(0, 1))
        r = np.where(peak > 0, 1 / np.where(peak > 0, peak, 1), 1.0)
        cur = mag * r[None, None, :] * h[None, :, None]
        peak = cur.max(axis=(1, 2))
        g = np.where(peak > 0, 1 / np.where(peak > 0, peak, 1), 1.0)
        cur = mag * r[None, None, :] * g[:, None, None]
        peak = cur.max(axis=(0, 2))
        h = np.where(peak > 0, 1 / np.where(peak > 0, peak, 1), 1.0)
    return g, h, r


def _lm_polish(x: np.ndarray, y: np.ndarray, V: np.ndarray, target: np.ndarray,
               floor: float, iters: int = DEFAULT_LM_ITER) -> tuple[np.ndarray, np.ndarray]:
    """Damped Gauss-Newton on the joint (x, y) for every restart.

    ALS crawls along the flat valleys that appear when the witness is sparse;
    the joint step moves both factors at once and converges fast there.
    """
    K, P = x.shape
    z = np.concatenate([x, y], axis=1)
    lam = np.full(K, 1e-3)

    def residual(z):
        return np.einsum("ka,kb,abd->kd", z[:, :P], z[:, P:], V) - target[None, :]

    f = residual(z)
    cost = np.linalg.norm(f, axis=1)
    eye = np.eye(z.shape[1])
    for _ in range(iters):
        live = cost > floor
        if not live.any():
            break
        Wx = np.einsum("kb,abd->kda", z[:, P:], V)
        Wy = np.einsum("ka,abd->kdb", z[:, :P], V)
        J = np.concatenate([Wx, Wy], axis=2)
        JH = J.conj().transpose(0, 2, 1)
        A = JH @ J
        scale = np.einsum("kii->ki", A).real.max(axis=1)
        A = A + (lam * np.maximum(scale, 1e-30))[:, None, None] * eye
        g = np.einsum("kpd,kd->kp", JH, f)
        step = np.linalg.solve(A, -g[..., None])[..., 0]
        trial = z + step
        f_new = residual(trial)
        cost_new = np.linalg.norm(f_new, axis=1)
        accept = live & (cost_new < cost)
        z[accept], f[accept], cost[accept] = trial[accept], f_new[accept], cost_new[accept]
        lam = np.where(accept, np.maximum(lam / 3, 1e-12), np.minimum(lam * 4, 1e8))
    return z[:, :P], z[:, P:]


def _final_residual(x: np.ndarray, y: np.ndarray, V: np.ndarray, target: np.ndarray) -> float:
    """Phase-aligned distance between target and the normalized product."""
    fit = np.einsum("a,b,abd->d", x, y, V)
    norm = np.linalg.norm(fit)
    if norm == 0:
        return float(np.linalg.norm(target))
    fit = fit / norm
    overlap = np.vdot(fit, target)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(target - phase * fit))


def _pairs(v: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in v]


def witness_vectors(verdict: SeparabilityVerdict) -> tuple[np.ndarray, np.ndarray]:
    """(x, y) from a bilinear verdict's witness."""
    if verdict.witness is None or "x" not in verdict.witness:
        raise ValueError("verdict carries no factor witness")
    to = lambda pairs: np.array([complex(re, im) for re, im in pairs])
    return to(verdict.witness["x"]), to(verdict.witness["y"])


@dataclass(frozen=True)
class MixedSeparableEnsemble:
    """Finite convex mixture of pure projected products."""

    weights: tuple[float, ...]
    states: tuple[StateVector, ...]
    factors: tuple = ()
    constraint: Any = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(self.weights) != len(self.states) or not len(self.states):
            raise ValueError("need one weight per component and at least one component")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if abs(w.sum() - 1) > WEIGHT_TOL:
            raise ValueError(f"weights sum to {w.sum()}, not 1")
        modes = self.states[0].modes
        if any(s.modes != modes for s in self.states):
            raise ValueError("all components must share one mode list")

    @property
    def modes(self):
        return self.states[0].modes

    def density_matrix(self, basis=None) -> np.ndarray:
        basis = full_basis(self.modes) if basis is None else basis
        rho = np.zeros((len(basis), len(basis)), dtype=complex)
        for w, s in zip(self.weights, self.states):
            v = s.to_dense(basis)
            rho += w * np.outer(v, v.conj())
        return rho


def separable_mixture(components: Sequence[tuple[float, Sequence[complex], Sequence[complex]]],
                      constraint, cutoff: int | None = None) -> MixedSeparableEnsemble:
    """Mixture of projected products; ``constraint`` is a Constraint or JCParams."""
    weights, states, factors = [], [], []
    if not isinstance(constraint, Constraint) and cutoff is None:
        cutoff = max(len(x) + len(y) - 2 for _, x, y in components)
        cutoff = max(cutoff, 1)
    for w, x, y in components:
        if isinstance(constraint, Constraint):
            states.append(projected_product(x, y, constraint))
        else:
            states.append(pm_product(x, y, constraint, cutoff))
        weights.append(float(w))
        factors.append((tuple(np.asarray(x, complex)), tuple(np.asarray(y, complex))))
    return MixedSeparableEnsemble(tuple(weights), tuple(states), tuple(factors), constraint)
