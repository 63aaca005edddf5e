"""Linear transforms of 2M modes and the corresponding product states.

Output modes are indexed ``(s, j)`` with ``s`` in ``('+', '-')`` and
``j = 1..M``; row ``k`` of a :class:`ModeMatrix` is output mode
``(+, k+1)`` for ``k < M`` and ``(-, k-M+1)`` otherwise. Rows give
annihilation operators in terms of the input modes, so creation weights are
their complex conjugates.

Product states apply the factor polynomials as
``F(+,1) ... F(+,M) F(-,1) ... F(-,M) |vac>``; with several fermionic input
modes the factors need not commute, and membership is always meant with
respect to this order. Non-unitary matrices are accepted; products are
normalized after construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fock import (
    ModeSpec,
    StateVector,
    apply_mixed_creation,
    apply_polynomial,
    canonical_phase,
    vacuum,
)
from .model import quasiparticle_weights
from .separability import MixedSeparableEnsemble, ZeroProjectionError

UNITARY_TOL = 1e-10


def _check_sign(s: str) -> str:
    if s not in ("+", "-"):
        raise ValueError(f"output mode sign must be '+' or '-', got {s!r}")
    return s


@dataclass(frozen=True)
class ModeMatrix:
    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] % 2:
            raise ValueError(f"mode matrix must be square with even size, got {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def M(self) -> int:
        return self.entries.shape[0] // 2

    @property
    def is_unitary(self) -> bool:
        eye = np.eye(2 * self.M)
        return bool(np.max(np.abs(self.entries @ self.entries.conj().T - eye)) <= UNITARY_TOL)

    def row_index(self, s: str, j: int) -> int:
        _check_sign(s)
        if not 1 <= j <= self.M:
            raise IndexError(f"mode index j={j} outside 1..{self.M}")
        return (j - 1) if s == "+" else (self.M + j - 1)

    @classmethod
    def from_blocks(cls, u_plus_f, u_plus_b, u_minus_f, u_minus_b) -> ModeMatrix:
        blocks = [np.atleast_2d(np.asarray(b, dtype=complex))
                  for b in (u_plus_f, u_plus_b, u_minus_f, u_minus_b)]
        return cls(np.block([blocks[:2], blocks[2:]]))

    @classmethod
    def identity(cls, M: int) -> ModeMatrix:
        return cls(np.eye(2 * M))

    def to_dict(self) -> dict:
        return {"M": self.M,
                "entries": [[float(z.real), float(z.imag)] for z in self.entries.ravel()]}

    @classmethod
    def from_dict(cls, data: dict) -> ModeMatrix:
        M = int(data["M"])
        flat = [complex(re, im) for re, im in data["entries"]]
        if len(flat) != 4 * M * M:
            raise ValueError(f"expected {4 * M * M} entries for M={M}, got {len(flat)}")
        return cls(np.array(flat).reshape(2 * M, 2 * M))


def quasiparticle_matrix(params) -> ModeMatrix:
    """The single fermion/boson eigenmode transform as an M = 1 matrix."""
    plus, minus = quasiparticle_weights(params)
    return ModeMatrix(np.conj([plus, minus]))


def output_mode_weights(matrix: ModeMatrix, s: str, j: int) -> np.ndarray:
    """Row of ``matrix`` expressing p_{s,j} through the input annihilators."""
    return matrix.entries[matrix.row_index(s, j)].copy()


def creation_weights(matrix: ModeMatrix, s: str, j: int) -> np.ndarray:
    return output_mode_weights(matrix, s, j).conj()


def output_order(M: int) -> list[tuple[str, int]]:
    return [("+", j) for j in range(1, M + 1)] + [("-", j) for j in range(1, M + 1)]


@dataclass(frozen=True)
class FactorSpec:
    """Operator-power coefficients, one sequence per output mode in row order."""

    coefficients: tuple[tuple[complex, ...], ...]

    def __post_init__(self):
        coeffs = tuple(tuple(complex(c) for c in seq) for seq in self.coefficients)
        if not coeffs or len(coeffs) % 2:
            raise ValueError("need an even, nonzero number of factors")
        for k, seq in enumerate(coeffs):
            if not any(c != 0 for c in seq):
                raise ValueError(f"factor {k} has no nonzero coefficient")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def M(self) -> int:
        return len(self.coefficients) // 2

    @classmethod
    def monomials(cls, powers: Sequence[int]) -> FactorSpec:
        """One factor ``p^dag^k`` per output mode."""
        return cls(tuple(tuple([0] * k + [1]) for k in powers))

    def to_dict(self) -> dict:
        return {"M": self.M,
                "factors": [[[c.real, c.imag] for c in seq] for seq in self.coefficients]}

    @classmethod
    def from_dict(cls, data: dict) -> FactorSpec:
        return cls(tuple(tuple(complex(re, im) for re, im in seq) for seq in data["factors"]))


def _product_raw(spec: FactorSpec, matrix: ModeMatrix, modes: Sequence[ModeSpec]) -> StateVector:
    """Factor product, renormalized after every creation step (the ray is exact)."""
    if spec.M != matrix.M:
        raise ValueError(f"factor spec has M={spec.M}, matrix has M={matrix.M}")
    if len(modes) != 2 * matrix.M:
        raise ValueError(f"need {2 * matrix.M} modes, got {len(modes)}")
    state = vacuum(modes)
    for row in reversed(range(2 * matrix.M)):
        weights = matrix.entries[row].conj()
        coeffs = spec.coefficients[row]
        powers = [k for k, c in enumerate(coeffs) if c != 0]
        if len(powers) == 1:
            # monomial: repeated single creations, as for the two-mode products
            for _ in range(powers[0]):
                state = apply_mixed_creation(state, weights)
                if not state.is_zero:
                    state = state.normalize()
        else:
            state = apply_polynomial(state, weights, coeffs)
            if not state.is_zero:
                state = state.normalize()
        if state.is_zero:
            break
    return state


def multimode_product_state(spec: FactorSpec, matrix: ModeMatrix,
                            modes: Sequence[ModeSpec]) -> StateVector:
    state = _product_raw(spec, matrix, tuple(modes))
    if state.is_zero:
        raise ZeroProjectionError("the factor product annihilates the vacuum")
    return canonical_phase(state.normalize())


def multimode_separable_mixture(components: Sequence[tuple[float, FactorSpec]],
                                matrix: ModeMatrix,
                                modes: Sequence[ModeSpec]) -> MixedSeparableEnsemble:
    weights = tuple(float(w) for w, _ in components)
    states = tuple(multimode_product_state(spec, matrix, modes) for _, spec in components)
    return MixedSeparableEnsemble(weights, states, tuple(spec for _, spec in components), matrix)


def dumps_matrix(matrix: ModeMatrix) -> str:
    return json.dumps(matrix.to_dict())


def loads_matrix(text: str) -> ModeMatrix:
    return ModeMatrix.from_dict(json.loads(text))
