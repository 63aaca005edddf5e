"""Sparse state vectors over mixed fermionic/bosonic occupation bases.

A state is an immutable map from occupation tuples to complex amplitudes.
Fermionic modes carry a Jordan-Wigner sign counted over the fermionic modes
that precede the acted-on mode; by convention fermionic modes are listed
before bosonic ones. Bosonic modes are truncated at their cutoff: kets that
would exceed it are dropped, so any result whose total excitation number
stays at or below every cutoff is exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

PRUNE_TOL = 1e-14
NORMALIZED_TOL = 1e-12

Ket = tuple[int, ...]


class ModeKind(str, Enum):
    FERMIONIC = "fermionic"
    BOSONIC = "bosonic"


@dataclass(frozen=True)
class ModeSpec:
    kind: ModeKind
    cutoff: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", ModeKind(self.kind))
        if self.cutoff < 0:
            raise ValueError(f"cutoff must be nonnegative, got {self.cutoff}")
        if self.kind is ModeKind.FERMIONIC and self.cutoff != 1:
            raise ValueError("fermionic modes always have cutoff 1")

    @property
    def fermionic(self) -> bool:
        return self.kind is ModeKind.FERMIONIC


def fermion() -> ModeSpec:
    return ModeSpec(ModeKind.FERMIONIC, 1)


def boson(cutoff: int) -> ModeSpec:
    return ModeSpec(ModeKind.BOSONIC, cutoff)


class ModeMismatchError(ValueError):
    """Raised when two states (or a state and an operator) disagree on modes."""


@dataclass(frozen=True)
class StateVector:
    """Immutable sparse state vector.

    ``amplitudes`` maps occupation tuples to complex amplitudes. Entries with
    modulus at or below ``PRUNE_TOL`` are removed on construction.
    """

    modes: tuple[ModeSpec, ...]
    amplitudes: Mapping[Ket, complex] = field(default_factory=dict)

    # numpy scalars must defer to __rmul__ instead of iterating the state
    __array_ufunc__ = None

    def __post_init__(self):
        modes = tuple(self.modes)
        if not modes:
            raise ValueError("a state needs at least one mode")
        cleaned: dict[Ket, complex] = {}
        for ket, amp in self.amplitudes.items():
            ket = tuple(int(k) for k in ket)
            _check_ket(ket, modes)
            amp = complex(amp)
            if abs(amp) > PRUNE_TOL:
                cleaned[ket] = amp
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "amplitudes", dict(sorted(cleaned.items())))

    def __add__(self, other: StateVector) -> StateVector:
        _require_same_modes(self, other)
        out = dict(self.amplitudes)
        for ket, amp in other.amplitudes.items():
            out[ket] = out.get(ket, 0) + amp
        return StateVector(self.modes, out)

    def __sub__(self, other: StateVector) -> StateVector:
        return self + (-1) * other

    def __mul__(self, scalar: complex) -> StateVector:
        return StateVector(self.modes, {k: scalar * a for k, a in self.amplitudes.items()})

    __rmul__ = __mul__

    def __neg__(self) -> StateVector:
        return -1 * self

    def __len__(self) -> int:
        return len(self.amplitudes)

    def __getitem__(self, ket: Sequence[int]) -> complex:
        return self.amplitudes.get(tuple(ket), 0j)

    @property
    def is_zero(self) -> bool:
        return not self.amplitudes

    @property
    def norm_squared(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    @property
    def norm(self) -> float:
        return math.sqrt(self.norm_squared)

    @property
    def normalized(self) -> bool:
        return abs(self.norm_squared - 1) <= NORMALIZED_TOL

    def normalize(self) -> StateVector:
        n = self.norm
        if n == 0:
            raise ZeroDivisionError("cannot normalize the zero state")
        return self * (1 / n)

    def total_numbers(self) -> set[int]:
        return {sum(k) for k in self.amplitudes}

    def basis(self) -> list[Ket]:
        """All kets allowed by the mode cutoffs, in lexicographic order."""
        return full_basis(self.modes)

    def to_dense(self, basis: Sequence[Ket] | None = None) -> np.ndarray:
        basis = self.basis() if basis is None else basis
        index = {k: i for i, k in enumerate(basis)}
        vec = np.zeros(len(basis), dtype=complex)
        for ket, amp in self.amplitudes.items():
            vec[index[ket]] = amp
        return vec

    @classmethod
    def from_dense(cls, modes: Sequence[ModeSpec], vec: Iterable[complex],
                   basis: Sequence[Ket] | None = None) -> StateVector:
        basis = full_basis(modes) if basis is None else basis
        return cls(tuple(modes), dict(zip(basis, vec)))

    def with_modes(self, modes: Sequence[ModeSpec]) -> StateVector:
        """Re-embed the same amplitudes in a different (compatible) mode list."""
        return StateVector(tuple(modes), self.amplitudes)

    # JSON state file format

    def to_dict(self) -> dict:
        return {
            "modes": [{"kind": m.kind.value, "cutoff": m.cutoff} for m in self.modes],
            "amplitudes": [
                {"occ": list(k), "re": a.real, "im": a.imag}
                for k, a in self.amplitudes.items()
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> StateVector:
        modes = tuple(ModeSpec(ModeKind(m["kind"]), int(m["cutoff"])) for m in data["modes"])
        amps: dict[Ket, complex] = {}
        for entry in data["amplitudes"]:
            ket = tuple(int(o) for o in entry["occ"])
            if ket in amps:
                raise ValueError(f"duplicate ket {ket}")
            amps[ket] = complex(float(entry["re"]), float(entry.get("im", 0.0)))
        return cls(modes, amps)

    def dumps(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def loads(cls, text: str) -> StateVector:
        return cls.from_dict(json.loads(text))


def _check_ket(ket: Ket, modes: Sequence[ModeSpec]) -> None:
    if len(ket) != len(modes):
        raise ValueError(f"ket {ket} has {len(ket)} entries for {len(modes)} modes")
    for occ, mode in zip(ket, modes):
        if occ < 0 or occ > mode.cutoff:
            raise ValueError(f"ket {ket} violates cutoff {mode.cutoff}")


def _require_same_modes(a: StateVector, b: StateVector) -> None:
    if a.modes != b.modes:
        raise ModeMismatchError("states live on different mode lists")


def _check_mode_index(state: StateVector, mode_index: int) -> None:
    if not 0 <= mode_index < len(state.modes):
        raise IndexError(f"mode index {mode_index} out of range for {len(state.modes)} modes")


def full_basis(modes: Sequence[ModeSpec]) -> list[Ket]:
    return [tuple(int(i) for i in k) for k in np.ndindex(*(m.cutoff + 1 for m in modes))]


def vacuum(modes: Sequence[ModeSpec]) -> StateVector:
    modes = tuple(modes)
    if not modes:
        raise ValueError("a state needs at least one mode")
    return StateVector(modes, {(0,) * len(modes): 1.0})


def zero(modes: Sequence[ModeSpec]) -> StateVector:
    return StateVector(tuple(modes), {})


def basis_state(modes: Sequence[ModeSpec], occupations: Sequence[int]) -> StateVector:
    """Normalized Fock basis ket |n_1, ..., n_k>."""
    return StateVector(tuple(modes), {tuple(occupations): 1.0})


def _jw_sign(ket: Ket, modes: Sequence[ModeSpec], mode_index: int) -> int:
    parity = sum(ket[j] for j in range(mode_index) if modes[j].fermionic)
    return -1 if parity % 2 else 1


def apply_creation(state: StateVector, mode_index: int) -> StateVector:
    _check_mode_index(state, mode_index)
    mode = state.modes[mode_index]
    out: dict[Ket, complex] = {}
    for ket, amp in state.amplitudes.items():
        n = ket[mode_index]
        if n + 1 > mode.cutoff:
            continue
        new = ket[:mode_index] + (n + 1,) + ket[mode_index + 1:]
        if mode.fermionic:
            factor = _jw_sign(ket, state.modes, mode_index)
        else:
            factor = math.sqrt(n + 1)
        out[new] = out.get(new, 0) + factor * amp
    return StateVector(state.modes, out)


def apply_annihilation(state: StateVector, mode_index: int) -> StateVector:
    _check_mode_index(state, mode_index)
    mode = state.modes[mode_index]
    out: dict[Ket, complex] = {}
    for ket, amp in state.amplitudes.items():
        n = ket[mode_index]
        if n == 0:
            continue
        new = ket[:mode_index] + (n - 1,) + ket[mode_index + 1:]
        if mode.fermionic:
            factor = _jw_sign(ket, state.modes, mode_index)
        else:
            factor = math.sqrt(n)
        out[new] = out.get(new, 0) + factor * amp
    return StateVector(state.modes, out)


def apply_number(state: StateVector, mode_index: int) -> StateVector:
    _check_mode_index(state, mode_index)
    return StateVector(
        state.modes,
        {k: k[mode_index] * a for k, a in state.amplitudes.items()},
    )


def apply_mixed_creation(state: StateVector, weights: Sequence[complex]) -> StateVector:
    """Apply ``sum_j weights[j] * a_j^dagger`` once."""
    if len(weights) != len(state.modes):
        raise ValueError(f"expected {len(state.modes)} weights, got {len(weights)}")
    out = zero(state.modes)
    for j, w in enumerate(weights):
        if w != 0:
            out = out + complex(w) * apply_creation(state, j)
    return out


def apply_mixed_annihilation(state: StateVector, weights: Sequence[complex]) -> StateVector:
    """Apply ``sum_j weights[j] * a_j`` once."""
    if len(weights) != len(state.modes):
        raise ValueError(f"expected {len(state.modes)} weights, got {len(weights)}")
    out = zero(state.modes)
    for j, w in enumerate(weights):
        if w != 0:
            out = out + complex(w) * apply_annihilation(state, j)
    return out


def apply_polynomial(state: StateVector, weights: Sequence[complex],
                     coefficients: Sequence[complex]) -> StateVector:
    """Apply ``sum_k coefficients[k] * (sum_j weights[j] a_j^dagger)^k``."""
    term = state
    out = complex(coefficients[0]) * state if len(coefficients) else zero(state.modes)
    for c in coefficients[1:]:
        term = apply_mixed_creation(term, weights)
        if c != 0:
            out = out + complex(c) * term
    return out


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b>, antilinear in ``a``."""
    _require_same_modes(a, b)
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    total = 0j
    for ket in small.amplitudes:
        if ket in large.amplitudes:
            total += a.amplitudes[ket].conjugate() * b.amplitudes[ket]
    return total


def distance(a: StateVector, b: StateVector) -> float:
    """||a - b|| from the stored amplitudes, without pruning the difference."""
    _require_same_modes(a, b)
    kets = set(a.amplitudes) | set(b.amplitudes)
    return math.sqrt(sum(abs(a[k] - b[k]) ** 2 for k in kets))


def canonical_phase(state: StateVector) -> StateVector:
    """Rotate the global phase so the first (lexicographic) ket is real positive."""
    if state.is_zero:
        raise ValueError("the zero state has no phase")
    first = next(iter(state.amplitudes.values()))
    return state * (abs(first) / first)


def phase_distance(a: StateVector, b: StateVector) -> float:
    """min over global phases of ||a - e^{i t} b||, computed elementwise."""
    overlap = inner_product(b, a)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return distance(a, phase * b)


def fixed_number_sector(state: StateVector, total: int) -> StateVector:
    if total < 0:
        raise ValueError("sector index must be nonnegative")
    return StateVector(
        state.modes,
        {k: a for k, a in state.amplitudes.items() if sum(k) == total},
    )


def load_state(path) -> StateVector:
    with open(path) as fh:
        return StateVector.from_dict(json.load(fh))


def save_state(state: StateVector, path) -> None:
    with open(path, "w") as fh:
        json.dump(state.to_dict(), fh, indent=1)
        fh.write("\n")
