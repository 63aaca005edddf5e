"""Two-fermion, two-boson and fermion-boson quasiparticle pictures side by side.

All pictures use two modes ordered (constrained/first mode, second mode), so
a bosonic first mode truncated to occupations {0, 1} lines up positionally
with the fermionic mode of the quasiparticle picture.
"""

from __future__ import annotations

import csv
import io
import math
from enum import Enum

import numpy as np

from .fock import (
    StateVector,
    apply_annihilation,
    apply_mixed_creation,
    boson,
    canonical_phase,
    distance,
    fermion,
    vacuum,
)
from .model import JCParams, default_cutoff, fb_modes, product_state_pm, quasiparticle_weights
from .separability import Constraint

SQRT_HALF = 1 / math.sqrt(2)


class Picture(str, Enum):
    FF = "FF"
    BB = "BB"
    FB_QUASI = "FB_quasi"


def _picture(kind) -> Picture:
    return kind if isinstance(kind, Picture) else Picture(kind)


def picture_modes(kind, cutoff: int) -> tuple:
    kind = _picture(kind)
    if kind is Picture.FF:
        return (fermion(), fermion())
    if kind is Picture.BB:
        return (boson(cutoff), boson(cutoff))
    return fb_modes(cutoff)


def plus_minus_modes(kind) -> tuple[tuple[complex, complex], tuple[complex, complex]]:
    """Balanced creation weights at zero detuning and zero coupling phase."""
    kind = _picture(kind)
    if kind is Picture.FB_QUASI:
        return quasiparticle_weights(JCParams.resonant())
    return (SQRT_HALF, SQRT_HALF), (SQRT_HALF, -SQRT_HALF)


def _raw_pm_state(plus, minus, modes, m: int, n: int) -> StateVector:
    state = vacuum(modes)
    for weights in [minus] * n + [plus] * m:
        state = apply_mixed_creation(state, weights)
    return state


def pm_number_state(kind, m: int, n: int, cutoff: int | None = None) -> StateVector:
    """|m, n>_pm of the chosen picture, expanded in its original two-mode basis.

    The result is normalized and canonically phased.
    """
    kind = _picture(kind)
    if m < 0 or n < 0:
        raise ValueError("m and n must be nonnegative")
    if kind is Picture.FF and (m > 1 or n > 1):
        raise ValueError("fermionic modes hold at most one excitation")
    cutoff = default_cutoff(m + n) if cutoff is None else cutoff
    if kind is not Picture.FF and cutoff < m + n:
        raise ValueError(f"cutoff {cutoff} too small for N={m + n}")
    if kind is Picture.FB_QUASI:
        return product_state_pm(m, n, JCParams.resonant(), cutoff)
    plus, minus = plus_minus_modes(kind)
    state = _raw_pm_state(plus, minus, picture_modes(kind, cutoff), m, n)
    if kind is Picture.BB:
        state = state * (1 / math.sqrt(math.factorial(m) * math.factorial(n)))
    return canonical_phase(state.normalize())


def bb_beamsplitter_coeffs(m: int, n: int) -> np.ndarray:
    """Amplitudes q_s of b_+^dag^m b_-^dag^n / sqrt(m! n!) |vac> on |s, N-s>_BB.

    Computed by operator application with no phase fixing, s = 0..N.
    """
    N = m + n
    plus, minus = plus_minus_modes(Picture.BB)
    state = _raw_pm_state(plus, minus, picture_modes(Picture.BB, max(N, 1)), m, n)
    state = state * (1 / math.sqrt(math.factorial(m) * math.factorial(n)))
    return np.array([state[(s, N - s)] for s in range(N + 1)])


def bb_beamsplitter_closed_form(m: int, n: int, s: int) -> float:
    """Binomial expansion of the 50:50 two-mode transform."""
    N = m + n
    f = math.factorial
    total = 0.0
    for l in range(max(0, s - m), min(s, n) + 1):
        total += (-1) ** (n - l) / (f(l) * f(n - l) * f(s - l) * f(m - s + l))
    return math.sqrt(f(m) * f(n) * f(s) * f(N - s) / 2**N) * total


def truncation_constraint(cutoff: int) -> Constraint:
    """First mode restricted to occupation {0, 1}, second mode free up to ``cutoff``."""
    if cutoff < 0:
        raise ValueError("cutoff must be nonnegative")
    labels = tuple(range(cutoff + 1))
    return Constraint(labels, labels, lambda n1, n2: n1 in (0, 1), name="truncation")


def restricted_annihilation_matrix(cutoff: int, mode: int = 0) -> tuple[np.ndarray, list]:
    """Matrix of P b_mode P on the kept basis of the truncation projector."""
    con = truncation_constraint(cutoff)
    kept = [(i, k) for i in range(cutoff + 1) for k in range(cutoff + 1) if con.keeps(i, k)]
    index = {k: i for i, k in enumerate(kept)}
    mat = np.zeros((len(kept), len(kept)))
    for col, ket in enumerate(kept):
        out = apply_annihilation(StateVector(con.modes, {ket: 1.0}), mode)
        for k, amp in out.amplitudes.items():
            if k in index:
                mat[index[k], col] = amp.real
    return mat, kept


def fermionic_annihilation_matrix(cutoff: int, kept: list) -> np.ndarray:
    """Matrix of f (first mode) on the (n_f, n_b) kets listed in ``kept``."""
    modes = fb_modes(cutoff)
    index = {k: i for i, k in enumerate(kept)}
    mat = np.zeros((len(kept), len(kept)))
    for col, ket in enumerate(kept):
        out = apply_annihilation(StateVector(modes, {ket: 1.0}), 0)
        for k, amp in out.amplitudes.items():
            mat[index[k], col] = amp.real
    return mat


def _dense_two_boson_product(plus, minus, cutoff: int, m: int, n: int) -> np.ndarray:
    """Coefficients C[n1, n2] of b_+^dag^m b_-^dag^n |vac>, rescaled per factor.

    Dense so that nothing is pruned: the part that survives the truncation
    projector can be many orders of magnitude below the rest of the state.
    """
    C = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    C[0, 0] = 1.0
    ladder = np.sqrt(np.arange(1, cutoff + 1))
    for w in [minus] * n + [plus] * m:
        new = np.zeros_like(C)
        new[1:, :] += w[0] * ladder[:, None] * C[:-1, :]
        new[:, 1:] += w[1] * ladder[None, :] * C[:, :-1]
        C = new / np.linalg.norm(new)
    return C


def projected_pm_state(m: int, n: int, params: JCParams, cutoff: int | None = None) -> StateVector:
    """Normalized P(|m>_+ (x) |n>_-) mapped onto the (fermion, boson) modes.

    The +/- modes of the two-boson picture use the quasiparticle weights of
    ``params``; the projector keeps first-mode occupations 0 and 1.
    """
    N = m + n
    cutoff = default_cutoff(N) if cutoff is None else cutoff
    if cutoff < N:
        raise ValueError(f"cutoff {cutoff} too small for N={N}")
    plus, minus = quasiparticle_weights(params)
    kept = _dense_two_boson_product(plus, minus, cutoff, m, n)[:2]
    norm = np.linalg.norm(kept)
    if norm == 0:
        raise ValueError("the projection annihilates the state")
    kept = kept / norm
    return StateVector(fb_modes(cutoff), {
        (i, k): kept[i, k] for i in range(2) for k in range(cutoff + 1) if kept[i, k] != 0
    })


def verify_projection_identity(m: int, n: int, params: JCParams,
                               cutoff: int | None = None) -> float:
    """||canon(P(|m>_+ (x) |n>_-)) - |m, n>_pm||."""
    got = canonical_phase(projected_pm_state(m, n, params, cutoff))
    want = product_state_pm(m, n, params, got.modes[1].cutoff)
    return distance(got, want)


def ket_label(kind, ket) -> str:
    return f"|{ket[0]},{ket[1]}>_{_picture(kind).value}"


def expansion_rows(kind, m: int, n: int, state: StateVector) -> list[dict]:
    return [
        {"picture": _picture(kind).value, "m": m, "n": n, "ket": ket_label(kind, ket),
         "re": amp.real, "im": amp.imag}
        for ket, amp in state.amplitudes.items()
    ]


def comparison_table(N: int, cutoff: int | None = None) -> list[dict]:
    """Expansions of every |m, N-m>_pm in the three pictures."""
    rows = []
    for kind in Picture:
        for m in range(N + 1):
            n = N - m
            if kind is Picture.FF and (m > 1 or n > 1):
                continue
            rows += expansion_rows(kind, m, n, pm_number_state(kind, m, n, cutoff))
    return rows


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=["picture", "m", "n", "ket", "re", "im"],
                            lineterminator="\n")
    writer.writeheader()
    for row in rows:
        # adding 0.0 turns -0.0 into 0.0
        writer.writerow({**row, "re": format(float(row["re"]) + 0.0, ".17g"),
                         "im": format(float(row["im"]) + 0.0, ".17g")})
    return buf.getvalue()


__all__ = [
    "Picture", "bb_beamsplitter_closed_form", "bb_beamsplitter_coeffs", "comparison_table",
    "expansion_rows", "fermionic_annihilation_matrix", "picture_modes", "plus_minus_modes",
    "pm_number_state", "projected_pm_state", "restricted_annihilation_matrix", "rows_to_csv",
    "truncation_constraint", "verify_projection_identity",
]
