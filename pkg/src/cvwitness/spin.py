"""Two-mode (Jordan-Schwinger) spin operators and the composite C_j, F_j observables."""

from __future__ import annotations

import enum
from functools import lru_cache

import numpy as np

from .fock import FockOperator, ModeLabel, WordSum, mode


class SpinComponent(str, enum.Enum):
    X = "x"
    Y = "y"
    Z = "z"
    ZERO = "0"


def _pair(pair) -> tuple[ModeLabel, ModeLabel]:
    mu, nu = (mode(p) for p in pair)
    if mu == nu:
        raise ValueError("spin operators need two distinct modes")
    return mu, nu


def _lw(text: str) -> WordSum:
    return WordSum.of(text)


def spin_sum(component, pair) -> WordSum:
    """L^c on modes (mu, nu) as a word sum.

    L^x = (nu+ mu + mu+ nu)/2, L^y = i(nu+ mu - mu+ nu)/2,
    L^z = (n_mu - n_nu)/2, L^0 = (n_mu + n_nu)/2.
    """
    c = SpinComponent(str(component))
    mu, nu = _pair(pair)
    hop_down = _lw(f"{nu}+ {mu}")
    hop_up = _lw(f"{mu}+ {nu}")
    n_mu, n_nu = _lw(f"{mu}+ {mu}"), _lw(f"{nu}+ {nu}")
    if c is SpinComponent.X:
        return 0.5 * (hop_down + hop_up)
    if c is SpinComponent.Y:
        return 0.5j * (hop_down - hop_up)
    if c is SpinComponent.Z:
        return 0.5 * (n_mu - n_nu)
    return 0.5 * (n_mu + n_nu)


def number_sum(label) -> WordSum:
    m = mode(label)
    return _lw(f"{m}+ {m}")


@lru_cache(maxsize=256)
def _spin_cached(component: str, mu: str, nu: str, cutoff: int) -> FockOperator:
    return spin_sum(component, (mu, nu)).operator((mu, nu), cutoff, hermitian=True)


def spin(component, pair, cutoff: int) -> FockOperator:
    mu, nu = _pair(pair)
    return _spin_cached(SpinComponent(str(component)).value, str(mu), str(nu), cutoff)


def casimir_sum(pair) -> WordSum:
    lx, ly, lz = (spin_sum(c, pair) for c in "xyz")
    return lx @ lx + ly @ ly + lz @ lz


def casimir(pair, cutoff: int) -> FockOperator:
    mu, nu = _pair(pair)
    return casimir_sum(pair).operator((mu, nu), cutoff, hermitian=True)


# ---------------------------------------------------------------------------
# C_j for the second-order witness


def c_sum(j: int, a_pair=("a2", "a3"), b_pair=("b2", "b3")) -> WordSum:
    """C_j = L0_a L0_b - Lj_a Lj_b with j in {1: x, 2: y, 3: z}."""
    comp = {1: "x", 2: "y", 3: "z"}.get(j)
    if comp is None:
        raise ValueError(f"C_j is defined for j in 1..3, got {j}")
    return spin_sum("0", a_pair) @ spin_sum("0", b_pair) - spin_sum(comp, a_pair) @ spin_sum(comp, b_pair)


@lru_cache(maxsize=64)
def _c_cached(j: int, a_pair, b_pair, cutoff: int) -> FockOperator:
    labels = tuple(mode(x) for x in a_pair + b_pair)
    return c_sum(j, a_pair, b_pair).operator(labels, cutoff, hermitian=True)


def c_operator(j: int, cutoff: int, a_pair=("a2", "a3"), b_pair=("b2", "b3")) -> FockOperator:
    return _c_cached(j, tuple(map(str, a_pair)), tuple(map(str, b_pair)), cutoff)


# ---------------------------------------------------------------------------
# F_j for the fourth-order witness

_CYCLIC = ((0, 1, 2), (1, 2, 0), (2, 0, 1))


def f_sum(j: int, copies=(1, 2, 3)) -> WordSum:
    """F_j as the literal average over cyclic relabelings of the copies."""
    if j not in (1, 2, 3, 4, 5):
        raise ValueError(f"F_j is defined for j in 1..5, got {j}")
    total = WordSum()
    for perm in _CYCLIC:
        s1, s2, s3 = (copies[i] for i in perm)

        def la(c, x, y):
            return spin_sum(c, (f"a{x}", f"a{y}"))

        def lb(c, x, y):
            return spin_sum(c, (f"b{x}", f"b{y}"))

        nb1 = number_sum(f"b{s1}")
        if j == 1:
            term = (la("x", s1, s2) + la("x", s3, s1)) @ nb1 @ lb("x", s2, s3)
        elif j == 2:
            term = (la("x", s2, s3) + number_sum(f"a{s1}")) @ nb1 @ lb("x", s2, s3)
        elif j == 3:
            term = (la("0", s1, s2) - la("x", s1, s2)) @ nb1 @ number_sum(f"b{s2}")
        elif j == 4:
            term = (la("y", s1, s2) + la("y", s3, s1)) @ nb1 @ lb("y", s2, s3)
        else:
            term = la("y", s2, s3) @ nb1 @ lb("y", s2, s3)
        total = total + term
    return total / 3


def six_modes(copies=(1, 2, 3)) -> tuple[ModeLabel, ...]:
    return tuple(mode(f"a{c}") for c in copies) + tuple(mode(f"b{c}") for c in copies)


@lru_cache(maxsize=32)
def _f_cached(j: int, copies: tuple, cutoff: int) -> FockOperator:
    return f_sum(j, copies).operator(six_modes(copies), cutoff, hermitian=True)


def f_operator(j: int, cutoff: int, copies=(1, 2, 3)) -> FockOperator:
    return _f_cached(j, tuple(copies), cutoff)


# ---------------------------------------------------------------------------
# circuit equivalence


def safe_indices(n_modes: int, cutoff: int, max_total: int | None = None) -> np.ndarray:
    """Flat indices of basis states with total photon number <= max_total."""
    max_total = cutoff - 1 if max_total is None else max_total
    grid = np.indices((cutoff,) * n_modes).reshape(n_modes, -1)
    return np.nonzero(grid.sum(axis=0) <= max_total)[0]


def conjugation_errors(cutoff: int = 6) -> dict[tuple[str, tuple, str], float]:
    """max |V+ L^z V - L^target| on the truncation-safe subspace, per catalog target."""
    from .circuits import CircuitSpec, lift, named_circuits

    out = {}
    for key, entry in named_circuits().items():
        for pair, comp in entry.targets:
            pm = tuple(mode(x) for x in pair)
            els = tuple(el for el in entry.spec.elements if set(el.modes) <= set(pm))
            v = lift(CircuitSpec(els), cutoff, pm).dense()
            idx = safe_indices(2, cutoff)
            lhs = (v.conj().T @ spin("z", pm, cutoff).dense() @ v)[np.ix_(idx, idx)]
            rhs = spin(comp, pm, cutoff).dense()[np.ix_(idx, idx)]
            out[(key, tuple(pair), comp)] = float(np.abs(lhs - rhs).max())
    return out
