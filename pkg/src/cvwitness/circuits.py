"""Passive linear optics on truncated Fock states.

Convention: a circuit with mode matrix M acts as ``V`` with
``V^dag a_i V = sum_j M_ij a_j``. In the Schrodinger picture this sends
``a_j^dag -> sum_i M_ij a_i^dag``, so a product of coherent states with
amplitudes ``alpha`` is mapped to amplitudes ``M @ alpha``.

Circuit elements are listed in the order they are applied. A printed
product ``BS PS`` therefore corresponds to ``[PS, BS]`` here.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence, Union

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .fock import (
    FockError,
    FockOperator,
    ModeLabel,
    ModeNotFoundError,
    Party,
    PureState,
    State,
    TooLargeError,
    _as_modes,
    _check_cutoff,
    map_branches,
    mode,
)

UNITARY_TOL = 1e-12
MAX_AMPLITUDES = 10**7


class NonUnitaryError(FockError, ValueError):
    pass


class UnknownCircuitError(FockError, KeyError):
    pass


# ---------------------------------------------------------------------------
# mode-level description


def bs_matrix(tau: float) -> np.ndarray:
    if not 0 <= tau <= 1:
        raise ValueError(f"transmittance must lie in [0, 1], got {tau}")
    t, r = np.sqrt(tau), np.sqrt(1 - tau)
    return np.array([[t, r], [r, -t]], dtype=complex)


def ps_matrix(theta: float) -> np.ndarray:
    return np.array([[np.exp(-1j * theta)]])


@dataclass(frozen=True)
class BS:
    """Beam splitter of transmittance ``tau`` between two modes."""

    m1: ModeLabel
    m2: ModeLabel
    tau: float

    def __post_init__(self):
        object.__setattr__(self, "m1", mode(self.m1))
        object.__setattr__(self, "m2", mode(self.m2))
        if self.m1 == self.m2:
            raise ValueError("beam splitter needs two distinct modes")
        if not 0 <= self.tau <= 1:
            raise ValueError(f"transmittance must lie in [0, 1], got {self.tau}")

    @property
    def modes(self):
        return (self.m1, self.m2)

    @property
    def matrix(self) -> np.ndarray:
        return bs_matrix(self.tau)

    def inverse(self) -> "BS":
        return self  # real symmetric and orthogonal

    def __str__(self):
        return f"BS({self.m1},{self.m2};{self.tau:g})"


@dataclass(frozen=True)
class PS:
    """Phase shifter a -> e^{-i theta} a."""

    m: ModeLabel
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "m", mode(self.m))
        if not 0 <= self.theta < 2 * np.pi:
            raise ValueError(f"phase must lie in [0, 2pi), got {self.theta}")

    @property
    def modes(self):
        return (self.m,)

    @property
    def matrix(self) -> np.ndarray:
        return ps_matrix(self.theta)

    def inverse(self) -> "PS":
        return PS(self.m, (2 * np.pi - self.theta) % (2 * np.pi))

    def __str__(self):
        return f"PS({self.m};{self.theta:.6g})"


@dataclass(frozen=True, eq=False)
class Gate:
    """Arbitrary 2x2 unitary on a mode pair (used by the Givens decomposition)."""

    m1: ModeLabel
    m2: ModeLabel
    u: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "m1", mode(self.m1))
        object.__setattr__(self, "m2", mode(self.m2))
        u = np.asarray(self.u, dtype=complex)
        _check_unitary(u)
        object.__setattr__(self, "u", u)

    @property
    def modes(self):
        return (self.m1, self.m2)

    @property
    def matrix(self) -> np.ndarray:
        return self.u

    def inverse(self) -> "Gate":
        return Gate(self.m1, self.m2, self.u.conj().T)


@dataclass(frozen=True, eq=False)
class Phase:
    """Arbitrary phase a -> e^{i phi} a (used by the Givens decomposition)."""

    m: ModeLabel
    phi: float

    def __post_init__(self):
        object.__setattr__(self, "m", mode(self.m))

    @property
    def modes(self):
        return (self.m,)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[np.exp(1j * self.phi)]])

    def inverse(self) -> "Phase":
        return Phase(self.m, -self.phi)


Element = Union[BS, PS, Gate, Phase]


def _check_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> None:
    dev = np.abs(u.conj().T @ u - np.eye(u.shape[0])).max()
    if dev > tol:
        raise NonUnitaryError(f"matrix is not unitary (max|M^dag M - I| = {dev:.3g})")


@dataclass(frozen=True, eq=False)
class ModeUnitary:
    matrix: np.ndarray
    mode_order: tuple[ModeLabel, ...]

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        order = _as_modes(self.mode_order)
        if m.shape != (len(order), len(order)):
            raise ValueError("matrix size does not match mode order")
        _check_unitary(m)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "mode_order", order)

    def __matmul__(self, other: "ModeUnitary") -> "ModeUnitary":
        if self.mode_order != other.mode_order:
            raise ValueError("mode orders differ")
        return ModeUnitary(self.matrix @ other.matrix, self.mode_order)

    def dag(self) -> "ModeUnitary":
        return ModeUnitary(self.matrix.conj().T, self.mode_order)


def bs(tau: float, modes=("a1", "a2")) -> ModeUnitary:
    return ModeUnitary(bs_matrix(tau), modes)


def ps(theta: float, label="a1") -> ModeUnitary:
    if not 0 <= theta < 2 * np.pi:
        raise ValueError(f"phase must lie in [0, 2pi), got {theta}")
    return ModeUnitary(ps_matrix(theta), (label,))


@dataclass(frozen=True, eq=False)
class CircuitSpec:
    """Elements in application order."""

    elements: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))

    @property
    def modes(self) -> tuple[ModeLabel, ...]:
        seen: list[ModeLabel] = []
        for el in self.elements:
            for m in el.modes:
                if m not in seen:
                    seen.append(m)
        return tuple(seen)

    def then(self, other: "CircuitSpec") -> "CircuitSpec":
        """This circuit followed by ``other``."""
        return CircuitSpec(self.elements + other.elements)

    def inverse(self) -> "CircuitSpec":
        return CircuitSpec(tuple(el.inverse() for el in reversed(self.elements)))

    def relabel(self, mapping) -> "CircuitSpec":
        mapping = {mode(k): mode(v) for k, v in dict(mapping).items()}
        out = []
        for el in self.elements:
            if isinstance(el, BS):
                out.append(BS(mapping.get(el.m1, el.m1), mapping.get(el.m2, el.m2), el.tau))
            elif isinstance(el, PS):
                out.append(PS(mapping.get(el.m, el.m), el.theta))
            elif isinstance(el, Gate):
                out.append(Gate(mapping.get(el.m1, el.m1), mapping.get(el.m2, el.m2), el.u))
            else:
                out.append(Phase(mapping.get(el.m, el.m), el.phi))
        return CircuitSpec(tuple(out))

    def __str__(self):
        return " -> ".join(map(str, self.elements)) or "I"


def circuit(*elements) -> CircuitSpec:
    return CircuitSpec(tuple(elements))


def _embed(el, order: Sequence[ModeLabel]) -> np.ndarray:
    m = np.eye(len(order), dtype=complex)
    idx = [order.index(x) for x in el.modes]
    m[np.ix_(idx, idx)] = el.matrix
    return m


def compose(spec: CircuitSpec, modes=None) -> ModeUnitary:
    """Mode matrix of the whole circuit (later elements multiply on the left)."""
    order = _as_modes(modes) if modes is not None else spec.modes
    missing = set(spec.modes) - set(order)
    if missing:
        raise ModeNotFoundError(f"circuit modes {sorted(map(str, missing))} not in {order}")
    m = np.eye(len(order), dtype=complex)
    for el in spec.elements:
        m = _embed(el, order) @ m
    return ModeUnitary(m, order)


def inverse(spec: CircuitSpec) -> CircuitSpec:
    return spec.inverse()


def givens_decomposition(u: ModeUnitary) -> CircuitSpec:
    """Circuit of 2x2 gates and phases whose composition equals ``u``."""
    m = u.matrix.copy()
    order = u.mode_order
    n = len(order)
    gates = []  # G applied on the left so that G_K ... G_1 M = D
    for c in range(n):
        for r in range(n - 1, c, -1):
            x, y = m[c, c], m[r, c]
            if abs(y) < 1e-300:
                continue
            h = np.hypot(abs(x), abs(y))
            g = np.array([[np.conj(x), np.conj(y)], [-y, x]]) / h
            rows = m[[c, r], :]
            m[[c, r], :] = g @ rows
            gates.append(Gate(order[c], order[r], g))
    elements: list = [Phase(order[i], float(np.angle(m[i, i]))) for i in range(n)]
    # M = G_1^dag ... G_K^dag D: D acts first, then G_K^dag, ..., G_1^dag
    elements.extend(g.inverse() for g in reversed(gates))
    return CircuitSpec(tuple(elements))


# ---------------------------------------------------------------------------
# Fock-space action


@lru_cache(maxsize=4096)
def _two_mode_block_cached(key: bytes, n: int) -> np.ndarray:
    m = np.frombuffer(key, dtype=complex).reshape(2, 2)
    # V = exp(i G_hat) with e^{iG} = M implements V^dag a V = M a
    t, z = sla.schur(m, output="complex")
    g = z @ np.diag(np.angle(np.diag(t))) @ z.conj().T
    p = np.arange(n + 1)
    q = n - p
    h = np.diag(g[0, 0] * p + g[1, 1] * q).astype(complex)
    # a0^dag a1 |p, q> = sqrt((p+1) q) |p+1, q-1>
    off = np.sqrt((p[:-1] + 1) * q[:-1])
    h[p[1:], p[:-1]] += g[0, 1] * off
    h[p[:-1], p[1:]] += g[1, 0] * off
    h = 0.5 * (h + h.conj().T)
    w, v = np.linalg.eigh(h)
    out = (v * np.exp(1j * w)) @ v.conj().T
    out.setflags(write=False)
    return out


def two_mode_block(m: np.ndarray, n: int) -> np.ndarray:
    """<p, n-p| V |k, n-k> for a 2x2 mode unitary, indexed [p, k]."""
    m = np.ascontiguousarray(m, dtype=complex)
    return _two_mode_block_cached(m.tobytes(), int(n))


def _apply_pair(t: np.ndarray, i: int, j: int, m: np.ndarray) -> np.ndarray:
    """Apply a 2x2 mode unitary to tensor axes (i, j), clipping at the axis sizes."""
    tt = np.moveaxis(t, (i, j), (0, 1))
    di, dj = tt.shape[:2]
    rest = tt.shape[2:]
    tt = tt.reshape(di, dj, -1)
    out = np.zeros_like(tt)
    for s in range(di + dj - 1):
        lo, hi = max(0, s - dj + 1), min(s, di - 1)
        idx = np.arange(lo, hi + 1)
        vec = tt[idx, s - idx, :]
        if not np.any(vec):
            continue
        blk = two_mode_block(m, s)[np.ix_(idx, idx)]
        out[idx, s - idx, :] = blk @ vec
    out = out.reshape((di, dj) + rest)
    return np.moveaxis(out, (0, 1), (i, j))


def _apply_single(t: np.ndarray, i: int, phase: complex) -> np.ndarray:
    d = t.shape[i]
    shape = [1] * t.ndim
    shape[i] = d
    return t * (phase ** np.arange(d)).reshape(shape)


def apply_elements_tensor(t: np.ndarray, spec: CircuitSpec, positions: dict) -> np.ndarray:
    for el in spec.elements:
        if len(el.modes) == 2:
            t = _apply_pair(t, positions[el.modes[0]], positions[el.modes[1]], el.matrix)
        else:
            t = _apply_single(t, positions[el.modes[0]], complex(el.matrix[0, 0]))
    return t


def _components(spec: CircuitSpec) -> list[set]:
    comps: list[set] = []
    for el in spec.elements:
        group = set(el.modes)
        merged = [c for c in comps if c & group]
        for c in merged:
            comps.remove(c)
            group |= c
        comps.append(group)
    return comps


def exact_cutoff(spec: CircuitSpec, cutoff: int) -> int:
    """Cutoff at which the circuit output of a cutoff-``cutoff`` state is not clipped."""
    comps = _components(spec)
    largest = max((len(c) for c in comps), default=1)
    return largest * (cutoff - 1) + 1


def apply_circuit(s: State, spec: CircuitSpec, cutoff_out: int | None = None) -> State:
    """Send a state through a circuit.

    By default the state is first zero-padded to :func:`exact_cutoff` so the
    result is the exact image of the truncated input. A smaller
    ``cutoff_out`` clips amplitudes beyond it (no renormalization).
    """
    missing = set(spec.modes) - set(s.modes)
    if missing:
        raise ModeNotFoundError(f"circuit modes {sorted(map(str, missing))} not in state")
    d_out = exact_cutoff(spec, s.cutoff) if cutoff_out is None else _check_cutoff(cutoff_out)
    if d_out ** s.n_modes > MAX_AMPLITUDES:
        raise TooLargeError(f"{s.n_modes} modes at cutoff {d_out} exceeds {MAX_AMPLITUDES} amplitudes")

    def one(st: PureState) -> PureState:
        st = st.with_cutoff(d_out)
        pos = {m: st.position(m) for m in spec.modes}
        return PureState(st.modes, d_out, apply_elements_tensor(st.amplitudes, spec, pos))

    return map_branches(one, s)


def lift(u: Union[ModeUnitary, CircuitSpec], cutoff: int, modes=None) -> FockOperator:
    """Fock-space operator of a passive circuit on the truncated space.

    Photon-number blocks with total number below the cutoff are reproduced
    exactly; higher blocks are clipped by the truncation.
    """
    cutoff = _check_cutoff(cutoff)
    if isinstance(u, ModeUnitary):
        spec = givens_decomposition(u)
        order = u.mode_order if modes is None else _as_modes(modes)
    else:
        spec = u
        order = spec.modes if modes is None else _as_modes(modes)
    k = len(order)
    dim = cutoff**k
    if dim * dim > 4 * MAX_AMPLITUDES:
        raise TooLargeError(f"lift on {k} modes at cutoff {cutoff} is too large")
    t = np.eye(dim, dtype=complex).reshape((cutoff,) * k + (dim,))
    pos = {m: i for i, m in enumerate(order)}
    t = apply_elements_tensor(t, spec, pos)
    mat = t.reshape(dim, dim)
    mat[np.abs(mat) < 1e-15] = 0
    return FockOperator(order, cutoff, sp.csr_matrix(mat))


# ---------------------------------------------------------------------------
# photon-number block isometries for local circuits


@dataclass(frozen=True, eq=False)
class Block:
    total: int
    in_index: np.ndarray  # flat indices into the d^m input space
    out_configs: np.ndarray  # (n_out, m) occupation tuples
    matrix: np.ndarray  # (n_out, n_in)


def compositions(n: int, m: int) -> np.ndarray:
    """All m-tuples of non-negative integers summing to n (lexicographic)."""
    if m == 1:
        return np.array([[n]])
    rows = []
    for first in range(n, -1, -1):
        for rest in compositions(n - first, m - 1):
            rows.append((first, *rest))
    return np.array(sorted(rows), dtype=np.int64)


def block_isometries(spec: CircuitSpec, order: Sequence[ModeLabel], cutoff: int) -> list[Block]:
    """Exact action of ``spec`` on each photon-number block of a cutoff-``cutoff`` input.

    Outputs are not truncated: block ``N`` maps input occupations below the
    cutoff summing to ``N`` onto all occupations summing to ``N``.
    """
    order = _as_modes(order)
    m = len(order)
    grid = np.indices((cutoff,) * m).reshape(m, -1).T
    totals = grid.sum(axis=1)
    pos = {lab: i for i, lab in enumerate(order)}
    blocks = []
    for n in range(m * (cutoff - 1) + 1):
        in_index = np.nonzero(totals == n)[0]
        cfg = grid[in_index]
        t = np.zeros((n + 1,) * m + (len(in_index),), dtype=complex)
        t[tuple(cfg.T) + (np.arange(len(in_index)),)] = 1.0
        t = apply_elements_tensor(t, spec, pos)
        out_cfg = compositions(n, m)
        w = t[tuple(out_cfg.T)]
        blocks.append(Block(n, in_index, out_cfg, w))
    return blocks


# ---------------------------------------------------------------------------
# loss


def ancilla_for(s: State, label: ModeLabel) -> ModeLabel:
    taken = {m for m in s.modes if m.is_ancilla and m.copy == label.copy}
    tag = 1
    while ModeLabel(Party.ANCILLA, label.copy, tag) in taken:
        tag += 1
    return ModeLabel(Party.ANCILLA, label.copy, tag)


def loss(s: State, label, tau: float) -> State:
    """Pure-loss channel: BS(tau) with a fresh vacuum ancilla appended last.

    Exact at the input cutoff since the ancilla starts empty.
    """
    label = mode(label)
    if not 0 <= tau <= 1:
        raise ValueError(f"transmittance must lie in [0, 1], got {tau}")
    s.position(label)
    anc = ancilla_for(s, label)

    def one(st: PureState) -> PureState:
        d = st.cutoff
        if d ** (st.n_modes + 1) > MAX_AMPLITUDES:
            raise TooLargeError("adding a loss ancilla exceeds the amplitude budget")
        vac = np.zeros(d, dtype=complex)
        vac[0] = 1
        t = np.multiply.outer(st.amplitudes, vac)
        t = _apply_pair(t, st.position(label), st.n_modes, bs_matrix(tau))
        return PureState(st.modes + (anc,), d, t)

    return map_branches(one, s)


def apply_losses(s: State, losses: dict | None) -> State:
    for lab, tau in (losses or {}).items():
        if tau != 1:
            s = loss(s, lab, tau)
    return s


# ---------------------------------------------------------------------------
# catalog of measurement circuits


@dataclass(frozen=True, eq=False)
class CatalogEntry:
    key: str
    spec: CircuitSpec
    targets: tuple = ()  # ((mu, nu), component) pairs turned into L^z
    description: str = ""


def _lab(s):
    return mode(s)


def concentrator(party: str = "a") -> CircuitSpec:
    """BS(1/2) on copies 1,2 then BS(2/3) on copies 1,3 for one party."""
    p = party
    return circuit(BS(f"{p}1", f"{p}2", 0.5), BS(f"{p}1", f"{p}3", 2 / 3))


def _x_meas(m1, m2):
    return [BS(m1, m2, 0.5)]


def _y_meas(m1, m2):
    return [PS(m2, np.pi / 2), BS(m1, m2, 0.5)]


def _build_catalog() -> dict[str, CatalogEntry]:
    cat: dict[str, CatalogEntry] = {}

    def add(key, elements, targets=(), desc=""):
        cat[key] = CatalogEntry(key, CircuitSpec(tuple(elements)), tuple(targets), desc)

    add(
        "d124.M",
        concentrator("a").elements + concentrator("b").elements,
        (),
        "mean-field concentrator on both parties",
    )
    add("d124.C1", _x_meas("a2", "a3") + _x_meas("b2", "b3"),
        ((("a2", "a3"), "x"), (("b2", "b3"), "x")), "C1 readout")
    add("d124.C2", _y_meas("a2", "a3") + _y_meas("b2", "b3"),
        ((("a2", "a3"), "y"), (("b2", "b3"), "y")), "C2 readout")
    add("d124.C3", [], ((("a2", "a3"), "z"), (("b2", "b3"), "z")), "C3 readout")
    add("d149.F1", _x_meas("a1", "a2") + _x_meas("b2", "b3"),
        ((("a1", "a2"), "x"), (("b2", "b3"), "x")), "F1 readout")
    add("d149.F2", _x_meas("a2", "a3") + _x_meas("b2", "b3"),
        ((("a2", "a3"), "x"), (("b2", "b3"), "x")), "F2 readout")
    add("d149.F3", _x_meas("a1", "a2"), ((("a1", "a2"), "x"),), "F3 readout, copy 3 unused")
    add("d149.F4", _y_meas("a1", "a2") + _y_meas("b2", "b3"),
        ((("a1", "a2"), "y"), (("b2", "b3"), "y")), "F4 readout")
    add("d149.F5", _y_meas("a2", "a3") + _y_meas("b2", "b3"),
        ((("a2", "a3"), "y"), (("b2", "b3"), "y")), "F5 readout")
    add("d1913_agarwal.Lx", _x_meas("a1", "b1"), ((("a1", "b1"), "x"),), "L^x_ab readout")
    add("d1913_agarwal.Ly", _y_meas("a1", "b1"), ((("a1", "b1"), "y"),), "L^y_ab readout")
    add("d1913_agarwal.Lz", [], ((("a1", "b1"), "z"),), "L^z_ab readout")
    return cat


_CATALOG = _build_catalog()


def named_circuits() -> dict[str, CatalogEntry]:
    return dict(_CATALOG)


def get_circuit(key) -> CatalogEntry:
    if isinstance(key, tuple):
        key = ".".join(str(k) for k in key)
    try:
        return _CATALOG[key]
    except KeyError:
        raise UnknownCircuitError(f"unknown circuit {key!r}; known: {sorted(_CATALOG)}") from None
