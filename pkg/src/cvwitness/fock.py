"""Truncated multimode Fock space.

States are dense amplitude tensors with one axis per mode and a uniform
cutoff ``d`` (levels ``0..d-1``). Mixed states are kept as ensembles of
pure branches. Operators carry a scipy.sparse matrix on the modes they act
on, so six-mode operators at moderate cutoffs stay tractable.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence, Union

import numpy as np
import scipy.sparse as sp

DEFAULT_NORM_TOL = 1e-10
DEFAULT_LEAKAGE_BUDGET = 1e-9
DEFAULT_OP_TOL = 1e-12


class FockError(Exception):
    """Base class for errors raised by this package."""


class InvalidCutoffError(FockError, ValueError):
    pass


class LabelCollisionError(FockError, ValueError):
    pass


class ModeNotFoundError(FockError, KeyError):
    pass


class CutoffTooSmallError(FockError, ValueError):
    pass


class TooLargeError(FockError, MemoryError):
    pass


class Party(str, enum.Enum):
    A = "a"
    B = "b"
    ANCILLA = "e"


@dataclass(frozen=True, order=True)
class ModeLabel:
    """A logical bosonic mode: party, copy index and a free tag.

    The tag disambiguates ancillas (several loss ancillas can hang off the
    same copy). A mode's position is its index in the owning state's mode
    tuple.
    """

    party: Party
    copy: int = 1
    tag: int = 0

    def __post_init__(self):
        object.__setattr__(self, "party", Party(self.party))
        if self.copy < 1:
            raise ValueError(f"copy index must be >= 1, got {self.copy}")

    def __str__(self) -> str:
        s = f"{self.party.value}{self.copy}"
        return s if self.tag == 0 else f"{s}.{self.tag}"

    def __repr__(self) -> str:
        return f"mode({str(self)!r})"

    @property
    def is_ancilla(self) -> bool:
        return self.party is Party.ANCILLA


_MODE_RE = re.compile(r"^([abe])(\d*)(?:\.(\d+))?$")


def mode(spec: Union[str, ModeLabel]) -> ModeLabel:
    """Parse ``"a1"``, ``"b2"``, ``"e1.3"`` (``"a"`` means copy 1)."""
    if isinstance(spec, ModeLabel):
        return spec
    m = _MODE_RE.match(spec.strip())
    if not m:
        raise ValueError(f"cannot parse mode label {spec!r}")
    party, copy, tag = m.groups()
    return ModeLabel(Party(party), int(copy) if copy else 1, int(tag) if tag else 0)


def modes(*specs) -> tuple[ModeLabel, ...]:
    if len(specs) == 1 and isinstance(specs[0], str) and " " in specs[0]:
        specs = specs[0].split()
    return tuple(mode(s) for s in specs)


def _check_cutoff(cutoff: int) -> int:
    if int(cutoff) != cutoff or cutoff < 2:
        raise InvalidCutoffError(f"cutoff must be an integer >= 2, got {cutoff}")
    return int(cutoff)


# ---------------------------------------------------------------------------
# single-mode matrices


@lru_cache(maxsize=None)
def _annihilation_dense(cutoff: int) -> np.ndarray:
    m = np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), k=1)
    m.setflags(write=False)
    return m


def annihilation(cutoff: int, label: Union[str, ModeLabel] = "a1") -> "FockOperator":
    """Lowering operator with ``<n-1|a|n> = sqrt(n)``."""
    cutoff = _check_cutoff(cutoff)
    return FockOperator((mode(label),), cutoff, sp.csr_matrix(_annihilation_dense(cutoff)))


def creation(cutoff: int, label: Union[str, ModeLabel] = "a1") -> "FockOperator":
    return annihilation(cutoff, label).dag()


def number(cutoff: int, label: Union[str, ModeLabel] = "a1") -> "FockOperator":
    cutoff = _check_cutoff(cutoff)
    return FockOperator(
        (mode(label),), cutoff, sp.diags(np.arange(cutoff, dtype=float)).tocsr(), hermitian=True
    )


def identity(cutoff: int, labels: Iterable[Union[str, ModeLabel]]) -> "FockOperator":
    labels = tuple(mode(l) for l in labels)
    return FockOperator(labels, cutoff, sp.identity(cutoff ** len(labels), dtype=complex, format="csr"))


# ---------------------------------------------------------------------------
# states


def _as_modes(labels) -> tuple[ModeLabel, ...]:
    out = tuple(mode(l) for l in labels)
    if len(set(out)) != len(out):
        raise LabelCollisionError(f"duplicate mode labels in {out}")
    return out


@dataclass(frozen=True, eq=False)
class PureState:
    """Amplitude tensor of shape ``(cutoff,) * len(modes)``.

    Not required to be normalized (``apply`` may produce unnormalized
    vectors); the constructors in :mod:`cvwitness.states` normalize.
    """

    modes: tuple[ModeLabel, ...]
    cutoff: int
    amplitudes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "modes", _as_modes(self.modes))
        _check_cutoff(self.cutoff)
        amps = np.asarray(self.amplitudes, dtype=complex)
        expected = (self.cutoff,) * len(self.modes)
        if amps.shape != expected:
            raise ValueError(f"amplitude shape {amps.shape} does not match {expected}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    def position(self, label) -> int:
        label = mode(label)
        try:
            return self.modes.index(label)
        except ValueError:
            raise ModeNotFoundError(f"mode {label} not in state modes {self.modes}") from None

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amplitudes, self.amplitudes).real))

    def normalized(self) -> "PureState":
        return PureState(self.modes, self.cutoff, self.amplitudes / self.norm())

    def relabel(self, mapping) -> "PureState":
        mapping = {mode(k): mode(v) for k, v in dict(mapping).items()}
        return PureState(tuple(mapping.get(m, m) for m in self.modes), self.cutoff, self.amplitudes)

    def with_cutoff(self, cutoff: int) -> "PureState":
        """Zero-pad (or truncate) every mode to ``cutoff`` levels."""
        cutoff = _check_cutoff(cutoff)
        if cutoff == self.cutoff:
            return self
        if cutoff > self.cutoff:
            pad = [(0, cutoff - self.cutoff)] * self.n_modes
            return PureState(self.modes, cutoff, np.pad(self.amplitudes, pad))
        sl = (slice(0, cutoff),) * self.n_modes
        return PureState(self.modes, cutoff, self.amplitudes[sl])

    @property
    def branches(self) -> tuple[tuple[float, "PureState"], ...]:
        return ((1.0, self),)


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Convex mixture of pure branches sharing modes and cutoff."""

    branches: tuple[tuple[float, PureState], ...]

    def __post_init__(self):
        br = tuple((float(w), s) for w, s in self.branches)
        if not br:
            raise ValueError("ensemble needs at least one branch")
        if any(w < 0 for w, _ in br):
            raise ValueError("ensemble weights must be non-negative")
        total = sum(w for w, _ in br)
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"ensemble weights sum to {total}, expected 1")
        m0, d0 = br[0][1].modes, br[0][1].cutoff
        for _, s in br:
            if s.modes != m0 or s.cutoff != d0:
                raise ValueError("ensemble branches must share modes and cutoff")
        object.__setattr__(self, "branches", br)

    @property
    def modes(self) -> tuple[ModeLabel, ...]:
        return self.branches[0][1].modes

    @property
    def cutoff(self) -> int:
        return self.branches[0][1].cutoff

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    def position(self, label) -> int:
        return self.branches[0][1].position(label)

    def relabel(self, mapping) -> "Ensemble":
        return Ensemble(tuple((w, s.relabel(mapping)) for w, s in self.branches))

    def with_cutoff(self, cutoff: int) -> "Ensemble":
        return Ensemble(tuple((w, s.with_cutoff(cutoff)) for w, s in self.branches))

    def map(self, fn) -> "Ensemble":
        return Ensemble(tuple((w, fn(s)) for w, s in self.branches))


State = Union[PureState, Ensemble]


def map_branches(fn, s: State) -> State:
    """Apply a pure-state transformation to every branch."""
    if isinstance(s, Ensemble):
        return s.map(fn)
    return fn(s)


def tensor(*states: State) -> State:
    """Tensor product; ensembles are expanded distributively."""
    if not states:
        raise ValueError("tensor() needs at least one state")
    if len(states) > 2:
        out = states[0]
        for s in states[1:]:
            out = tensor(out, s)
        return out
    if len(states) == 1:
        return states[0]
    s1, s2 = states
    if s1.cutoff != s2.cutoff:
        raise InvalidCutoffError(f"cannot tensor states with cutoffs {s1.cutoff} and {s2.cutoff}")
    clash = set(s1.modes) & set(s2.modes)
    if clash:
        raise LabelCollisionError(f"overlapping mode labels: {sorted(map(str, clash))}")
    if isinstance(s1, PureState) and isinstance(s2, PureState):
        amps = np.multiply.outer(s1.amplitudes, s2.amplitudes)
        return PureState(s1.modes + s2.modes, s1.cutoff, amps)
    branches = []
    for w1, b1 in s1.branches:
        for w2, b2 in s2.branches:
            branches.append((w1 * w2, tensor(b1, b2)))
    return Ensemble(tuple(branches))


def norm_leakage(s: State) -> float:
    """Probability that at least one mode sits in its top Fock level."""
    total = 0.0
    for w, b in s.branches:
        p = np.abs(b.amplitudes) ** 2
        norm = p.sum()
        if norm == 0:
            continue
        inner = p[(slice(0, b.cutoff - 1),) * b.n_modes].sum()
        total += w * (norm - inner) / norm
    return float(total)


def photon_distribution(s: State, labels: Sequence | None = None) -> np.ndarray:
    """Joint photon-number distribution over ``labels``.

    Unlisted modes are summed out, which is the partial trace as far as
    counting statistics go. With ``labels=None`` every non-ancilla mode is
    read. The result has one axis per requested mode, in the given order.
    """
    if labels is None:
        labels = [m for m in s.modes if not m.is_ancilla]
    labels = [mode(l) for l in labels]
    if not labels:
        raise ValueError("photon_distribution needs a non-empty mode subset")
    pos = [s.position(l) for l in labels]
    if len(set(pos)) != len(pos):
        raise LabelCollisionError("repeated mode in photon_distribution request")
    out = None
    for w, b in s.branches:
        p = np.abs(b.amplitudes) ** 2
        rest = tuple(i for i in range(b.n_modes) if i not in pos)
        marg = p.sum(axis=rest) if rest else p
        # axes of ``marg`` follow sorted(pos); reorder to the request order
        order = np.argsort(np.argsort(pos))
        marg = np.transpose(marg, order) if marg.ndim > 1 else marg
        out = w * marg if out is None else out + w * marg
    return out


# ---------------------------------------------------------------------------
# operators


def _digits(idx: np.ndarray, d: int, k: int) -> np.ndarray:
    """Mixed-radix digits (most significant first) of flat indices."""
    out = np.empty((k, idx.size), dtype=np.int64)
    rem = idx.astype(np.int64)
    for i in range(k - 1, -1, -1):
        out[i] = rem % d
        rem //= d
    return out


def _undigits(dig: np.ndarray, d: int) -> np.ndarray:
    idx = np.zeros(dig.shape[1], dtype=np.int64)
    for row in dig:
        idx = idx * d + row
    return idx


def _embed_matrix(matrix, acting: tuple, target: tuple, d: int) -> sp.csr_matrix:
    """Matrix of ``op ⊗ 1`` on ``target`` modes, given ``op`` on ``acting``."""
    if acting == target:
        return sp.csr_matrix(matrix)
    extra = tuple(m for m in target if m not in acting)
    big = sp.kron(sp.csr_matrix(matrix), sp.identity(d ** len(extra), format="csr"), format="coo")
    order = acting + extra
    if order == target:
        return big.tocsr()
    k = len(target)
    perm = [order.index(m) for m in target]
    rows = _undigits(_digits(big.row, d, k)[perm], d)
    cols = _undigits(_digits(big.col, d, k)[perm], d)
    return sp.csr_matrix((big.data, (rows, cols)), shape=big.shape)


@dataclass(frozen=True, eq=False)
class FockOperator:
    """Operator acting on ``acting_modes`` with a sparse matrix of size d^k."""

    acting_modes: tuple[ModeLabel, ...]
    cutoff: int
    matrix: sp.csr_matrix
    hermitian: bool = False

    def __post_init__(self):
        object.__setattr__(self, "acting_modes", _as_modes(self.acting_modes))
        _check_cutoff(self.cutoff)
        mat = self.matrix
        mat = sp.csr_matrix(mat, dtype=complex)
        dim = self.cutoff ** len(self.acting_modes)
        if mat.shape != (dim, dim):
            raise ValueError(f"matrix shape {mat.shape} does not match {dim}x{dim}")
        object.__setattr__(self, "matrix", mat)
        if self.hermitian:
            dev = abs(mat - mat.conj().T).max() if mat.nnz else 0.0
            if dev > DEFAULT_OP_TOL * max(1.0, abs(mat).max() if mat.nnz else 1.0):
                raise ValueError(f"operator flagged hermitian but max|M - M^dag| = {dev:.3g}")

    def dag(self) -> "FockOperator":
        return FockOperator(self.acting_modes, self.cutoff, self.matrix.conj().T.tocsr(), self.hermitian)

    def on(self, labels) -> "FockOperator":
        """Same operator, expressed on a superset of modes in the given order."""
        labels = _as_modes(labels)
        missing = set(self.acting_modes) - set(labels)
        if missing:
            raise ModeNotFoundError(f"modes {sorted(map(str, missing))} not in target")
        mat = _embed_matrix(self.matrix, self.acting_modes, labels, self.cutoff)
        return FockOperator(labels, self.cutoff, mat, self.hermitian)

    def _aligned(self, other: "FockOperator"):
        if self.cutoff != other.cutoff:
            raise InvalidCutoffError("operators have different cutoffs")
        labels = self.acting_modes + tuple(m for m in other.acting_modes if m not in self.acting_modes)
        return self.on(labels), other.on(labels)

    def __add__(self, other: "FockOperator") -> "FockOperator":
        x, y = self._aligned(other)
        return FockOperator(x.acting_modes, x.cutoff, x.matrix + y.matrix, x.hermitian and y.hermitian)

    def __sub__(self, other: "FockOperator") -> "FockOperator":
        x, y = self._aligned(other)
        return FockOperator(x.acting_modes, x.cutoff, x.matrix - y.matrix, x.hermitian and y.hermitian)

    def __neg__(self) -> "FockOperator":
        return FockOperator(self.acting_modes, self.cutoff, -self.matrix, self.hermitian)

    def __mul__(self, c) -> "FockOperator":
        c = complex(c)
        return FockOperator(self.acting_modes, self.cutoff, c * self.matrix, self.hermitian and c.imag == 0)

    __rmul__ = __mul__

    def __truediv__(self, c) -> "FockOperator":
        return self * (1.0 / c)

    def __matmul__(self, other: "FockOperator") -> "FockOperator":
        x, y = self._aligned(other)
        return FockOperator(x.acting_modes, x.cutoff, (x.matrix @ y.matrix).tocsr())

    def commutator(self, other: "FockOperator") -> "FockOperator":
        return self @ other - other @ self

    def is_hermitian(self, tol: float = DEFAULT_OP_TOL) -> bool:
        dev = self.matrix - self.matrix.conj().T
        return dev.nnz == 0 or abs(dev).max() < tol

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def max_abs_diff(self, other: "FockOperator") -> float:
        x, y = self._aligned(other)
        diff = x.matrix - y.matrix
        return float(abs(diff).max()) if diff.nnz else 0.0


def apply(op: FockOperator, s: PureState) -> PureState:
    """``op |s>`` on the acting modes; other modes untouched. Unnormalized."""
    if op.cutoff != s.cutoff:
        raise InvalidCutoffError(f"operator cutoff {op.cutoff} != state cutoff {s.cutoff}")
    pos = [s.position(m) for m in op.acting_modes]
    k, d = len(pos), s.cutoff
    t = np.moveaxis(s.amplitudes, pos, range(k))
    rest_shape = t.shape[k:]
    flat = t.reshape(d ** k, -1)
    out = (op.matrix @ flat).reshape((d,) * k + rest_shape)
    out = np.moveaxis(out, range(k), pos)
    return PureState(s.modes, d, out)


# ---------------------------------------------------------------------------
# operator words


@dataclass(frozen=True)
class Ladder:
    label: ModeLabel
    dagger: bool

    def __str__(self) -> str:
        return f"{self.label}{'+' if self.dagger else ''}"


_TOKEN_RE = re.compile(r"^([abe]\d*(?:\.\d+)?)(\+|†|\^\+)?(?:\^(\d+))?$")


@dataclass(frozen=True)
class OperatorWord:
    """Ordered product of ladder operators, read as written (no reordering).

    The empty word is the identity.
    """

    ops: tuple[Ladder, ...] = ()

    @classmethod
    def parse(cls, text: str) -> "OperatorWord":
        """``"a+ a b+ b"``, ``"a+^2 b^2"``, ``"a2 b2+"``; ``"1"`` or ``""`` is identity."""
        text = text.strip()
        if text in ("", "1"):
            return cls(())
        ops = []
        for tok in text.split():
            m = _TOKEN_RE.match(tok)
            if not m:
                raise ValueError(f"cannot parse word token {tok!r}")
            lab, dag, power = m.groups()
            ops.extend([Ladder(mode(lab), dag is not None)] * int(power or 1))
        return cls(tuple(ops))

    def __str__(self) -> str:
        return " ".join(map(str, self.ops)) or "1"

    def __len__(self) -> int:
        return len(self.ops)

    def __mul__(self, other: "OperatorWord") -> "OperatorWord":
        return OperatorWord(self.ops + other.ops)

    @property
    def labels(self) -> tuple[ModeLabel, ...]:
        seen = []
        for o in self.ops:
            if o.label not in seen:
                seen.append(o.label)
        return tuple(seen)

    def dag(self) -> "OperatorWord":
        return OperatorWord(tuple(Ladder(o.label, not o.dagger) for o in reversed(self.ops)))

    def relabel(self, mapping) -> "OperatorWord":
        mapping = {mode(k): mode(v) for k, v in dict(mapping).items()}
        return OperatorWord(tuple(Ladder(mapping.get(o.label, o.label), o.dagger) for o in self.ops))

    def on_copy(self, copy: int) -> "OperatorWord":
        return OperatorWord(
            tuple(Ladder(ModeLabel(o.label.party, copy, o.label.tag), o.dagger) for o in self.ops)
        )

    def per_mode(self) -> dict[ModeLabel, tuple[bool, ...]]:
        """Dagger pattern per mode, in written order (modes commute)."""
        out: dict[ModeLabel, list[bool]] = {}
        for o in self.ops:
            out.setdefault(o.label, []).append(o.dagger)
        return {k: tuple(v) for k, v in out.items()}

    def headroom(self) -> int:
        """Extra Fock levels needed to evaluate the word without truncation error.

        Scanning from the right (first applied), a raise that is later undone
        by a lowering must not be clipped at the top level.
        """
        need = 0
        for pattern in self.per_mode().values():
            h = 0
            for dag in reversed(pattern):
                if dag:
                    h += 1
                else:
                    need = max(need, h)
                    h -= 1
        return need

    def max_raise(self) -> int:
        """Largest net number of raises on any mode at any point of the application."""
        top = 0
        for pattern in self.per_mode().values():
            h = 0
            for dag in reversed(pattern):
                h += 1 if dag else -1
                top = max(top, h)
        return top

    def is_normal_ordered(self) -> bool:
        return all(
            list(p) == sorted(p, reverse=True) for p in self.per_mode().values()
        )

    def matrix(self, labels: Sequence[ModeLabel], cutoff: int) -> sp.csr_matrix:
        """Sparse matrix of the word on ``labels`` (truncated ladder matrices)."""
        pm = self.per_mode()
        missing = set(pm) - set(labels)
        if missing:
            raise ModeNotFoundError(f"word modes {sorted(map(str, missing))} not in {labels}")
        a = sp.csr_matrix(_annihilation_dense(cutoff))
        ad = a.T.tocsr()
        eye = sp.identity(cutoff, format="csr")
        out = None
        for lab in labels:
            m = eye
            for dag in pm.get(lab, ()):
                m = m @ (ad if dag else a)
            out = m if out is None else sp.kron(out, m, format="csr")
        return out.astype(complex)

    def operator(self, labels: Sequence | None, cutoff: int) -> FockOperator:
        labels = tuple(mode(l) for l in labels) if labels is not None else self.labels
        return FockOperator(labels, cutoff, self.matrix(labels, cutoff))


def word(text: str) -> OperatorWord:
    return OperatorWord.parse(text)


def _ladder_apply(t: np.ndarray, axis: int, dagger: bool) -> np.ndarray:
    """Apply a (truncated) ladder operator along one tensor axis."""
    d = t.shape[axis]
    out = np.zeros_like(t)
    src = [slice(None)] * t.ndim
    dst = [slice(None)] * t.ndim
    shape = [1] * t.ndim
    shape[axis] = d - 1
    if dagger:
        # a+|n> = sqrt(n+1)|n+1>
        src[axis] = slice(0, d - 1)
        dst[axis] = slice(1, d)
        fac = np.sqrt(np.arange(1, d, dtype=float)).reshape(shape)
    else:
        src[axis] = slice(1, d)
        dst[axis] = slice(0, d - 1)
        fac = np.sqrt(np.arange(1, d, dtype=float)).reshape(shape)
    out[tuple(dst)] = t[tuple(src)] * fac
    return out


def apply_word_tensor(w: OperatorWord, t: np.ndarray, positions: dict) -> np.ndarray:
    for o in reversed(w.ops):
        t = _ladder_apply(t, positions[o.label], o.dagger)
    return t


def apply_word(w: OperatorWord, s: PureState) -> PureState:
    """``w |s>`` with the state padded so nothing above the cutoff is lost."""
    pad = w.max_raise()
    padded = s.with_cutoff(s.cutoff + pad) if pad else s
    positions = {m: padded.position(m) for m in w.labels}
    return PureState(padded.modes, padded.cutoff, apply_word_tensor(w, padded.amplitudes, positions))


def _pure_word_expectation(w: OperatorWord, s: PureState) -> complex:
    if not w.ops:
        return complex(np.vdot(s.amplitudes, s.amplitudes))
    out = apply_word(w, s)
    ket = out.amplitudes
    bra = s.amplitudes if out.cutoff == s.cutoff else s.with_cutoff(out.cutoff).amplitudes
    return complex(np.vdot(bra, ket))


def expectation(obs: Union[FockOperator, OperatorWord, str], s: State) -> complex:
    """``<O>`` on a pure state or ensemble.

    Words are evaluated exactly for the (truncated) state vector: the state
    is padded by the word's headroom, so ``<a a+>`` on ``|d-1>`` is ``d``.
    Operators use their own truncated matrices.
    """
    if isinstance(obs, str):
        obs = word(obs)
    if isinstance(obs, WordSum):
        return obs.expectation(s)
    total = 0j
    for wgt, b in s.branches:
        if isinstance(obs, OperatorWord):
            val = _pure_word_expectation(obs, b)
        else:
            val = np.vdot(b.amplitudes, apply(obs, b).amplitudes)
        total += wgt * val
    return complex(total)


def moment(s: State, w: Union[OperatorWord, str]) -> complex:
    """Moment of an operator word; alias of :func:`expectation`."""
    return expectation(w if isinstance(w, OperatorWord) else word(w), s)


class WordSum:
    """Linear combination of operator words, closed under products.

    Expectations are evaluated word by word with padding, so they are exact
    for the truncated state vector.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean: dict[OperatorWord, complex] = {}
        for w, c in dict(terms or {}).items():
            w = w if isinstance(w, OperatorWord) else word(w)
            clean[w] = clean.get(w, 0) + complex(c)
        self.terms = {w: c for w, c in clean.items() if c != 0}

    @classmethod
    def of(cls, w, coeff=1.0) -> "WordSum":
        return cls({w if isinstance(w, OperatorWord) else word(w): coeff})

    def __add__(self, other) -> "WordSum":
        other = _as_sum(other)
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, 0) + c
        return WordSum(out)

    __radd__ = __add__

    def __neg__(self) -> "WordSum":
        return WordSum({w: -c for w, c in self.terms.items()})

    def __sub__(self, other) -> "WordSum":
        return self + (-_as_sum(other))

    def __rsub__(self, other) -> "WordSum":
        return _as_sum(other) - self

    def __mul__(self, other) -> "WordSum":
        if isinstance(other, (WordSum, OperatorWord, str)):
            return self @ _as_sum(other)
        return WordSum({w: c * other for w, c in self.terms.items()})

    def __rmul__(self, other) -> "WordSum":
        if isinstance(other, (OperatorWord, str)):
            return _as_sum(other) @ self
        return self * other

    def __truediv__(self, c) -> "WordSum":
        return self * (1.0 / c)

    def __matmul__(self, other) -> "WordSum":
        other = _as_sum(other)
        out: dict[OperatorWord, complex] = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = w1 * w2
                out[w] = out.get(w, 0) + c1 * c2
        return WordSum(out)

    def dag(self) -> "WordSum":
        return WordSum({w.dag(): np.conj(c) for w, c in self.terms.items()})

    def relabel(self, mapping) -> "WordSum":
        return WordSum({w.relabel(mapping): c for w, c in self.terms.items()})

    @property
    def labels(self) -> tuple[ModeLabel, ...]:
        seen: list[ModeLabel] = []
        for w in self.terms:
            for m in w.labels:
                if m not in seen:
                    seen.append(m)
        return tuple(seen)

    def operator(self, labels, cutoff: int, hermitian: bool = False) -> FockOperator:
        labels = tuple(mode(l) for l in labels) if labels is not None else self.labels
        dim = cutoff ** len(labels)
        mat = sp.csr_matrix((dim, dim), dtype=complex)
        for w, c in self.terms.items():
            mat = mat + c * w.matrix(labels, cutoff)
        mat.eliminate_zeros()
        return FockOperator(labels, cutoff, mat, hermitian)

    def expectation(self, s: State) -> complex:
        return sum((c * expectation(w, s) for w, c in self.terms.items()), 0j)

    def __repr__(self) -> str:
        return " + ".join(f"({c:g})[{w}]" for w, c in self.terms.items()) or "0"


def _as_sum(x) -> WordSum:
    if isinstance(x, WordSum):
        return x
    if isinstance(x, (OperatorWord, str)):
        return WordSum.of(x)
    return WordSum({OperatorWord(()): x})
