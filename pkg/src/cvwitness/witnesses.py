"""Moment-determinant witnesses, their multicopy observables and related criteria."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from .circuits import MAX_AMPLITUDES, apply_losses
from .fock import (
    FockError,
    FockOperator,
    ModeLabel,
    OperatorWord,
    Party,
    PureState,
    State,
    TooLargeError,
    WordSum,
    _ladder_apply,
    expectation,
    mode,
    norm_leakage,
    tensor,
    word,
)
from .spin import spin_sum


class NumericalInconsistencyError(FockError, ArithmeticError):
    pass


class OptimizationUndefinedError(FockError, ValueError):
    pass


# ---------------------------------------------------------------------------
# determinant specifications


@dataclass(frozen=True)
class DeterminantSpec:
    name: str
    entries: tuple[tuple[OperatorWord, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(w if isinstance(w, OperatorWord) else word(w) for w in r) for r in self.entries)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise ValueError("determinant spec must be a non-empty square grid")
        for r in rows:
            for w in r:
                for lab in w.labels:
                    if lab.party is Party.ANCILLA or lab.copy != 1:
                        raise ValueError(f"entry {w} must use single-copy modes a1/b1 only")
        object.__setattr__(self, "entries", rows)

    @property
    def size(self) -> int:
        return len(self.entries)


def _spec(name, grid):
    return DeterminantSpec(name, tuple(tuple(word(x) for x in row) for row in grid))


D124 = _spec("d124", [["1", "a1", "b1+"], ["a1+", "a1+ a1", "a1+ b1+"], ["b1", "a1 b1", "b1+ b1"]])
D24 = _spec("d24", [["a1+ a1", "a1+ b1+"], ["a1 b1", "b1+ b1"]])
D149 = _spec(
    "d149",
    [
        ["1", "b1+", "a1 b1+"],
        ["b1", "b1+ b1", "a1 b1+ b1"],
        ["a1+ b1", "a1+ b1+ b1", "a1+ a1 b1+ b1"],
    ],
)
D1913 = _spec(
    "d1913",
    [
        ["1", "a1 b1+", "a1+ b1"],
        ["a1+ b1", "a1+ a1 b1+ b1", "a1+^2 b1^2"],
        ["a1 b1+", "a1^2 b1+^2", "a1 a1+ b1 b1+"],
    ],
)
DETERMINANTS = {s.name: s for s in (D124, D24, D149, D1913)}


def bipartite_modes(s: State) -> tuple[ModeLabel, ModeLabel]:
    """The unique A and B modes of a single-copy state (ancillas ignored)."""
    a = [m for m in s.modes if m.party is Party.A]
    b = [m for m in s.modes if m.party is Party.B]
    if len(a) != 1 or len(b) != 1:
        raise ValueError(f"expected one A and one B mode, got {s.modes}")
    return a[0], b[0]


def _bind(w: OperatorWord, a: ModeLabel, b: ModeLabel) -> OperatorWord:
    return w.relabel({"a1": a, "b1": b})


def moment_matrix(spec: DeterminantSpec, s: State, labels=None) -> np.ndarray:
    a, b = (mode(x) for x in labels) if labels else bipartite_modes(s)
    n = spec.size
    out = np.empty((n, n), dtype=complex)
    cache: dict[OperatorWord, complex] = {}
    for i, row in enumerate(spec.entries):
        for j, w in enumerate(row):
            bw = _bind(w, a, b)
            if bw not in cache:
                cache[bw] = expectation(bw, s)
            out[i, j] = cache[bw]
    return out


def _real(value: complex, what: str, tol: float = 1e-9) -> float:
    if abs(value.imag) > tol * max(1.0, abs(value.real)):
        raise NumericalInconsistencyError(f"{what} has imaginary part {value.imag:.3g}")
    return float(value.real)


def det_witness(spec: DeterminantSpec | str, s: State, labels=None) -> float:
    """Determinant of the moment matrix; real by construction."""
    spec = DETERMINANTS[spec] if isinstance(spec, str) else spec
    return _real(complex(np.linalg.det(moment_matrix(spec, s, labels))), spec.name)


# ---------------------------------------------------------------------------
# second-order forms


def _quadratures(a: ModeLabel):
    x = (WordSum.of(f"{a}") + WordSum.of(f"{a}+")) / math.sqrt(2)
    p = (WordSum.of(f"{a}") - WordSum.of(f"{a}+")) * (-1j / math.sqrt(2))
    return x, p


def _cov(y: WordSum, z: WordSum, s: State) -> float:
    return _real((y @ z).expectation(s) - y.expectation(s) * z.expectation(s), "covariance")


@dataclass(frozen=True)
class QuadratureMoments:
    var_x1: float
    var_p1: float
    var_x2: float
    var_p2: float
    cov_x1x2: float
    cov_p1p2: float
    cov_x1p2: float
    cov_x2p1: float

    @property
    def a1(self) -> float:
        return self.var_x1 + self.var_p1 - 1

    @property
    def a2(self) -> float:
        return self.var_x2 + self.var_p2 - 1


def quadrature_moments(s: State, labels=None) -> QuadratureMoments:
    """Local quadrature variances and cross covariances (x = (a + a+)/sqrt 2)."""
    a, b = (mode(x) for x in labels) if labels else bipartite_modes(s)
    x1, p1 = _quadratures(a)
    x2, p2 = _quadratures(b)
    return QuadratureMoments(
        _cov(x1, x1, s), _cov(p1, p1, s), _cov(x2, x2, s), _cov(p2, p2, s),
        _cov(x1, x2, s), _cov(p1, p2, s), _cov(x1, p2, s), _cov(x2, p1, s),
    )


def duan(s: State, r: float, sign: int = +1, labels=None) -> float:
    """sigma^2(x_+-) + sigma^2(p_-+) - (r^2 + 1/r^2) for x_+- = |r| x1 +- x2/r."""
    if r == 0:
        raise ValueError("Duan criterion needs r != 0")
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    q = quadrature_moments(s, labels)
    var_x = r**2 * q.var_x1 + q.var_x2 / r**2 + sign * 2 * q.cov_x1x2 * np.sign(r)
    var_p = r**2 * q.var_p1 + q.var_p2 / r**2 - sign * 2 * q.cov_p1p2 * np.sign(r)
    return float(var_x + var_p - (r**2 + 1 / r**2))


def duan_optimized(s: State, labels=None, tol: float = 1e-12) -> float:
    """Duan criterion minimized over r and over the sign choice.

    2 sqrt(A1 A2) - 2 |cov(x1,x2) - cov(p1,p2)| with A = var_x + var_p - 1.
    """
    q = quadrature_moments(s, labels)
    if q.a1 <= tol or q.a2 < -tol:
        raise OptimizationUndefinedError(
            f"optimal r undefined: var_x1 + var_p1 - 1 = {q.a1:.3g}, var_x2 + var_p2 - 1 = {q.a2:.3g}"
        )
    return float(2 * math.sqrt(q.a1 * max(q.a2, 0.0)) - 2 * abs(q.cov_x1x2 - q.cov_p1p2))


def duan_optimal_r(s: State, labels=None) -> float:
    q = quadrature_moments(s, labels)
    if q.a1 <= 0 or q.a2 <= 0:
        raise OptimizationUndefinedError("optimal r undefined for vacuum-like marginals")
    return float((q.a2 / q.a1) ** 0.25)


def d124_covariance_form(s: State, labels=None) -> float:
    a, b = (mode(x) for x in labels) if labels else bipartite_modes(s)

    def m(t):
        return expectation(word(t), s)

    s_aa = m(f"{a}+ {a}") - m(f"{a}+") * m(f"{a}")
    s_bb = m(f"{b}+ {b}") - m(f"{b}+") * m(f"{b}")
    s_adbd = m(f"{a}+ {b}+") - m(f"{a}+") * m(f"{b}+")
    s_ab = m(f"{a} {b}") - m(f"{a}") * m(f"{b}")
    return _real(s_aa * s_bb - s_adbd * s_ab, "d124 covariance form")


# ---------------------------------------------------------------------------
# Agarwal-type criterion d'


def _agarwal_moment_form(s: State, a: ModeLabel, b: ModeLabel) -> complex:
    def m(t):
        return expectation(word(t), s)

    m1 = m(f"{a}+ {a} {b}+ {b}")
    m2 = m(f"{a} {a}+ {b} {b}+")
    m3 = m(f"{a}+^2 {b}^2")
    m4 = m(f"{a}^2 {b}+^2")
    u = m(f"{a}+ {b}") + m(f"{a} {b}+")
    v = m(f"{a}+ {b}") - m(f"{a} {b}+")
    w = m(f"{a}+ {a}") + m(f"{b}+ {b}") + 1
    return (m1 + m2 + m3 + m4 - u**2) * (m1 + m2 - m3 - m4 + v**2) - w**2


def agarwal_spin_form(s: State, labels=None) -> float:
    a, b = (mode(x) for x in labels) if labels else bipartite_modes(s)
    mean = {}
    var = {}
    for c in "xyz0":
        op = spin_sum(c, (a, b))
        mu = op.expectation(s)
        mean[c] = _real(mu, f"<L{c}>")
        var[c] = _real((op @ op).expectation(s) - mu**2, f"var L{c}")
    return float(
        16 * var["x"] * var["y"] + 4 * var["0"] - 4 * var["z"]
        - 4 * mean["x"] ** 2 - 4 * mean["y"] ** 2 - 4 * mean["z"] ** 2
    )


def agarwal_d1913(s: State, labels=None, tol: float = 1e-9) -> float:
    """d' from moments, cross-checked against its spin-operator form."""
    a, b = (mode(x) for x in labels) if labels else bipartite_modes(s)
    value = _real(_agarwal_moment_form(s, a, b), "d'1913")
    spin_value = agarwal_spin_form(s, (a, b))
    if abs(value - spin_value) > tol * max(1.0, abs(value)):
        raise NumericalInconsistencyError(
            f"moment form {value!r} and spin form {spin_value!r} of d' disagree"
        )
    return value


# ---------------------------------------------------------------------------
# multicopy observables


@dataclass(frozen=True)
class MulticopyTerm:
    coeff: float
    words: tuple[OperatorWord, ...]  # words[k] acts on copy k (single-copy labels)


@lru_cache(maxsize=None)
def expand_multicopy(spec: DeterminantSpec) -> tuple[MulticopyTerm, ...]:
    """(1/n!) sum_sigma det[W_ij on copy sigma(i)] as a list of product terms."""
    n = spec.size
    terms = []
    norm = math.factorial(n)
    for sigma in itertools.permutations(range(n)):
        for pi in itertools.permutations(range(n)):
            sign = _perm_sign(pi)
            per_copy = [None] * n
            for i in range(n):
                per_copy[sigma[i]] = spec.entries[i][pi[i]]
            terms.append(MulticopyTerm(sign / norm, tuple(per_copy)))
    return tuple(terms)


def _perm_sign(p) -> int:
    p = list(p)
    sign = 1
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def normal_order(pattern: Sequence[bool]) -> dict[tuple[int, int], float]:
    """Single-mode word (True = creation) as sum of c * a+^q a^p."""
    terms: dict[tuple[int, int], float] = {(0, 0): 1.0}
    for dag in pattern:
        new: dict[tuple[int, int], float] = {}
        for (q, p), c in terms.items():
            if dag:
                # a+^q a^p a+ = a+^(q+1) a^p + p a+^q a^(p-1)
                new[(q + 1, p)] = new.get((q + 1, p), 0.0) + c
                if p:
                    new[(q, p - 1)] = new.get((q, p - 1), 0.0) + c * p
            else:
                new[(q, p + 1)] = new.get((q, p + 1), 0.0) + c
        terms = {k: v for k, v in new.items() if v != 0}
    return terms


def _normal_word(label: ModeLabel, q: int, p: int) -> OperatorWord:
    return word(" ".join([f"{label}+"] * q + [f"{label}"] * p))


def lossy_moment(w: OperatorWord, s: State, taus: Mapping[ModeLabel, float]) -> complex:
    """<w> after pure loss, from moments of the lossless state.

    Each mode's factor is normal ordered and every a+^q a^p term picks up
    tau^((q+p)/2); this is exact for a vacuum loss ancilla.
    """
    per_mode = w.per_mode()
    if not per_mode:
        return expectation(w, s)
    expansions = []
    for lab, pattern in per_mode.items():
        tau = taus.get(lab, 1.0)
        expansions.append([(c * tau ** ((q + p) / 2), lab, q, p) for (q, p), c in normal_order(pattern).items()])
    total = 0j
    for combo in itertools.product(*expansions):
        coeff = 1.0
        ops: tuple = ()
        for c, lab, q, p in combo:
            coeff *= c
            ops += _normal_word(lab, q, p).ops
        if coeff != 0:
            total += coeff * expectation(OperatorWord(ops), s)
    return total


def _copy_losses(losses: Mapping | None, k: int) -> dict[str, float]:
    """Loss map entries for copy k+1, keyed by party letter."""
    out = {}
    for lab, tau in (losses or {}).items():
        m = mode(lab)
        if m.copy == k + 1:
            out[m.party.value] = float(tau)
    return out


def multicopy_expectation(
    spec: DeterminantSpec | str,
    states: Sequence[State],
    losses: Mapping | None = None,
) -> float:
    """Permutation-averaged multicopy determinant on a product of copies.

    ``states[k]`` is a single-copy state (one A and one B mode) for copy
    k+1; ``losses`` maps labels such as ``"a2"`` (party A of copy 2) to
    transmittances. Evaluated by factorizing every term into single-copy
    moments.
    """
    spec = DETERMINANTS[spec] if isinstance(spec, str) else spec
    if len(states) != spec.size:
        raise ValueError(f"{spec.name} needs {spec.size} copies, got {len(states)}")
    moments: list[dict] = []
    binds = []
    for k, st in enumerate(states):
        a, b = bipartite_modes(st)
        cl = _copy_losses(losses, k)
        binds.append((a, b, {a: cl.get("a", 1.0), b: cl.get("b", 1.0)}))
        moments.append({})
    total = 0j
    for term in expand_multicopy(spec):
        prod = term.coeff
        for k, w in enumerate(term.words):
            cache = moments[k]
            if w not in cache:
                a, b, taus = binds[k]
                cache[w] = lossy_moment(_bind(w, a, b), states[k], taus)
            prod = prod * cache[w]
            if prod == 0:
                break
        total += prod
    return _real(total, f"multicopy {spec.name}")


def copies_state(states: Sequence[State], losses: Mapping | None = None) -> State:
    """Tensor the copies (relabelled a_k, b_k) and apply real loss ancillas."""
    parts = []
    for k, st in enumerate(states):
        a, b = bipartite_modes(st)
        parts.append(st.relabel({a: ModeLabel(Party.A, k + 1), b: ModeLabel(Party.B, k + 1)}))
    dim = parts[0].cutoff ** (2 * len(parts) + sum(1 for t in (losses or {}).values() if t != 1))
    if dim > MAX_AMPLITUDES:
        raise TooLargeError(f"multicopy state would hold {dim} amplitudes (budget {MAX_AMPLITUDES})")
    return apply_losses(tensor(*parts), {mode(k): v for k, v in (losses or {}).items()})


def _word_on_copy(w: OperatorWord, k: int) -> OperatorWord:
    return w.relabel({"a1": ModeLabel(Party.A, k + 1), "b1": ModeLabel(Party.B, k + 1)})


def multicopy_expectation_tensor(
    spec: DeterminantSpec | str,
    states: Sequence[State],
    losses: Mapping | None = None,
) -> float:
    """Same quantity as :func:`multicopy_expectation`, on the explicit multicopy state."""
    spec = DETERMINANTS[spec] if isinstance(spec, str) else spec
    if len(states) != spec.size:
        raise ValueError(f"{spec.name} needs {spec.size} copies, got {len(states)}")
    big = copies_state(states, losses)
    terms = [
        (t.coeff, OperatorWord(sum((_word_on_copy(w, k).ops for k, w in enumerate(t.words)), ())))
        for t in expand_multicopy(spec)
    ]
    return _real(expect_words(big, terms), f"multicopy {spec.name} (tensor)")


def expect_words(s: State, terms) -> complex:
    """sum_i c_i <w_i> with a single shared padding of the state."""
    pad = max((w.headroom() for _, w in terms), default=0)
    total = 0j
    for wgt, br in s.branches:
        st = br.with_cutoff(br.cutoff + pad) if pad else br
        pos = {m: i for i, m in enumerate(st.modes)}
        amps = st.amplitudes
        acc = 0j
        for c, w in terms:
            t = amps
            for o in reversed(w.ops):
                t = _ladder_apply(t, pos[o.label], o.dagger)
            acc += c * np.vdot(amps, t)
        total += wgt * acc
    return complex(total)


def multicopy_sum(spec: DeterminantSpec | str, n_copies: int | None = None) -> WordSum:
    """The multicopy observable as a word sum on modes a_k, b_k."""
    spec = DETERMINANTS[spec] if isinstance(spec, str) else spec
    out: dict[OperatorWord, complex] = {}
    for t in expand_multicopy(spec):
        w = OperatorWord(sum((_word_on_copy(x, k).ops for k, x in enumerate(t.words)), ()))
        out[w] = out.get(w, 0) + t.coeff
    return WordSum(out)


def multicopy_operator(spec: DeterminantSpec | str, cutoff: int) -> FockOperator:
    spec = DETERMINANTS[spec] if isinstance(spec, str) else spec
    n = spec.size
    labels = tuple(ModeLabel(Party.A, k + 1) for k in range(n)) + tuple(ModeLabel(Party.B, k + 1) for k in range(n))
    return multicopy_sum(spec).operator(labels, cutoff)


def d24_primed_sum(a_pair=("a2", "a3"), b_pair=("b2", "b3")) -> WordSum:
    """D24 written on the concentrated modes 2', 3'."""
    a2, a3 = (mode(x) for x in a_pair)
    b2, b3 = (mode(x) for x in b_pair)
    return 0.5 * (
        WordSum.of(f"{a2}+ {a2} {b3}+ {b3}")
        + WordSum.of(f"{a3}+ {a3} {b2}+ {b2}")
        - WordSum.of(f"{a2}+ {a3} {b2}+ {b3}")
        - WordSum.of(f"{a3}+ {a2} {b3}+ {b2}")
    )


def mean_field_reduction_check(s: State, cutoff_cap: int | None = None) -> tuple[float, float]:
    """(<D124> on three copies, <D24 on modes 2',3'> after the concentrator)."""
    from .measurement import LocalCopies
    from .circuits import concentrator

    before = multicopy_expectation("d124", [s, s, s])
    out = LocalCopies([s, s, s]).run(concentrator("a"), concentrator("b"))
    after = out.expect(d24_primed_sum())
    return before, _real(after, "reduced D24")


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class WitnessReport:
    witness: str
    params: dict
    value: float
    oracle: float | None = None
    leakage: float = 0.0

    @property
    def abs_err(self) -> float | None:
        return None if self.oracle is None else abs(self.value - self.oracle)


def leakage_of(states) -> float:
    if not isinstance(states, (list, tuple)):
        states = [states]
    return max(norm_leakage(s) for s in states)
