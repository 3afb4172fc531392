"""Constructors for the state families used throughout the package.

Analytic states are truncated at the cutoff and renormalized. The discarded
probability mass is compared with ``max_leakage`` and a
:class:`CutoffTooSmallError` is raised when it is exceeded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from .fock import (
    DEFAULT_LEAKAGE_BUDGET,
    CutoffTooSmallError,
    Ensemble,
    FockError,
    InvalidCutoffError,
    PureState,
    State,
    _annihilation_dense,
    _check_cutoff,
    map_branches,
    mode,
    tensor,
)


class IllDefinedStateError(FockError, ValueError):
    pass


def _check_leak(tail: float, max_leakage: float, what: str, cutoff: int) -> None:
    if tail > max_leakage:
        raise CutoffTooSmallError(
            f"{what}: truncation at cutoff {cutoff} discards probability {tail:.3g} "
            f"(budget {max_leakage:.3g}); raise the cutoff or pass max_leakage"
        )


def _coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    """Untruncated-normalized coefficients e^{-|a|^2/2} a^n / sqrt(n!)."""
    n = np.arange(cutoff)
    alpha = complex(alpha)
    if alpha == 0:
        out = np.zeros(cutoff, dtype=complex)
        out[0] = 1.0
        return out
    logmag = n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1) - 0.5 * abs(alpha) ** 2
    return np.exp(logmag) * np.exp(1j * n * np.angle(alpha))


def vacuum(n_modes: int = 1, cutoff: int = 2, labels=None) -> PureState:
    cutoff = _check_cutoff(cutoff)
    labels = labels or _default_labels(n_modes)
    amps = np.zeros((cutoff,) * len(labels), dtype=complex)
    amps[(0,) * len(labels)] = 1.0
    return PureState(tuple(labels), cutoff, amps)


def _default_labels(n_modes: int):
    names = ["a1", "b1", "a2", "b2", "a3", "b3"]
    if n_modes > len(names):
        return [f"a{i + 1}" for i in range(n_modes)]
    return names[:n_modes]


def fock(n: int, cutoff: int, label="a1") -> PureState:
    cutoff = _check_cutoff(cutoff)
    if not 0 <= n < cutoff:
        raise InvalidCutoffError(f"Fock level {n} not representable at cutoff {cutoff}")
    amps = np.zeros(cutoff, dtype=complex)
    amps[n] = 1.0
    return PureState((mode(label),), cutoff, amps)


def fock_product(ns, cutoff: int, labels=("a1", "b1")) -> PureState:
    """|n_1, n_2, ...> on the given labels."""
    if len(ns) != len(labels):
        raise ValueError("need one occupation per label")
    return tensor(*(fock(n, cutoff, lab) for n, lab in zip(ns, labels)))


def coherent(alpha: complex, cutoff: int, label="a1", max_leakage: float = DEFAULT_LEAKAGE_BUDGET) -> PureState:
    cutoff = _check_cutoff(cutoff)
    c = _coherent_amplitudes(alpha, cutoff)
    tail = max(0.0, 1.0 - float(np.sum(np.abs(c) ** 2)))
    _check_leak(tail, max_leakage, f"coherent({alpha})", cutoff)
    return PureState((mode(label),), cutoff, c / np.linalg.norm(c))


def coherent_product(alphas, cutoff: int, labels=("a1", "b1"), max_leakage: float = DEFAULT_LEAKAGE_BUDGET) -> PureState:
    return tensor(*(coherent(a, cutoff, lab, max_leakage) for a, lab in zip(alphas, labels)))


def squeezed(r: float, cutoff: int, label="a1", phi: float = 0.0, max_leakage: float = DEFAULT_LEAKAGE_BUDGET) -> PureState:
    """Single-mode squeezed vacuum.

    Amplitudes on |2k> are (-e^{i phi} tanh r)^k sqrt((2k)!)/(2^k k!) / sqrt(cosh r).
    With ``phi = 0`` the x quadrature is squeezed and <a^2> = -cosh r sinh r.
    """
    cutoff = _check_cutoff(cutoff)
    if r < 0:
        raise ValueError("squeezing parameter must be non-negative")
    amps = np.zeros(cutoff, dtype=complex)
    k = np.arange((cutoff + 1) // 2)
    t = np.tanh(r)
    if r == 0:
        amps[0] = 1.0
    else:
        logmag = k * np.log(t) + 0.5 * gammaln(2 * k + 1) - k * np.log(2) - gammaln(k + 1) - 0.5 * np.log(np.cosh(r))
        amps[2 * k] = np.exp(logmag) * (-np.exp(1j * phi)) ** k
    tail = max(0.0, 1.0 - float(np.sum(np.abs(amps) ** 2)))
    _check_leak(tail, max_leakage, f"squeezed({r})", cutoff)
    return PureState((mode(label),), cutoff, amps / np.linalg.norm(amps))


@dataclass(frozen=True)
class TmsvParams:
    lam: float
    cutoff: int

    def __post_init__(self):
        if not -1 < self.lam < 1:
            raise ValueError(f"TMSV parameter must lie in (-1, 1), got {self.lam}")
        _check_cutoff(self.cutoff)


def tmsv(lam: float, cutoff: int, labels=("a1", "b1"), max_leakage: float = DEFAULT_LEAKAGE_BUDGET) -> PureState:
    """Two-mode squeezed vacuum sqrt(1-lam^2) sum_n lam^n |n,n>."""
    p = TmsvParams(lam, cutoff)
    n = np.arange(p.cutoff)
    diag = np.sqrt(1 - lam**2) * lam**n
    tail = float(lam ** (2 * p.cutoff))
    _check_leak(tail, max_leakage, f"tmsv({lam})", p.cutoff)
    amps = np.diag(diag / np.linalg.norm(diag)).astype(complex)
    return PureState(tuple(mode(l) for l in labels), p.cutoff, amps)


def tmsv_cutoff(lam: float, budget: float = DEFAULT_LEAKAGE_BUDGET, cap: int = 400) -> int:
    """Smallest cutoff whose discarded TMSV weight lam^(2d) is within budget."""
    if lam == 0:
        return 2
    d = int(np.ceil(np.log(budget) / (2 * np.log(abs(lam)))))
    return int(min(max(d, 2), cap))


def poisson_cutoff(mean: float, budget: float = DEFAULT_LEAKAGE_BUDGET, cap: int = 200) -> int:
    """Smallest cutoff with Poisson(mean) tail mass below budget."""
    from scipy.stats import poisson

    if mean <= 0:
        return 2
    d = int(poisson.isf(budget, mean)) + 2
    return int(min(max(d, 2), cap))


@dataclass(frozen=True)
class CatParams:
    alpha: complex
    beta: complex
    z: float
    cutoff: int

    def __post_init__(self):
        if not 0 <= self.z <= 1:
            raise ValueError(f"mixing parameter z must lie in [0, 1], got {self.z}")
        if self.z == 0 and self.alpha == 0 and self.beta == 0:
            raise IllDefinedStateError("cat state is ill-defined for z = 0 and alpha = beta = 0")
        _check_cutoff(self.cutoff)


def cat_normalization(alpha: complex, beta: complex, z: float) -> float:
    """N(alpha, beta, z) of the mixed cat density operator."""
    s = np.exp(-2 * (abs(alpha) ** 2 + abs(beta) ** 2))
    return 0.5 / (1 - (1 - z) * s)


def cat_weights(alpha: complex, beta: complex, z: float) -> tuple[float, float]:
    """Weights of the even and odd branches in the rank-2 decomposition."""
    s = np.exp(-2 * (abs(alpha) ** 2 + abs(beta) ** 2))
    n = cat_normalization(alpha, beta, z)
    w_plus = n * z * (1 + s)
    w_minus = n * (2 - z) * (1 - s)
    total = w_plus + w_minus
    return w_plus / total, w_minus / total


def _cat_branch(alpha, beta, sign: int, cutoff: int, labels) -> tuple[PureState, float]:
    ca = _coherent_amplitudes(alpha, cutoff)
    cb = _coherent_amplitudes(beta, cutoff)
    m = np.arange(cutoff)
    parity = (-1.0) ** np.add.outer(m, m)
    amps = np.multiply.outer(ca, cb) * (1 + sign * parity)
    # norm^2 of the untruncated branch is 2(1 + sign*s)
    s = np.exp(-2 * (abs(alpha) ** 2 + abs(beta) ** 2))
    full = 2 * (1 + sign * s)
    kept = float(np.sum(np.abs(amps) ** 2))
    tail = max(0.0, 1 - kept / full) if full > 0 else 0.0
    return PureState(tuple(mode(l) for l in labels), cutoff, amps / np.sqrt(kept)), tail


def mixed_cat(
    alpha: complex,
    beta: complex,
    z: float,
    cutoff: int,
    labels=("a1", "b1"),
    max_leakage: float = DEFAULT_LEAKAGE_BUDGET,
) -> State:
    """Mixed two-mode cat state as an ensemble of even/odd superpositions.

    rho = w+ |+><+| + w- |-><-| with |+-> proportional to |a,b> +- |-a,-b>.
    Branches with zero weight are dropped, so z = 0 yields a single odd
    branch.
    """
    p = CatParams(complex(alpha), complex(beta), float(z), cutoff)
    w_plus, w_minus = cat_weights(p.alpha, p.beta, p.z)
    branches = []
    tail = 0.0
    for w, sign in ((w_plus, +1), (w_minus, -1)):
        if w <= 1e-15:
            continue
        st, t = _cat_branch(p.alpha, p.beta, sign, p.cutoff, labels)
        branches.append((w, st))
        tail += w * t
    _check_leak(tail, max_leakage, f"mixed_cat({alpha}, {beta}, {z})", p.cutoff)
    total = sum(w for w, _ in branches)
    return Ensemble(tuple((w / total, s) for w, s in branches))


def cat_density_matrix(alpha, beta, z, cutoff) -> np.ndarray:
    """Literal density matrix of the mixed cat (untruncated-normalized coherent kets)."""
    ca = _coherent_amplitudes(alpha, cutoff)
    cb = _coherent_amplitudes(beta, cutoff)
    plus = np.multiply.outer(ca, cb).ravel()
    minus = np.multiply.outer(_coherent_amplitudes(-alpha, cutoff), _coherent_amplitudes(-beta, cutoff)).ravel()
    n = cat_normalization(alpha, beta, z)
    rho = np.outer(plus, plus.conj()) + np.outer(minus, minus.conj())
    rho -= (1 - z) * (np.outer(plus, minus.conj()) + np.outer(minus, plus.conj()))
    return n * rho


@dataclass(frozen=True)
class NoonParams:
    n: int
    alpha: complex
    beta: complex
    cutoff: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("NOON photon number must be an integer >= 1")
        if abs(abs(self.alpha) ** 2 + abs(self.beta) ** 2 - 1) > 1e-10:
            raise ValueError("NOON amplitudes must satisfy |alpha|^2 + |beta|^2 = 1")
        if self.cutoff <= self.n:
            raise InvalidCutoffError(f"NOON state with n={self.n} needs cutoff > n")


def noon(n: int, alpha: complex, beta: complex, cutoff: int | None = None, labels=("a1", "b1")) -> PureState:
    """alpha|n,0> + beta|0,n>; exact at any cutoff above n."""
    cutoff = n + 1 if cutoff is None else cutoff
    p = NoonParams(int(n), complex(alpha), complex(beta), cutoff)
    amps = np.zeros((cutoff, cutoff), dtype=complex)
    amps[p.n, 0] += p.alpha
    amps[0, p.n] += p.beta
    return PureState(tuple(mode(l) for l in labels), cutoff, amps)


# ---------------------------------------------------------------------------
# local unitaries on existing states


def _single_mode_unitary(state: PureState, label, u: np.ndarray) -> PureState:
    pos = state.position(label)
    t = np.moveaxis(state.amplitudes, pos, 0)
    out = np.tensordot(u, t, axes=(1, 0))
    return PureState(state.modes, state.cutoff, np.moveaxis(out, 0, pos))


def displace(s: State, label, alpha: complex, pad: int = 40) -> State:
    """Apply D(alpha) to one mode.

    The displacement is exponentiated at cutoff + pad and the result is
    truncated back and renormalized, so the error is set by the state's
    own tail rather than by the truncated generator.
    """

    def one(st: PureState) -> PureState:
        d = st.cutoff
        big = d + pad
        a = _annihilation_dense(big)
        gen = alpha * a.conj().T - np.conj(alpha) * a
        u = expm(gen)[:d, :d]
        out = _single_mode_unitary(st, label, u)
        return PureState(out.modes, d, out.amplitudes / out.norm())

    return map_branches(one, s)


def phase_rotate(s: State, label, theta: float) -> State:
    """exp(i theta n) on one mode (a -> a e^{i theta})."""

    def one(st: PureState) -> PureState:
        return _single_mode_unitary(st, label, np.diag(np.exp(1j * theta * np.arange(st.cutoff))))

    return map_branches(one, s)


def on_copy(s: State, copy: int) -> State:
    """Relabel every mode of a single-copy state to the given copy index."""
    from .fock import ModeLabel

    mapping = {m: ModeLabel(m.party, copy, m.tag) for m in s.modes}
    return s.relabel(mapping)
