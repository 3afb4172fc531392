"""Photon-counting readout of the witnesses: circuits, exact statistics and finite-shot sampling.

Local multicopy circuits never couple Alice's modes to Bob's, and each side's
circuit conserves that side's photon number. :class:`LocalCopies` exploits this:
every copy is reduced to a few bipartite amplitude matrices c (rows n_A,
columns n_B), the copies are combined with a Kronecker product, and each pair of
photon-number blocks is propagated exactly with the per-side block isometries.
No multimode Fock tensor is ever padded, so the readout is exact at any input
cutoff.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy import sparse

from .circuits import (
    CircuitSpec,
    apply_circuit,
    apply_losses,
    block_isometries,
    get_circuit,
)
from .fock import (
    FockError,
    ModeLabel,
    OperatorWord,
    Party,
    State,
    TooLargeError,
    WordSum,
    mode,
    photon_distribution,
    tensor,
    word,
)

DEFAULT_SHOTS = 100_000
MAX_OUTCOMES = 20_000_000
_SVD_RTOL = 1e-15
_BATCH_ENTRIES = 1_000_000  # complex entries per joint batch


class UnknownWitnessError(FockError, KeyError):
    pass


class NonLocalCircuitError(FockError, ValueError):
    pass


# ---------------------------------------------------------------------------
# photon-number polynomials


Monomial = tuple  # sorted ((ModeLabel, power), ...)


@dataclass(frozen=True)
class NumberPoly:
    """Real polynomial in photon-number operators of distinct modes."""

    terms: Mapping[Monomial, float] = field(default_factory=dict)

    @staticmethod
    def n(label) -> "NumberPoly":
        return NumberPoly({((mode(label), 1),): 1.0})

    @staticmethod
    def const(c: float) -> "NumberPoly":
        return NumberPoly({(): float(c)})

    def _coerce(self, other) -> "NumberPoly":
        return other if isinstance(other, NumberPoly) else NumberPoly.const(other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0.0) + v
        return NumberPoly({k: v for k, v in out.items() if v != 0})

    __radd__ = __add__

    def __neg__(self):
        return NumberPoly({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        out: dict = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                powers = dict(k1)
                for lab, p in k2:
                    powers[lab] = powers.get(lab, 0) + p
                key = tuple(sorted(powers.items()))
                out[key] = out.get(key, 0.0) + v1 * v2
        return NumberPoly({k: v for k, v in out.items() if v != 0})

    __rmul__ = __mul__

    @property
    def labels(self) -> tuple[ModeLabel, ...]:
        return tuple(sorted({lab for k in self.terms for lab, _ in k}))

    def evaluate(self, occupations: np.ndarray, labels: Sequence[ModeLabel]) -> np.ndarray:
        """Values on occupation rows whose columns follow ``labels``."""
        occupations = np.asarray(occupations, dtype=float)
        col = {lab: i for i, lab in enumerate(labels)}
        out = np.zeros(occupations.shape[0])
        for mono, c in self.terms.items():
            v = np.full(occupations.shape[0], c)
            for lab, p in mono:
                v = v * occupations[:, col[lab]] ** p
            out += v
        return out


def n(label) -> NumberPoly:
    return NumberPoly.n(label)


# ---------------------------------------------------------------------------
# bipartite multicopy engine


def _split_local(spec: CircuitSpec) -> tuple[CircuitSpec, CircuitSpec]:
    a, b = [], []
    for el in spec.elements:
        parties = {m.party for m in el.modes}
        if parties == {Party.A}:
            a.append(el)
        elif parties == {Party.B}:
            b.append(el)
        else:
            raise NonLocalCircuitError(f"element {el} acts across the bipartition")
    return CircuitSpec(tuple(a)), CircuitSpec(tuple(b))


def _copy_components(s: State, cutoff: int, taus: tuple[float, float]) -> list[np.ndarray]:
    """Amplitude matrices c_k (rows n_A, cols n_B) with rho_AB = sum_k c_k c_k^+."""
    a = next(m for m in s.modes if m.party is Party.A)
    b = next(m for m in s.modes if m.party is Party.B)
    losses = {lab: t for lab, t in zip((a, b), taus) if t != 1.0}
    s = apply_losses(s.with_cutoff(cutoff), losses) if losses else s.with_cutoff(cutoff)
    cols = []
    for w, br in s.branches:
        t = np.moveaxis(br.amplitudes, (br.position(a), br.position(b)), (0, 1))
        cols.append(math.sqrt(w) * t.reshape(cutoff * cutoff, -1))
    m = np.concatenate(cols, axis=1)
    if m.shape[1] == 1:
        return [m[:, 0].reshape(cutoff, cutoff)]
    u, sv, _ = np.linalg.svd(m, full_matrices=False)
    keep = sv**2 > _SVD_RTOL * float(np.sum(sv**2))
    return [(u[:, k] * sv[k]).reshape(cutoff, cutoff) for k in np.nonzero(keep)[0]]


class LocalCopies:
    """Product of bipartite copies, ready to be pushed through local circuits.

    ``states[k]`` is a single-copy state with one A and one B mode; it becomes
    copy k+1 (modes a_{k+1}, b_{k+1}). ``losses`` maps labels such as "b2" to
    transmittances applied before the circuits.
    """

    def __init__(self, states: Sequence[State], losses: Mapping | None = None):
        if not states:
            raise ValueError("need at least one copy")
        self.n_copies = len(states)
        self.cutoff = max(s.cutoff for s in states)
        tau = {mode(k): float(v) for k, v in (losses or {}).items()}
        for lab in tau:
            if lab.party is Party.ANCILLA or not 1 <= lab.copy <= self.n_copies:
                raise ValueError(f"loss label {lab} does not name a copy mode")
        self.components = [
            _copy_components(
                s, self.cutoff,
                (tau.get(ModeLabel(Party.A, k + 1), 1.0), tau.get(ModeLabel(Party.B, k + 1), 1.0)),
            )
            for k, s in enumerate(states)
        ]
        size = self.cutoff ** (2 * self.n_copies)
        if size > MAX_OUTCOMES:
            raise TooLargeError(f"joint copy matrix would hold {size} entries")
        self.a_modes = tuple(ModeLabel(Party.A, k + 1) for k in range(self.n_copies))
        self.b_modes = tuple(ModeLabel(Party.B, k + 1) for k in range(self.n_copies))

    def run(self, circuit_a: CircuitSpec | None = None, circuit_b: CircuitSpec | None = None) -> "LocalOutput":
        """Apply Alice's and Bob's circuits; a single joint spec is split by party."""
        if circuit_b is None and circuit_a is not None:
            circuit_a, circuit_b = _split_local(circuit_a)
        circuit_a = circuit_a or CircuitSpec(())
        circuit_b = circuit_b or CircuitSpec(())
        for lab in circuit_a.modes + circuit_b.modes:
            if lab not in self.a_modes + self.b_modes:
                raise ValueError(f"circuit mode {lab} is not part of the copies")
        wa = block_isometries(circuit_a, self.a_modes, self.cutoff)
        wb = block_isometries(circuit_b, self.b_modes, self.cutoff)
        return LocalOutput(self, wa, wb)


class LocalOutput:
    def __init__(self, copies: LocalCopies, wa, wb):
        self.copies = copies
        self.wa = wa
        self.wb = wb
        self.a_modes = copies.a_modes
        self.b_modes = copies.b_modes
        self._probs = None

    def _joint(self):
        """Joint amplitude matrices in batches of shape (k, d^n, d^n).

        The copy with the most components supplies the batch axis; the other
        copies are looped over.
        """
        comps = [np.stack(c) for c in self.copies.components]
        n, d = len(comps), self.copies.cutoff
        big = int(np.argmax([len(c) for c in comps]))
        rows, cols = "abcdefghijk"[:n], "lmnopqrstuv"[:n]
        subs = [f"{rows[m]}{cols[m]}" if m != big else f"z{rows[m]}{cols[m]}" for m in range(n)]
        expr = ",".join(subs) + f"->z{rows}{cols}"
        chunk = max(1, _BATCH_ENTRIES // d ** (2 * n))
        others = [range(len(comps[m])) for m in range(n) if m != big]
        for idx in itertools.product(*others):
            it = iter(idx)
            picked = [None if m == big else comps[m][next(it)] for m in range(n)]
            for lo in range(0, len(comps[big]), chunk):
                picked[big] = comps[big][lo:lo + chunk]
                joint = np.einsum(expr, *picked)
                yield joint.reshape(joint.shape[0], d**n, d**n)

    def _phi_blocks(self, c: np.ndarray):
        """Yield (NA, NB, Phi) with Phi batched as (k, n_out_A, n_out_B)."""
        for ba in self.wa:
            rows = c[:, ba.in_index]
            if not rows.any():
                continue
            x = np.matmul(ba.matrix, rows)
            for bb in self.wb:
                sub = x[:, :, bb.in_index]
                if not sub.any():
                    continue
                yield ba.total, bb.total, sub @ bb.matrix.T

    def _block_probs(self) -> dict[tuple[int, int], np.ndarray]:
        """Output photon-number probabilities per block pair, summed over components."""
        if self._probs is None:
            acc: dict[tuple[int, int], np.ndarray] = {}
            for c in self._joint():
                for na, nb, phi in self._phi_blocks(c):
                    p = np.einsum("kij,kij->ij", phi, phi.conj()).real
                    if (na, nb) in acc:
                        acc[na, nb] += p
                    else:
                        acc[na, nb] = p
            self._probs = acc
        return self._probs

    # -- photon-number statistics -------------------------------------------------

    def _side_values(self, blocks, poly_part, labels):
        return [poly_part(b.out_configs, labels) for b in blocks]

    def expect_numbers(self, poly: NumberPoly) -> float:
        """<poly(n)> from the joint output photon-number distribution."""
        split = []
        for mono, coef in poly.terms.items():
            pa = tuple((l, p) for l, p in mono if l.party is Party.A)
            pb = tuple((l, p) for l, p in mono if l.party is Party.B)
            if any(l not in self.a_modes + self.b_modes for l, _ in mono):
                raise ValueError(f"monomial {mono} references unknown modes")
            split.append((coef, pa, pb))
        fa = {}
        fb = {}
        for i, (_, pa, pb) in enumerate(split):
            fa[i] = [_mono_values(b.out_configs, self.a_modes, pa) for b in self.wa]
            fb[i] = [_mono_values(b.out_configs, self.b_modes, pb) for b in self.wb]
        total = 0.0
        for (na, nb), p in self._block_probs().items():
            for i, (coef, _, _) in enumerate(split):
                total += coef * float(fa[i][na] @ p @ fb[i][nb])
        return total

    def distribution(self, read_modes: Sequence) -> tuple[tuple[ModeLabel, ...], np.ndarray, np.ndarray]:
        """Sparse marginal over ``read_modes``: (labels, occupations K x r, probabilities K)."""
        read = tuple(mode(m) for m in read_modes)
        ca = [self.a_modes.index(m) for m in read if m.party is Party.A]
        cb = [self.b_modes.index(m) for m in read if m.party is Party.B]
        order = [m for m in read if m.party is Party.A] + [m for m in read if m.party is Party.B]
        radix = self.copies.n_copies * (self.copies.cutoff - 1) + 1
        ra, rb = len(ca), len(cb)
        if radix ** (ra + rb) > MAX_OUTCOMES:
            raise TooLargeError(f"outcome space {radix}^{ra + rb} exceeds the budget")
        acc = np.zeros(radix ** (ra + rb))
        pa = radix ** np.arange(ra - 1, -1, -1)
        pb = radix ** np.arange(rb - 1, -1, -1)
        code_a = [b.out_configs[:, ca] @ pa if ra else np.zeros(len(b.out_configs), int) for b in self.wa]
        code_b = [b.out_configs[:, cb] @ pb if rb else np.zeros(len(b.out_configs), int) for b in self.wb]
        for (na, nb), p in self._block_probs().items():
            codes = (code_a[na][:, None] * radix**rb + code_b[nb][None, :]).ravel()
            acc += np.bincount(codes, weights=p.ravel(), minlength=acc.size)
        nz = np.nonzero(acc > 0)[0]
        occ = np.array(np.unravel_index(nz, (radix,) * (ra + rb))).T.reshape(len(nz), ra + rb)
        perm = [order.index(m) for m in read]
        return read, occ[:, perm], acc[nz]

    # -- general operator expectations -----------------------------------------

    def expect(self, obs) -> complex:
        """<obs> for words that factorize into an A part and a B part."""
        ws = obs if isinstance(obs, WordSum) else WordSum.of(obs)
        total = 0j
        for w, coef in ws.terms.items():
            total += coef * self._expect_word(w)
        return total

    def _expect_word(self, w: OperatorWord) -> complex:
        ops_a = tuple(o for o in w.ops if o.label.party is Party.A)
        ops_b = tuple(o for o in w.ops if o.label.party is Party.B)
        for o in w.ops:
            if o.label not in self.a_modes + self.b_modes:
                raise ValueError(f"word {w} references mode {o.label} outside the copies")
        da = sum(1 if o.dagger else -1 for o in ops_a)
        db = sum(1 if o.dagger else -1 for o in ops_b)
        xa = _ladder_blocks(self.wa, self.a_modes, ops_a, da)
        xb = _ladder_blocks(self.wb, self.b_modes, ops_b, db)
        total = 0j
        for c in self._joint():
            phis = {(na, nb): phi for na, nb, phi in self._phi_blocks(c)}
            for (na, nb), phi in phis.items():
                tgt = phis.get((na + da, nb + db))
                if tgt is None or xa[na] is None or xb[nb] is None:
                    continue
                k, oa, ob = phi.shape
                y = xa[na] @ phi.transpose(1, 0, 2).reshape(oa, k * ob)
                y = y.reshape(-1, k, ob).transpose(1, 0, 2).reshape(-1, ob)
                y = (xb[nb] @ y.T).T
                total += np.vdot(tgt.reshape(y.shape), y)
        return complex(total)


def _mono_values(cfg: np.ndarray, labels, mono) -> np.ndarray:
    v = np.ones(cfg.shape[0])
    for lab, p in mono:
        v = v * cfg[:, labels.index(lab)].astype(float) ** p
    return v


def _ladder_blocks(blocks, labels, ops, delta):
    """Sparse matrices of the ladder word from block N to block N + delta."""
    index = {b.total: {tuple(r): i for i, r in enumerate(b.out_configs)} for b in blocks}
    out = []
    for b in blocks:
        tgt = index.get(b.total + delta)
        if tgt is None:
            out.append(None)
            continue
        cfg = b.out_configs.astype(int).copy()
        coef = np.ones(len(cfg))
        for o in reversed(ops):
            i = labels.index(o.label)
            if o.dagger:
                coef *= np.sqrt(cfg[:, i] + 1.0)
                cfg[:, i] += 1
            else:
                coef *= np.sqrt(np.maximum(cfg[:, i], 0).astype(float))
                cfg[:, i] -= 1
        ok = np.nonzero(coef != 0)[0]
        rows = np.array([tgt[tuple(cfg[k])] for k in ok], dtype=int)
        out.append(sparse.csr_matrix((coef[ok], (rows, ok)), shape=(len(tgt), len(cfg))))
    return out


# ---------------------------------------------------------------------------
# pipelines


@dataclass(frozen=True)
class Setting:
    """One measurement setting: circuit, detected modes, and per-shot statistics."""

    name: str
    circuit: CircuitSpec
    read: tuple[ModeLabel, ...]
    features: tuple[NumberPoly, ...]


@dataclass(frozen=True)
class Pipeline:
    witness: str
    n_copies: int
    settings: tuple[Setting, ...]
    combine: Callable[[dict], float]
    local: bool = True


def _lz(m1, m2):
    return 0.5 * (n(m1) - n(m2))


def _d124_pipeline() -> Pipeline:
    conc = get_circuit("d124.M").spec
    readout = 0.5 * (n("a2") * n("b3") + n("a3") * n("b2"))
    settings = tuple(
        Setting(f"C{j}", conc.then(get_circuit(f"d124.C{j}").spec), tuple(map(mode, ("a2", "a3", "b2", "b3"))), (readout,))
        for j in (1, 2, 3)
    )
    return Pipeline("d124", 3, settings, lambda m: m["C1"][0] - m["C2"][0] + m["C3"][0])


def _d149_pipeline() -> Pipeline:
    b_part = n("b1") * (n("b2") - n("b3"))
    reads = {
        "F1": 0.5 * (n("a1") - n("a2")) * b_part,
        "F2": 0.5 * (0.5 * (n("a2") - n("a3")) + n("a1")) * b_part,
        "F3": n("a2") * n("b1") * n("b2"),
        "F4": 0.5 * (n("a1") - n("a2")) * b_part,
        "F5": 0.25 * (n("a2") - n("a3")) * b_part,
    }
    six = tuple(map(mode, ("a1", "a2", "a3", "b1", "b2", "b3")))
    settings = tuple(Setting(k, get_circuit(f"d149.{k}").spec, six, (v,)) for k, v in reads.items())

    def combine(m):
        return m["F1"][0] - m["F2"][0] + m["F3"][0] - m["F4"][0] - m["F5"][0]

    return Pipeline("d149", 3, settings, combine)


def _agarwal_pipeline() -> Pipeline:
    lz = _lz("a1", "b1")
    l0 = 0.5 * (n("a1") + n("b1"))
    read = (mode("a1"), mode("b1"))
    settings = (
        Setting("Lx", get_circuit("d1913_agarwal.Lx").spec, read, (lz, lz * lz)),
        Setting("Ly", get_circuit("d1913_agarwal.Ly").spec, read, (lz, lz * lz)),
        Setting("Lz", get_circuit("d1913_agarwal.Lz").spec, read, (lz, lz * lz, l0, l0 * l0)),
    )

    def combine(m):
        vx = m["Lx"][1] - m["Lx"][0] ** 2
        vy = m["Ly"][1] - m["Ly"][0] ** 2
        vz = m["Lz"][1] - m["Lz"][0] ** 2
        v0 = m["Lz"][3] - m["Lz"][2] ** 2
        return (16 * vx * vy + 4 * v0 - 4 * vz
                - 4 * m["Lx"][0] ** 2 - 4 * m["Ly"][0] ** 2 - 4 * m["Lz"][0] ** 2)

    return Pipeline("d1913_agarwal", 1, settings, combine, local=False)


PIPELINES = {p.witness: p for p in (_d124_pipeline(), _d149_pipeline(), _agarwal_pipeline())}


def get_pipeline(witness: str) -> Pipeline:
    try:
        return PIPELINES[witness]
    except KeyError:
        raise UnknownWitnessError(f"no measurement pipeline for {witness!r}; known: {sorted(PIPELINES)}") from None


def _as_list(states) -> list:
    return list(states) if isinstance(states, (list, tuple)) else [states]


def _routings(n_copies: int, states, losses):
    """Copy assignments to average over; a single one for identical lossless copies."""
    tau = {mode(k): float(v) for k, v in (losses or {}).items()}
    identical = all(s is states[0] for s in states) and len({v for v in tau.values()}) <= 1 and (
        not tau or len(tau) == 2 * n_copies
    )
    perms = [tuple(range(n_copies))] if identical else list(itertools.permutations(range(n_copies)))
    for p in perms:
        # copy slot k receives input copy p[k], together with that copy's losses
        routed_states = [states[p[k]] for k in range(n_copies)]
        routed_losses = {
            ModeLabel(lab.party, k + 1): tau[ModeLabel(lab.party, p[k] + 1)]
            for k in range(n_copies)
            for lab in (ModeLabel(Party.A, p[k] + 1), ModeLabel(Party.B, p[k] + 1))
            if lab in tau
        }
        yield routed_states, routed_losses


def _single_copy_state(states, losses) -> State:
    s = states[0]
    a = next(m for m in s.modes if m.party is Party.A)
    b = next(m for m in s.modes if m.party is Party.B)
    s = s.relabel({a: mode("a1"), b: mode("b1")})
    return apply_losses(s, {mode(k): v for k, v in (losses or {}).items()})


def setting_means(witness: str, states, losses: Mapping | None = None) -> dict[str, np.ndarray]:
    """Exact expectation of every per-shot statistic of every setting."""
    pipe = get_pipeline(witness)
    states = _as_list(states)
    if len(states) != pipe.n_copies:
        raise ValueError(f"{witness} pipeline needs {pipe.n_copies} copies, got {len(states)}")
    if not pipe.local:
        s = _single_copy_state(states, losses)
        out = {}
        for st in pipe.settings:
            dist = photon_distribution(apply_circuit(s, st.circuit), st.read)
            occ = np.array(np.unravel_index(np.arange(dist.size), dist.shape)).T
            p = dist.ravel()
            out[st.name] = np.array([f.evaluate(occ, st.read) @ p for f in st.features])
        return out
    acc = {st.name: np.zeros(len(st.features)) for st in pipe.settings}
    routes = list(_routings(pipe.n_copies, states, losses))
    for rs, rl in routes:
        copies = LocalCopies(rs, rl)
        for st in pipe.settings:
            res = copies.run(st.circuit)
            acc[st.name] += np.array([res.expect_numbers(f) for f in st.features])
    return {k: v / len(routes) for k, v in acc.items()}


def pipeline_value(witness: str, states, losses: Mapping | None = None) -> float:
    """Witness reconstructed from photon-number statistics of the catalog circuits."""
    pipe = get_pipeline(witness)
    return float(pipe.combine(setting_means(witness, states, losses)))


# ---------------------------------------------------------------------------
# finite statistics


@dataclass(frozen=True)
class CountsTable:
    modes: tuple[ModeLabel, ...]
    counts: Mapping[tuple, int]
    shots: int
    seed: int

    def __post_init__(self):
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts must sum to the number of shots")

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        keys = sorted(self.counts)
        occ = np.array(keys, dtype=int).reshape(len(keys), len(self.modes))
        return occ, np.array([self.counts[k] for k in keys], dtype=float)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([str(m) for m in self.modes] + ["count"])
        for k in sorted(self.counts):
            w.writerow(list(k) + [self.counts[k]])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, text: str, seed: int = 0) -> "CountsTable":
        rows = list(csv.reader(io.StringIO(text)))
        modes = tuple(mode(x) for x in rows[0][:-1])
        counts = {tuple(int(x) for x in r[:-1]): int(r[-1]) for r in rows[1:] if r}
        return cls(modes, counts, sum(counts.values()), seed)


def _draw(occ: np.ndarray, probs: np.ndarray, shots: int, rng: np.random.Generator) -> dict[tuple, int]:
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    idx = np.searchsorted(cdf, rng.random(shots), side="right")
    idx = np.minimum(idx, len(probs) - 1)
    uniq, cnt = np.unique(idx, return_counts=True)
    return {tuple(int(x) for x in occ[i]): int(c) for i, c in zip(uniq, cnt)}


def sample_distribution(labels, occ, probs, shots: int, seed: int) -> CountsTable:
    """Inverse-CDF draws from an explicit outcome list."""
    if shots < 1:
        raise ValueError("shots must be at least 1")
    rng = np.random.default_rng(seed)
    return CountsTable(tuple(labels), _draw(np.asarray(occ), np.asarray(probs, float), shots, rng), shots, seed)


def sample(s: State, circuit: CircuitSpec | str | None, read_modes, shots: int = DEFAULT_SHOTS,
           seed: int = 0, cutoff_out: int | None = None) -> CountsTable:
    """Photon counts of ``read_modes`` after ``circuit`` acting on an explicit state."""
    if shots < 1:
        raise ValueError("shots must be at least 1")
    if isinstance(circuit, str):
        circuit = get_circuit(circuit).spec
    out = apply_circuit(s, circuit, cutoff_out) if circuit is not None and circuit.elements else s
    read = tuple(mode(m) for m in read_modes)
    dist = photon_distribution(out, read)
    flat = dist.ravel()
    nz = np.nonzero(flat > 0)[0]
    occ = np.array(np.unravel_index(nz, dist.shape)).T.reshape(len(nz), len(read))
    return sample_distribution(read, occ, flat[nz], shots, seed)


def sample_pipeline(witness: str, states, losses: Mapping | None = None,
                    shots: int = DEFAULT_SHOTS, seed: int = 0) -> dict[str, CountsTable]:
    """Finite-shot counts for every setting of a pipeline (identical copies)."""
    pipe = get_pipeline(witness)
    states = _as_list(states)
    if len(states) != pipe.n_copies:
        raise ValueError(f"{witness} pipeline needs {pipe.n_copies} copies, got {len(states)}")
    seeds = np.random.SeedSequence(seed).generate_state(len(pipe.settings))
    out = {}
    for st, sd in zip(pipe.settings, seeds):
        if pipe.local:
            res = LocalCopies(states, losses).run(st.circuit)
            labels, occ, probs = res.distribution(st.read)
            out[st.name] = sample_distribution(labels, occ, probs, shots, int(sd))
        else:
            out[st.name] = sample(_single_copy_state(states, losses), st.circuit, st.read, shots, int(sd))
    return out


def estimate(witness: str, counts: Mapping[str, CountsTable]) -> tuple[float, float]:
    """Plug-in estimate and delete-one jackknife standard error.

    Settings are independent, so their jackknife variances add.
    """
    pipe = get_pipeline(witness)
    feats, weights, means = {}, {}, {}
    for st in pipe.settings:
        if st.name not in counts:
            raise ValueError(f"missing counts for setting {st.name}")
        tab = counts[st.name]
        occ, w = tab.arrays()
        if tuple(tab.modes) != st.read:
            col = [tab.modes.index(m) for m in st.read]
            occ = occ[:, col]
        f = np.stack([p.evaluate(occ, st.read) for p in st.features], axis=1)
        feats[st.name], weights[st.name] = f, w
        means[st.name] = (w @ f) / w.sum()
    value = float(pipe.combine(means))
    var = 0.0
    for name, f in feats.items():
        w = weights[name]
        total = w.sum()
        if total < 2:
            continue
        loo = (means[name] * total - f) / (total - 1)
        reps = np.array([pipe.combine({**means, name: row}) for row in loo])
        mean_rep = (w @ reps) / total
        var += (total - 1) / total * float(w @ (reps - mean_rep) ** 2)
    return value, math.sqrt(var)
