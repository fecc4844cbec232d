"""Method of types: sequence types, typical sets and their finite-n bounds.

Sequences are tuples of symbol indices.  Enumerations run in lexicographic
order and are guarded by an entry budget.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DeltaOutOfRange, LengthMismatch, UnknownSymbol, ValidationError
from .measures import EXACT_SUPPORT, max_information, smooth_max_information
from .probability import Channel, Distribution, capacity, check_budget, entropy, min_log_constant

TYPICAL_BUDGET = 2**22
# Slack on |count/n - p| <= delta comparisons, absorbs rounding only.
COMPARE_TOL = 1e-12


@dataclass(frozen=True)
class SequenceType:
    counts: tuple
    alphabet: tuple

    @property
    def n(self):
        return sum(self.counts)

    def distribution(self):
        return Distribution(np.array(self.counts, dtype=float) / self.n, self.alphabet)


@dataclass(frozen=True)
class TypicalityParams:
    delta: float
    n: int

    def __post_init__(self):
        if self.delta < 0 or self.n < 1:
            raise ValidationError(f"need delta >= 0 and n >= 1, got delta={self.delta}, n={self.n}")


@dataclass(frozen=True)
class EncoderMap:
    """Deterministic encoder: ``codewords[v]`` is the length-n input sequence for message v."""

    codewords: tuple
    input_size: int

    def __post_init__(self):
        words = tuple(tuple(int(s) for s in c) for c in self.codewords)
        if not words:
            raise ValidationError("encoder needs at least one codeword")
        n = len(words[0])
        for c in words:
            if len(c) != n:
                raise LengthMismatch("codewords must share one length")
            if any(not 0 <= s < self.input_size for s in c):
                raise UnknownSymbol(f"codeword {c} uses a symbol outside the input alphabet")
        object.__setattr__(self, "codewords", words)

    @property
    def n(self):
        return len(self.codewords[0])

    def __len__(self):
        return len(self.codewords)


def type_of(x_n, alphabet):
    """Empirical type of a sequence of symbols (labels, not indices)."""
    alphabet = tuple(alphabet)
    pos = {a: i for i, a in enumerate(alphabet)}
    counts = [0] * len(alphabet)
    for sym in x_n:
        if sym not in pos:
            raise UnknownSymbol(f"symbol {sym!r} not in alphabet")
        counts[pos[sym]] += 1
    return SequenceType(tuple(counts), alphabet)


def count_types(k, n):
    """Exact number of types of length-n sequences over k symbols, and the (n+1)^k bound."""
    if k < 1 or n < 1:
        raise ValidationError("k and n must be positive")
    return math.comb(n + k - 1, k - 1), (n + 1) ** k


def _counts(x_n, k):
    return np.bincount(np.asarray(x_n, dtype=int), minlength=k)


def is_typical(x_n, p, params):
    probs = p.probs
    counts = _counts(x_n, probs.size)
    if np.any((probs == 0) & (counts > 0)):
        return False
    return bool(np.all(np.abs(counts / params.n - probs) <= params.delta + COMPARE_TOL))


def pair_counts(x_n, y_n, nx, ny):
    if len(x_n) != len(y_n):
        raise LengthMismatch(f"sequences have lengths {len(x_n)} and {len(y_n)}")
    joint = np.zeros((nx, ny), dtype=int)
    np.add.at(joint, (np.asarray(x_n, dtype=int), np.asarray(y_n, dtype=int)), 1)
    return joint


def is_cond_typical(y_n, x_n, w, params):
    rows = w.rows
    joint = pair_counts(x_n, y_n, *rows.shape)
    if np.any((rows == 0) & (joint > 0)):
        return False
    n = len(x_n)
    expected = joint.sum(axis=1)[:, None] * rows
    return bool(np.all(np.abs(joint - expected) / n <= params.delta + COMPARE_TOL))


def _all_sequences(k, n):
    """Every length-n sequence over k symbols, lexicographic, as an (k^n, n) array."""
    grids = np.indices((k,) * n).reshape(n, -1).T
    return grids.astype(np.int64)


def _symbol_counts(seqs, k):
    return np.stack([(seqs == a).sum(axis=1) for a in range(k)], axis=1)


def enumerate_typical(p, params, budget=TYPICAL_BUDGET):
    k = p.size
    check_budget(f"typical set over {k}^{params.n} sequences", k**params.n, budget)
    seqs = _all_sequences(k, params.n)
    counts = _symbol_counts(seqs, k)
    probs = p.probs
    ok = np.all(np.abs(counts / params.n - probs) <= params.delta + COMPARE_TOL, axis=1)
    ok &= ~np.any((probs == 0) & (counts > 0), axis=1)
    return [tuple(int(v) for v in row) for row in seqs[ok]]


def enumerate_cond_typical(x_n, w, params, budget=TYPICAL_BUDGET):
    nx, ny = w.shape
    n = len(x_n)
    check_budget(f"conditional typical set over {ny}^{n} sequences", ny**n, budget)
    x = np.asarray(x_n, dtype=np.int64)
    seqs = _all_sequences(ny, n)
    ok = np.ones(seqs.shape[0], dtype=bool)
    for a in range(nx):
        sub = seqs[:, x == a]
        counts = _symbol_counts(sub, ny)
        expected = sub.shape[1] * w.rows[a]
        ok &= np.all(np.abs(counts - expected) / n <= params.delta + COMPARE_TOL, axis=1)
        ok &= ~np.any((w.rows[a] == 0) & (counts > 0), axis=1)
    return [tuple(int(v) for v in row) for row in seqs[ok]]


def sequence_log_prob(y_n, x_n, w):
    """ln W^n(y^n | x^n), computed from pair counts."""
    joint = pair_counts(x_n, y_n, *w.shape)
    if np.any((w.rows == 0) & (joint > 0)):
        return -math.inf
    m = joint > 0
    return float(np.sum(joint[m] * np.log(w.rows[m])))


def typical_size_bound(p, params):
    """Upper bound on ln |T^n_[P]_delta|: n H(P) - n delta |X| ln min_{supp} P."""
    probs = p.probs
    pmin = probs[probs > 0].min()
    return params.n * entropy(probs) - params.n * params.delta * probs.size * math.log(pmin)


def conditional_entropy(w, p):
    """H(W|P) = sum_a P(a) H(W(.|a))."""
    return float(sum(pa * entropy(row) for pa, row in zip(p.probs, w.rows)))


def cond_prob_bound(seq_type, w, params):
    """Upper bound on ln W^n(y^n|x^n) for y^n conditionally typical given x^n of the given type."""
    p = seq_type.distribution() if isinstance(seq_type, SequenceType) else seq_type
    nx, ny = w.shape
    return -params.n * conditional_entropy(w, p) + params.n * params.delta * min_log_constant(w) * nx * ny


def total_prob_bound(nx, ny, params):
    """Lower bound 1 - 2|X||Y| exp(-2 n delta^2) on the conditional-typical mass, floored at 0."""
    return max(0.0, 1.0 - 2 * nx * ny * math.exp(-2 * params.n * params.delta**2))


def cond_typical_mass(x_n, w, params, budget=TYPICAL_BUDGET):
    members = enumerate_cond_typical(x_n, w, params, budget)
    return float(sum(math.exp(sequence_log_prob(y, x_n, w)) for y in members))


def delta_composition(delta, delta_prime, nx):
    return (delta + delta_prime) * nx


def _compositions(n, cells):
    """Every vector of ``cells`` nonnegative integers summing to n (stars and bars)."""
    for bars in itertools.combinations(range(n + cells - 1), cells - 1):
        edges = (-1,) + bars + (n + cells - 1,)
        yield np.array([edges[i + 1] - edges[i] - 1 for i in range(cells)])


def projection_containment(p, w, delta, delta_prime, n, budget=TYPICAL_BUDGET):
    """Check that outputs typical given a P-typical input are PW-typical with the composed constant.

    Every typicality condition involved depends only on the joint type of
    (x^n, y^n), so the check runs over joint types; each one stands for
    n! / prod N(a, b)! sequence pairs.  Returns ``(holds, n_pairs_checked)``.
    """
    nx, ny = w.shape
    rows = w.rows
    out = p.probs @ rows
    dpp = delta_composition(delta, delta_prime, p.size)
    tol = COMPARE_TOL
    check_budget(f"joint types of length {n} over {nx}x{ny} symbols", math.comb(n + nx * ny - 1, nx * ny - 1), budget)
    checked = 0
    for flat in _compositions(n, nx * ny):
        joint = flat.reshape(nx, ny)
        r = joint.sum(axis=1)
        if np.any((p.probs == 0) & (r > 0)) or np.any(np.abs(r / n - p.probs) > delta + tol):
            continue
        if np.any((rows == 0) & (joint > 0)) or np.any(np.abs(joint - r[:, None] * rows) / n > delta_prime + tol):
            continue
        checked += math.factorial(n) // math.prod(math.factorial(int(c)) for c in flat)
        col = joint.sum(axis=0)
        if np.any((out == 0) & (col > 0)) or np.any(np.abs(col / n - out) > dpp + tol):
            return False, checked
    return True, checked


def smooth_eps(nx, nz, n, delta):
    """2|X||Z| exp(-2 n delta^2)."""
    return 2 * nx * nz * math.exp(-2 * n * delta**2)


def theorem1_bound(w, n, delta, nx=None, nz=None, cap=None):
    """Upper bound on the smoothed max-information of any n-letter encoder composed with ``w``.

    Returns ``(bound, eps_n)`` with bound = n C + 2 n delta W_c |X||Z| + |X| ln(n+1)
    and eps_n = 2|X||Z| exp(-2 n delta^2).
    """
    nx = w.shape[0] if nx is None else nx
    nz = w.shape[1] if nz is None else nz
    cap = capacity(w) if cap is None else cap
    bound = n * cap + 2 * n * delta * min_log_constant(w) * nx * nz + nx * math.log(n + 1)
    return bound, smooth_eps(nx, nz, n, delta)


def remark1_bound(w, n, delta, nx=None, nz=None, cap=None):
    """Alternative bound n C - n|X||Z| delta ln(delta^2 |X|) + (|X|+|Z|) ln(n+1)."""
    nx = w.shape[0] if nx is None else nx
    nz = w.shape[1] if nz is None else nz
    if not 0 < delta <= 1.0 / (2 * nx * nz):
        raise DeltaOutOfRange(f"delta must lie in (0, {1.0 / (2 * nx * nz):.6g}], got {delta}")
    cap = capacity(w) if cap is None else cap
    return n * cap - n * nx * nz * delta * math.log(delta**2 * nx) + (nx + nz) * math.log(n + 1)


def bound_comparison_rows(w, n, deltas):
    """Rows (delta, eps_n, theorem1, remark1) for a delta grid; remark1 is None outside its range."""
    cap = capacity(w)
    rows = []
    for d in deltas:
        t1, eps = theorem1_bound(w, n, d, cap=cap)
        try:
            r1 = remark1_bound(w, n, d, cap=cap)
        except DeltaOutOfRange:
            r1 = None
        rows.append((d, eps, t1, r1))
    return rows


def combined_channel(w, encoder, budget=None):
    """W^n composed with a deterministic encoder: row v is W^n(. | e0(v)).

    Output sequences are ordered lexicographically.
    """
    nz = w.shape[1]
    n = encoder.n
    check_budget("combined channel", len(encoder) * nz**n, budget)
    logw = np.log(np.where(w.rows > 0, w.rows, 1.0))
    zero = w.rows == 0
    outs = np.array(list(itertools.product(range(nz), repeat=n)), dtype=int).reshape(-1, n)
    rows = np.empty((len(encoder), outs.shape[0]))
    for v, x in enumerate(encoder.codewords):
        x = np.asarray(x, dtype=int)
        joint = np.zeros((outs.shape[0], w.shape[0], nz), dtype=int)
        for i in range(n):
            joint[np.arange(outs.shape[0]), x[i], outs[:, i]] += 1
        logp = np.einsum("kab,ab->k", joint, logw)
        dead = np.einsum("kab,ab->k", joint, zero) > 0
        rows[v] = np.where(dead, 0.0, np.exp(logp))
    return Channel(rows, tuple(range(len(encoder))), tuple(map(tuple, outs)))


def theorem1_check(w, encoder, delta, budget=None):
    """Exact smoothed max-information of the combined channel against the theorem-1 bound.

    Returns a dict with ``exact``, ``bound``, ``eps_n``, ``i_max``, ``method``
    and ``holds``.  The minimum is found by enumeration when it fits the
    support limit and by the integer program otherwise.  When eps_n >= 1 the empty
    set is feasible, the smoothed value is -inf and the bound holds vacuously.
    """
    bound, eps = theorem1_bound(w, encoder.n, delta)
    wc = combined_channel(w, encoder)
    method = "exact" if wc.support_size() <= EXACT_SUPPORT else "milp"
    if eps >= 1.0:
        exact = -math.inf
    else:
        exact = smooth_max_information(wc, eps, method, budget).value
    return {"exact": exact, "bound": bound, "eps_n": eps, "i_max": max_information(wc),
            "method": method, "holds": bool(exact <= bound + 1e-9)}
