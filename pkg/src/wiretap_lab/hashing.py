"""Random full-rank linear hashing over GF(2).

A realization is an m x k binary matrix of rank m.  It maps k-bit strings
onto m-bit strings, every message has exactly 2^(k-m) preimages, and a
uniform right inverse is a particular solution XOR a uniform kernel element.

Bit strings are uint8 vectors, most significant bit first; ``index`` forms
use the matching integer encoding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDomain, NonUniformMarginal, ValidationError
from .measures import MARGINAL_TOL, cond_renyi_entropy
from .rng import rng_for

EXACT_MAX_K = 4


def gf2_row_reduce(mat):
    """Reduced row-echelon form over GF(2).

    Returns ``(rref, pivots, transform)`` with ``transform @ mat = rref (mod 2)``.
    """
    r = (np.asarray(mat, dtype=np.uint8) % 2).copy()
    rows, cols = r.shape
    t = np.eye(rows, dtype=np.uint8)
    pivots = []
    row = 0
    for col in range(cols):
        hit = np.flatnonzero(r[row:, col])
        if hit.size == 0:
            continue
        p = row + hit[0]
        if p != row:
            r[[row, p]] = r[[p, row]]
            t[[row, p]] = t[[p, row]]
        for other in np.flatnonzero(r[:, col]):
            if other != row:
                r[other] ^= r[row]
                t[other] ^= t[row]
        pivots.append(col)
        row += 1
        if row == rows:
            break
    return r, pivots, t


def gf2_rank(mat):
    return len(gf2_row_reduce(mat)[1])


def _int_rank(rows):
    """GF(2) rank of rows given as integers (xor basis keyed by leading bit)."""
    basis = {}
    for v in rows:
        while v:
            top = v.bit_length() - 1
            if top not in basis:
                basis[top] = v
                break
            v ^= basis[top]
    return len(basis)


def bits_of(index, k):
    return np.array([(index >> (k - 1 - i)) & 1 for i in range(k)], dtype=np.uint8)


def index_of(bits):
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


def all_bit_strings(k):
    """2^k x k matrix of all k-bit strings in index order."""
    idx = np.arange(2**k)
    return ((idx[:, None] >> np.arange(k - 1, -1, -1)[None, :]) & 1).astype(np.uint8)


@dataclass(frozen=True)
class HashFamily:
    domain_bits: int
    range_bits: int

    def __post_init__(self):
        if self.domain_bits < 1:
            raise DegenerateDomain(f"domain needs at least one bit, got k={self.domain_bits}")
        if not 1 <= self.range_bits <= self.domain_bits:
            raise ValidationError(f"need 1 <= m <= k, got m={self.range_bits}, k={self.domain_bits}")

    @property
    def k(self):
        return self.domain_bits

    @property
    def m(self):
        return self.range_bits

    @property
    def size(self):
        return 2**self.range_bits


@dataclass(frozen=True, eq=False)
class HashRealization:
    matrix: np.ndarray
    pivots: tuple
    transform: np.ndarray
    kernel: np.ndarray

    @classmethod
    def from_matrix(cls, matrix):
        matrix = np.asarray(matrix, dtype=np.uint8) % 2
        m, k = matrix.shape
        rref, pivots, transform = gf2_row_reduce(matrix)
        if len(pivots) != m:
            raise ValidationError(f"hash matrix has rank {len(pivots)} < {m}")
        free = [c for c in range(k) if c not in pivots]
        kernel = np.zeros((len(free), k), dtype=np.uint8)
        for i, f in enumerate(free):
            kernel[i, f] = 1
            for r, p in enumerate(pivots):
                kernel[i, p] = rref[r, f]
        for arr in (matrix, transform, kernel):
            arr.setflags(write=False)
        return cls(matrix, tuple(pivots), transform, kernel)

    @property
    def m(self):
        return self.matrix.shape[0]

    @property
    def k(self):
        return self.matrix.shape[1]

    def particular(self, msg):
        """The preimage of ``msg`` with all free coordinates zero."""
        rhs = (self.transform.astype(int) @ np.asarray(msg, dtype=int)) % 2
        x = np.zeros(self.k, dtype=np.uint8)
        x[list(self.pivots)] = rhs
        return x

    def preimage(self, msg):
        """All 2^(k-m) preimages of ``msg``, kernel combinations in index order."""
        base = self.particular(msg)
        combos = all_bit_strings(self.kernel.shape[0]) if self.kernel.shape[0] else np.zeros((1, 0), np.uint8)
        return (base[None, :] + combos.astype(int) @ self.kernel.astype(int)) % 2

    def table(self):
        """Hash index of every k-bit input, in input index order."""
        out = (all_bit_strings(self.k).astype(int) @ self.matrix.T.astype(int)) % 2
        return out @ (1 << np.arange(self.m - 1, -1, -1))


def sample(family, seed=0, unit=0):
    """Uniform full-rank m x k matrix by rejection from uniform binary matrices."""
    rng = rng_for(seed, unit)
    while True:
        mat = rng.integers(0, 2, size=(family.m, family.k), dtype=np.uint8)
        if gf2_rank(mat) == family.m:
            return HashRealization.from_matrix(mat)


def all_realizations(family):
    """Every full-rank m x k matrix, in index order of the flattened bits."""
    if family.k > EXACT_MAX_K:
        raise ValidationError(f"exact enumeration supports k <= {EXACT_MAX_K}")
    out = []
    for flat in all_bit_strings(family.m * family.k):
        mat = flat.reshape(family.m, family.k)
        if gf2_rank(mat) == family.m:
            out.append(HashRealization.from_matrix(mat))
    return out


def count_full_rank(m, k):
    """Number of full-rank m x k binary matrices."""
    return math.prod(2**k - 2**i for i in range(m))


def apply(r, a):
    return ((r.matrix.astype(int) @ np.asarray(a, dtype=int)) % 2).astype(np.uint8)


def invert(r, msg, seed=0, unit=0):
    """Uniformly random preimage of ``msg``; ``apply(r, invert(r, msg)) == msg``."""
    base = r.particular(msg)
    dim = r.kernel.shape[0]
    if dim == 0:
        return base
    coeffs = rng_for(seed, unit).integers(0, 2, size=dim)
    return ((base.astype(int) + coeffs @ r.kernel.astype(int)) % 2).astype(np.uint8)


def pushforward(r, pa):
    """Distribution of f(A) for A ~ ``pa`` over the 2^k inputs."""
    out = np.zeros(2**r.m)
    np.add.at(out, r.table(), np.asarray(pa, dtype=float))
    return out


@dataclass(frozen=True)
class CollisionReport:
    rate: float
    bound: float
    stderr: float
    trials: int
    exact: bool


def collision_test(family, trials=10_000, seed=0, exact=False):
    """Pairwise collision rate of the family against the universal bound 1/M.

    Exact mode averages over all realizations and reports the worst nonzero
    difference; Monte Carlo draws one realization and one distinct pair per
    trial from that trial's own stream.
    """
    bound = 1.0 / family.size
    if exact:
        reals = all_realizations(family)
        diffs = all_bit_strings(family.k)[1:].astype(int)
        kills = np.array([np.all((r.matrix.astype(int) @ diffs.T) % 2 == 0, axis=0) for r in reals])
        rate = float(kills.mean(axis=0).max())
        return CollisionReport(rate, bound, 0.0, len(reals), True)
    if trials < 1:
        raise ValidationError("trials must be at least 1")
    hits = 0
    n = 2**family.k
    for t in range(trials):
        rng = rng_for(seed, t)
        while True:
            rows = [int(v) for v in rng.integers(0, n, size=family.m)]
            if _int_rank(rows) == family.m:
                break
        a1 = int(rng.integers(0, n))
        a2 = int(rng.integers(0, n - 1))
        a2 += a2 >= a1
        d = a1 ^ a2
        hits += all(bin(row & d).count("1") % 2 == 0 for row in rows)
    rate = hits / trials
    return CollisionReport(rate, bound, math.sqrt(rate * (1 - rate) / trials), trials, False)


def hashed_joint(r, joint_probs):
    """P(f(A), E) from P(A, E)."""
    probs = np.asarray(joint_probs, dtype=float)
    out = np.zeros((2**r.m, probs.shape[1]))
    np.add.at(out, r.table(), probs)
    return out


def exp_s_c(joint_probs, s):
    """exp(s * C_{1+s}(A|E)) = |A|^s exp(-s H_{1+s}(A|E))."""
    na = joint_probs.shape[0]
    return na**s * math.exp(-s * cond_renyi_entropy(joint_probs, s))


@dataclass(frozen=True)
class HashLemmaResult:
    lhs: float
    rhs: float
    holds: bool
    stderr: float
    realizations: int
    exact: bool


def hash_lemma_check(joint, family, s, exact=None, realizations=1000, seed=0):
    """Compare exp(s C_{1+s}(f_X(A)|E X)) with 1 + M^s exp(-s H_{1+s}(A|E)).

    The left side is the average of exp(s C_{1+s}(f_x(A)|E)) over hash
    realizations x: all of them when k <= 4 (or ``exact=True``), otherwise
    ``realizations`` seeded draws, with the check applied to the estimate
    minus its reported standard error.
    """
    probs = np.asarray(getattr(joint, "probs", joint), dtype=float)
    if probs.shape[0] != 2**family.k:
        raise ValidationError(f"joint has {probs.shape[0]} rows, expected 2^{family.k}")
    if np.max(np.abs(probs.sum(axis=1) - 1.0 / probs.shape[0])) > MARGINAL_TOL:
        raise NonUniformMarginal("A-marginal is not uniform")
    if not 0 < s <= 1:
        raise ValidationError(f"s must lie in (0, 1], got {s}")
    if exact is None:
        exact = family.k <= EXACT_MAX_K
    reals = all_realizations(family) if exact else (sample(family, seed, u) for u in range(realizations))
    vals = np.array([exp_s_c(hashed_joint(r, probs), s) for r in reals])
    lhs = float(vals.mean())
    stderr = 0.0 if exact else float(vals.std(ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else 0.0
    rhs = 1.0 + family.size**s * math.exp(-s * cond_renyi_entropy(probs, s))
    return HashLemmaResult(lhs, rhs, bool(lhs - stderr <= rhs + 1e-9), stderr, int(vals.size), bool(exact))
