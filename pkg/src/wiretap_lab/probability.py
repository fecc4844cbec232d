"""Finite distributions, discrete memoryless channels and channel capacity.

Everything is measured in nats.  Entries are never renormalized: a row that
is off by more than ``STOCHASTIC_TOL`` is rejected.
"""

from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import entr, rel_entr

from .errors import (
    AlphabetMismatch,
    BudgetExceeded,
    CapacityNotConverged,
    NegativeEntry,
    NonStochasticRow,
    ShapeMismatch,
    ValidationError,
)

STOCHASTIC_TOL = 1e-9
DEFAULT_BUDGET = 2**24
BUDGET_ENV = "WIRETAP_LAB_BUDGET"


def get_budget(budget=None):
    """Resolve an enumeration budget: explicit value, then env override, then default."""
    if budget is not None:
        return int(budget)
    env = os.environ.get(BUDGET_ENV)
    if env:
        return int(env)
    return DEFAULT_BUDGET


def check_budget(what, size, budget=None):
    limit = get_budget(budget)
    if size > limit:
        raise BudgetExceeded(what, size, limit)


def bits_to_nats(x):
    return x * math.log(2.0)


def nats_to_bits(x):
    return x / math.log(2.0)


def _labels(alphabet, size):
    if alphabet is None:
        return tuple(range(size))
    alphabet = tuple(tuple(a) if isinstance(a, list) else a for a in alphabet)
    if len(alphabet) != size:
        raise ShapeMismatch(f"alphabet has {len(alphabet)} symbols, data has {size}")
    if len(set(alphabet)) != size:
        raise ValidationError("alphabet symbols must be distinct")
    return alphabet


def _frozen(values, ndim):
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise ShapeMismatch(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


def entropy(probs):
    """Shannon entropy of a probability vector (0 ln 0 = 0)."""
    return float(np.sum(entr(np.asarray(probs, dtype=float))))


@dataclass(frozen=True, eq=False)
class Distribution:
    probs: np.ndarray
    alphabet: tuple = None

    def __post_init__(self):
        probs = _frozen(self.probs, 1)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "alphabet", _labels(self.alphabet, probs.size))
        if probs.size == 0:
            raise ShapeMismatch("empty distribution")
        if np.any(probs < 0):
            raise NegativeEntry("distribution has a negative entry")
        total = probs.sum()
        if abs(total - 1.0) > STOCHASTIC_TOL:
            raise ValidationError(f"probabilities sum to {total:.12g}, expected 1")

    @classmethod
    def uniform(cls, size, alphabet=None):
        return cls(np.full(size, 1.0 / size), alphabet)

    @property
    def size(self):
        return self.probs.size

    def support(self):
        return self.probs > 0

    def entropy(self):
        return entropy(self.probs)

    def to_dict(self):
        return {"alphabet": list(self.alphabet), "probs": self.probs.tolist()}

    @classmethod
    def from_dict(cls, data):
        return cls(data["probs"], data.get("alphabet"))


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Joint law of (A, E); ``probs[a, e] = P_AE(a, e)``."""

    probs: np.ndarray
    alphabet_a: tuple = None
    alphabet_e: tuple = None

    def __post_init__(self):
        probs = _frozen(self.probs, 2)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "alphabet_a", _labels(self.alphabet_a, probs.shape[0]))
        object.__setattr__(self, "alphabet_e", _labels(self.alphabet_e, probs.shape[1]))
        if np.any(probs < 0):
            raise NegativeEntry("joint distribution has a negative entry")
        total = probs.sum()
        if abs(total - 1.0) > STOCHASTIC_TOL:
            raise ValidationError(f"joint probabilities sum to {total:.12g}, expected 1")

    @classmethod
    def from_channel(cls, p, w):
        """Joint of input ``p`` and output of channel ``w``: P(a, e) = p(a) W(e|a)."""
        if tuple(p.alphabet) != tuple(w.input_alphabet):
            raise AlphabetMismatch("input distribution and channel alphabets differ")
        return cls(p.probs[:, None] * w.rows, w.input_alphabet, w.output_alphabet)

    def marginal_a(self):
        return Distribution(self.probs.sum(axis=1), self.alphabet_a)

    def marginal_e(self):
        return Distribution(self.probs.sum(axis=0), self.alphabet_e)

    def product_of_marginals(self):
        pa = self.probs.sum(axis=1)
        pe = self.probs.sum(axis=0)
        return JointDistribution(np.outer(pa, pe), self.alphabet_a, self.alphabet_e)

    def flatten(self):
        """The joint viewed as a distribution on pairs, row-major."""
        pairs = tuple(itertools.product(self.alphabet_a, self.alphabet_e))
        return Distribution(self.probs.ravel(), pairs)


@dataclass(frozen=True, eq=False)
class Channel:
    """Row-stochastic matrix, ``rows[x, y] = W(y|x)``.

    With ``subnormalized=True`` rows may sum to less than one, as produced by
    restricting a channel to a smoothing set.
    """

    rows: np.ndarray
    input_alphabet: tuple = None
    output_alphabet: tuple = None
    subnormalized: bool = False
    tol: float = field(default=STOCHASTIC_TOL, repr=False)

    def __post_init__(self):
        rows = _frozen(self.rows, 2)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "input_alphabet", _labels(self.input_alphabet, rows.shape[0]))
        object.__setattr__(self, "output_alphabet", _labels(self.output_alphabet, rows.shape[1]))
        validate(self)

    @property
    def shape(self):
        return self.rows.shape

    def support_size(self):
        return int(np.count_nonzero(self.rows))

    def to_dict(self):
        return {
            "input_alphabet": list(self.input_alphabet),
            "output_alphabet": list(self.output_alphabet),
            "rows": self.rows.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(data["rows"], data.get("input_alphabet"), data.get("output_alphabet"))

    def __repr__(self):
        return f"Channel({self.rows.tolist()!r})"


def validate(channel, tol=None):
    """Check nonnegativity and row sums; raise on the first violation.

    Accepts a :class:`Channel` or a raw row matrix (treated as stochastic).
    Row sums may deviate from one by ``tol`` (default the channel's own
    tolerance, else ``STOCHASTIC_TOL``).
    """
    if isinstance(channel, Channel):
        rows, sub = channel.rows, channel.subnormalized
        tol = channel.tol if tol is None else tol
    else:
        rows, sub = np.asarray(channel, dtype=float), False
        tol = STOCHASTIC_TOL if tol is None else tol
        if rows.ndim != 2:
            raise ShapeMismatch(f"expected a matrix, got shape {rows.shape}")
    if rows.shape[0] == 0 or rows.shape[1] == 0:
        raise ShapeMismatch("channel alphabets must be nonempty")
    if np.any(rows < 0):
        i, j = np.argwhere(rows < 0)[0]
        raise NegativeEntry(f"entry ({i}, {j}) is {rows[i, j]:.12g}")
    sums = rows.sum(axis=1)
    for i, total in enumerate(sums):
        if total > 1.0 + tol or (not sub and total < 1.0 - tol):
            raise NonStochasticRow(i, float(total))
    return True


# Common channel families used throughout tests and the CLI.

def bsc(p):
    return Channel([[1.0 - p, p], [p, 1.0 - p]])


def identity_channel(k):
    return Channel(np.eye(k))


def constant_channel(row, n_inputs):
    return Channel(np.tile(np.asarray(row, dtype=float), (n_inputs, 1)))


def extend(channel, n, budget=None):
    """Memoryless n-fold extension; symbols of the result are tuples in lexicographic order.

    Row sums of the result are checked to within ``n`` times the input tolerance.
    """
    if n < 1:
        raise ValidationError(f"n must be positive, got {n}")
    nx, ny = channel.shape
    check_budget(f"extend to n={n}", (nx * ny) ** n, budget)
    rows = channel.rows
    for _ in range(n - 1):
        rows = np.kron(rows, channel.rows)
    return Channel(
        rows,
        tuple(itertools.product(channel.input_alphabet, repeat=n)) if n > 1 else channel.input_alphabet,
        tuple(itertools.product(channel.output_alphabet, repeat=n)) if n > 1 else channel.output_alphabet,
        subnormalized=channel.subnormalized,
        tol=n * channel.tol,
    )


def compose(v, w):
    """Cascade ``w o v``: first ``v``, then ``w`` acting on the output of ``v``."""
    if tuple(v.output_alphabet) != tuple(w.input_alphabet):
        raise AlphabetMismatch("output alphabet of the first stage differs from input of the second")
    return Channel(v.rows @ w.rows, v.input_alphabet, w.output_alphabet,
                   subnormalized=v.subnormalized or w.subnormalized)


def output_distribution(p, w):
    if tuple(p.alphabet) != tuple(w.input_alphabet):
        raise AlphabetMismatch("input distribution and channel alphabets differ")
    return Distribution(p.probs @ w.rows, w.output_alphabet)


def min_log_constant(w):
    """``-ln`` of the smallest positive transition probability."""
    positive = w.rows[w.rows > 0]
    if positive.size == 0:
        raise ValidationError("channel has empty support")
    return float(-np.log(positive.min()))


@dataclass
class CapacityResult:
    value: float
    upper: float
    input_distribution: np.ndarray
    iterations: int = field(default=0)


def blahut_arimoto(w, tol=1e-10, max_iter=100_000):
    """Alternating maximization for the capacity of a DMC.

    Iterates until ``max_x D(W(.|x) || pW) - I(p; W) <= tol``.  The returned
    ``value`` is the achievable lower estimate ``I(p; W)`` and ``upper`` the
    dual bound, so the true capacity lies in ``[value, upper]``.

    The update ``p <- p exp(mu D(W(.|x) || pW))`` uses an adaptive step:
    ``mu`` doubles after each accepted step and is halved when ``I`` fails to
    increase.  ``mu = 1`` is the classical iteration, which never decreases
    ``I``, so nearly useless channels converge without giving up monotonicity.
    """
    if tol <= 0:
        raise ValidationError("tol must be positive")
    rows = w.rows

    def stats(p):
        div = rel_entr(rows, (p @ rows)[None, :]).sum(axis=1)
        return div, float(p @ div), float(div.max())

    p = np.full(rows.shape[0], 1.0 / rows.shape[0])
    div, lower, upper = stats(p)
    mu = 1.0
    for it in range(1, int(max_iter) + 1):
        if upper - lower <= tol:
            return CapacityResult(max(lower, 0.0), upper, p, it)
        while True:
            cand = p * np.exp(mu * (div - upper))
            cand /= cand.sum()
            c_div, c_lower, c_upper = stats(cand)
            if c_lower >= lower or mu == 1.0:
                break
            mu = max(1.0, mu / 2)
        p, div, lower, upper = cand, c_div, c_lower, c_upper
        mu = min(2 * mu, 1e6)
    raise CapacityNotConverged(f"capacity gap {upper - lower:.3g} > {tol:.3g} after {max_iter} iterations")


def capacity(w, tol=1e-10, max_iter=100_000):
    return blahut_arimoto(w, tol, max_iter).value


def load_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def load_channel(path):
    return Channel.from_dict(load_json(path))


def load_distribution(path):
    return Distribution.from_dict(load_json(path))


def sequences(alphabet_size, n) -> Sequence[tuple]:
    """All length-``n`` index sequences in lexicographic order."""
    return list(itertools.product(range(alphabet_size), repeat=n))
