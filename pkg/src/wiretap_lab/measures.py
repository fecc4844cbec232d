"""Rényi/Shannon information measures, max-information and its smoothed form.

Orders are parameterized by ``s`` with Rényi order ``1 + s``; ``s = 0`` is the
Shannon/Kullback-Leibler limit.  All values are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.special import logsumexp, rel_entr, xlogy

from .errors import (
    AlphabetMismatch,
    EpsOutOfRange,
    InfeasibleEps,
    NoConvergence,
    NonUniformMarginal,
    ShapeMismatch,
    ValidationError,
)
from .probability import (
    Channel,
    Distribution,
    JointDistribution,
    check_budget,
    entropy,
    output_distribution,
)

MARGINAL_TOL = 1e-9
# Slack on the retained-mass constraint of a smoothing set, absorbs rounding only.
FEASIBILITY_TOL = 1e-12
SMOOTH_BUDGET = 2**22
# Support size up to which callers pick enumeration over the integer program.
EXACT_SUPPORT = 22
LEMMA9_EPS_MAX = 1.0 - math.exp(-1.0)


def _check_order(s):
    if not 0.0 <= s <= 1.0:
        raise ValidationError(f"order parameter s must lie in [0, 1], got {s}")


def kl_divergence(p, q):
    """D(p || q) for raw probability vectors; +inf when supp(p) is not inside supp(q)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return float(np.sum(rel_entr(p, q)))


def renyi_divergence(p, q, s):
    """Rényi divergence of order ``1 + s`` between two distributions.

    ``s = 0`` gives the KL divergence.  Returns ``inf`` when ``p`` puts mass
    where ``q`` has none.
    """
    _check_order(s)
    if isinstance(p, Distribution) and isinstance(q, Distribution):
        if tuple(p.alphabet) != tuple(q.alphabet):
            raise AlphabetMismatch("divergence arguments live on different alphabets")
    p = np.asarray(getattr(p, "probs", p), dtype=float).ravel()
    q = np.asarray(getattr(q, "probs", q), dtype=float).ravel()
    if p.shape != q.shape:
        raise AlphabetMismatch("divergence arguments have different sizes")
    if np.any((p > 0) & (q <= 0)):
        return math.inf
    if s == 0:
        return kl_divergence(p, q)
    m = p > 0
    terms = (1.0 + s) * np.log(p[m]) - s * np.log(q[m])
    return float(logsumexp(terms) / s)


def cond_renyi_entropy(joint, s):
    """Conditional Rényi entropy H_{1+s}(A|E); ``s = 0`` is the Shannon H(A|E)."""
    _check_order(s)
    probs = joint.probs if isinstance(joint, JointDistribution) else np.asarray(joint, dtype=float)
    pe = probs.sum(axis=0)
    if s == 0:
        return entropy(probs.ravel()) - entropy(pe)
    m = probs > 0
    # sum_e P_E(e) sum_a P(a|e)^{1+s} = sum_{a,e} P(a,e)^{1+s} P_E(e)^{-s}
    terms = (1.0 + s) * np.log(probs[m]) - s * np.log(np.broadcast_to(pe, probs.shape)[m])
    return float(-logsumexp(terms) / s)


def c_quantity(joint, s):
    """ln|A| - H_{1+s}(A|E) for a joint whose A-marginal is uniform."""
    probs = joint.probs if isinstance(joint, JointDistribution) else np.asarray(joint, dtype=float)
    na = probs.shape[0]
    pa = probs.sum(axis=1)
    if np.max(np.abs(pa - 1.0 / na)) > MARGINAL_TOL:
        raise NonUniformMarginal("A-marginal is not uniform")
    return math.log(na) - cond_renyi_entropy(probs, s)


def mutual_information(p, w):
    """I(p; W) = H(pW) - H(W|p)."""
    q = output_distribution(p, w)
    cond = float(np.sum(p.probs * np.array([entropy(r) for r in w.rows])))
    return max(q.entropy() - cond, 0.0)


def joint_mutual_information(probs):
    """I(A ^ E) of a joint probability matrix."""
    probs = np.asarray(probs, dtype=float)
    return entropy(probs.sum(axis=0)) + entropy(probs.sum(axis=1)) - entropy(probs.ravel())


def max_information(w):
    """ln of the sum over outputs of the column maxima."""
    rows = w.rows if isinstance(w, Channel) else np.asarray(w, dtype=float)
    total = rows.max(axis=0).sum()
    return math.log(total) if total > 0 else -math.inf


@dataclass(frozen=True, eq=False)
class SmoothingSet:
    member: np.ndarray

    def __post_init__(self):
        member = np.array(self.member, dtype=bool)
        if member.ndim != 2:
            raise ShapeMismatch("smoothing set must be a boolean matrix")
        member.setflags(write=False)
        object.__setattr__(self, "member", member)

    @classmethod
    def full(cls, w):
        return cls(np.ones(w.shape, dtype=bool))

    def retained_mass(self, w):
        return (w.rows * self.member).sum(axis=1)

    def is_feasible(self, w, eps):
        return bool(np.all(self.retained_mass(w) >= 1.0 - eps - FEASIBILITY_TOL))


def restrict(w, t):
    """Zero every entry of ``w`` outside the smoothing set ``t``."""
    if t.member.shape != w.shape:
        raise ShapeMismatch(f"smoothing set shape {t.member.shape} != channel shape {w.shape}")
    return Channel(w.rows * t.member, w.input_alphabet, w.output_alphabet, subnormalized=True)


@dataclass(frozen=True, eq=False)
class SmoothResult:
    value: float
    witness: SmoothingSet
    method: str


def _check_eps(eps):
    if not 0.0 <= eps < 1.0:
        raise InfeasibleEps(f"eps must lie in [0, 1), got {eps}")


def _maximal_removals(row, eps, budget):
    """Maximal index sets of positive entries of ``row`` with total mass <= eps.

    Sets are returned as retained-row vectors in a fixed deterministic order
    (depth-first, entries visited by increasing index, "remove" before "keep").
    """
    idx = [j for j in range(row.size) if row[j] > 0]
    vals = [row[j] for j in idx]
    limit = eps + FEASIBILITY_TOL
    found = []

    def dfs(pos, removed, mass):
        if pos == len(idx):
            # maximal iff no skipped entry still fits
            if all(mass + vals[i] > limit for i in range(len(idx)) if i not in removed):
                found.append(tuple(removed))
                check_budget("smoothing candidates of one row", len(found), budget)
            return
        if mass + vals[pos] <= limit:
            removed.append(pos)
            dfs(pos + 1, removed, mass + vals[pos])
            removed.pop()
        dfs(pos + 1, removed, mass)

    dfs(0, [], 0.0)
    out = np.tile(row, (len(found), 1))
    for c, rem in enumerate(found):
        out[c, [idx[i] for i in rem]] = 0.0
    return out


def _smooth_exact(rows, eps, budget):
    """Minimize sum_y max_x W_T(y|x) over feasible T.

    Column maxima only shrink as entries are removed, so it suffices to scan
    per-row maximal removal sets.  Rows are combined one at a time and
    identical partial column-maximum vectors are merged, keeping the first
    prefix in lexicographic order of candidate indices.
    """
    cands = [_maximal_removals(r, eps, budget) for r in rows]
    layer = cands[0]
    choice = np.arange(len(layer))[:, None]
    for c in cands[1:]:
        check_budget("smooth max-information enumeration", layer.shape[0] * c.shape[0], budget)
        merged = np.maximum(layer[:, None, :], c[None, :, :]).reshape(-1, rows.shape[1])
        new_choice = np.concatenate(
            [np.repeat(choice, c.shape[0], axis=0), np.tile(np.arange(c.shape[0]), layer.shape[0])[:, None]],
            axis=1,
        )
        _, first = np.unique(merged, axis=0, return_index=True)
        first.sort()
        layer = merged[first]
        choice = new_choice[first]
    totals = layer.sum(axis=1)
    best = int(np.flatnonzero(totals == totals.min())[0])
    member = np.zeros(rows.shape, dtype=bool)
    for x, ci in enumerate(choice[best]):
        member[x] = cands[x][ci] > 0
    return math.log(totals[best]), SmoothingSet(member)


def greedy_smoothing_set(w, eps):
    """Per row, drop the smallest entries (lower index first on ties) while mass allows."""
    _check_eps(eps)
    member = w.rows > 0
    for x, row in enumerate(w.rows):
        order = sorted((v, j) for j, v in enumerate(row) if v > 0)
        removed = 0.0
        for v, j in order:
            if removed + v > eps + FEASIBILITY_TOL:
                break
            removed += v
            member[x, j] = False
    return SmoothingSet(member)


def _smooth_milp(rows, eps):
    """Same minimum as ``_smooth_exact`` via a mixed-integer program.

    An optimal set keeps, in each column, exactly the entries at or below a
    cap chosen from that column's values (or zero), and costs the sum of the
    caps.  One binary per (column, cap) pair, one removal constraint per row.
    The witness is rebuilt from the caps and its feasibility checked here, so
    solver tolerances can only surface as an error, never as a wrong set.
    """
    nx, ny = rows.shape
    levels = [np.unique(np.concatenate(([0.0], rows[:, y][rows[:, y] > 0]))) for y in range(ny)]
    offs = np.cumsum([0] + [lv.size for lv in levels])
    removal = np.zeros((nx, offs[-1]))
    choose = np.zeros((ny, offs[-1]))
    cost = np.concatenate(levels)
    for y, lv in enumerate(levels):
        col = rows[:, y][:, None]
        removal[:, offs[y]:offs[y + 1]] = np.where(col > lv[None, :], col, 0.0)
        choose[y, offs[y]:offs[y + 1]] = 1.0
    res = milp(
        cost,
        constraints=[LinearConstraint(removal, -np.inf, eps + FEASIBILITY_TOL), LinearConstraint(choose, 1, 1)],
        integrality=np.ones(cost.size),
        bounds=Bounds(0, 1),
        options={"mip_rel_gap": 0.0},
    )
    if res.x is None:
        raise NoConvergence(f"integer program failed: {res.message}")
    caps = np.array([lv[np.argmax(res.x[offs[y]:offs[y + 1]])] for y, lv in enumerate(levels)])
    t = SmoothingSet((rows <= caps[None, :]) & (rows > 0))
    kept = (rows * t.member).sum(axis=1)
    if np.any(kept < 1.0 - eps - FEASIBILITY_TOL):
        raise NoConvergence("integer program returned an infeasible smoothing set")
    total = (rows * t.member).max(axis=0).sum()
    return (math.log(total) if total > 0 else -math.inf), t


def smooth_max_information(w, eps, method="exact", budget=None):
    """ε-smooth max-information with a feasible smoothing-set witness.

    ``method="exact"`` returns the minimum over all feasible sets by
    enumeration, bounded by ``budget`` intermediate entries (default
    ``SMOOTH_BUDGET``); ties go to the lexicographically first combination
    of per-row candidates.  ``"milp"`` returns the same minimum from an
    integer program, for channels too large to enumerate.  ``"greedy"``
    returns the value of the greedy witness, an upper bound.
    """
    _check_eps(eps)
    if method == "greedy":
        t = greedy_smoothing_set(w, eps)
        return SmoothResult(max_information(restrict(w, t)), t, method)
    if method == "milp":
        value, t = _smooth_milp(np.asarray(w.rows), eps)
        return SmoothResult(value, t, method)
    if method != "exact":
        raise ValidationError(f"unknown method {method!r}")
    value, t = _smooth_exact(np.asarray(w.rows), eps, SMOOTH_BUDGET if budget is None else budget)
    return SmoothResult(value, t, method)


def uniform_joint(w):
    """Joint of a uniform input through ``w`` (rows may be subnormalized)."""
    rows = w.rows if isinstance(w, Channel) else np.asarray(w, dtype=float)
    return rows / rows.shape[0]


def d2_vs_maxinfo_check(w):
    """Compare D_2(P_AE || P_A x P_E) with I_max(W) for uniform A and P_{E|A} = W.

    For a subnormalized ``w`` the induced measure is used unnormalized, as in
    the direct expansion sum_e sum_a W(e|a)^2 / sum_a W(e|a).
    """
    rows = w.rows if isinstance(w, Channel) else np.asarray(w, dtype=float)
    col = rows.sum(axis=0)
    m = col > 0
    total = float(np.sum((rows[:, m] ** 2).sum(axis=0) / col[m]))
    lhs = math.log(total) if total > 0 else -math.inf
    rhs = max_information(rows)
    return lhs, rhs, bool(lhs <= rhs + 1e-9)


def kl_leakage_bound(w, eps, method="exact", budget=None, clamp=True):
    """Upper bound on D(P_AE || P_A x P_E) for uniform A from the smoothed max-information.

    Returns ``max(I^eps_max(W), 0) - (1 - eps) ln(1 - eps) + eps ln|A|``.
    The clamp at zero matters only when smoothing pushes the column-maximum
    sum below one; without it the bound can fall below the divergence (for
    instance two identical rows (0.6, 0.4) at eps = 0.6).  ``clamp=False``
    gives the unclamped expression.
    """
    if not 0.0 <= eps < LEMMA9_EPS_MAX:
        raise EpsOutOfRange(f"eps must lie in [0, 1 - 1/e), got {eps}")
    smooth = smooth_max_information(w, eps, method, budget).value
    if clamp:
        smooth = max(smooth, 0.0)
    return float(smooth - xlogy(1.0 - eps, 1.0 - eps) + eps * math.log(w.shape[0]))


def channel_leakage(w):
    """Exact D(P_AE || P_A x P_E) for uniform A; equals I(A ^ E)."""
    return joint_mutual_information(uniform_joint(w))
