"""Hash-based wiretap codes over a degraded wiretap channel.

The sender maps a message m to ``e0(f_x^{-1}(m))``; the legitimate receiver
decodes ``f_x(d0(y^n))``.  ``v`` is the main channel and ``w`` the degrading
stage, so the eavesdropper sees the output of ``U = w o v``.

Everything here is exact enumeration at desk scale except the Monte Carlo
error estimate and sampled hash averaging.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import hashing
from .errors import BudgetExceeded, GammaOutOfRange, ValidationError
from .measures import LEMMA9_EPS_MAX, cond_renyi_entropy, kl_leakage_bound
from .probability import blahut_arimoto, capacity, check_budget, compose, entropy, min_log_constant
from .rng import rng_for
from .typicality import EncoderMap, combined_channel, theorem1_bound

INNER_KINDS = ("random-iid", "repetition", "explicit-list")
PROBE_HEADER = ("n", "sqrt_n", "gap_mean", "gap_max", "gap_over_sqrt_n", "seed", "trials")


@dataclass(frozen=True, eq=False)
class WiretapCode:
    v: object
    w: object
    n: int
    codebook: np.ndarray
    family: hashing.HashFamily
    realization: hashing.HashRealization
    inner_kind: str
    seed: int = 0
    input_distribution: np.ndarray = None

    @property
    def k(self):
        return self.family.k

    @property
    def m(self):
        return self.family.m

    @property
    def eavesdropper(self):
        return compose(self.v, self.w)

    def encoder(self):
        return EncoderMap(tuple(map(tuple, self.codebook)), self.v.shape[0])

    def encode(self, msg_bits, seed=0, unit=0):
        a = hashing.invert(self.realization, msg_bits, seed, unit)
        return self.codebook[hashing.index_of(a)]


def _check_gamma(gamma):
    if not 0 < gamma < 1:
        raise GammaOutOfRange(f"gamma must lie in (0, 1), got {gamma}")


def _repetition_codebook(k, n):
    if n < k:
        raise ValidationError(f"repetition code needs n >= k, got n={n}, k={k}")
    bits = hashing.all_bit_strings(k)
    return bits[:, np.arange(n) % k].astype(int)


def build_code(v, w, n, k, m, inner_kind="random-iid", seed=0, codewords=None, budget=None):
    """Assemble a wiretap code.

    ``random-iid`` draws 2^k codewords i.i.d. from the capacity-achieving
    input of ``v``; ``repetition`` sends bit ``j mod k`` of the index at
    position j (000/111 for k = 1); ``explicit-list`` takes ``codewords``.
    The hash realization known to both receivers is drawn from ``seed``.
    """
    if inner_kind not in INNER_KINDS:
        raise ValidationError(f"inner_kind must be one of {INNER_KINDS}, got {inner_kind!r}")
    compose(v, w)  # alphabet check
    family = hashing.HashFamily(k, m)
    check_budget("codebook", 2**k * n, budget)
    p_in = None
    if inner_kind == "random-iid":
        p_in = blahut_arimoto(v).input_distribution
        p_in = p_in / p_in.sum()
        book = rng_for(seed, 0).choice(v.shape[0], size=(2**k, n), p=p_in)
    elif inner_kind == "repetition":
        if v.shape[0] < 2:
            raise ValidationError("repetition code needs a binary input alphabet")
        book = _repetition_codebook(k, n)
    else:
        if codewords is None:
            raise ValidationError("explicit-list codes need codewords")
        book = np.array(codewords, dtype=int).reshape(len(codewords), -1)
        if book.shape != (2**k, n):
            raise ValidationError(f"need {2**k} codewords of length {n}, got shape {book.shape}")
        if book.min() < 0 or book.max() >= v.shape[0]:
            raise ValidationError("codeword symbol outside the input alphabet")
    book = np.asarray(book, dtype=int)
    book.setflags(write=False)
    real = hashing.sample(family, seed, 1)
    return WiretapCode(v, w, n, book, family, real, inner_kind, seed, p_in)


def decoder_table(code, budget=None):
    """Maximum-likelihood decision for every y^n (lexicographic order); ties go to the lowest index."""
    check_budget("decoder table", code.v.shape[1] ** code.n * 2**code.k, budget)
    lik = combined_channel(code.v, code.encoder(), budget).rows
    return np.argmax(lik, axis=0), lik


@dataclass
class ErrorReport:
    inner: float
    end_to_end: float
    inner_stderr: float = 0.0
    end_to_end_stderr: float = 0.0
    mode: str = "exact"
    trials: int = 0


def error_probability(code, mode="exact", trials=10_000, seed=0, budget=None):
    """Average error of the inner code and of the full hashed code (for the code's realization)."""
    table = code.realization.table()
    na = 2**code.k
    if mode == "exact":
        dec, lik = decoder_table(code, budget)
        ok_inner = lik[np.arange(na)[:, None] == dec[None, :]].sum()
        ok_hash = lik[table[:, None] == table[dec][None, :]].sum()
        return ErrorReport(max(0.0, 1.0 - float(ok_inner) / na), max(0.0, 1.0 - float(ok_hash) / na))
    if mode != "mc":
        raise ValidationError(f"mode must be 'exact' or 'mc', got {mode!r}")
    if trials < 1:
        raise ValidationError("trials must be at least 1")
    rows = code.v.rows
    with np.errstate(divide="ignore"):
        logv = np.log(rows)
    book = np.asarray(code.codebook)
    cum = np.cumsum(rows, axis=1)
    cum[:, -1] = 1.0
    bad_inner = bad_hash = 0
    for t in range(trials):
        rng = rng_for(seed, t)
        msg = int(rng.integers(0, code.family.size))
        a_bits = hashing.invert(code.realization, hashing.bits_of(msg, code.m), seed, (1 << 40) + t)
        a = hashing.index_of(a_bits)
        x = book[a]
        u = rng.random(code.n)
        y = np.array([np.searchsorted(cum[xi], ui, side="right") for xi, ui in zip(x, u)])
        ll = logv[book, y[None, :]].sum(axis=1)
        a_hat = int(np.argmax(ll))
        bad_inner += a_hat != a
        bad_hash += table[a_hat] != msg
    pi, ph = bad_inner / trials, bad_hash / trials
    return ErrorReport(pi, ph, math.sqrt(pi * (1 - pi) / trials), math.sqrt(ph * (1 - ph) / trials), "mc", trials)


def source_joint(code, budget=None):
    """P(A, E^n) for uniform A through the eavesdropper channel."""
    check_budget("eavesdropper joint", code.eavesdropper.shape[1] ** code.n * 2**code.k, budget)
    u_e0 = combined_channel(code.eavesdropper, code.encoder(), budget)
    return u_e0.rows / u_e0.shape[0], u_e0


def induced_source(realization):
    """Law of A = f_x^{-1}(M) for uniform M, from the preimage sets."""
    mm = 2**realization.m
    out = np.zeros(2**realization.k)
    for msg in range(mm):
        pre = realization.preimage(hashing.bits_of(msg, realization.m))
        idx = pre @ (1 << np.arange(realization.k - 1, -1, -1))
        out[idx] += 1.0 / (mm * pre.shape[0])
    return out


def c1(joint_probs):
    """ln|A| - H(A|E) of a joint with rows indexed by A."""
    return math.log(joint_probs.shape[0]) - (entropy(joint_probs.ravel()) - entropy(joint_probs.sum(axis=0)))


def delta_schedule_eval(n, gamma, nx, ne):
    """delta(n) = n^((gamma-1)/2) and eps_n = 2|X||E| exp(-2 n delta(n)^2)."""
    _check_gamma(gamma)
    delta = n ** ((gamma - 1) / 2)
    return delta, 2 * nx * ne * math.exp(-2 * n**gamma)


def schedule_table(n_list, gamma, nx, ne):
    """Rows (n, delta, eps_n, n exp(-2 n^gamma) / ln n) for n >= 2."""
    rows = []
    for n in n_list:
        d, eps = delta_schedule_eval(n, gamma, nx, ne)
        rows.append((n, d, eps, n * math.exp(-2 * n**gamma) / math.log(n)))
    return rows


@dataclass
class LeakageReport:
    n: int
    k: int
    m: int
    c1: float
    c1_stderr: float
    c1_unconditioned: float
    c1_source: float
    per_realization: list
    realizations: int
    hash_mode: str
    error_inner: float = None
    error_end_to_end: float = None
    delta: float = None
    eps_n: float = None
    theorem1_bound: float = None
    lemma9_chain: float = None
    lemma9_exact: float = None
    inner_kind: str = ""
    notes: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def leakage_exact(code, hash_mode="enumerate", seed=0, realizations=1000, gamma=0.5, delta=None, budget=None):
    """Exact C_1(f_X(A)|E^n X) averaged over hash realizations, plus the bound chain.

    ``hash_mode="enumerate"`` averages over every full-rank matrix (k <= 4);
    ``"sample"`` over ``realizations`` seeded draws.  The chain uses
    delta = delta(n) from ``gamma`` unless ``delta`` is given.
    """
    joint, u_e0 = source_joint(code, budget)
    if hash_mode == "enumerate":
        reals = hashing.all_realizations(code.family)
    elif hash_mode == "sample":
        reals = [hashing.sample(code.family, seed, u) for u in range(realizations)]
    else:
        raise ValidationError(f"hash_mode must be 'enumerate' or 'sample', got {hash_mode!r}")
    hashed = [hashing.hashed_joint(r, joint) for r in reals]
    vals = np.array([c1(h) for h in hashed])
    mixed = np.mean(hashed, axis=0)
    stderr = float(vals.std(ddof=1) / math.sqrt(vals.size)) if hash_mode == "sample" and vals.size > 1 else 0.0

    u = code.eavesdropper
    nx, ne = u.shape
    if delta is None:
        delta, eps = delta_schedule_eval(code.n, gamma, nx, ne)
    else:
        eps = 2 * nx * ne * math.exp(-2 * code.n * delta**2)
    t1, _ = theorem1_bound(u, code.n, delta)
    notes = [f"inner code: {code.inner_kind}"]
    chain = exact9 = None
    if eps < LEMMA9_EPS_MAX:
        chain = t1 - (1 - eps) * math.log(1 - eps) + eps * code.k * math.log(2)
        try:
            exact9 = kl_leakage_bound(u_e0, eps, "exact", budget)
        except BudgetExceeded as exc:
            notes.append(f"exact smoothing skipped: {exc}")
    else:
        notes.append("eps_n >= 1 - 1/e: smoothing bound vacuous")
    try:
        err = error_probability(code, "exact", budget=budget)
        e_in, e_hash = err.inner, err.end_to_end
    except BudgetExceeded:
        e_in = e_hash = None
    return LeakageReport(
        n=code.n, k=code.k, m=code.m,
        c1=float(vals.mean()), c1_stderr=stderr, c1_unconditioned=c1(mixed), c1_source=c1(joint),
        per_realization=vals.tolist(), realizations=int(vals.size), hash_mode=hash_mode,
        error_inner=e_in, error_end_to_end=e_hash,
        delta=delta, eps_n=eps, theorem1_bound=t1, lemma9_chain=chain, lemma9_exact=exact9,
        inner_kind=code.inner_kind, notes=notes,
    )


@dataclass
class Thresholds:
    c_v: float
    c_u: float
    first_order: float
    u_c: float
    second_order_threshold: float


def rate_thresholds(v, w):
    u = compose(v, w)
    c_v, c_u = capacity(v), capacity(u)
    u_c = min_log_constant(u)
    return Thresholds(c_v, c_u, c_v - c_u, u_c, -2 * u_c * u.shape[0] * u.shape[1])


def message_set_size(n, R, L, gamma):
    """ln |M_n| = n R + n^((1+gamma)/2) L."""
    _check_gamma(gamma)
    return n * R + n ** ((1 + gamma) / 2) * L


def default_k(n, c_v):
    return max(1, int(math.floor(n * c_v / math.log(2))))


def _cap_k(k, n, ne, budget):
    """Largest k' <= k whose joint table fits the budget; raises if even k' = 1 does not."""
    while k > 1:
        try:
            check_budget("probe joint", 2**k * ne**n, budget)
            break
        except BudgetExceeded:
            k -= 1
    check_budget("probe joint", 2**k * ne**n, budget)
    return k


def _unit(n, t):
    return (int(n) << 32) | int(t)


def conjecture_probe(v, w, n_list, k_rule=None, trials=32, seed=0, budget=None):
    """Gap |H(A|E^n) - H_{1+1/sqrt(n)}(A|E^n)| for random i.i.d. codebooks.

    Returns rows keyed by ``PROBE_HEADER``; ``gap_over_sqrt_n`` is the largest
    gap divided by sqrt(n).  This is a measurement, not a test.
    """
    ba = blahut_arimoto(v)
    p_in = ba.input_distribution / ba.input_distribution.sum()
    u = compose(v, w)
    rows = []
    for n in n_list:
        k = k_rule(n, ba.value) if k_rule else default_k(n, ba.value)
        k = _cap_k(max(1, k), n, u.shape[1], budget)
        s = 1.0 / math.sqrt(n)
        gaps = []
        for t in range(trials):
            book = rng_for(seed, _unit(n, t)).choice(v.shape[0], size=(2**k, n), p=p_in)
            enc = EncoderMap(tuple(map(tuple, book)), v.shape[0])
            joint = combined_channel(u, enc, budget).rows / 2**k
            gaps.append(abs(cond_renyi_entropy(joint, 0.0) - cond_renyi_entropy(joint, s)))
        gmax = max(gaps)
        rows.append({
            "n": n, "sqrt_n": math.sqrt(n), "gap_mean": float(np.mean(gaps)), "gap_max": gmax,
            "gap_over_sqrt_n": gmax / math.sqrt(n), "seed": seed, "trials": trials,
        })
    return rows


def probe_csv(rows):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=PROBE_HEADER, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({key: format_number(r[key]) for key in PROBE_HEADER})
    return buf.getvalue()


def format_number(x):
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return f"{float(x):.9g}"


def chain_leakage_bound(n, log_m, h_lower):
    """sqrt(n) ln(1 + exp((ln M - H)/sqrt(n))), the hash-lemma bound on C_1 at s = 1/sqrt(n)."""
    r = math.sqrt(n)
    return r * np.logaddexp(0.0, (log_m - h_lower) / r)


def theorem2_summary(v, w, n, gamma, L=None, R=None, k=None, m=None, seed=0, budget=None):
    """Evaluate every link of the leakage bound chain at one blocklength.

    Exactly one of ``L`` (second-order coefficient around C_V - C_U) or ``R``
    (first-order rate) fixes the target ln|M_n|.  The realized code uses
    2^k codewords (default floor(n C_V / ln 2)) and 2^m messages (default the
    target rounded to whole bits and clamped to [1, k]).  Terms of order
    sqrt(n) whose constant is unknown are reported as the symbol "+O(sqrt(n))".
    """
    _check_gamma(gamma)
    if (L is None) == (R is None):
        raise ValidationError("give exactly one of L or R")
    th = rate_thresholds(v, w)
    u = compose(v, w)
    nx, ne = u.shape
    delta, eps = delta_schedule_eval(n, gamma, nx, ne)
    log_m_target = message_set_size(n, th.first_order, L, gamma) if L is not None else n * R
    if k is None:
        k = _cap_k(default_k(n, th.c_v), n, ne, budget)
    if m is None:
        m = min(k, max(1, int(round(log_m_target / math.log(2)))))
    maxinfo_ub, _ = theorem1_bound(u, n, delta, cap=th.c_u)
    kl_ub = maxinfo_ub - (1 - eps) * math.log(1 - eps) + eps * k * math.log(2) if eps < LEMMA9_EPS_MAX else None
    h_lower = n * th.first_order - 2 * th.u_c * nx * ne * n ** ((1 + gamma) / 2)
    s = 1.0 / math.sqrt(n)
    out = {
        "n": n, "gamma": gamma, "delta": delta, "eps_n": eps, "k": k, "m": m,
        "log_m_target": log_m_target, "log_m": m * math.log(2),
        "c_v": th.c_v, "c_u": th.c_u, "first_order": th.first_order, "u_c": th.u_c,
        "second_order_threshold": th.second_order_threshold,
        "maxinfo_bound": maxinfo_ub, "kl_leakage_bound": kl_ub,
        "entropy_lower": h_lower, "entropy_lower_remainder": "+O(sqrt(n))",
        "chain_bound_assuming_conjecture": float(chain_leakage_bound(n, log_m_target, h_lower)),
        "s": s,
    }
    code = build_code(v, w, n, k, m, "random-iid", seed, budget=budget)
    joint, _ = source_joint(code, budget)
    h_s = cond_renyi_entropy(joint, s)
    h_1 = cond_renyi_entropy(joint, 0.0)
    lemma = hashing.hash_lemma_check(joint, code.family, s, seed=seed)
    leak = leakage_exact(code, "enumerate" if k <= hashing.EXACT_MAX_K else "sample",
                         seed=seed, gamma=gamma, budget=budget)
    out.update({
        "h_shannon": h_1, "h_renyi_s": h_s, "conjecture_gap": abs(h_1 - h_s),
        "lemma10_lhs": lemma.lhs, "lemma10_rhs": lemma.rhs, "lemma10_holds": lemma.holds,
        "renyi_leakage_bound": math.log(lemma.rhs) / s,
        "measured_c1": leak.c1, "measured_c1_stderr": leak.c1_stderr,
        "measured_c1_source": leak.c1_source,
        "measured_within_renyi_bound": bool(leak.c1 <= math.log(lemma.rhs) / s + 1e-9),
        "error_inner": leak.error_inner, "error_end_to_end": leak.error_end_to_end,
        "inner_kind": "random-iid",
    })
    return out


def theorem2_trend(v, w, n_list, gamma, L):
    """Plug-in chain over a blocklength grid (no exact evaluation; conjecture assumed)."""
    th = rate_thresholds(v, w)
    u = compose(v, w)
    nx, ne = u.shape
    rows = []
    for n in n_list:
        log_m = message_set_size(n, th.first_order, L, gamma)
        h_lower = n * th.first_order - 2 * th.u_c * nx * ne * n ** ((1 + gamma) / 2)
        rows.append({"n": n, "log_m": log_m, "entropy_lower": h_lower,
                     "chain_bound": float(chain_leakage_bound(n, log_m, h_lower))})
    return rows
