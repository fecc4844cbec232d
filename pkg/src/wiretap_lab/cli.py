"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 validation error, 3 budget exceeded.
Numbers are printed in nats with 9 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import io
import importlib.resources
import json
import math
import os
import sys

import numpy as np

from . import hashing, measures, typicality, wiretap
from .errors import BudgetExceeded, WiretapLabError
from .probability import (
    BUDGET_ENV,
    Channel,
    Distribution,
    JointDistribution,
    blahut_arimoto,
    compose,
    extend,
    get_budget,
    load_channel,
    load_distribution,
    load_json,
    validate,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _num(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    if not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return float(f"{x:.9g}")


def clean(obj):
    """Round floats to 9 significant digits, recursively; non-finite values become strings."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [clean(v) for v in obj]
    if obj is None or isinstance(obj, str):
        return obj
    return _num(obj)


def _csv_cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.9g}"
    if v is None:
        return ""
    return str(v)


def render(result, fmt):
    result = clean(result)
    if fmt == "json":
        return json.dumps(result, ensure_ascii=False) + "\n"
    rows = result if isinstance(result, list) else [
        {k: v for k, v in result.items() if not isinstance(v, (list, dict))}
    ]
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: _csv_cell(v) for k, v in r.items()})
    return buf.getvalue()


def load_schema(name):
    """Published JSON schema for a subcommand output, e.g. ``"hash_collision"``.

    CSV tables use the ``"<group>_<cmd>.table"`` schema, one object per row.
    """
    ref = importlib.resources.files("wiretap_lab") / "schemas" / f"{name}.schema.json"
    return json.loads(ref.read_text(encoding="utf-8"))


def _joint(path):
    data = load_json(path)
    return JointDistribution(data["probs"], data.get("alphabet_a"), data.get("alphabet_e"))


def _int_list(text):
    return [int(float(t)) for t in text.split(",") if t.strip()]


def _float_list(text):
    return [float(t) for t in text.split(",") if t.strip()]


# measures

def cmd_renyi(a):
    p, q = load_distribution(a.p), load_distribution(a.q)
    return {"divergence": measures.renyi_divergence(p, q, a.s), "s": a.s}


def cmd_cond_renyi(a):
    return {"entropy": measures.cond_renyi_entropy(_joint(a.joint), a.s), "s": a.s}


def cmd_mutual(a):
    w = load_channel(a.channel)
    p = load_distribution(a.p) if a.p else Distribution.uniform(w.shape[0], w.input_alphabet)
    return {"mutual_information": measures.mutual_information(p, w)}


def cmd_maxinfo(a):
    return {"i_max": measures.max_information(load_channel(a.channel))}


def cmd_smooth(a):
    w = load_channel(a.channel)
    res = measures.smooth_max_information(w, a.epsilon, a.method or "exact", a.budget)
    return {"i_max_eps": res.value, "epsilon": a.epsilon, "method": res.method,
            "witness": res.witness.member.astype(int).tolist()}


def cmd_lemma8(a):
    lhs, rhs, holds = measures.d2_vs_maxinfo_check(load_channel(a.channel))
    return {"lhs": lhs, "rhs": rhs, "holds": holds}


def cmd_lemma9(a):
    w = load_channel(a.channel)
    method = a.method or "exact"
    bound = measures.kl_leakage_bound(w, a.epsilon, method, a.budget)
    raw = measures.kl_leakage_bound(w, a.epsilon, method, a.budget, clamp=False)
    kl = measures.channel_leakage(w)
    return {"kl": kl, "bound": bound, "bound_unclamped": raw, "epsilon": a.epsilon,
            "holds": bool(kl <= bound + 1e-9), "holds_unclamped": bool(kl <= raw + 1e-9)}


# channel

def cmd_capacity(a):
    res = blahut_arimoto(load_channel(a.channel), a.tol)
    return {"capacity": res.value, "upper": res.upper, "input_distribution": res.input_distribution.tolist(),
            "iterations": res.iterations}


def cmd_compose(a):
    return compose(load_channel(a.v), load_channel(a.w)).to_dict()


def cmd_extend(a):
    return extend(load_channel(a.channel), a.n, get_budget(a.budget)).to_dict()


def cmd_validate(a):
    data = load_json(a.channel)
    validate(data["rows"])
    Channel.from_dict(data)
    return {"valid": True}


# typicality

def _params(a):
    return typicality.TypicalityParams(a.delta, a.n)


def cmd_bounds(a):
    params = _params(a)
    w = load_channel(a.channel) if a.channel else None
    if a.p:
        p = load_distribution(a.p)
    else:
        p = Distribution.uniform(w.shape[0] if w else 2)
    exact, bound = typicality.count_types(p.size, a.n)
    out = {"n": a.n, "delta": a.delta, "type_count": exact, "type_count_bound": bound,
           "typical_size_bound": typicality.typical_size_bound(p, params)}
    if w is not None:
        out["total_prob_bound"] = typicality.total_prob_bound(*w.shape, params)
        out["cond_prob_bound"] = typicality.cond_prob_bound(p, w, params)
    return out


def cmd_enumerate(a):
    p = load_distribution(a.p) if a.p else Distribution.uniform(2)
    params = _params(a)
    seqs = typicality.enumerate_typical(p, params, a.budget if a.budget is not None else typicality.TYPICAL_BUDGET)
    if a.format == "csv":
        return [{"index": i, "sequence": "".join(map(str, s))} for i, s in enumerate(seqs)]
    return {"size": len(seqs), "log_size": math.log(len(seqs)) if seqs else -math.inf,
            "bound": typicality.typical_size_bound(p, params), "sequences": [list(s) for s in seqs]}


def cmd_theorem1(a):
    w = load_channel(a.channel)
    bound, eps = typicality.theorem1_bound(w, a.n, a.delta)
    return {"bound": bound, "eps_n": eps, "n": a.n, "delta": a.delta}


def cmd_remark1(a):
    w = load_channel(a.channel)
    if a.format == "csv":
        deltas = _float_list(a.deltas) if a.deltas else [a.delta]
        return [{"delta": d, "eps_n": e, "theorem1": t, "remark1": r}
                for d, e, t, r in typicality.bound_comparison_rows(w, a.n, deltas)]
    return {"bound": typicality.remark1_bound(w, a.n, a.delta), "n": a.n, "delta": a.delta}


# hashing

def cmd_collision(a):
    fam = hashing.HashFamily(a.k, a.m)
    r = hashing.collision_test(fam, a.trials, a.seed, exact=a.exact)
    return {"rate": r.rate, "bound": r.bound, "stderr": r.stderr, "trials": r.trials, "exact": r.exact}


def cmd_lemma10(a):
    joint = _joint(a.joint)
    k = int(round(math.log2(joint.probs.shape[0])))
    fam = hashing.HashFamily(k, a.m)
    r = hashing.hash_lemma_check(joint, fam, a.s, exact=True if a.exact else None,
                                 realizations=a.trials, seed=a.seed)
    return {"lhs": r.lhs, "rhs": r.rhs, "holds": r.holds, "stderr": r.stderr,
            "realizations": r.realizations, "exact": r.exact}


# wiretap

def _code(a):
    v, w = load_channel(a.v), load_channel(a.w)
    words = load_json(a.codewords)["codewords"] if a.codewords else None
    return wiretap.build_code(v, w, a.n, a.k, a.m, a.inner, a.seed, words, a.budget)


def cmd_build(a):
    c = _code(a)
    return {"n": c.n, "k": c.k, "m": c.m, "inner_kind": c.inner_kind, "seed": c.seed,
            "codebook": c.codebook.tolist(), "hash_matrix": c.realization.matrix.astype(int).tolist(),
            "input_distribution": None if c.input_distribution is None else c.input_distribution.tolist()}


def cmd_error(a):
    c = _code(a)
    mode = "mc" if a.method == "mc" else "exact"
    r = wiretap.error_probability(c, mode, a.trials, a.seed, a.budget)
    return {"inner": r.inner, "end_to_end": r.end_to_end, "inner_stderr": r.inner_stderr,
            "end_to_end_stderr": r.end_to_end_stderr, "mode": r.mode, "trials": r.trials}


def cmd_leakage(a):
    c = _code(a)
    r = wiretap.leakage_exact(c, a.hash_mode, a.seed, a.trials, a.gamma, a.delta, a.budget)
    return r.to_dict()


def cmd_thresholds(a):
    t = wiretap.rate_thresholds(load_channel(a.v), load_channel(a.w))
    return {"c_v": t.c_v, "c_u": t.c_u, "first_order": t.first_order, "u_c": t.u_c,
            "second_order_threshold": t.second_order_threshold}


def _sizes(a):
    if a.v and a.w:
        u = compose(load_channel(a.v), load_channel(a.w))
        return u.shape
    return a.nx, a.ne


def cmd_schedule(a):
    nx, ne = _sizes(a)
    if a.format == "csv":
        ns = _int_list(a.n_list) if a.n_list else [a.n]
        return [{"n": n, "delta": d, "eps_n": e, "ratio": r}
                for n, d, e, r in wiretap.schedule_table(ns, a.gamma, nx, ne)]
    d, e = wiretap.delta_schedule_eval(a.n, a.gamma, nx, ne)
    return {"n": a.n, "gamma": a.gamma, "delta": d, "eps_n": e}


def cmd_theorem2(a):
    v, w = load_channel(a.v), load_channel(a.w)
    if a.format == "csv" and a.n_list:
        if a.L is None:
            raise UsageError("theorem2 --n-list needs --L")
        return wiretap.theorem2_trend(v, w, _int_list(a.n_list), a.gamma, a.L)
    return wiretap.theorem2_summary(v, w, a.n, a.gamma, L=a.L, R=a.rate, k=a.k, m=a.m,
                                    seed=a.seed, budget=a.budget)


def cmd_conjecture(a):
    v, w = load_channel(a.v), load_channel(a.w)
    ns = _int_list(a.n_list) if a.n_list else [a.n]
    return wiretap.conjecture_probe(v, w, ns, None, a.trials, a.seed, a.budget)


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--budget", type=int, default=None)
    common.add_argument("--out", default=None)
    common.add_argument("--format", choices=("json", "csv"), default=None)

    parser = _Parser(prog="wiretap-lab", description=__doc__.splitlines()[0])
    groups = parser.add_subparsers(dest="group", required=True)

    def add(group, name, func, fmt="json", **flags):
        p = group.add_parser(name, parents=[common])
        p.set_defaults(func=func, default_format=fmt)
        for flag, kw in flags.items():
            p.add_argument("--" + flag.replace("_", "-"), **kw)
        return p

    f = float
    req = dict(required=True)
    ms = groups.add_parser("measures").add_subparsers(dest="cmd", required=True)
    add(ms, "renyi", cmd_renyi, p=req, q=req, s=dict(type=f, default=1.0))
    add(ms, "cond-renyi", cmd_cond_renyi, joint=req, s=dict(type=f, default=1.0))
    add(ms, "mutual", cmd_mutual, channel=req, p=dict(default=None))
    add(ms, "maxinfo", cmd_maxinfo, channel=req)
    method = dict(choices=("exact", "greedy", "milp", "mc"), default=None)
    add(ms, "smooth-maxinfo", cmd_smooth, channel=req, epsilon=dict(type=f, **req), method=method)
    add(ms, "lemma8", cmd_lemma8, channel=req)
    add(ms, "lemma9", cmd_lemma9, channel=req, epsilon=dict(type=f, **req), method=method)

    ch = groups.add_parser("channel").add_subparsers(dest="cmd", required=True)
    add(ch, "capacity", cmd_capacity, channel=req, tol=dict(type=f, default=1e-10))
    add(ch, "compose", cmd_compose, v=req, w=req)
    add(ch, "extend", cmd_extend, channel=req, n=dict(type=int, **req))
    add(ch, "validate", cmd_validate, channel=req)

    ty = groups.add_parser("typicality").add_subparsers(dest="cmd", required=True)
    tflags = dict(n=dict(type=int, **req), delta=dict(type=f, **req))
    add(ty, "bounds", cmd_bounds, channel=dict(default=None), p=dict(default=None), **tflags)
    add(ty, "enumerate", cmd_enumerate, p=dict(default=None), **tflags)
    add(ty, "theorem1", cmd_theorem1, channel=req, **tflags)
    add(ty, "remark1", cmd_remark1, channel=req, deltas=dict(default=None), **tflags)

    hs = groups.add_parser("hash").add_subparsers(dest="cmd", required=True)
    add(hs, "collision", cmd_collision, k=dict(type=int, **req), m=dict(type=int, **req),
        exact=dict(action="store_true"), trials=dict(type=int, default=10_000))
    add(hs, "lemma10", cmd_lemma10, joint=req, m=dict(type=int, **req), s=dict(type=f, default=1.0),
        exact=dict(action="store_true"), trials=dict(type=int, default=1000))

    wt = groups.add_parser("wiretap").add_subparsers(dest="cmd", required=True)
    pair = dict(v=req, w=req)
    code = dict(pair, n=dict(type=int, **req), k=dict(type=int, **req), m=dict(type=int, **req),
                inner=dict(choices=wiretap.INNER_KINDS, default="random-iid"), codewords=dict(default=None))
    add(wt, "build", cmd_build, **code)
    add(wt, "error", cmd_error, method=method, trials=dict(type=int, default=10_000), **code)
    add(wt, "leakage", cmd_leakage, hash_mode=dict(choices=("enumerate", "sample"), default="enumerate"),
        trials=dict(type=int, default=1000), gamma=dict(type=f, default=0.5), delta=dict(type=f, default=None),
        **code)
    add(wt, "thresholds", cmd_thresholds, **pair)
    add(wt, "schedule", cmd_schedule, n=dict(type=int, default=100), gamma=dict(type=f, default=0.5),
        nx=dict(type=int, default=2), ne=dict(type=int, default=2), v=dict(default=None), w=dict(default=None),
        n_list=dict(default=None))
    add(wt, "theorem2", cmd_theorem2, n=dict(type=int, default=3), gamma=dict(type=f, default=0.5),
        L=dict(type=f, default=None), rate=dict(type=f, default=None), k=dict(type=int, default=None),
        m=dict(type=int, default=None), n_list=dict(default=None), **pair)
    add(wt, "conjecture", cmd_conjecture, fmt="csv", n=dict(type=int, default=2), n_list=dict(default=None),
        trials=dict(type=int, default=32), **pair)
    return parser


def run(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if args.format is None:
            args.format = args.default_format
        if args.budget is None and os.environ.get(BUDGET_ENV):
            args.budget = get_budget()
        result = args.func(args)
        text = render(result, args.format)
    except UsageError as exc:
        print(exc, file=stderr)
        return 1
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=stderr)
        return 3
    except (WiretapLabError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return 0


def main():
    sys.exit(run())
