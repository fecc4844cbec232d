"""Acceptance criteria 1-11, each printing one PASS/FAIL line (run with ``-s`` to see them)."""

import io
import math
import time

import jsonschema
import numpy as np
import pytest

from oracles import full_rank_matrices, h2, hashed_leakage_direct, random_channel, smooth_max_brute
from test_cli import BSC005, BSC01, CONST, parse_csv
from wiretap_lab.cli import load_schema, run
from wiretap_lab.hashing import (
    HashFamily,
    bits_of,
    collision_test,
    gf2_rank,
    hash_lemma_check,
    sample,
)
from wiretap_lab.measures import (
    EXACT_SUPPORT,
    channel_leakage,
    d2_vs_maxinfo_check,
    kl_leakage_bound,
    smooth_max_information,
)
from wiretap_lab.probability import Channel, Distribution, bsc, constant_channel
from wiretap_lab.typicality import (
    EncoderMap,
    TypicalityParams,
    cond_prob_bound,
    cond_typical_mass,
    count_types,
    enumerate_cond_typical,
    enumerate_typical,
    projection_containment,
    sequence_log_prob,
    theorem1_check,
    total_prob_bound,
    type_of,
    typical_size_bound,
)
from wiretap_lab.wiretap import (
    build_code,
    conjecture_probe,
    delta_schedule_eval,
    leakage_exact,
    rate_thresholds,
    schedule_table,
)

pytestmark = pytest.mark.acceptance

EPS_GRID = [round(0.1 * i, 1) for i in range(7)]


def report(number, ok, detail):
    print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, detail


def lemma_channels():
    """200 seeded channels with |A|, |E| <= 6 and at most EXACT_SUPPORT positive entries."""
    rng = np.random.default_rng(1)
    out = []
    for _ in range(200):
        na, ne = (int(v) for v in rng.integers(1, 7, size=2))
        out.append(Channel(random_channel(rng, na, ne, max_support=EXACT_SUPPORT)))
    return out


def test_criterion_01_d2_below_max_information():
    start = time.perf_counter()
    results = [d2_vs_maxinfo_check(w) for w in lemma_channels()]
    elapsed = time.perf_counter() - start
    passed = sum(lhs <= rhs + 1e-9 for lhs, rhs, _ in results)
    report(1, passed == 200 and elapsed < 5, f"{passed}/200 in {elapsed:.2f}s")


def test_criterion_02_kl_leakage_bound():
    start = time.perf_counter()
    passed = total = literal_failures = 0
    for w in lemma_channels():
        kl = channel_leakage(w)
        for eps in EPS_GRID:
            total += 1
            passed += kl <= kl_leakage_bound(w, eps) + 1e-9
            literal_failures += kl > kl_leakage_bound(w, eps, clamp=False) + 1e-9
    elapsed = time.perf_counter() - start
    report(2, passed == total and elapsed < 60,
           f"{passed}/{total} in {elapsed:.2f}s (unclamped form fails {literal_failures})")


def test_criterion_03_smooth_max_matches_oracle():
    rng = np.random.default_rng(3)
    mismatches = greedy_below = checked = 0
    for _ in range(50):
        rows = rng.random((3, 3))
        for r in rows:
            r[rng.permutation(3)[: int(rng.integers(0, 3))]] = 0.0
        w = Channel(rows / rows.sum(axis=1, keepdims=True))
        for eps in (0.05, 0.2, 0.5):
            exact = smooth_max_information(w, eps).value
            greedy = smooth_max_information(w, eps, "greedy").value
            mismatches += abs(exact - smooth_max_brute(w.rows, eps)) > 1e-12
            greedy_below += greedy < exact - 1e-12
            checked += 1
    report(3, mismatches == 0 and greedy_below == 0,
           f"{checked} cases, {mismatches} oracle mismatches, {greedy_below} greedy below exact")


def test_criterion_04_typicality_suite():
    start = time.perf_counter()
    rng = np.random.default_rng(4)
    failures = []
    sources = [Distribution((0.5, 0.5)), Distribution((0.3, 0.7))]
    channels = [bsc(0.1), Channel([[0.8, 0.2], [0.35, 0.65]])]
    for n in range(1, 13):
        for delta in (0.05, 0.1, 0.2):
            params = TypicalityParams(delta, n)
            exact, bound = count_types(2, n)
            if not exact <= bound:
                failures.append(("lemma1", n, delta))
            for p in sources:
                size = len(enumerate_typical(p, params))
                if size and math.log(size) > typical_size_bound(p, params) + 1e-12:
                    failures.append(("lemma4", n, delta))
            for w in channels:
                for x in {tuple(int(b) for b in rng.integers(0, 2, n)) for _ in range(3)}:
                    if cond_typical_mass(x, w, params) < total_prob_bound(2, 2, params) - 1e-12:
                        failures.append(("lemma3", n, delta))
                    bound5 = cond_prob_bound(type_of(x, (0, 1)), w, params)
                    if any(sequence_log_prob(y, x, w) > bound5 + 1e-12 for y in enumerate_cond_typical(x, w, params)):
                        failures.append(("lemma5", n, delta))
                for p in sources:
                    for dp in (0.05, 0.1, 0.2):
                        if not projection_containment(p, w, delta, dp, n)[0]:
                            failures.append(("lemma2", n, delta))
    exact = math.log(len(enumerate_typical(sources[0], TypicalityParams(0.1, 10))))
    bound = typical_size_bound(sources[0], TypicalityParams(0.1, 10))
    example = round(exact, 4) == 6.5103 and round(bound, 4) == 8.3178
    elapsed = time.perf_counter() - start
    report(4, not failures and example and elapsed < 30,
           f"{len(failures)} failures, ln 672 = {exact:.4f} <= {bound:.4f}, {elapsed:.2f}s")


def test_criterion_05_theorem1_per_code():
    rng = np.random.default_rng(5)
    results = []
    for _ in range(50):
        n = int(rng.integers(1, 5))
        size = int(rng.integers(1, 17))
        words = tuple(tuple(int(b) for b in rng.integers(0, 2, n)) for _ in range(size))
        w = bsc(float(rng.uniform(0.02, 0.45)))
        delta = math.sqrt(math.log(8 / 0.2) / (2 * n))
        results.append(theorem1_check(w, EncoderMap(words, 2), delta))
    passed = sum(r["holds"] for r in results)
    methods = {m: sum(r["method"] == m for r in results) for m in ("exact", "milp")}
    report(5, passed == 50, f"{passed}/50 (methods {methods})")


def test_criterion_06_hash_suite():
    rng = np.random.default_rng(6)
    rank_ok = preimage_ok = True
    for unit in range(300):
        k = int(rng.integers(1, 13))
        m = int(rng.integers(1, k + 1))
        r = sample(HashFamily(k, m), seed=6, unit=unit)
        rank_ok &= gf2_rank(r.matrix) == m
        msg = bits_of(int(rng.integers(0, 2**m)), m)
        preimage_ok &= r.preimage(msg).shape[0] == 2 ** (k - m)
    exact = collision_test(HashFamily(2, 1), exact=True)
    exact_ok = abs(exact.rate - 1 / 3) <= 1e-15 and exact.rate <= 0.5
    mc = collision_test(HashFamily(10, 4), trials=100_000, seed=6)
    mc_ok = mc.rate <= 1 / 16 + 4 * mc.stderr
    report(6, rank_ok and preimage_ok and exact_ok and mc_ok,
           f"rank {rank_ok}, preimages {preimage_ok}, exact rate {exact.rate:.9f}, "
           f"MC rate {mc.rate:.5f} +- {mc.stderr:.5f} vs 0.0625")


def test_criterion_07_lemma10_suite():
    rng = np.random.default_rng(7)
    passed = 0
    for _ in range(100):
        k = int(rng.integers(1, 4))
        ne = int(rng.integers(1, 5))
        joint = rng.dirichlet(np.ones(ne), size=2**k) / 2**k
        ok = True
        for s in (0.25, 0.5, 1.0):
            for m in range(1, k + 1):
                res = hash_lemma_check(joint, HashFamily(k, m), s)
                ok &= res.exact and res.lhs <= res.rhs + 1e-9
        passed += ok
    report(7, passed == 100, f"{passed}/100")


def test_criterion_08_wiretap_exact_instance():
    codebook = [(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0)]
    code = build_code(bsc(0.05), bsc(0.1), 3, 2, 1, "explicit-list", codewords=codebook)
    measured = leakage_exact(code).c1
    direct = hashed_leakage_direct(codebook, 0.05 * 0.9 + 0.95 * 0.1, full_rank_matrices(1, 2))
    random_code = build_code(bsc(0.05), bsc(0.1), 3, 2, 1, seed=8)
    random_direct = hashed_leakage_direct(random_code.codebook.tolist(), 0.14, full_rank_matrices(1, 2))
    th = rate_thresholds(bsc(0.05), bsc(0.1))
    closed_first = h2(0.14) - h2(0.05)
    closed_threshold = 8 * math.log(0.14)
    ok = (abs(measured - direct) <= 1e-9
          and abs(leakage_exact(random_code).c1 - random_direct) <= 1e-9
          and abs(th.first_order - 0.206449) <= 1e-6 and abs(th.first_order - closed_first) <= 1e-9
          and abs(th.second_order_threshold - (-15.728904)) <= 1e-5
          and abs(th.second_order_threshold - closed_threshold) <= 1e-9)
    report(8, ok, f"leakage {measured:.12f} vs direct {direct:.12f}, C_V-C_U {th.first_order:.6f}, "
                  f"threshold {th.second_order_threshold:.6f}")


def test_criterion_09_schedule():
    delta, eps = delta_schedule_eval(100, 0.5, 2, 2)
    ratios = [row[3] for row in schedule_table(range(10, 10_001), 0.5, 2, 2)]
    peak = int(np.argmax(ratios))
    decreasing = all(b < a for a, b in zip(ratios[peak:], ratios[peak + 1:]))
    ok = abs(delta - 0.316228) <= 1e-6 and abs(eps - 1.6489e-8) <= 1e-12 and decreasing
    report(9, ok, f"delta {delta:.6f}, eps_n {eps:.4e}, ratio peak at n={10 + peak}, decreasing after: {decreasing}")


def test_criterion_10_conjecture_probe(write_json):
    constant = conjecture_probe(bsc(0.05), constant_channel((0.5, 0.5), 2), [2, 3, 4], trials=8)
    zero_gap = all(abs(r["gap_max"]) <= 1e-12 for r in constant)
    v, w = write_json("v.json", BSC005), write_json("w.json", BSC01)
    start = time.perf_counter()
    out, err = io.StringIO(), io.StringIO()
    code = run(["wiretap", "conjecture", "--v", v, "--w", w, "--n-list", "2,3,4", "--trials", "32"], out, err)
    elapsed = time.perf_counter() - start
    schema = load_schema("wiretap_conjecture")
    rows = parse_csv(out.getvalue(), schema)
    try:
        jsonschema.validate(rows, schema)
        valid = True
    except jsonschema.ValidationError:
        valid = False
    ok = zero_gap and code == 0 and valid and [r["trials"] for r in rows] == [32] * 3 and elapsed < 120
    ratios = ", ".join(f"{r['gap_over_sqrt_n']:.4f}" for r in rows)
    report(10, ok, f"constant-row gap zero {zero_gap}, probe {elapsed:.2f}s, schema valid {valid}, gap/sqrt(n) [{ratios}]")


def test_criterion_11_determinism(write_json):
    paths = {"bsc01": write_json("bsc01.json", BSC01), "bsc005": write_json("bsc005.json", BSC005),
             "const": write_json("const.json", CONST)}
    commands = [
        "measures maxinfo --channel {bsc01}",
        "measures smooth-maxinfo --channel {bsc01} --epsilon 0.2",
        "measures lemma9 --channel {bsc01} --epsilon 0.3",
        "channel capacity --channel {bsc01}",
        "channel extend --channel {bsc01} --n 3",
        "typicality enumerate --n 6 --delta 0.1 --format csv",
        "typicality theorem1 --channel {bsc01} --n 4 --delta 0.3",
        "hash collision --k 3 --m 2 --exact",
        "wiretap build --v {bsc005} --w {bsc01} --n 3 --k 2 --m 1 --seed 9",
        "wiretap error --v {bsc005} --w {bsc01} --n 3 --k 2 --m 1",
        "wiretap leakage --v {bsc005} --w {bsc01} --n 3 --k 2 --m 1",
        "wiretap theorem2 --v {bsc005} --w {bsc01} --n 3 --L 0.5",
        "wiretap conjecture --v {bsc005} --w {const} --n-list 2,3 --trials 4",
    ]
    identical = 0
    for template in commands:
        outputs = []
        for _ in range(2):
            out, err = io.StringIO(), io.StringIO()
            code = run(template.format(**paths).split(), out, err)
            outputs.append((code, out.getvalue().encode(), err.getvalue().encode()))
        identical += outputs[0] == outputs[1] and outputs[0][0] == 0
    report(11, identical == len(commands), f"{identical}/{len(commands)} invocations byte-identical")


def test_criterion_count():
    names = [n for n in globals() if n.startswith("test_criterion_") and n != "test_criterion_count"]
    assert len(names) == 11
    assert sorted(int(n.split("_")[2]) for n in names) == list(range(1, 12))
