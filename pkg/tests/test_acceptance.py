"""Acceptance criteria, one test each, at the stated tolerances and time budgets."""

import subprocess
import sys
import time

import numpy as np
import pytest

from mubcheck import diagrams as dg
from mubcheck import families as fm
from mubcheck import gf
from mubcheck import meanking as mk
from mubcheck import qkd
from mubcheck.corpus import corpus, expected_complementary


@pytest.fixture(scope="module")
def families():
    return corpus()


def test_01_unbiasedness(criterion):
    gf.mub_family.cache_clear()
    start = time.perf_counter()
    worst = 0.0
    for n in gf.MUB_DIMENSIONS:
        f = gf.mub_family(n)
        for a in range(f.n_bases):
            for b in range(a + 1, f.n_bases):
                dev = np.max(np.abs(fm.overlap_squared(f.bases[a], f.bases[b]) - 1 / n))
                worst = max(worst, float(dev))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 1
    criterion(1, ok, f"unbiasedness n in {gf.MUB_DIMENSIONS}: worst {worst:.2e}, {elapsed:.2f}s")
    assert ok


def test_02_characterization_agreement(criterion, families):
    assert len(families) >= 12
    start = time.perf_counter()
    disagree, wrong = [], []
    for name, f in families.items():
        verdicts = {m: r.passed for m, r in fm.run_checks(f).items()}
        if len(set(verdicts.values())) != 1:
            disagree.append((name, verdicts))
        if verdicts["direct"] != expected_complementary(name):
            wrong.append(name)
    elapsed = time.perf_counter() - start
    ok = not disagree and not wrong and elapsed < 5
    criterion(2, ok, f"five checks agree on {len(families)} families; disagreements {disagree}, {elapsed:.2f}s")
    assert ok


def test_03_same_basis_universal(criterion, families):
    worst = 0.0
    for f in families.values():
        lhs = qkd.build_bb84_lhs(f)
        cmp = dg.tensors_equal(dg.apply_ps(lhs, "s", "e"), qkd.correlated_pattern(f), 1e-10)
        worst = max(worst, cmp.deviation)
    ok = worst <= 1e-10
    criterion(3, ok, f"same-basis BB84 pattern on every family: worst {worst:.2e}")
    assert ok


def test_04_bb84_equals_e91(criterion, families):
    worst = 0.0
    for f in families.values():
        cmp = dg.tensors_equal(qkd.build_bb84_lhs(f), qkd.build_e91_lhs(f), 1e-12)
        worst = max(worst, cmp.deviation)
    ok = worst <= 1e-12
    criterion(4, ok, f"BB84 and E91 left sides equal: worst {worst:.2e}")
    assert ok


def test_05_qkd_iff_complementary(criterion, families):
    mismatches, worst_psi, worst_id = [], 0.0, 0.0
    for name, f in families.items():
        r = qkd.check_bb84(f)
        if r.passed != fm.is_complementary_direct(f).passed:
            mismatches.append(name)
        if r.passed:
            support = ~np.eye(f.n_bases, dtype=bool)[:, :, None, None, None]
            worst_psi = max(worst_psi, r.psi.modulus_deviation(np.broadcast_to(support, r.psi.values.shape)))
            worst_id = max(worst_id, qkd.check_alpha_identity(f, r.psi, 1e-9).worst_violation)
    ok = not mismatches and worst_psi <= 1e-9 and worst_id <= 1e-9
    criterion(5, ok, f"QKD verdict = complementarity; |psi|-1 {worst_psi:.2e}, alpha identity {worst_id:.2e}, mismatches {mismatches}")
    assert ok


def test_06_collision_identity(criterion):
    start = time.perf_counter()
    worst = 0.0
    for n in (2, 3, 4, 5):
        r = mk.check_collision_lemma(gf.mub_family(n), gf.function_family(n), 1e-10)
        worst = max(worst, r.worst_violation)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 10
    criterion(6, ok, f"n<mu_f|mu_g> + 1 = collisions, all pairs n=2..5: worst {worst:.2e}, {elapsed:.2f}s")
    assert ok


def test_07_orthonormal(criterion):
    worst = max(mk.check_orthonormal(mk.build_scheme(n), 1e-9).deviation for n in (2, 3, 4, 5))
    ok = worst <= 1e-9
    criterion(7, ok, f"Gram of mu basis = I, n=2..5: worst {worst:.2e}")
    assert ok


def test_08_mean_king(criterion):
    details, ok = [], True
    for n in (2, 3, 4, 5):
        start = time.perf_counter()
        s = mk.build_scheme(n)
        sup = mk.verify_support(s, 1e-9)
        eq = mk.check_mk_equation(s, 1e-9)
        eps = max(1 - mk.simulate(s, b, k).p_correct for b in range(n + 1) for k in range(n))
        bad = mk.corrupt_lookup(s)
        bad_sup, bad_eq = mk.verify_support(bad, 1e-9), mk.check_mk_equation(bad, 1e-9)
        detected = not bad_sup.passed and bad_sup.witness is not None and not bad_eq.equation_ok
        elapsed = time.perf_counter() - start
        good = sup.passed and eq.equation_ok and eps <= 1e-9 and detected and elapsed < 30
        ok &= good
        details.append(f"n={n} eps {max(eps, 0):.1e} {elapsed:.2f}s")
    criterion(8, ok, "Mean King support, equation, simulation, corruption: " + "; ".join(details))
    assert ok


def test_09_collision_sum_identity(criterion):
    rng = np.random.default_rng(26)
    worst = 0.0
    for n in (2, 3):
        f = gf.mub_family(n)
        for _ in range(10):
            g = rng.integers(n, size=n + 1)
            worst = max(worst, mk.check_collision_sum(f, g, 1e-9).deviation)
    ok = worst <= 1e-9
    criterion(9, ok, f"sum_c |<c_g(c)|a_b>|^2 = [g(a)=b] + 1, 10 random g per n=2,3: worst {worst:.2e}")
    assert ok


RUNS = [
    ["check-mub", "--dim", "4"],
    ["check-complementary", "--dim", "3", "--method", "all"],
    ["check-qkd", "--protocol", "both", "--dim", "2"],
    ["mean-king", "--dim", "3", "--mode", "verify"],
    ["mean-king", "--dim", "2", "--mode", "simulate", "--basis", "2", "--outcome", "1"],
]


def test_10_cli_deterministic(criterion):
    same = []
    for argv in RUNS:
        outs = [
            subprocess.run([sys.executable, "-m", "mubcheck", *argv, "--quiet"], capture_output=True, check=False).stdout
            for _ in range(2)
        ]
        same.append(outs[0] == outs[1] and len(outs[0]) > 0)
    ok = all(same)
    criterion(10, ok, f"byte-identical JSON over {len(RUNS)} commands run twice")
    assert ok
