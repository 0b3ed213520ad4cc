"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Runtimes exclude numba compilation, which the ``warm`` fixture triggers once.
"""
import math
import time

import numpy as np
import pytest

from monogamy_lab import audit, cli
from monogamy_lab.measures import residual_two_qubit
from monogamy_lab.model import InitialPairState, evolved_two_pair_state, w_state
from monogamy_lab.roof import RoofConfig, roof_one_tangle, roof_three_tangle

ALPHA_PLATEAU = 1 / math.sqrt(10)
M_STAR = (13 * math.sqrt(13) - 19) / 34
ALPHA_STAR = math.sqrt((9 + math.sqrt(13)) / 34)


@pytest.fixture(scope="module")
def warm():
    audit.trajectory(InitialPairState.from_alpha(0.5), [0.0, 1.0])
    rho = evolved_two_pair_state(InitialPairState.from_alpha(0.5), 1.0).reduced(["c1", "c2", "r2"])
    roof_one_tangle(rho, 3, 0, RoofConfig(restarts=1, max_iter=5))
    roof_three_tangle(evolved_two_pair_state(InitialPairState.from_alpha(0.5), 1.0)
                      .reduced(["c1", "c2", "r2"]), RoofConfig(restarts=1, max_iter=5))


@pytest.fixture(scope="module")
def full_grid(warm):
    return audit.evaluate_grid(audit.default_alpha_grid(), audit.kappa_grid())


@pytest.fixture
def report(capsys):
    def emit(n, title, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {n:>2}: {title} ({detail})")
        assert ok, f"criterion {n} failed: {detail}"
    return emit


def sample_points(n, seed, kt_max=3.0):
    rng = np.random.default_rng(seed)
    return list(zip(rng.uniform(0.05, 0.95, n), rng.uniform(0.05, kt_max, n)))


def test_criterion_01_plateau(warm, report):
    t0 = time.perf_counter()
    init = InitialPairState.from_alpha(ALPHA_PLATEAU)
    lo, hi = math.log(1.5), math.log(3.0)
    interior = audit.trajectory(init, np.linspace(lo, hi, 257)[1:-1])
    edges = audit.trajectory(init, [lo, hi])
    t_esd, t_esb = audit.numeric_boundaries(init)
    elapsed = time.perf_counter() - t0

    pair = lambda r: (r.pairwise.c1c2, r.pairwise.r1r2, r.pairwise.c1r2, r.pairwise.c2r1)
    interior_max = max(max(pair(r)) for r in interior)
    edge_max = max(max(pair(r)) for r in edges)
    value_dev = max(abs(r.residual_m - 0.36) for r in interior + edges)
    bdev = max(abs(t_esd - lo), abs(t_esb - hi))
    ok = (interior_max == 0.0 and edge_max <= 1e-24 and value_dev <= 1e-9
          and bdev <= 1e-6 and elapsed < 1.0)
    report(1, "plateau at alpha=1/sqrt(10)", ok,
           f"interior max {interior_max:.1e}, endpoint max {edge_max:.1e}, "
           f"|m-0.36| {value_dev:.1e}, boundary dev {bdev:.1e}, {elapsed:.2f}s")


def test_criterion_02_extremum(warm, report):
    t0 = time.perf_counter()
    res = audit.extremum_search()
    elapsed = time.perf_counter() - t0
    dk, dm, da = abs(res.kappa_t - math.log(2)), abs(res.residual_m - M_STAR), abs(res.alpha - ALPHA_STAR)
    ok = dk <= 1e-6 and dm <= 1e-6 and da <= 1e-5 and elapsed < 5.0
    report(2, "extremum of residual entanglement", ok,
           f"dkt {dk:.1e}, dm {dm:.1e}, dalpha {da:.1e}, {elapsed:.2f}s")


def test_criterion_03_oracle_equivalence(warm, report):
    t0 = time.perf_counter()
    ev = audit.evaluate_grid(audit.default_alpha_grid(), audit.kappa_grid())
    elapsed = time.perf_counter() - t0
    err = max(float(np.max(np.abs(ev.numeric[k] - ev.closed[k])))
              for k in ("c1c2", "r1r2", "c1r2", "c2r1"))
    ok = len(ev) == 99 * 256 and err <= 1e-9 and elapsed < 10.0
    report(3, "Wootters vs closed forms on 99x256 grid", ok,
           f"max error {err:.1e}, {elapsed:.2f}s")


def test_criterion_04_conservation(full_grid, report):
    ev = full_grid
    err = float(np.max(np.abs(ev.numeric["block_tangle"] - 4 * (ev.alpha.real * ev.beta.real) ** 2)))
    report(4, "block tangle conservation", err <= 1e-12, f"max defect {err:.1e}")


def test_criterion_05_monogamy_slack(full_grid, report):
    n = full_grid.numeric
    slack = n["block_tangle"] - (n["c1c2"] + n["r1r2"] + n["c1r2"] + n["c2r1"])
    min_slack = float(slack.min())
    defect = float(np.max(np.abs(slack - n["residual_m"])))
    report(5, "pairwise monogamy slack", min_slack >= -1e-10 and defect <= 1e-12,
           f"min slack {min_slack:.2e}, slack-vs-residual {defect:.1e}")


def test_criterion_06_qubit_block_split(full_grid, warm, report):
    cl, n = full_grid.closed, full_grid.numeric
    defect = float(np.max(np.abs(cl["qubit_block_c1"] + cl["qubit_block_r1"] - n["block_tangle"])))
    t0 = time.perf_counter()
    worst = 0.0
    for a, kt in sample_points(10, seed=6):
        init = InitialPairState.from_alpha(a)
        st = evolved_two_pair_state(init, kt)
        c = roof_one_tangle(st.reduced(["c1", "c2", "r2"]), 3, 0).upper_bound
        r = roof_one_tangle(st.reduced(["r1", "c2", "r2"]), 3, 0).upper_bound
        worst = max(worst, abs(c - init.block_tangle * math.exp(-kt)),
                    abs(r - init.block_tangle * -math.expm1(-kt)))
    elapsed = time.perf_counter() - t0
    ok = defect < 1e-12 and worst <= 1e-3 and elapsed < 60.0
    report(6, "qubit-block split and one-tangle roofs", ok,
           f"split defect {defect:.1e}, roof dev {worst:.1e}, {elapsed:.1f}s")


def test_criterion_07_w_nullity(report):
    rng = np.random.default_rng(7)
    worst = 0.0
    for pairs in (2, 3, 4):
        for _ in range(100):
            z = rng.standard_normal(2 * pairs) + 1j * rng.standard_normal(2 * pairs)
            st = w_state(z / np.linalg.norm(z))
            for k in range(1, pairs + 1):
                worst = max(worst, abs(residual_two_qubit(st, [f"A{k}", f"A{k}'"])))
    report(7, "W-state residual nullity", worst <= 1e-9, f"max |residual| {worst:.1e}")


def test_criterion_08_three_tangle_nullity(warm, report):
    worst = 0.0
    labels = ("c1", "r1", "c2", "r2")
    for a, kt in sample_points(10, seed=8):
        st = evolved_two_pair_state(InitialPairState.from_alpha(a), kt)
        for drop in labels:
            keep = [lb for lb in labels if lb != drop]
            worst = max(worst, roof_three_tangle(st.reduced(keep)).upper_bound)
    report(8, "three-tangle nullity of 3-qubit marginals", worst <= 1e-3,
           f"max roof {worst:.1e}")


@pytest.mark.slow
def test_criterion_09_three_pair_bound(warm, report):
    rng = np.random.default_rng(9)
    worst = -np.inf
    for a, kt in zip(rng.uniform(0.05, 0.95, 10), rng.uniform(0.05, 3.0, 10)):
        rep = audit.eq10_audit(InitialPairState.from_alpha(a), [kt])
        p = rep["points"][0]
        worst = max(worst, p["roof_sum"] - p["bound"])
    init = InitialPairState.from_alpha(1 / math.sqrt(2))
    p0 = audit.eq10_audit(init, [0.0])["points"][0]
    sat = abs(p0["roof_sum"] - init.block_tangle)
    ok = worst <= 1e-3 and sat <= 1e-6
    report(9, "three-pair three-tangle bound", ok,
           f"max roof_sum - bound {worst:.2e}, saturation dev at kt=0 {sat:.1e}")


def test_criterion_10_violation_search(warm, report):
    rep = audit.rank_violation_search(seed=0, trials=10_000)
    ce = rep["counterexample"]
    ok = ce["strong_slack"] < 0 and ce["weak_slack"] < 0 and rep["rank2_violations"] == 0
    report(10, "higher-rank violation search", ok,
           f"strong slack {ce['strong_slack']:.3f}, {len(rep['violations'])} violations, "
           f"{rep['rank2_violations']} with rank <= 2")


def test_criterion_11_determinism(tmp_path, capsys, report):
    commands = [
        ["trajectory", "--alpha", "0.3"],
        ["sweep", "--alpha-sweep", "0.1:0.9:9", "--tcount", "32", "--format", "json"],
        ["extremum"],
        ["audit", "--tcount", "32", "--alpha-sweep", "0.1:0.9:5"],
        ["violations", "--trials", "500", "--seed", "4", "--restarts", "2"],
    ]
    same = []
    for argv in commands:
        blobs = []
        for k in range(2):
            path = tmp_path / f"{argv[0]}{k}"
            assert cli.main(argv + ["--out", str(path)]) == 0
            blobs.append(path.read_bytes())
        same.append(blobs[0] == blobs[1] and len(blobs[0]) > 0)
    capsys.readouterr()
    report(11, "byte-identical reruns", all(same),
           f"{sum(same)}/{len(same)} commands identical")
