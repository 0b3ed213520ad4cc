"""Scenario orchestration: trajectories, sweeps, landmarks and audits."""
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import measures
from .errors import DegenerateInputError
from .model import InitialPairState, evolved_three_pair_state, two_pair_amplitudes
from .roof import RoofConfig, roof_one_tangle, roof_three_tangle
from .tensor import reduced_from_amplitudes

# positions in the (c1, r1, c2, r2) register
_PAIRS = {
    "c1c2": [0, 2],
    "r1r2": [1, 3],
    "c1r2": [0, 3],
    "c2r1": [2, 1],
    "c1r1": [0, 1],
}
LOG_DENSITY = math.log(1000.0)
SLACK_TOL = 1e-10
AGREEMENT_TOL = 1e-9
CONSERVATION_TOL = 1e-12
ZERO_ROOF_TOL = 1e-3
# grid points this close to an analytic ESD/ESB time count as on it
TIME_TOL = 1e-12


@dataclass(frozen=True)
class EntanglementRecord:
    alpha: float
    kappa_t: float
    pairwise: measures.PairwiseConcurrences
    block_tangle: float
    within_pair_c1r1: float
    residual_m: float
    qubit_block: tuple
    esd_active: bool
    esb_active: bool
    in_plateau: bool


@dataclass(frozen=True)
class PlateauReport:
    exists: bool
    t_esd: Optional[float]
    t_esb: Optional[float]
    width: Optional[float]
    plateau_value: Optional[float]


@dataclass(frozen=True)
class Check:
    name: str
    max_defect: float
    min_slack: float
    verdict: str

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class ExtremumResult:
    alpha: float
    kappa_t: float
    residual_m: float
    coarse: tuple = ()


@dataclass
class GridEvaluation:
    """Every quantity of the two-pair scenario on flat arrays of points.

    ``numeric`` holds values from extracted marginals (Wootters and linear
    entropy); ``closed`` holds the closed-form counterparts.
    """

    alpha: np.ndarray
    beta: np.ndarray
    kappa_t: np.ndarray
    numeric: dict = field(default_factory=dict)
    closed: dict = field(default_factory=dict)
    esd_active: np.ndarray = None
    esb_active: np.ndarray = None
    in_plateau: np.ndarray = None

    def __len__(self):
        return self.alpha.shape[0]


def default_alpha_grid(lo=0.01, hi=0.99, count=99) -> np.ndarray:
    return np.round(np.linspace(lo, hi, count), 12)


def kappa_grid(tmax=5.0, count=256, spacing="log", tmin=0.0) -> np.ndarray:
    """Decay-time grid; ``log`` spacing clusters points near ``tmin``."""
    if count < 2 or tmin < 0 or not tmax > tmin:
        raise ValueError("need count >= 2 and tmax > tmin >= 0")
    s = np.linspace(0.0, 1.0, count)
    if spacing == "log":
        out = tmin + (tmax - tmin) * np.expm1(s * LOG_DENSITY) / np.expm1(LOG_DENSITY)
    elif spacing == "linear":
        out = tmin + (tmax - tmin) * s
    else:
        raise ValueError(f"unknown spacing {spacing!r}")
    out[0], out[-1] = tmin, tmax
    return out


def _times(abs_a, abs_b):
    """Analytic ESD/ESB times (inf where absent), vectorised."""
    abs_a = np.asarray(abs_a, dtype=float)
    abs_b = np.asarray(abs_b, dtype=float)
    below = abs_a < abs_b
    ratio = np.where(below, abs_a / np.where(abs_b > 0, abs_b, 1.0), 0.5)
    t_esd = np.where(below, -np.log1p(-ratio), np.inf)
    t_esb = np.where(below, -np.log(ratio), 0.0)
    return t_esd, t_esb


def _flags(abs_a, abs_b, kt):
    t_esd, t_esb = _times(abs_a, abs_b)
    exists = abs_a < abs_b / 2.0
    esd = kt >= t_esd - TIME_TOL
    esb = kt > t_esb + TIME_TOL
    plateau = exists & esd & ~esb
    return esd, esb, plateau


def evaluate_points(alpha, beta, kappa_t) -> GridEvaluation:
    alpha, beta, kappa_t = (np.ravel(x) for x in np.broadcast_arrays(
        np.asarray(alpha, dtype=np.complex128), np.asarray(beta, dtype=np.complex128),
        np.asarray(kappa_t, dtype=float)))
    kappa_t = kappa_t.real.astype(float)
    amps = two_pair_amplitudes(alpha, beta, kappa_t)
    ev = GridEvaluation(alpha, beta, kappa_t)
    for name, pos in _PAIRS.items():
        rhos = reduced_from_amplitudes(amps, 4, pos)
        ev.numeric[name] = measures.wootters_concurrence_sq_batch(rhos)
        if name == "c1r1":
            ev.numeric["block_tangle"] = 2.0 * (1.0 - np.sum(np.abs(rhos) ** 2, axis=(1, 2)))
    num = ev.numeric
    num["residual_m"] = num["block_tangle"] - (num["c1c2"] + num["r1r2"] + num["c1r2"] + num["c2r1"])

    abs_a, abs_b = np.abs(alpha), np.abs(beta)
    c1c2, r1r2, c1r2 = measures.closed_form_arrays(alpha, beta, kappa_t)
    block = 4.0 * (abs_a * abs_b) ** 2
    ev.closed.update(
        c1c2=c1c2, r1r2=r1r2, c1r2=c1r2, c2r1=c1r2.copy(), block_tangle=block,
        c1r1=measures.within_pair_closed_form(beta, kappa_t),
        residual_m=block - (c1c2 + r1r2 + 2.0 * c1r2),
    )
    xi2 = np.exp(-kappa_t)
    ev.closed["qubit_block_c1"] = block * xi2
    ev.closed["qubit_block_r1"] = block * -np.expm1(-kappa_t)
    ev.esd_active, ev.esb_active, ev.in_plateau = _flags(abs_a, abs_b, kappa_t)
    return ev


def evaluate_grid(alphas, kappa_ts) -> GridEvaluation:
    """Outer-product grid, alpha-major, real nonnegative amplitudes."""
    a, k = np.meshgrid(np.asarray(alphas, dtype=float), np.asarray(kappa_ts, dtype=float),
                       indexing="ij")
    a = a.ravel()
    return evaluate_points(a, np.sqrt(1.0 - a * a), k.ravel())


def _check_grid(grid):
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size == 0 or np.any(grid < 0) or np.any(np.diff(grid) < 0) or not np.all(np.isfinite(grid)):
        raise ValueError("kappa_t grid must be sorted, finite and nonnegative")
    return grid


def trajectory(init: InitialPairState, grid: Sequence[float]) -> list:
    grid = _check_grid(grid)
    ev = evaluate_points(init.alpha, init.beta, grid)
    n = ev.numeric
    out = []
    for i, kt in enumerate(grid):
        out.append(EntanglementRecord(
            alpha=init.abs_alpha,
            kappa_t=float(kt),
            pairwise=measures.PairwiseConcurrences(
                float(n["c1c2"][i]), float(n["r1r2"][i]), float(n["c1r2"][i]), float(n["c2r1"][i])),
            block_tangle=float(n["block_tangle"][i]),
            within_pair_c1r1=float(n["c1r1"][i]),
            residual_m=float(n["residual_m"][i]),
            qubit_block=(float(ev.closed["qubit_block_c1"][i]), float(ev.closed["qubit_block_r1"][i])),
            esd_active=bool(ev.esd_active[i]),
            esb_active=bool(ev.esb_active[i]),
            in_plateau=bool(ev.in_plateau[i]),
        ))
    return out


def esd_esb_times(init: InitialPairState) -> PlateauReport:
    a, b = init.abs_alpha, init.abs_beta
    if a < 1e-15 or b < 1e-15:
        raise DegenerateInputError("alpha or beta is zero: the cavities start unentangled")
    if a >= b:
        return PlateauReport(False, None, None, None, None)
    t_esd, t_esb = (float(x) for x in _times(a, b))
    exists = a < b / 2.0
    return PlateauReport(exists, t_esd, t_esb, t_esb - t_esd,
                         4.0 * (a * b) ** 2 if exists else None)


def _bisect(pred, lo, hi, tol=1e-13, max_iter=200):
    """Boundary of a predicate that is False at ``lo`` and True at ``hi``."""
    if pred(lo) or not pred(hi):
        raise ValueError("bracket does not contain a sign change")
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _pair_tangle(init, name, kt):
    amps = two_pair_amplitudes(init.alpha, init.beta, kt)
    rho = reduced_from_amplitudes(amps, 4, _PAIRS[name])
    return float(measures.wootters_concurrence_sq_batch(rho)[0])


def numeric_boundaries(init: InitialPairState, half_width=0.25):
    """ESD/ESB times located by bisection on the numerically computed
    c1c2 and r1r2 tangles, bracketed around the analytic values."""
    rep = esd_esb_times(init)
    if rep.t_esd is None:
        return None, None
    lo = max(rep.t_esd - half_width, 0.0)
    t_esd = _bisect(lambda t: _pair_tangle(init, "c1c2", t) == 0.0, lo, rep.t_esd + half_width)
    lo = max(rep.t_esb - half_width, 0.0)
    t_esb = _bisect(lambda t: _pair_tangle(init, "r1r2", t) > 0.0, lo, rep.t_esb + half_width)
    return t_esd, t_esb


def _golden_max(f, lo, hi, tol=1e-9):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _residual_closed(alpha, kt):
    alpha = np.asarray(alpha, dtype=float)
    return measures.closed_form_residual(alpha, np.sqrt(1.0 - alpha * alpha), kt)


def extremum_search(resolution: int = 64, refine: bool = True, tmax: float = 5.0,
                    tol: float = 1e-9) -> ExtremumResult:
    """Global maximum of the residual entanglement over (|alpha|, kappa_t)."""
    if resolution < 32:
        raise ValueError("resolution must be >= 32")
    alphas = np.linspace(0.0, 1.0, resolution + 2)[1:-1]
    kts = np.linspace(0.0, tmax, resolution)
    surf = _residual_closed(alphas[:, None], kts[None, :])
    i, j = np.unravel_index(int(np.argmax(surf)), surf.shape)
    a, t = float(alphas[i]), float(kts[j])
    coarse = (a, t, float(surf[i, j]))
    if refine:
        ha, ht = alphas[1] - alphas[0], kts[1] - kts[0]
        for _ in range(100):
            a_new = _golden_max(lambda x: float(_residual_closed(x, t)),
                                max(a - ha, 1e-12), min(a + ha, 1.0 - 1e-12), tol)
            t_new = _golden_max(lambda x: float(_residual_closed(a_new, x)),
                                max(t - ht, 0.0), min(t + ht, tmax), tol)
            moved = max(abs(a_new - a), abs(t_new - t))
            a, t = a_new, t_new
            if moved < tol:
                break
    return ExtremumResult(a, t, float(_residual_closed(a, t)), coarse)


def ridge_argmax(alphas, kts):
    """Per-alpha argmax over kappa_t of the residual, and the maximum."""
    alphas = np.asarray(alphas, dtype=float)
    surf = _residual_closed(alphas[:, None], np.asarray(kts)[None, :])
    return np.asarray(kts)[np.argmax(surf, axis=1)], surf.max(axis=1)


def _verdict(ok):
    return "pass" if ok else "fail"


def monogamy_audit(init: InitialPairState, grid) -> dict:
    """Pairwise monogamy slack, qubit-block split, conservation and closed-form agreement."""
    grid = _check_grid(grid)
    ev = evaluate_points(init.alpha, init.beta, grid)
    num, cl = ev.numeric, ev.closed
    block = init.block_tangle
    slack = num["block_tangle"] - (num["c1c2"] + num["r1r2"] + num["c1r2"] + num["c2r1"])
    slack_defect = float(np.max(np.abs(slack - num["residual_m"])))
    split = np.abs(cl["qubit_block_c1"] + cl["qubit_block_r1"] - num["block_tangle"])
    conservation = np.abs(num["block_tangle"] - block)
    agreement = max(float(np.max(np.abs(num[k] - cl[k])))
                    for k in ("c1c2", "r1r2", "c1r2", "c2r1", "c1r1", "block_tangle", "residual_m"))
    checks = [
        Check("pair_monogamy", slack_defect, float(np.min(slack)),
              _verdict(np.min(slack) >= -SLACK_TOL and slack_defect <= CONSERVATION_TOL)),
        Check("qubit_block_split", float(np.max(split)), 0.0, _verdict(np.max(split) < AGREEMENT_TOL)),
        Check("conservation", float(np.max(conservation)), 0.0,
              _verdict(np.max(conservation) <= CONSERVATION_TOL)),
        Check("closed_form_agreement", agreement, 0.0, _verdict(agreement <= AGREEMENT_TOL)),
    ]
    rep = None
    if 0 < init.abs_alpha < 1:
        rep = esd_esb_times(init)
    if rep is not None and rep.exists:
        inside = ev.in_plateau
        pair_max = 0.0
        value_defect = 0.0
        if inside.any():
            pair_max = float(max(np.max(num[k][inside]) for k in ("c1c2", "r1r2", "c1r2", "c2r1")))
            value_defect = float(np.max(np.abs(num["residual_m"][inside] - rep.plateau_value)))
        checks.append(Check("plateau", max(pair_max, value_defect), 0.0,
                            _verdict(pair_max <= AGREEMENT_TOL and value_defect <= AGREEMENT_TOL)))
    return {
        "alpha": init.abs_alpha,
        "points": int(grid.size),
        "checks": [c.as_dict() for c in checks],
    }


def eq10_audit(init: InitialPairState, grid, roof_config: RoofConfig = RoofConfig()) -> dict:
    """Roof upper bounds on the cavity and reservoir three-tangles against
    the conserved bound 4|ab|^2.

    A roof sum above the bound is ``inconclusive``: the roof values are
    upper bounds, so only their success certifies the inequality.
    """
    grid = _check_grid(grid)
    bound = init.block_tangle
    points = []
    for kt in grid:
        st = evolved_three_pair_state(init, float(kt))
        cav = roof_three_tangle(st.reduced(["c1", "c2", "c3"]), roof_config)
        res = roof_three_tangle(st.reduced(["r1", "r2", "r3"]), roof_config)
        total = cav.upper_bound + res.upper_bound
        points.append({
            "kappa_t": float(kt),
            "cavity_roof": cav.upper_bound,
            "reservoir_roof": res.upper_bound,
            "roof_sum": total,
            "bound": bound,
            "verdict": "pass" if total <= bound + ZERO_ROOF_TOL else "inconclusive",
        })
    slack = [p["bound"] - p["roof_sum"] for p in points]
    verdict = "pass" if all(p["verdict"] == "pass" for p in points) else "inconclusive"
    check = Check("three_tangle_bound", float(max(0.0, -min(slack))), float(min(slack)), verdict)
    return {
        "alpha": init.abs_alpha,
        "bound": bound,
        "seed": roof_config.seed,
        "points": points,
        "checks": [check.as_dict()],
    }


# ---------------------------------------------------------------------------
# Higher-rank monogamy violations on 4 qubits (A1, A1', A2, A2')
# ---------------------------------------------------------------------------

FAMILIES = ("haar", "rank2", "w_type", "evolved", "pair_product")
_CROSS = ([0, 2], [0, 3], [1, 2], [1, 3])


def _normalise(v):
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _complex_normal(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _sample(rng, family, n):
    if family == "haar":
        return _normalise(_complex_normal(rng, (n, 16)))
    if family == "rank2":
        p = rng.uniform(0.05, 0.95, size=n)
        out = np.empty((n, 16), dtype=np.complex128)
        for i in range(n):
            qa, _ = np.linalg.qr(_complex_normal(rng, (4, 2)))
            qb, _ = np.linalg.qr(_complex_normal(rng, (4, 2)))
            out[i] = (math.sqrt(p[i]) * np.kron(qa[:, 0], qb[:, 0])
                      + math.sqrt(1 - p[i]) * np.kron(qa[:, 1], qb[:, 1]))
        return out
    if family == "w_type":
        out = np.zeros((n, 16), dtype=np.complex128)
        out[:, [8, 4, 2, 1]] = _normalise(_complex_normal(rng, (n, 4)))
        return out
    if family == "evolved":
        a = rng.uniform(0.0, 1.0, size=n)
        return two_pair_amplitudes(a, np.sqrt(1 - a * a), rng.uniform(0.0, 5.0, size=n))
    if family == "pair_product":
        # psi on (A1, A2) times phi on (A1', A2'), reordered to (A1, A1', A2, A2')
        psi = _normalise(_complex_normal(rng, (n, 4))).reshape(n, 2, 2)
        phi = _normalise(_complex_normal(rng, (n, 4))).reshape(n, 2, 2)
        t = np.einsum("nac,nbd->nabcd", psi, phi)
        return t.reshape(n, 16)
    raise ValueError(f"unknown family {family!r}")


def weak_slack(amps):
    """Block tangle of (A1, A1') minus its four cross pairwise tangles, plus
    the rank of the (A1, A1') marginal."""
    amps = np.atleast_2d(amps)
    rho_pair = reduced_from_amplitudes(amps, 4, [0, 1])
    block = 2.0 * (1.0 - np.sum(np.abs(rho_pair) ** 2, axis=(1, 2)))
    pair_sum = np.zeros(amps.shape[0])
    for pos in _CROSS:
        pair_sum += measures.wootters_concurrence_sq_batch(reduced_from_amplitudes(amps, 4, pos))
    ranks = np.sum(np.linalg.eigvalsh(rho_pair) > 1e-10, axis=1)
    return block - pair_sum, block, pair_sum, ranks


def bell_product_counterexample(roof_config: RoofConfig = RoofConfig()) -> dict:
    """|Bell>_{A1 A2} |Bell>_{A1' A2'}: both monogamy forms fail."""
    bell = np.array([1.0, 0.0, 0.0, 1.0]) / math.sqrt(2.0)
    t = np.einsum("ac,bd->abcd", bell.reshape(2, 2), bell.reshape(2, 2)).reshape(1, 16)
    slack, block, pair_sum, rank = weak_slack(t)
    # C^2_{A1|A2A2'} and C^2_{A1'|A2A2'} as roof upper bounds
    roof_a1 = roof_one_tangle(reduced_from_amplitudes(t, 4, [0, 2, 3])[0], 3, 0, roof_config)
    roof_a1p = roof_one_tangle(reduced_from_amplitudes(t, 4, [1, 2, 3])[0], 3, 0, roof_config)
    strong_rhs = roof_a1.upper_bound + roof_a1p.upper_bound
    return {
        "block_tangle": float(block[0]),
        "pairwise_sum": float(pair_sum[0]),
        "weak_slack": float(slack[0]),
        "qubit_block_roofs": [roof_a1.upper_bound, roof_a1p.upper_bound],
        "strong_slack": float(block[0] - strong_rhs),
        "rank": int(rank[0]),
    }


def rank_violation_search(seed: int, trials: int, threshold: float = -1e-8,
                          roof_config: Optional[RoofConfig] = None) -> dict:
    """Sample pure 4-qubit states and catalogue weak-monogamy violations.

    Families rotate through Haar-like states, states with a rank-2 (A1, A1')
    marginal, single-excitation states, evolved cavity-reservoir states and
    products of two 2-qubit states across the A1A1'|A2A2' cut.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    counts = [trials // len(FAMILIES) + (1 if k < trials % len(FAMILIES) else 0)
              for k in range(len(FAMILIES))]
    catalog = []
    summary = {}
    offset = 0
    for family, n in zip(FAMILIES, counts):
        if n == 0:
            continue
        amps = _sample(rng, family, n)
        slack, block, pair_sum, ranks = weak_slack(amps)
        bad = np.nonzero(slack < threshold)[0]
        for i in bad:
            catalog.append({
                "index": int(offset + i),
                "family": family,
                "slack": float(slack[i]),
                "block_tangle": float(block[i]),
                "pairwise_sum": float(pair_sum[i]),
                "rank": int(ranks[i]),
            })
        summary[family] = {
            "samples": int(n),
            "violations": int(bad.size),
            "min_slack": float(slack.min()),
            "rank2_samples": int(np.sum(ranks <= 2)),
            "rank2_min_slack": float(slack[ranks <= 2].min()) if np.any(ranks <= 2) else None,
        }
        offset += n
    rank2_violations = sum(1 for c in catalog if c["rank"] <= 2)
    return {
        "seed": int(seed),
        "trials": int(trials),
        "threshold": threshold,
        "families": summary,
        "violations": catalog,
        "rank2_violations": rank2_violations,
        "counterexample": bell_product_counterexample(roof_config or RoofConfig(seed=seed)),
    }
