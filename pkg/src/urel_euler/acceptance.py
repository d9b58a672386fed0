"""Acceptance suite shared by ``urel-euler accept`` and the test-suite.

Each ``criterion_*`` function runs one check at its full size and tolerance
and returns a :class:`CriterionResult`.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from . import bench, eigen, euler2d, radial, selfsim
from .errors import StateSpaceError
from .state import flux_c_arrays

__all__ = ["CriterionResult", "CRITERIA", "run_all", "format_result"]

V_INFLOW = -1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    measured: str
    expected: str
    seconds: float = 0.0


def format_result(r: CriterionResult) -> str:
    tag = "PASS" if r.passed else "FAIL"
    return f"[{tag}] {r.number:>2} {r.name}: measured {r.measured}; expected {r.expected} ({r.seconds:.1f} s)"


def _table_row(d: int) -> dict[str, float]:
    return {lm.name: lm for lm in bench.load_landmarks() if lm.case == 1 and lm.d == d}


def criterion_1() -> CriterionResult:
    parts, ok, slowest = [], True, 0.0
    for d in (2, 3):
        t0 = time.perf_counter()
        fit = selfsim.reference_profile(d, V_INFLOW, 1e-6).shock
        elapsed = time.perf_counter() - t0
        slowest = max(slowest, elapsed)
        rows = _table_row(d)
        got = {"s_tilde": fit.s_tilde, "p_minus": fit.p_minus, "p_plus": fit.p_plus, "v_plus": fit.v_plus}
        for key, lm in rows.items():
            ok &= lm.check(got[key])
        parts.append(f"d={d}: " + ", ".join(f"{k}={v:.6f}" for k, v in got.items()))
    ok &= slowest < 30.0
    return CriterionResult(
        1, "shock states from the similarity ODE", ok,
        "; ".join(parts) + f"; slowest {slowest:.2f} s",
        "landmark table values within 1e-4, < 30 s per dimension",
    )


def criterion_2() -> CriterionResult:
    rows, ok = [], True
    for v0 in (-0.1, -0.3, -0.5, V_INFLOW, -0.9):
        th = selfsim.reference_profile(2, v0).shock.theta_tilde
        hi = math.sqrt(v0 * v0 + 3.0) - v0
        ok &= math.sqrt(3.0) < th < hi
        rows.append(f"v0={v0:.4f}: {th:.6f} < {hi:.6f}")
    return CriterionResult(2, "shock location bracket", ok, "; ".join(rows), "sqrt3 < theta < sqrt(v0^2+3)-v0 for all five")


def _radsym_vs_ode(case_id: int):
    case = bench.get_case(case_id)
    art = bench.run_case(case, "radsym", 5000)
    ref = selfsim.reference_profile(2, case.v_far)
    prof = art.profile
    p_ref, v_ref = selfsim.profile_at_time(ref, prof.t, prof.x)
    return art, ref, prof, p_ref, v_ref


def criterion_3() -> CriterionResult:
    art, ref, prof, p_ref, v_ref = _radsym_vs_ode(1)
    dx = art.record.grid.dx
    s = ref.shock
    plateau = (prof.x >= 0.1) & (prof.x <= 0.35)
    plateau_err = float(np.max(np.abs(prof.p[plateau] / s.p_minus - 1.0)))
    shock_x = radial.detect_shocks(prof.x, prof.v)[0].position
    shock_err = abs(shock_x - s.s_tilde * prof.t)
    keep = np.abs(prof.x - s.s_tilde * prof.t) > 5.0 * dx
    dp = float(np.mean(np.abs(prof.p - p_ref)[keep]))
    dv = float(np.mean(np.abs(prof.v - v_ref)[keep]))
    ok = plateau_err <= 0.02 and shock_err <= 2.0 * dx and dp < 0.15 and dv < 0.01
    return CriterionResult(
        3, "staggered scheme vs similarity solution, inflow", ok,
        f"plateau rel. err {plateau_err:.2e}, shock at {shock_x:.5f} (|err| {shock_err:.2e}), "
        f"mean|dp| {dp:.2e}, mean|dv| {dv:.2e}",
        f"plateau <= 2%, shock within {2 * dx:.1e}, mean|dp| < 0.15, mean|dv| < 0.01",
    )


def criterion_4() -> CriterionResult:
    _, _, prof, p_ref, v_ref = _radsym_vs_ode(2)
    dp = float(np.mean(np.abs(prof.p - p_ref)))
    dv = float(np.mean(np.abs(prof.v - v_ref)))
    return CriterionResult(
        4, "staggered scheme vs similarity solution, outflow", dp < 0.02 and dv < 0.005,
        f"mean|dp| {dp:.2e}, mean|dv| {dv:.2e}", "mean|dp| < 0.02, mean|dv| < 0.005",
    )


def criterion_5() -> CriterionResult:
    art3 = bench.run_case(bench.get_case(3), "radsym", 5000)
    t3, _ = bench.detect_focus(art3.record)
    prof = art3.profile
    r_shock = radial.detect_shocks(prof.x, prof.v)[0].position
    art5 = bench.run_case(bench.get_case(5), "radsym", 5000)
    t5, _ = bench.detect_focus(art5.record)
    ok = 4.98 <= t3 <= 5.08 and 0.74 <= t5 <= 0.80 and abs(r_shock - 0.55) <= 0.05
    return CriterionResult(
        5, "focus times and reflected shock", ok,
        f"t_focus(3)={t3:.4f}, t_focus(5)={t5:.4f}, shock radius(3)={r_shock:.4f}",
        "[4.98, 5.08], [0.74, 0.80], 0.55 +- 0.05",
    )


def _random_piecewise(rng):
    k = int(rng.integers(1, 6))
    cuts = np.sort(rng.uniform(0.0, 1.0, k))
    p = np.exp(rng.uniform(math.log(1e-3), math.log(1e3), k + 1))
    v = rng.uniform(-0.99, 0.99, k + 1)

    def pick(vals):
        return lambda x: vals[np.searchsorted(cuts, x)]

    return pick(p), pick(v)


def criterion_6(trials: int = 100, seed: int = 6) -> CriterionResult:
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(trials):
        p0, v0 = _random_piecewise(rng)
        grid = radial.build_grid(1.0, 1.0, 200)
        try:
            rec = radial.run(grid, p0, v0, record_stride=1)
            if not all(lv.is_admissible() for lv in rec.levels):
                failures += 1
        except StateSpaceError:
            failures += 1
    return CriterionResult(
        6, "positivity under random piecewise-constant data", failures == 0,
        f"{failures} failures in {trials} runs", "0 failures",
    )


def criterion_7() -> CriterionResult:
    rows, ok = [], True
    for N in (10, 1000):
        grid = radial.build_grid(1.0, 1.0, N)
        p0 = 1.7
        rec = radial.run(grid, lambda x: np.full_like(x, p0), lambda x: np.zeros_like(x), record_stride=1)
        first = rec.levels[0]
        same = all(
            np.array_equal(lv.a, first.a[: lv.a.size]) and np.array_equal(lv.b, first.b[: lv.b.size])
            for lv in rec.levels
        )
        ok &= same
        rows.append(f"N={N}: {'bit-identical' if same else 'drift'} over {len(rec.levels)} levels")
    return CriterionResult(7, "stationary state is a fixed point", ok, "; ".join(rows), "bit-identical for N in {10, 1000}")


def chord_bound_violations(a, b, lam) -> int:
    c = flux_c_arrays(a, b)
    lo_a = -(a + b / lam) < b + c / lam
    hi_a = b + c / lam < a + b / lam
    lo_b = -(a - b / lam) < b - c / lam
    hi_b = b - c / lam < a - b / lam
    return int(np.count_nonzero(~(lo_a & hi_a & lo_b & hi_b)))


def root_bound_violations(a, eta, xi) -> int:
    disc = 4.0 * a * a * (1.0 + 3.0 * eta * eta) - 3.0 * xi * xi
    with np.errstate(invalid="ignore"):
        val = (xi + eta * np.sqrt(disc)) / (1.0 + 3.0 * eta * eta)
    return int(np.count_nonzero(~((disc > 0) & (np.abs(val) < a))))


def criterion_8(samples: int = 10**6, seed: int = 8) -> CriterionResult:
    rng = np.random.default_rng(seed)
    a = np.exp(rng.uniform(-7.0, 7.0, samples))
    b = a * rng.uniform(-1.0, 1.0, samples)
    lam = np.where(rng.random(samples) < 0.25, 1.0, 1.0 + rng.exponential(2.0, samples))
    v1 = chord_bound_violations(a, b, lam)
    a2 = np.exp(rng.uniform(-7.0, 7.0, samples))
    eta = (1.0 / 3.0) * (1.0 - rng.random(samples))  # (0, 1/3]
    xi = -a2 * (1.0 + eta) + rng.random(samples) * 2.0 * a2
    inside = (xi > -a2 * (1.0 + eta)) & (xi < a2 * (1.0 - eta))
    v2 = root_bound_violations(a2[inside], eta[inside], xi[inside])
    return CriterionResult(
        8, "auxiliary inequalities on random samples", v1 == 0 and v2 == 0,
        f"{v1} / {samples} and {v2} / {int(inside.sum())} violations", "0 violations",
    )


def criterion_9(samples: int = 10**4, seed: int = 9) -> CriterionResult:
    rng = np.random.default_rng(seed)
    worst_lr = worst_ar = worst_lam = 0.0
    for d in (1, 2, 3):
        for _ in range(samples):
            p = math.exp(rng.uniform(-3.0, 3.0))
            u = rng.normal(size=d) * rng.uniform(0.0, 3.0)
            n = rng.normal(size=d)
            n /= np.linalg.norm(n)
            w = eigen.conserved_from_primitive(p, u)
            dec = eigen.eigen(w, n)
            A = eigen.numerical_jacobian(w, n)
            worst_lr = max(worst_lr, float(np.max(np.abs(dec.L @ dec.R - np.eye(d + 1)))))
            worst_ar = max(worst_ar, float(np.max(np.abs(A @ dec.R - dec.R * dec.eigenvalues)))
                           / float(np.max(np.abs(A).sum(axis=1))))
            worst_lam = max(worst_lam, float(np.max(np.abs(dec.eigenvalues))))
    ok = worst_lr <= 1e-10 and worst_ar <= 1e-6 and worst_lam < 1.0
    return CriterionResult(
        9, "eigensystem against finite-difference Jacobian", ok,
        f"max|LR-I| {worst_lr:.1e}, max|AR-RL|/|A| {worst_ar:.1e}, max|lambda| {worst_lam:.6f}",
        "<= 1e-10, <= 1e-6, < 1",
    )


def _binned_radsym(level: radial.LevelSolution, edges):
    """Area-weighted bin averages of a radial level, matching the 2D binning."""
    p, v = level.primitive()
    nb = edges.size - 1
    idx = np.digitize(level.x, edges) - 1
    k = (idx >= 0) & (idx < nb)
    w = level.x[k]
    norm = np.bincount(idx[k], w, nb)
    return np.bincount(idx[k], p[k] * w, nb) / norm, np.bincount(idx[k], v[k] * w, nb) / norm


def criterion_10(sizes=(128, 256, 512), nbins: int = 60) -> CriterionResult:
    case = bench.get_case(3)
    ref = bench.run_case(case, "radsym", 5000).record.final
    edges = np.linspace(0.0, case.x_star, nbins + 1)
    p_ref, v_ref = _binned_radsym(ref, edges)
    # shocks of the reference, located on the bin grid
    centres = 0.5 * (edges[:-1] + edges[1:])
    shock_bins = [int(np.clip(np.digitize(s.position, edges) - 1, 0, nbins - 1))
                  for s in radial.detect_shocks(ref.x, ref.primitive()[1])]
    band = np.zeros(nbins, bool)
    for i in shock_bins:
        band[max(0, i - 1): i + 2] = True
    l1, dv_last, floors = [], float("nan"), 0
    for n in sizes:
        art = bench.run_case(case, "euler2d", n, nbins=nbins, order=2)
        floors += art.state2d.floor_events
        _, p, v = euler2d.radial_profile(art.state2d, nbins, case.x_star)
        l1.append(float(np.nanmean(np.abs(p - p_ref))))
        dv_last = float(np.nanmean(np.abs(v - v_ref)[~band]))
    monotone = all(x > y for x, y in zip(l1, l1[1:]))
    ok = monotone and dv_last < 0.02 and floors == 0
    return CriterionResult(
        10, "2D finite volumes converge to the staggered scheme", ok,
        "L1(p) " + " > ".join(f"{x:.2e}" for x in l1)
        + f"; mean|dv| at {sizes[-1]}^2 {dv_last:.2e}; shocks near r="
        + ", ".join(f"{centres[i]:.2f}" for i in shock_bins) + f"; floor events {floors}",
        "strictly decreasing L1, mean|dv| < 0.02, no floored cells",
    )


def criterion_11() -> CriterionResult:
    rows, ok = [], True
    for d in (2, 3):
        a = selfsim.reference_profile(d, V_INFLOW, 1e-6).shock.theta_tilde
        b = selfsim.reference_profile(d, V_INFLOW, 5e-7).shock.theta_tilde
        ok &= abs(a - b) <= 1e-10
        rows.append(f"d={d}: |diff| {abs(a - b):.1e}")
    return CriterionResult(11, "RK4 step halving", ok, "; ".join(rows), "<= 1e-10")


CRITERIA: dict[int, Callable[[], CriterionResult]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
    5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8,
    9: criterion_9, 10: criterion_10, 11: criterion_11,
}


def run_criterion(number: int) -> CriterionResult:
    t0 = time.perf_counter()
    r = CRITERIA[number]()
    return CriterionResult(r.number, r.name, r.passed, r.measured, r.expected, time.perf_counter() - t0)


def run_all(selected=None) -> Iterator[CriterionResult]:
    for number in selected or sorted(CRITERIA):
        yield run_criterion(number)
