"""Benchmark registry, run orchestration, comparison metrics and file I/O."""
from __future__ import annotations

import configparser
import csv
import io
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable

import numpy as np

from . import euler2d, radial, selfsim
from .errors import DomainError, InsufficientRecordError, UrelError
from .state import conserved_arrays

__all__ = [
    "CSV_HEADER",
    "Landmark",
    "BenchmarkCase",
    "Profile",
    "ComparisonReport",
    "RunArtifacts",
    "load_landmarks",
    "registry",
    "get_case",
    "write_profile_csv",
    "read_profile_csv",
    "run_case",
    "compare",
    "detect_focus",
    "parse_config",
]

CSV_HEADER = "# urel-euler v1"
SOLVERS = ("radsym", "ode", "euler2d")


@dataclass(frozen=True)
class Landmark:
    case: int
    d: int
    name: str
    value: float
    tolerance: float
    provenance: str

    def check(self, measured: float) -> bool:
        return abs(measured - self.value) <= self.tolerance


@dataclass(frozen=True)
class BenchmarkCase:
    id: int
    name: str
    p0: Callable
    t_end: float
    x_star: float
    d: int = 2
    v0: Callable | None = None
    u0: Callable | None = None
    reference: str = "none"
    v_far: float | None = None
    landmarks: tuple[Landmark, ...] = ()

    def with_dimension(self, d: int) -> "BenchmarkCase":
        lms = tuple(lm for lm in load_landmarks() if lm.case == self.id and lm.d == d)
        return BenchmarkCase(
            self.id, self.name, self.p0, self.t_end, self.x_star, d,
            self.v0, self.u0, self.reference, self.v_far, lms,
        )

    def landmark(self, name: str) -> Landmark:
        for lm in self.landmarks:
            if lm.name == name:
                return lm
        raise KeyError(name)

    def initial_velocity(self, x) -> np.ndarray:
        """Physical speed of the initial data at radii ``x``."""
        x = np.asarray(x, dtype=float)
        if self.v0 is not None:
            return np.broadcast_to(np.asarray(self.v0(x), dtype=float), x.shape)
        u = np.asarray(self.u0(x), dtype=float)
        return np.broadcast_to(u / np.sqrt(1.0 + u * u), x.shape)


@dataclass
class Profile:
    """Radial samples ``p(x)``, ``v(x)`` at a single time."""

    t: float
    x: np.ndarray
    p: np.ndarray
    v: np.ndarray

    def conserved(self):
        u = self.v / np.sqrt((1.0 - self.v) * (1.0 + self.v))
        return conserved_arrays(self.p, u)


@dataclass
class ComparisonReport:
    l1_p: float
    l1_v: float
    linf_p: float
    linf_v: float
    shocks_a: list[float] = field(default_factory=list)
    shocks_b: list[float] = field(default_factory=list)
    landmarks: list[tuple[str, float, float, bool]] = field(default_factory=list)


@dataclass
class RunArtifacts:
    case: BenchmarkCase
    solver: str
    paths: list[Path]
    profile: Profile
    record: radial.SpaceTimeRecord | None = None
    reference: selfsim.SelfSimilarProfile | None = None
    state2d: euler2d.FieldState2D | None = None


# -- registry -----------------------------------------------------------------


def load_landmarks() -> list[Landmark]:
    text = resources.files("urel_euler").joinpath("data/landmarks.csv").read_text()
    rows = csv.DictReader(io.StringIO(text))
    return [
        Landmark(int(r["case"]), int(r["d"]), r["name"], float(r["value"]), float(r["tolerance"]), r["provenance"])
        for r in rows
    ]


def _const(value: float) -> Callable:
    return lambda x: np.full(np.shape(x), value, dtype=float)


def _disc(inside: float, outside: float) -> Callable:
    return lambda x: np.where(np.asarray(x) <= 1.0, inside, outside)


def _periodic_u(x):
    x = np.asarray(x, dtype=float)
    return np.where(x < 1.0, np.sin(2.0 * np.pi * x), 0.0)


def registry() -> list[BenchmarkCase]:
    lms = load_landmarks()

    def pick(case, d=2):
        return tuple(lm for lm in lms if lm.case == case and lm.d == d)

    v = 1.0 / math.sqrt(2.0)
    return [
        BenchmarkCase(1, "radial inflow", _const(1.0), 1.0, 2.0, v0=_const(-v), reference="ode", v_far=-v, landmarks=pick(1)),
        BenchmarkCase(2, "radial outflow", _const(1.0), 1.0, 2.0, v0=_const(v), reference="ode", v_far=v, landmarks=pick(2)),
        BenchmarkCase(3, "expanding bubble", _disc(1.0, 0.1), 6.0, 6.0, v0=_const(0.0), landmarks=pick(3)),
        BenchmarkCase(4, "collapsing bubble", _disc(0.1, 1.0), 6.0, 6.0, v0=_const(0.0), landmarks=pick(4)),
        BenchmarkCase(5, "periodic radial velocity", _const(1.0), 6.0, 5.0, u0=_periodic_u, landmarks=pick(5)),
    ]


def get_case(case_id: int, d: int = 2) -> BenchmarkCase:
    for case in registry():
        if case.id == case_id:
            return case if d == 2 else case.with_dimension(d)
    raise KeyError(f"unknown case {case_id}")


# -- CSV ----------------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def write_profile_csv(path, profile: Profile) -> Path:
    """Write ``t,x,p,v,a,b`` rows with shortest round-trip float formatting."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    a, b = profile.conserved()
    lines = [CSV_HEADER, "t,x,p,v,a,b"]
    t = _fmt(profile.t)
    for row in zip(profile.x, profile.p, profile.v, a, b):
        lines.append(",".join([t, *map(_fmt, row)]))
    path.write_text("\n".join(lines) + "\n")
    return path


def _write_series_csv(path, t, x, p, v, a, b) -> Path:
    path = Path(path)
    lines = [CSV_HEADER, "t,x,p,v,a,b"]
    for row in zip(t, x, p, v, a, b):
        lines.append(",".join(map(_fmt, row)))
    path.write_text("\n".join(lines) + "\n")
    return path


def _write_table_csv(path, rows: list[tuple[str, float]]) -> Path:
    path = Path(path)
    lines = [CSV_HEADER, "name,value"] + [f"{k},{_fmt(v)}" for k, v in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_profile_csv(path) -> Profile:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path}: missing '{CSV_HEADER}' header")
    if lines[1] != "t,x,p,v,a,b":
        raise ValueError(f"{path}: unexpected column header {lines[1]!r}")
    data = np.array([[float(c) for c in ln.split(",")] for ln in lines[2:] if ln], dtype=float)
    data = data.reshape(-1, 6)
    t = float(data[0, 0]) if data.size else 0.0
    return Profile(t, data[:, 1], data[:, 2], data[:, 3])


# -- running ------------------------------------------------------------------


def _radsym(case: BenchmarkCase, N: int, t_end: float, record_stride):
    grid = radial.build_grid(t_end, case.x_star, N, d=case.d)
    record = radial.run(grid, case.p0, case.v0, record_stride, u0=case.u0)
    p, v = record.final.primitive()
    return Profile(record.final.t, record.final.x, p, v), record


def run_case(
    case: BenchmarkCase,
    solver: str,
    resolution: int,
    out_dir=None,
    *,
    t_end: float | None = None,
    record_stride: int | None = None,
    h: float = 1e-6,
    order: int = 2,
    cfl: float = 0.45,
    nbins: int | None = None,
) -> RunArtifacts:
    """Run one solver on one case and write its CSV files to ``out_dir``.

    ``resolution`` is ``N`` for ``radsym``, the number of sample radii for
    ``ode`` and the cells per side for ``euler2d``.
    """
    if solver not in SOLVERS:
        raise ValueError(f"solver must be one of {SOLVERS}")
    if int(resolution) != resolution or resolution < 1:
        raise ValueError("resolution must be a positive integer")
    resolution = int(resolution)
    t_end = case.t_end if t_end is None else float(t_end)
    out = Path(out_dir) if out_dir is not None else None
    stem = f"case{case.id}_{solver}_d{case.d}_n{resolution}"
    paths: list[Path] = []
    try:
        if solver == "radsym":
            profile, record = _radsym(case, resolution, t_end, record_stride)
            art = RunArtifacts(case, solver, paths, profile, record=record)
            if out is not None:
                paths.append(write_profile_csv(out / f"{stem}.csv", profile))
                pa = record.axis_pressure()
                ua = record.axis_b / np.sqrt(4.0 * pa * (pa + record.axis_a))
                paths.append(_write_series_csv(
                    out / f"{stem}_axis.csv", record.axis_t, record.axis_x, pa,
                    ua / np.sqrt(1.0 + ua * ua), record.axis_a, record.axis_b,
                ))
            return art
        if solver == "ode":
            if case.reference != "ode":
                raise ValueError(f"case {case.id} has no self-similar reference")
            ref = selfsim.reference_profile(case.d, case.v_far, h)
            x = (np.arange(resolution) + 0.5) * case.x_star / resolution
            p, v = selfsim.profile_at_time(ref, t_end, x)
            profile = Profile(t_end, x, p, v)
            art = RunArtifacts(case, solver, paths, profile, reference=ref)
            if out is not None:
                paths.append(write_profile_csv(out / f"{stem}.csv", profile))
                if ref.shock is not None:
                    s = ref.shock
                    paths.append(_write_table_csv(out / f"{stem}_shock.csv", [
                        ("theta_tilde", s.theta_tilde), ("s_tilde", s.s_tilde),
                        ("p_minus", s.p_minus), ("p_plus", s.p_plus),
                        ("v_minus", s.v_minus), ("v_plus", s.v_plus),
                    ]))
            return art
        if case.d != 2:
            raise ValueError("euler2d runs only in two dimensions")
        grid = euler2d.CartesianGrid2D.square(case.x_star, resolution)
        if case.v0 is not None:
            state = euler2d.init_radial(grid, case.p0, case.v0, "v")
        else:
            state = euler2d.init_radial(grid, case.p0, case.u0, "u")
        state = euler2d.run(state, t_end, cfl, order=order)
        r, p, v = euler2d.radial_profile(state, nbins or resolution // 2, case.x_star)
        keep = np.isfinite(p)
        profile = Profile(state.t, r[keep], p[keep], v[keep])
        art = RunArtifacts(case, solver, paths, profile, state2d=state)
        if out is not None:
            paths.append(write_profile_csv(out / f"{stem}.csv", profile))
        return art
    except UrelError as exc:
        raise type(exc)(f"case {case.id} / {solver}: {exc}") from exc


# -- comparison ---------------------------------------------------------------


def compare(
    a: Profile,
    b: Profile,
    common_radii=None,
    *,
    exclude: list[tuple[float, float]] | None = None,
) -> ComparisonReport:
    """Distances between two profiles after linear interpolation onto common radii.

    ``exclude`` lists ``(lo, hi)`` radius intervals left out of the norms.
    """
    lo = max(a.x[0], b.x[0])
    hi = min(a.x[-1], b.x[-1])
    if not lo < hi:
        raise DomainError("profiles do not overlap")
    if common_radii is None:
        r = a.x[(a.x >= lo) & (a.x <= hi)]
    else:
        r = np.asarray(common_radii, dtype=float)
        if r.min() < lo - 1e-12 or r.max() > hi + 1e-12:
            raise DomainError(f"common radii leave the overlap [{lo}, {hi}]")
    mask = np.ones(r.shape, bool)
    for e_lo, e_hi in exclude or []:
        mask &= ~((r >= e_lo) & (r <= e_hi))
    r = r[mask]
    if r.size == 0:
        raise DomainError("no radii left after exclusions")
    dp = np.abs(np.interp(r, a.x, a.p) - np.interp(r, b.x, b.p))
    dv = np.abs(np.interp(r, a.x, a.v) - np.interp(r, b.x, b.v))
    return ComparisonReport(
        float(dp.mean()), float(dv.mean()), float(dp.max()), float(dv.max()),
        [s.position for s in radial.detect_shocks(a.x, a.v)],
        [s.position for s in radial.detect_shocks(b.x, b.v)],
    )


def detect_focus(record: radial.SpaceTimeRecord, window: tuple[float, float] | None = None):
    """Time and value of the largest on-axis pressure (earliest on ties)."""
    if record.axis_t is None or record.axis_a is None:
        raise InsufficientRecordError("record carries no on-axis series")
    t = record.axis_t
    p = record.axis_pressure()
    if window is not None:
        sel = (t >= window[0]) & (t <= window[1])
        if not np.any(sel):
            raise InsufficientRecordError(f"no levels inside the window {window}")
        t, p = t[sel], p[sel]
    i = int(np.argmax(p))
    return float(t[i]), float(p[i])


# -- config -------------------------------------------------------------------

_CONFIG_TYPES = {
    "case": int,
    "solver": str,
    "n": int,
    "d": int,
    "t_end": float,
    "out": str,
    "record_stride": int,
    "h": float,
    "order": int,
    "cfl": float,
    "nbins": int,
}


def parse_config(path) -> dict:
    """Read a flat ``key = value`` file; ``#`` starts a comment."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.read_string("[run]\n" + Path(path).read_text())
    out = {}
    for key, raw in parser["run"].items():
        if key not in _CONFIG_TYPES:
            raise ValueError(f"unknown config key {key!r}")
        out[key] = _CONFIG_TYPES[key](raw)
    return out
