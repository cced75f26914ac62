"""Scripted reproduction runs: the rank-2 minor analysis (fig1), Monte-Carlo
l1 maxima against the bounds (fig2, rank2), and appendix identity checks.

Every run returns a flat list of :class:`ExperimentRecord`; records with
different ``experiment_id`` go to different CSV files.
"""

from __future__ import annotations

import csv
import io
import json
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .bases import all_mubs, fourier_mub, is_prime, quadratic_dephasing
from .bounds import appendix_d_gap, bound_b, bound_b_from_spectrum, bound_o, bound_r
from .diagsdp import DiagSdpSolver, Sense
from .errors import DomainError, InvalidP
from .haar import haar_unitaries, random_spectrum, random_state, relative_deviation, scan_max
from .hermlin import dagger, matrix_sqrt

SCHEMAS = {
    "fig1": (("a",), ("cos_theta1", "abs_rhs_same", "abs_rhs_diff")),
    "fig1_crossing": (("branch", "index"), ("a", "target", "distance", "interior")),
    "fig2": (
        ("family", "p", "n", "seed"),
        (
            "o_d",
            "b_d",
            "c_l1_max",
            "deviation",
            "deviation_cap",
            "exceedance",
            "exceedance_stderr",
            "peak",
            "resolution",
        ),
    ),
    "fig2_hist": (("family", "p", "bin_left", "bin_right"), ("count",)),
    "rank2": (
        ("d", "lambda0", "n", "seed"),
        ("b_d", "c_l1_max", "deviation", "resolution", "gap_over_resolution", "in_envelope"),
    ),
    "appendix": (("check", "d", "trials", "seed"), ("max_error", "failures")),
}

FAMILIES = {
    "d4": (0.1, 0.1),
    "d5": (0.04, 0.06, 0.1),
    "d6": (0.02, 0.04, 0.06, 0.08),
}
PINNED_P = (0.0, 0.1, 0.2, 0.3, 0.4)
RANK2_ENVELOPE = (1.392836e-4, 0.012743)


@dataclass
class ExperimentRecord:
    experiment_id: str
    parameters: dict
    values: dict
    status: str = "info"

    def __post_init__(self):
        params, vals = SCHEMAS[self.experiment_id]
        missing = [k for k in params if k not in self.parameters] + [k for k in vals if k not in self.values]
        if missing:
            raise KeyError(f"{self.experiment_id} record lacks {missing}")
        if self.status not in ("pass", "fail", "info"):
            raise ValueError(f"bad status {self.status!r}")


# --------------------------------------------------------------------------
# fig1: can a rank-2 qudit state be rotated onto the d = 4 MCMS family?


def cos_theta1(a):
    """Phase cosine forced by a vanishing leading 3 x 3 minor."""
    a = np.asarray(a, dtype=float)
    return 3.0 / (8.0 * a) - 1.0 / (128.0 * a**3)


def lambda_u(a, t1, t2, t3) -> np.ndarray:
    """Phase-reduced d = 4 MCMS with equal off-diagonal modulus a."""
    e = np.exp
    return np.array(
        [
            [0.25, a, a * e(1j * t1), a * e(1j * t2)],
            [a, 0.25, a, a * e(1j * t3)],
            [a * e(-1j * t1), a, 0.25, a],
            [a * e(-1j * t2), a * e(-1j * t3), a, 0.25],
        ],
        dtype=complex,
    )


def leading_minor3(a, t1):
    return 1 / 64 - 0.75 * a**2 + 2 * a**3 * np.cos(t1)


def minor_delta3(a, t1, t2, t3):
    """Minor with the first row and last column of lambda_u removed."""
    return (
        a**3 * (1 + np.exp(-1j * (t1 + t3)))
        - 0.25 * a**2 * (np.exp(-1j * t1) + np.exp(-1j * t3))
        + (a / 16 - a**3) * np.exp(-1j * t2)
    )


def _rhs_direct(a, same_sign: bool):
    c = np.clip(cos_theta1(a), -1.0, 1.0)
    t1 = np.arccos(c)
    t3 = t1 if same_sign else -t1
    num = 16 * a**2 * (1 + np.exp(-1j * (t1 + t3))) - 4 * a * (np.exp(-1j * t1) + np.exp(-1j * t3))
    return num / (1 - 16 * a**2)


def phase_rhs(a, same_sign: bool):
    """Value that exp(-i theta_2) must take for the second minor to vanish.

    ``same_sign`` picks sin(theta_3) = sin(theta_1), otherwise opposite.
    At a = 1/4 numerator and denominator both vanish; the limit is taken
    by quadratic extrapolation from the left.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    out = np.empty(a.shape, dtype=complex)
    sing = np.abs(1 - 16 * a**2) < 1e-8
    out[~sing] = _rhs_direct(a[~sing], same_sign)
    if sing.any():
        h = 1e-5
        s = a[sing]
        out[sing] = (
            3 * _rhs_direct(s - h, same_sign) - 3 * _rhs_direct(s - 2 * h, same_sign) + _rhs_direct(s - 3 * h, same_sign)
        )
    return out


def fig1_scan(a_min: float = 0.125, a_max: float = 0.25, steps: int = 10_000) -> list[ExperimentRecord]:
    if steps < 2:
        raise ValueError("steps must be at least 2")
    if not 0.125 - 1e-15 <= a_min < a_max <= 0.25 + 1e-15:
        raise DomainError(f"[a_min, a_max] must lie within [1/8, 1/4], got [{a_min}, {a_max}]")
    grid = np.linspace(a_min, a_max, steps)
    c = cos_theta1(grid)
    ok = np.abs(c) <= 1 + 1e-12
    same = np.full(steps, np.nan)
    diff = np.full(steps, np.nan)
    same[ok] = np.abs(phase_rhs(grid[ok], True))
    diff[ok] = np.abs(phase_rhs(grid[ok], False))
    return [
        ExperimentRecord(
            "fig1",
            {"a": float(a)},
            {"cos_theta1": float(ci), "abs_rhs_same": float(s), "abs_rhs_diff": float(t)},
            "info",
        )
        for a, ci, s, t in zip(grid, c, same, diff)
    ]


def unit_crossings(a, mod_rhs, eps=1e-9) -> list[float]:
    """Locations where ``mod_rhs`` equals 1: grid points within ``eps`` and
    linearly interpolated sign changes of ``mod_rhs - 1``."""
    a = np.asarray(a, dtype=float)
    g = np.asarray(mod_rhs, dtype=float) - 1.0
    step = a[1] - a[0]
    found = [float(x) for x in a[np.abs(g) <= eps]]
    for i in np.flatnonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0):
        found.append(float(a[i] + g[i] * (a[i + 1] - a[i]) / (g[i] - g[i + 1])))
    found.sort()
    merged: list[float] = []
    for x in found:
        if not merged or x - merged[-1] > 2 * step:
            merged.append(x)
    return merged


FIG1_TARGETS = {"diff": (1 / (4 * np.sqrt(3)), 0.25), "same": (0.25,)}


def fig1_crossings(records: list[ExperimentRecord]) -> list[ExperimentRecord]:
    """Unit-modulus points of both branches compared to the expected roots.

    A crossing passes when it lies within one grid step of an expected root.
    """
    a = np.array([r.parameters["a"] for r in records])
    step = a[1] - a[0]
    out = []
    for branch, key in (("same", "abs_rhs_same"), ("diff", "abs_rhs_diff")):
        vals = np.array([r.values[key] for r in records])
        good = ~np.isnan(vals)
        for k, x in enumerate(unit_crossings(a[good], vals[good])):
            targets = np.array(FIG1_TARGETS[branch])
            j = int(np.argmin(np.abs(targets - x)))
            dist = abs(x - targets[j])
            interior = a[0] + step < x < a[-1] - step
            out.append(
                ExperimentRecord(
                    "fig1_crossing",
                    {"branch": branch, "index": k},
                    {"a": x, "target": float(targets[j]), "distance": float(dist), "interior": float(interior)},
                    "pass" if dist <= step else "fail",
                )
            )
    return out


# --------------------------------------------------------------------------
# fig2 and rank2: Monte-Carlo maxima of the l1 coherence


def family_spectrum(family: str, p: float) -> np.ndarray:
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; choose from {sorted(FAMILIES)}")
    lam = np.array(FAMILIES[family] + (p, 0.8 - p))
    if np.any(lam < -1e-12):
        raise InvalidP(f"p = {p} makes an eigenvalue negative (need 0 <= p <= 0.8)", p)
    return np.clip(lam, 0.0, None)


def fig2_run(
    family: str,
    p_grid=PINNED_P,
    n: int = 1_000_000,
    seed: int = 0,
    workers: int = 1,
    bins: int = 200,
) -> list[ExperimentRecord]:
    """Haar scan of C_l1 for each p.  p = 0.4 also gets the histogram rows."""
    for p in p_grid:
        family_spectrum(family, p)
    records = []
    hist = []
    for p in p_grid:
        lam = family_spectrum(family, p)
        o_d = bound_o(lam)
        b_d = bound_b_from_spectrum(lam)
        stats = scan_max(np.diag(lam).astype(complex), n, seed, threshold=o_d, bins=bins, upper=b_d, workers=workers)
        dev = relative_deviation(stats.max_value, b_d)
        is_04 = bool(np.isclose(p, 0.4))
        records.append(
            ExperimentRecord(
                "fig2",
                {"family": family, "p": float(p), "n": n, "seed": seed},
                {
                    "o_d": o_d,
                    "b_d": b_d,
                    "c_l1_max": stats.max_value,
                    "deviation": dev,
                    "deviation_cap": 1.0 - o_d / b_d,
                    "exceedance": stats.exceedance_fraction if is_04 else float("nan"),
                    "exceedance_stderr": stats.exceedance_stderr if is_04 else float("nan"),
                    "peak": stats.peak(),
                    "resolution": stats.resolution,
                },
                "pass" if dev <= 0.05 else "fail",
            )
        )
        if is_04:
            e = stats.bin_edges
            hist += [
                ExperimentRecord(
                    "fig2_hist",
                    {"family": family, "p": float(p), "bin_left": float(e[i]), "bin_right": float(e[i + 1])},
                    {"count": int(c)},
                )
                for i, c in enumerate(stats.counts)
            ]
    return records + hist


def rank2_scan(
    d: int = 4,
    k_step: float = 0.05,
    n: int = 1_000_000,
    seed: int = 0,
    workers: int = 1,
    envelope=RANK2_ENVELOPE,
) -> list[ExperimentRecord]:
    """Scan lambda_0 = k * k_step in (0, 1) for diag(lambda_0, 1 - lambda_0, 0, ...)."""
    if d < 4:
        raise ValueError(f"rank-2 scan needs d >= 4, got {d}")
    ks = np.arange(1, int(round(1 / k_step)))
    records = []
    for k in ks:
        l0 = float(round(k * k_step, 12))
        lam = np.zeros(d)
        lam[0], lam[1] = l0, 1 - l0
        b_d = bound_b_from_spectrum(lam)
        stats = scan_max(np.diag(lam).astype(complex), n, seed, upper=b_d, workers=workers)
        dev = relative_deviation(stats.max_value, b_d)
        res = stats.resolution
        records.append(
            ExperimentRecord(
                "rank2",
                {"d": d, "lambda0": l0, "n": n, "seed": seed},
                {
                    "b_d": b_d,
                    "c_l1_max": stats.max_value,
                    "deviation": dev,
                    "resolution": res,
                    "gap_over_resolution": (b_d - stats.max_value) / res if res > 0 else float("inf"),
                    "in_envelope": float(envelope[0] <= dev <= envelope[1]),
                },
                "info",
            )
        )
    return records


# --------------------------------------------------------------------------
# appendix identities


def _row(check, d, trials, seed, errors, tol):
    errors = np.atleast_1d(np.asarray(errors, dtype=float))
    fails = int(np.count_nonzero(~(errors <= tol)))
    return ExperimentRecord(
        "appendix",
        {"check": check, "d": d, "trials": trials, "seed": seed},
        {"max_error": float(errors.max()), "failures": fails},
        "pass" if fails == 0 else "fail",
    )


def _skew(states):
    root = matrix_sqrt(states)
    return 1.0 - np.sum(np.real(np.diagonal(root, axis1=-2, axis2=-1)) ** 2, axis=-1)


def appendix_checks(
    trials: int = 1000,
    seed: int = 0,
    dims=(2, 3, 4, 5, 6),
    solver: DiagSdpSolver | None = None,
) -> list[ExperimentRecord]:
    """Per dimension, one pass/fail row for each identity over ``trials``
    random spectra or states."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    solver = solver or DiagSdpSolver()
    sdp_tol = 1e-5
    out = []
    for d in dims:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(d,))))
        lams = np.array([random_spectrum(rng, d) for _ in range(trials)])
        ones = np.ones(d)

        # all-ones overlaps with the MUB columns: d for m = 0, else 0
        errs = []
        fams = [fourier_mub(d)] + [f for f in all_mubs(d) if f.kind == "prime"]
        for f in fams:
            x = ones if f.kind == "fourier" else dagger(quadratic_dephasing(d, f.l).matrix) @ ones
            ov = np.abs(f.vectors.conj().T @ x) ** 2
            errs.append(np.abs(ov - d * (np.arange(d) == 0)).max())
        out.append(_row("A1_overlap", d, len(fams), seed, errs, 1e-10))

        # contradiagonal RoC and weight against closed forms
        fv = fourier_mub(d).vectors
        contra = (fv * lams[:, None, :]) @ dagger(fv)
        roc = np.array([s.objective for s in solver.solve_batch(contra, Sense.DOMINATING)]) - 1
        out.append(_row("A_roc_contradiagonal", d, trials, seed, np.abs(roc - (d * lams[:, 0] - 1)), sdp_tol))
        if is_prime(d):
            errs = []
            for f in all_mubs(d):
                if f.kind != "prime":
                    continue
                c2 = (f.vectors * lams[:, None, :]) @ dagger(f.vectors)
                r2 = np.array([s.objective for s in solver.solve_batch(c2, Sense.DOMINATING)]) - 1
                errs.append(np.abs(r2 - (d * lams[:, 0] - 1)))
            out.append(_row("A_roc_prime_families", d, trials, seed, np.concatenate(errs), sdp_tol))
        w = 1 - np.array([s.objective for s in solver.solve_batch(contra, Sense.DOMINATED)])
        out.append(_row("B_weight_contradiagonal", d, trials, seed, np.abs(w - (1 - d * lams[:, -1])), sdp_tol))

        # global weight bound for arbitrary states
        states = np.array([random_state(rng, d) for _ in range(trials)])
        lmin = np.linalg.eigvalsh(states)[:, 0]
        wg = 1 - np.array([s.objective for s in solver.solve_batch(states, Sense.DOMINATED)])
        out.append(_row("B_weight_bound", d, trials, seed, wg - (1 - d * lmin), sdp_tol))

        # skew-information maximum: mean inequality, equality in the Fourier basis
        skew_max = 1 - np.sqrt(lams).sum(1) ** 2 / d
        u = haar_unitaries(rng, trials, d)
        rotated = (u * lams[:, None, :]) @ dagger(u)
        out.append(_row("C_skew_bound", d, trials, seed, _skew(rotated) - skew_max, 1e-9))
        out.append(_row("C_skew_equality", d, trials, seed, np.abs(_skew(contra) - skew_max), 1e-9))

        # R_d >= B_d and the exact gap identity
        r = np.array([bound_r(l) for l in lams])
        b = np.array([bound_b_from_spectrum(l) for l in lams])
        gap = np.array([appendix_d_gap(l) for l in lams])
        out.append(_row("D_r_ge_b", d, trials, seed, b - r, 1e-10))
        out.append(_row("D_gap_identity", d, trials, seed, np.abs(r**2 - b**2 - gap), 1e-9))
    return out


# --------------------------------------------------------------------------
# output


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def records_to_csv(records: list[ExperimentRecord]) -> str:
    """One table per experiment id: parameter columns, value columns, status."""
    if not records:
        return ""
    eid = records[0].experiment_id
    params, vals = SCHEMAS[eid]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(params) + list(vals) + ["status"])
    for r in records:
        if r.experiment_id != eid:
            raise ValueError("records_to_csv takes records of a single experiment id")
        w.writerow([_fmt(r.parameters[k]) for k in params] + [_fmt(r.values[k]) for k in vals] + [r.status])
    return buf.getvalue()


def write_records(records: list[ExperimentRecord], out_dir) -> list[Path]:
    """Write ``<experiment_id>.csv`` for each id present; returns the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    by_id: dict[str, list] = {}
    for r in records:
        by_id.setdefault(r.experiment_id, []).append(r)
    paths = []
    for eid, recs in by_id.items():
        path = out_dir / f"{eid}.csv"
        path.write_text(records_to_csv(recs), encoding="utf-8")
        paths.append(path)
    return paths


def write_manifest(out_dir, experiment: str, seed: int, n, wall_time: float, files, extra=None) -> Path:
    manifest = {
        "experiment": experiment,
        "seed": seed,
        "n": n,
        "tool_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "wall_time_s": wall_time,
        "finished_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "files": [Path(f).name for f in files],
    }
    if extra:
        manifest.update(extra)
    path = Path(out_dir) / f"manifest_{experiment}.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return path


GNUPLOT = {
    "fig1": """set datafile separator ','
set key autotitle columnhead
set xlabel 'a'
set ylabel '|rhs|'
set yrange [0:3]
plot 'fig1.csv' using 1:3 with lines lc 'black' title 'same sign', \\
     'fig1.csv' using 1:4 with lines lc 'red' title 'different sign', 1 dt 2 notitle
""",
    "fig2": """set datafile separator ','
set key autotitle columnhead
set xlabel 'p'
set ylabel 'l1 coherence'
plot 'fig2.csv' using 2:7 with linespoints title 'MC max', \\
     'fig2.csv' using 2:6 with lines title 'B_d', \\
     'fig2.csv' using 2:5 with lines title 'O_d'
""",
    "rank2": """set datafile separator ','
set key autotitle columnhead
set xlabel 'lambda_0'
set ylabel 'relative deviation'
set logscale y
plot 'rank2.csv' using 2:7 with linespoints title 'deviation'
""",
}


def write_gnuplot(out_dir, experiment: str) -> Path | None:
    script = GNUPLOT.get(experiment)
    if script is None:
        return None
    path = Path(out_dir) / f"{experiment}.gp"
    path.write_text(script, encoding="utf-8")
    return path
