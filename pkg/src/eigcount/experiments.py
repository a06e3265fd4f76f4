"""Experiment bodies behind the CLI subcommands.

Every function takes plain parameters and returns a :class:`Result`: a JSON
friendly payload, per-estimate uncertainties and optional CSV tables. Nothing
here touches the file system.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy import stats

from . import dpp
from .ensembles import (
    EnsembleSpec,
    gaussian_atom,
    interlace_even,
    make_matched_atom,
    rademacher_atom,
    sample_gse_spectrum,
    sample_spectrum,
)
from .laws import semicircle_cdf
from .mdpstats import (
    MdpScaling,
    bulk_eigenvalue_statistic,
    counting_samples,
    covariance_eigenvalue_statistic,
    moment_match_report,
    rate_curve_exact,
    rate_curve_mc,
    variance_scan,
)
from .rng import run_replicas, substream
from .spectral import Interval, counting


@dataclass
class Result:
    payload: dict
    uncertainty: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)  # name -> (columns, rows)
    summary: list = field(default_factory=list)  # (label, value) pairs


def _f(x):
    """Float that survives JSON (inf/nan as strings)."""
    x = float(x)
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


def _law_from(n: Optional[int], interval: Optional[Interval], binomial: Optional[tuple]):
    if binomial is not None:
        size, eta = binomial
        return dpp.BinomialLaw(int(size), float(eta)), f"binomial({int(size)}, {eta:g})"
    if n is None or interval is None:
        raise ValueError("need either --binomial or both --n and --interval")
    return dpp.counting_law_gue(n, interval), f"GUE n={n} I={interval}"


def atom_by_name(name: str, variance) -> object:
    v = Fraction(variance)
    if name == "gaussian":
        return gaussian_atom(v)
    if name == "matched":
        return make_matched_atom(v)
    if name == "rademacher":
        return rademacher_atom(v)
    raise ValueError(f"unknown atom {name!r}")


def sample(kind: str, n: int, p: Optional[int], atom: str, seed: int, method: str) -> Result:
    if kind in ("wigner-hermitian", "wigner-symmetric"):
        off_var, diag_var = (Fraction(1, 2), 1) if kind == "wigner-hermitian" else (1, 2)
        spec = EnsembleSpec(kind, n, offdiag_atom=atom_by_name(atom, off_var),
                            diag_atom=atom_by_name(atom, diag_var), seed=seed)
    elif kind == "covariance":
        spec = EnsembleSpec(kind, n, p=p, entry_atom=atom_by_name(atom, Fraction(1, 2)), seed=seed)
    elif kind == "LUE":
        spec = EnsembleSpec(kind, n, p=p, seed=seed)
    else:
        spec = EnsembleSpec(kind, n, seed=seed)
    spectrum = sample_spectrum(spec, substream(seed, 0), method).normalize()
    vals = spectrum.values
    return Result(
        {"kind": kind, "n": n, "scale": spectrum.scale, "eigenvalues": [float(v) for v in vals]},
        tables={"spectrum": (["index", "eigenvalue"], [(i + 1, float(v)) for i, v in enumerate(vals)])},
        summary=[("n", n), ("min", float(vals[0])), ("max", float(vals[-1]))],
    )


def kernel_dist(n: int, interval: Interval) -> Result:
    restriction = dpp.restrict_kernel(n, interval.scaled(math.sqrt(n)))
    law = dpp.poisson_binomial(restriction.etas)
    rep = restriction.report
    return Result(
        {
            "n": n, "interval": [_f(interval.lower), _f(interval.upper)],
            "mean": law.mean, "variance": law.variance,
            "pmf": [float(p) for p in law.pmf], "etas": [float(e) for e in restriction.etas],
            "quadrature": {"nodes": rep.nodes, "box": list(rep.box), "panel_length": rep.panel_length,
                           "refinements": rep.refinements, "residual": rep.stabilization_residual,
                           "complement": rep.used_complement},
        },
        uncertainty={"quadrature_residual": rep.stabilization_residual},
        tables={"pmf": (["count", "probability"], [(k, float(p)) for k, p in enumerate(law.pmf) if p > 1e-300])},
        summary=[("mean", law.mean), ("variance", law.variance), ("nodes", rep.nodes)],
    )


def _curve_result(curve, label, scaling) -> Result:
    rows = list(curve.rows())
    cols = ["xi", "empirical_rate", "target_rate", "ci_low", "ci_high"]
    payload = {
        "law": label, "a": scaling.a, "regime": scaling.regime_note, "method": curve.method,
        "xi": [_f(x) for x in curve.xi], "rate": [_f(r) for r in curve.empirical_rate],
        "target": [_f(t) for t in curve.target_rate], "flagged": [bool(f) for f in curve.flagged],
    }
    if curve.sample_count is not None:
        payload["samples"] = curve.sample_count
        payload["tail_count"] = [int(c) for c in curve.tail_count]
    unc = {"ci_low": [_f(x) for x in curve.ci_low], "ci_high": [_f(x) for x in curve.ci_high]}
    table = [tuple(_f(r[c]) for c in cols) for r in rows]
    summary = [(f"xi={_f(x)}", _f(r)) for x, r in zip(curve.xi, curve.empirical_rate)]
    return Result(payload, unc, {"rate_curve": (cols, table)}, summary)


def rate_curve(method: str, a: float, xis, n=None, interval=None, binomial=None,
               replicas=10000, seed=0, threads=1) -> Result:
    law, label = _law_from(n, interval, binomial)
    scaling = MdpScaling.for_variance(a, law.variance, warn=False)
    if method == "exact":
        return _curve_result(rate_curve_exact(law, scaling, xis), label, scaling)
    if method != "mc":
        raise ValueError(f"unknown method {method!r}")
    if binomial is not None:
        size, eta = binomial
        counts = np.array(run_replicas(lambda rng, _: rng.binomial(int(size), float(eta)), replicas, seed, threads))
    else:
        counts = counting_samples("GUE", n, interval, replicas, seed, threads)
    z = (counts - law.mean) / (a * math.sqrt(law.variance))
    res = _curve_result(rate_curve_mc(z, scaling, xis), label, scaling)
    exact = rate_curve_exact(law, scaling, xis)
    res.payload["exact_rate"] = [_f(r) for r in exact.empirical_rate]
    return res


def cgf(a: float, thetas, n=None, interval=None, binomial=None) -> Result:
    law, label = _law_from(n, interval, binomial)
    vals = [dpp.exact_cgf(law, th, a) for th in thetas]
    rows = [(float(th), float(v), float(th) ** 2 / 2) for th, v in zip(thetas, vals)]
    return Result(
        {"law": label, "a": a, "theta": [float(t) for t in thetas], "cgf": vals,
         "target": [r[2] for r in rows]},
        tables={"cgf": (["theta", "cgf", "target"], rows)},
        summary=[(f"theta={r[0]:g}", r[1]) for r in rows],
    )


def variance_scan_cmd(kind, ns, interval, method, replicas, seed, threads, p_ratio=1.0) -> Result:
    scan = variance_scan(kind, ns, interval, method, replicas, seed, threads, p_ratio)
    rows = [(r["n"], r["mean"], r["variance"]) for r in scan.rows()]
    target = 1 / (2 * math.pi**2)
    return Result(
        {"kind": kind, "method": method, "ns": [int(x) for x in scan.ns], "mean": list(map(float, scan.means)),
         "variance": list(map(float, scan.variances)), "slope": scan.slope, "intercept": scan.intercept,
         "target_slope": target, "intervals": [[_f(i.lower), _f(i.upper)] for i in scan.intervals]},
        uncertainty={"variance_se": list(map(float, scan.variance_se))},
        tables={"variance": (["n", "mean", "variance"], rows)},
        summary=[("slope", scan.slope), ("1/(2 pi^2)", target)] + [(f"var n={r[0]}", r[2]) for r in rows],
    )


def total_variation(pmf: np.ndarray, counts: np.ndarray) -> float:
    size = max(pmf.size, int(counts.max()) + 1)
    p = np.zeros(size)
    p[: pmf.size] = pmf
    q = np.bincount(counts, minlength=size) / counts.size
    return 0.5 * float(np.abs(p - q).sum())


def clt_compare(n: int, interval: Interval, replicas: int, seed: int, threads: int) -> Result:
    law = dpp.counting_law_gue(n, interval)
    counts = counting_samples("GUE", n, interval, replicas, seed, threads)
    tv = total_variation(np.asarray(law.pmf), counts)
    mc_mean, mc_var = float(counts.mean()), float(counts.var(ddof=1))
    sd = math.sqrt(law.variance)
    z = (counts - law.mean) / sd
    ks = stats.kstest(z, "norm")
    return Result(
        {"n": n, "interval": [_f(interval.lower), _f(interval.upper)], "replicas": replicas,
         "exact_mean": law.mean, "exact_variance": law.variance, "mc_mean": mc_mean, "mc_variance": mc_var,
         "tv_distance": tv, "ks_vs_normal": float(ks.statistic)},
        uncertainty={"mc_mean_se": math.sqrt(mc_var / replicas)},
        summary=[("TV(exact, MC)", tv), ("exact var", law.variance), ("MC var", mc_var)],
    )


def interlace_bound_violations(instances: int, seed: int, max_n: int = 12) -> int:
    """Count violations of ``|2 N_even - N_a - N_b| <= 1`` over random half-lines."""
    rng = substream(seed, 0)
    violations = 0
    for _ in range(instances):
        n = int(rng.integers(1, max_n + 1))
        a = np.sort(rng.standard_normal(n))
        b = np.sort(rng.standard_normal(n + 1))
        even = interlace_even(a, b)
        y = float(rng.uniform(-3, 3))
        half = Interval(y, math.inf)
        d = 2 * counting(even, half) - counting(a, half) - counting(b, half)
        violations += abs(d) > 1
    return violations


def interlace_test(n: int, replicas: int, seed: int, threads: int, instances: int = 100000,
                   level: float = 0.001) -> Result:
    def medians(method):
        spec = EnsembleSpec("GUE", n)
        return np.array(run_replicas(
            lambda rng, _: float(np.median(sample_spectrum(spec, rng, method).normalize().values)),
            replicas, seed + (0 if method == "direct" else 1), threads))

    direct, inter = medians("direct"), medians("interlace")
    ks = stats.ks_2samp(inter, direct)
    gse = sample_gse_spectrum(n, substream(seed, 0)).normalize().values
    gse_ks = stats.kstest(gse, semicircle_cdf)
    violations = interlace_bound_violations(instances, seed)
    return Result(
        {"n": n, "replicas": replicas, "ks_median_statistic": float(ks.statistic),
         "ks_median_pvalue": float(ks.pvalue), "ks_reject": bool(ks.pvalue < level), "level": level,
         "gse_ks_semicircle": float(gse_ks.statistic), "bound_instances": instances,
         "bound_violations": int(violations)},
        summary=[("KS median stat", float(ks.statistic)), ("KS p-value", float(ks.pvalue)),
                 ("reject", bool(ks.pvalue < level)), ("bound violations", int(violations)),
                 ("GSE KS vs semicircle", float(gse_ks.statistic))],
    )


def eigstat(kind: str, n: int, indices, replicas: int, a: float, seed: int, threads: int,
            method: str = "direct") -> Result:
    spec = EnsembleSpec(kind, n)
    spectra = np.array(run_replicas(
        lambda rng, _: sample_spectrum(spec, rng, method).normalize().values, replicas, seed, threads))
    scaling = MdpScaling(a)
    rows = []
    for i in indices:
        x = bulk_eigenvalue_statistic(spectra[:, i - 1], i, n, kind, scaling)
        rows.append((i, float(x.mean()), float(x.std(ddof=1)), float(x.std(ddof=1) / math.sqrt(replicas))))
    return Result(
        {"kind": kind, "n": n, "a": a, "replicas": replicas, "index": [r[0] for r in rows],
         "mean": [r[1] for r in rows], "sd": [r[2] for r in rows]},
        uncertainty={"mean_se": [r[3] for r in rows]},
        tables={"eigstat": (["index", "mean", "sd", "mean_se"], rows)},
        summary=[(f"i={r[0]} mean/sd", f"{r[1]:.4f} / {r[2]:.4f}") for r in rows],
    )


def mp_scan(ns, p_ratio: float, replicas: int, seed: int, threads: int, atom: str = "gaussian",
            a: float = 1.0) -> Result:
    kind = "LUE" if atom == "gaussian" else "covariance-matched"
    scan = variance_scan(kind, ns, None, "mc", replicas, seed, threads, p_ratio)
    n = int(ns[-1])
    p = int(round(p_ratio * n))
    spec = (EnsembleSpec("LUE", n, p=p) if kind == "LUE" else
            EnsembleSpec("covariance", n, p=p, entry_atom=make_matched_atom(Fraction(1, 2))))
    i = n // 2
    lam = np.array(run_replicas(lambda rng, _: sample_spectrum(spec, rng).values[i - 1], replicas, seed + 7, threads))
    x = covariance_eigenvalue_statistic(lam, i, p, n, MdpScaling(a))
    rows = [(r["n"], r["mean"], r["variance"]) for r in scan.rows()]
    target = 1 / (2 * math.pi**2)
    mean_se = float(x.std(ddof=1) / math.sqrt(replicas))
    return Result(
        {"kind": kind, "p_ratio": p_ratio, "ns": [int(v) for v in ns], "variance": list(map(float, scan.variances)),
         "mean": list(map(float, scan.means)), "slope": scan.slope, "target_slope": target,
         "statistic_index": i, "statistic_n": n, "statistic_mean": float(x.mean()), "statistic_sd": float(x.std(ddof=1))},
        uncertainty={"variance_se": list(map(float, scan.variance_se)), "statistic_mean_se": mean_se},
        tables={"variance": (["n", "mean", "variance"], rows)},
        summary=[("slope", scan.slope), ("1/(2 pi^2)", target), ("stat mean", float(x.mean())),
                 ("stat sd", float(x.std(ddof=1)))],
    )


def moments(atom: str, variance) -> Result:
    report = moment_match_report(atom_by_name(atom, variance))
    rows = [(r["order"], r["atom"], r["gaussian"], r["match"]) for r in report.rows()]
    return Result(
        {"atom": atom, "variance": str(report.target_variance), "passed": report.passed,
         "first_mismatch": report.first_mismatch,
         "atom_moments": [str(m) for m in report.atom_moments],
         "gaussian_moments": [str(m) for m in report.gaussian_moments]},
        tables={"moments": (["order", "atom", "gaussian", "match"], rows)},
        summary=[(f"order {r[0]}", f"{r[1]} vs {r[2]}") for r in rows] + [("pass", report.passed)],
    )
