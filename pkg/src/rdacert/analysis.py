"""Verdict aggregation, destabilizing-band location and parameter sweeps.

Combines the Hurwitz minors with the semidefinite certificates and the
two independent oracles (Sturm root counting and dense eigenvalue
sampling) into a single stability report, locates the frequency bands
where some minor turns negative, and maps out parameter space.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .hurwitz import (
    MinorSet,
    default_zeta_grid,
    hurwitz_minors,
    spectral_abscissa,
)
from .model import (
    GrayScottParams,
    NoRealEquilibriumError,
    SystemSpec,
    gray_scott_jacobian,
)
from .soscert import (
    FeasibilityVerdict,
    prop1_feasibility,
    prop2_finite,
    prop2_semi_infinite,
)
from .sturm import isolate_roots, refine_root, sturm_chain, sturm_nonneg_oracle

__all__ = [
    "FrequencyBand",
    "StabilityReport",
    "SweepResult",
    "PipelineDisagreementError",
    "stability_verdict",
    "destabilizing_bands",
    "quantized_modes",
    "parameter_sweep",
]

DEAD_BAND = 1e-8


class PipelineDisagreementError(RuntimeError):
    """The SDP verdict and an independent oracle disagree decisively."""


@dataclass(frozen=True)
class FrequencyBand:
    """Interval of spatial frequencies on which some minor is negative."""

    lo: float
    hi: float
    minor_index: int  # 1-based index of the negative minor

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("band needs lo < hi")

    @property
    def wavelength_lo(self):
        return 2.0 * math.pi / self.hi

    @property
    def wavelength_hi(self):
        return math.inf if self.lo == 0 else 2.0 * math.pi / self.lo

    def to_dict(self):
        return {
            "lo": self.lo,
            "hi": self.hi,
            "minor_index": self.minor_index,
            "wavelength_lo": self.wavelength_lo,
            "wavelength_hi": self.wavelength_hi,
        }


@dataclass(frozen=True)
class StabilityReport:
    verdict: str  # 'stable' | 'unstable' | 'marginal'
    per_minor: tuple  # FeasibilityVerdict per Delta_i
    minors: MinorSet
    witness: tuple | None = None  # (minor index 1-based, zeta*)
    homogeneous_mode_stable: bool = True
    bands: tuple = ()
    calibration_scalar: complex = 1
    oracle_max_abscissa: float = float("nan")

    def to_dict(self, include_certificates=False):
        out = {
            "verdict": self.verdict,
            "homogeneous_mode_stable": self.homogeneous_mode_stable,
            "calibration_scalar": [
                self.calibration_scalar.real
                if isinstance(self.calibration_scalar, complex)
                else float(self.calibration_scalar),
                self.calibration_scalar.imag
                if isinstance(self.calibration_scalar, complex)
                else 0.0,
            ],
            "oracle_max_abscissa": self.oracle_max_abscissa,
            "minors": [list(map(float, d.coeffs)) for d in self.minors.deltas],
            "per_minor": [],
            "bands": [b.to_dict() for b in self.bands],
        }
        for v in self.per_minor:
            d = {"status": v.status, "margin": v.margin}
            if include_certificates and v.certificate is not None:
                d["certificate"] = v.certificate.to_dict()
            out["per_minor"].append(d)
        if self.witness is not None:
            out["witness"] = {"minor": self.witness[0], "zeta": self.witness[1]}
        return out


def stability_verdict(spec: SystemSpec, oracle_points=2001, cross_check=True,
                      compute_bands=True) -> StabilityReport:
    """Full certification pipeline for one linearized system.

    Runs minors -> per-minor semidefinite feasibility, cross-checked
    against the Sturm oracle and a dense eigenvalue sweep.  A decisive
    disagreement between routes is raised as an internal error, never
    silently turned into a verdict.
    """
    ms = hurwitz_minors(spec)
    per_minor = []
    witness = None
    for i, delta in enumerate(ms.deltas, start=1):
        v = prop1_feasibility(delta)
        s = sturm_nonneg_oracle(delta)
        if v.status != "numerically_marginal" and v.feasible != s.nonnegative:
            raise PipelineDisagreementError(
                "Delta_%d: SDP says %s but Sturm oracle says %s"
                % (i, v.status, "nonnegative" if s.nonnegative else "negative")
            )
        per_minor.append(v)
        if witness is None and not s.nonnegative:
            w = float(s.witness)
            if float(delta(abs(w))) < 0:  # minors are even; report zeta >= 0
                w = abs(w)
            witness = (i, w)

    statuses = [v.status for v in per_minor]
    if all(st == "feasible" for st in statuses):
        verdict = "stable"
    elif any(st == "infeasible" for st in statuses):
        verdict = "unstable"
    else:
        verdict = "marginal"
    if verdict == "unstable" and witness is None:
        verdict = "marginal"  # SDP-infeasible but no numeric witness found

    max_abscissa = float("nan")
    if cross_check:
        grid = default_zeta_grid(ms, oracle_points)
        max_abscissa = max(spectral_abscissa(spec, z) for z in grid)
        if verdict == "stable" and max_abscissa > DEAD_BAND:
            raise PipelineDisagreementError(
                "stable verdict but eigenvalue oracle finds growth rate %.3e"
                % max_abscissa
            )
        if verdict == "unstable" and max_abscissa < -DEAD_BAND:
            # the witness frequency may fall between grid points; probe it
            if witness is None or spectral_abscissa(spec, witness[1]) < DEAD_BAND:
                raise PipelineDisagreementError(
                    "unstable verdict but eigenvalue oracle sees decay only"
                )

    bands = ()
    if compute_bands and verdict == "unstable":
        bands = tuple(_negative_bands(ms))

    return StabilityReport(
        verdict=verdict,
        per_minor=tuple(per_minor),
        minors=ms,
        witness=witness,
        homogeneous_mode_stable=all(float(d(0.0)) > 0 for d in ms.deltas),
        bands=bands,
        calibration_scalar=ms.calibration_scalar,
        oracle_max_abscissa=max_abscissa,
    )


def _negative_bands(ms: MinorSet, resolution=1e-3):
    """Negative intervals of the minors on [0, zeta_max], merged."""
    raw = []
    for i, delta in enumerate(ms.deltas, start=1):
        delta = delta.chop()
        if delta.is_zero() or delta.degree == 0:
            continue
        zmax = delta.cauchy_root_bound()
        chain = sturm_chain(delta)
        brackets = isolate_roots(delta, 0.0, zmax, chain=chain)
        roots = sorted(refine_root(delta, a, b) for a, b in brackets)
        pts = [0.0] + roots + [zmax]
        for a, b in zip(pts, pts[1:]):
            if b - a <= 0:
                continue
            if float(delta(0.5 * (a + b))) < 0:
                raw.append((a, b, i))
        if float(delta.coeffs[-1]) < 0:  # negative out to infinity
            raw.append((zmax, 2 * zmax, i))
    raw.sort()
    merged = []
    for a, b, i in raw:
        if merged and a - merged[-1][1] < resolution:
            pa, pb, pi = merged[-1]
            merged[-1] = (pa, max(pb, b), min(pi, i))
        else:
            merged.append((a, b, i))
    return [FrequencyBand(lo=a, hi=b, minor_index=i) for a, b, i in merged]


def destabilizing_bands(spec: SystemSpec, resolution=1e-3, confirm=True):
    """Frequency bands destabilizing the system, with certified flanks.

    Root isolation locates the sign changes of each minor; with confirm
    the root-free flanking intervals are re-certified through the
    interval feasibility tests, so each band boundary is supported by an
    SOS certificate on both sides.  Returns (bands, transcript) where the
    transcript records the flanking feasibility results.
    """
    ms = hurwitz_minors(spec)
    bands = _negative_bands(ms, resolution)
    transcript = []
    if confirm and bands:
        # outside the merged bands every contributing minor is nonnegative,
        # so each flank must certify feasible (or marginal at a boundary
        # where the minor touches zero)
        indices = sorted({b.minor_index for b in bands})
        edges = [0.0] + [x for b in bands for x in (b.lo, b.hi)] + [None]
        for lo, hi in zip(edges[0::2], edges[1::2]):
            if hi is not None and hi - lo <= resolution:
                continue
            for i in indices:
                delta = ms.deltas[i - 1]
                if hi is None:
                    v = prop2_semi_infinite(delta, lo)
                else:
                    v = prop2_finite(delta, lo, hi)
                transcript.append(
                    {"interval": [lo, hi], "minor_index": i, "status": v.status}
                )
                if v.status == "infeasible":
                    raise PipelineDisagreementError(
                        "flanking interval [%s, %s] certified infeasible for "
                        "minor %d" % (lo, "inf" if hi is None else hi, i)
                    )
    return bands, transcript


def quantized_modes(band: FrequencyBand, L: float):
    """Periodic-domain mode numbers k >= 1 with lo <= 2 pi k / L <= hi."""
    if L <= 0:
        raise ValueError("domain length must be positive")
    tol = 1e-12
    k_lo = math.ceil(band.lo * L / (2 * math.pi) - tol)
    k_hi = math.floor(band.hi * L / (2 * math.pi) + tol)
    return list(range(max(k_lo, 1), k_hi + 1))


# ---------------------------------------------------------------------------
# Parameter sweeps


@dataclass
class SweepResult:
    axes: dict  # name -> list of values
    cells: list  # one dict per cell, deterministic row-major order
    metadata: dict = field(default_factory=dict)

    def verdict_grid(self):
        shape = tuple(len(v) for v in self.axes.values())
        grid = np.empty(shape, dtype=object)
        for c in self.cells:
            grid[np.unravel_index(c["index"], shape)] = c["verdict"]
        return grid

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(
                {"axes": {k: list(map(float, v)) for k, v in self.axes.items()},
                 "metadata": self.metadata, "cells": self.cells},
                fh, indent=2)

    def to_csv(self, path, version_header=True):
        names = list(self.axes)
        with open(path, "w") as fh:
            if version_header:
                fh.write("# rdacert sweep v1\n")
            fh.write(",".join(names + ["verdict", "witness_zeta", "band_lo", "band_hi"]) + "\n")
            for c in self.cells:
                row = ["%.10g" % c["params"][n] for n in names]
                row.append(c["verdict"])
                row.append("" if c.get("witness_zeta") is None else "%.10g" % c["witness_zeta"])
                row.append("" if c.get("band_lo") is None else "%.10g" % c["band_lo"])
                row.append("" if c.get("band_hi") is None else "%.10g" % c["band_hi"])
                fh.write(",".join(row) + "\n")


def _cell_params(base: GrayScottParams, names, values, coupling):
    kw = {"a": base.a, "b": base.b, "d": base.d, "v1": base.v1, "v2": base.v2}
    for n, v in zip(names, values):
        if n == "v":
            if coupling == "stokes_einstein":
                kw["v1"] = kw["d"] * v
                kw["v2"] = v
            else:
                kw["v1"] = kw["v2"] = v
        elif n in kw:
            kw[n] = v
        else:
            raise ValueError("unknown sweep axis %r" % n)
    return GrayScottParams(**kw)


def _sweep_cell(args):
    index, base, names, values, coupling = args
    cell = {"index": index, "params": dict(zip(names, map(float, values)))}
    try:
        p = _cell_params(base, names, values, coupling)
        cell["params"] = {"a": p.a, "b": p.b, "d": p.d, "v1": p.v1, "v2": p.v2,
                          **cell["params"]}
        spec = gray_scott_jacobian(p)
        rep = stability_verdict(spec, oracle_points=201, compute_bands=True)
        cell["verdict"] = rep.verdict
        if rep.witness is not None:
            cell["witness_zeta"] = rep.witness[1]
        if rep.bands:
            cell["band_lo"] = rep.bands[0].lo
            cell["band_hi"] = rep.bands[-1].hi
    except NoRealEquilibriumError:
        cell["verdict"] = "no-equilibrium"
    except Exception as exc:  # recorded, never aborts the sweep
        cell["verdict"] = "error"
        cell["error"] = "%s: %s" % (type(exc).__name__, exc)
    return cell


def _worker_count(workers):
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("RDACERT_THREADS")
    if env:
        return max(1, int(env))
    return max(1, (os.cpu_count() or 1) // 2)


def parameter_sweep(base: GrayScottParams, axes, coupling=None,
                    checkpoint=None, workers=None) -> SweepResult:
    """Grid sweep of stability verdicts over model parameters.

    axes maps parameter names ('a', 'b', 'd', 'v1', 'v2' or the coupled
    flow rate 'v') to grids.  coupling 'stokes_einstein' expands 'v' as
    (v1, v2) = (d*v, v).  Cells failing with w < 0 are marked
    no-equilibrium; other per-cell errors are recorded without aborting.
    With a checkpoint path, completed cells are skipped on rerun (one
    JSON line per cell).
    """
    if coupling not in (None, "stokes_einstein"):
        raise ValueError("coupling must be None or 'stokes_einstein'")
    names = list(axes)
    grids = [np.asarray(axes[n], float) for n in names]
    done = {}
    if checkpoint and os.path.exists(checkpoint):
        with open(checkpoint) as fh:
            for line in fh:
                line = line.strip()
                if line:
                    c = json.loads(line)
                    done[c["index"]] = c
    tasks = []
    for index, values in enumerate(product(*grids)):
        if index not in done:
            tasks.append((index, base, names, values, coupling))

    results = dict(done)
    nworkers = _worker_count(workers)
    ck = open(checkpoint, "a") if checkpoint else None
    try:
        if nworkers > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=nworkers) as pool:
                for cell in pool.map(_sweep_cell, tasks, chunksize=4):
                    results[cell["index"]] = cell
                    if ck:
                        ck.write(json.dumps(cell) + "\n")
                        ck.flush()
        else:
            for t in tasks:
                cell = _sweep_cell(t)
                results[cell["index"]] = cell
                if ck:
                    ck.write(json.dumps(cell) + "\n")
                    ck.flush()
    finally:
        if ck:
            ck.close()

    cells = [results[i] for i in sorted(results)]
    meta = {
        "base": {"a": base.a, "b": base.b, "d": base.d, "v1": base.v1, "v2": base.v2},
        "coupling": coupling,
        "workers": nworkers,
    }
    return SweepResult(axes={n: g.tolist() for n, g in zip(names, grids)},
                       cells=cells, metadata=meta)
