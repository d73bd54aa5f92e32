"""End-to-end experiments: build, sieve, count, predict, and write reports.

Reports are deterministic functions of the config.  Wall-clock timings go to a
separate sidecar file so the main JSON and CSV stay byte-identical between
runs.
"""

from __future__ import annotations

import io
import json
import math
import os
import statistics
import tempfile
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import circle_method as cm
from . import representation_counts as rc
from . import restricted_primes as rp
from . import singular_series as ss
from .residue_system import (
    MIN_U,
    AdmissibleSystem,
    ConstructionParams,
    build_system,
    parse_key_values,
    parse_prime_list,
)

CSV_COLUMNS = ("m", "unweighted", "weighted", "H", "sigma_prime", "main_term", "ratio")
RATIO_BAND = (0.6, 1.6)


class ConfigError(ValueError):
    """Invalid experiment configuration; raised before any heavy work."""


class StageError(RuntimeError):
    """A module failed mid-run; the message carries the module tag."""

    def __init__(self, module: str, err: Exception):
        super().__init__(f"[{module}] {type(err).__name__}: {err}")
        self.module = module
        self.cause = err


@dataclass(frozen=True)
class ExperimentConfig:
    A: int = 1
    u: int = 1000
    B: int = 1
    basis_override: tuple[int, ...] | None = None
    m_range: tuple[int, int] | None = None
    cutoff: int = ss.DEFAULT_CUTOFF
    nodes: int | None = None
    output_path: str | None = None
    seed: int = 0
    samples: int = 32
    threads: int = 1

    def to_dict(self) -> dict:
        d = asdict(self)
        d["basis_override"] = list(self.basis_override) if self.basis_override else None
        d["m_range"] = list(self.m_range) if self.m_range else None
        # output location and thread count do not change the results
        del d["output_path"], d["threads"]
        return d

    @property
    def m_bounds(self) -> tuple[int, int]:
        return self.m_range if self.m_range is not None else (4 * self.u, 5 * self.u)

    def odd_ms(self) -> list[int]:
        lo, hi = self.m_bounds
        return [m for m in range(lo, hi + 1) if m % 2]


def validate(config: ExperimentConfig) -> ConstructionParams:
    """Check every module precondition; return the construction parameters."""
    u = config.u
    if u < 2:
        raise ConfigError(f"u must be >= 2, got {u}")
    if config.basis_override is None and u < MIN_U:
        raise ConfigError(f"u must be >= {MIN_U} unless a prime basis is given")
    if u + 1 > rp.DEFAULT_MAX_WINDOW:
        raise ConfigError(f"window [u, 2u] exceeds {rp.DEFAULT_MAX_WINDOW} integers")
    if config.B < 1:
        raise ConfigError("B must be a positive integer")
    if config.cutoff < 100:
        raise ConfigError("cutoff must be >= 100")
    if config.samples < 0:
        raise ConfigError("samples must be >= 0")
    if config.threads < 1:
        raise ConfigError("threads must be >= 1")
    if config.nodes is not None and config.nodes < 6 * u + 1:
        raise ConfigError(f"nodes = {config.nodes} < 6u + 1 = {6 * u + 1}")
    if config.m_range is not None:
        lo, hi = config.m_range
        if lo <= hi and not (4 * u <= lo and hi <= 5 * u):
            raise ConfigError(f"m_range [{lo}, {hi}] must lie inside [4u, 5u] = [{4 * u}, {5 * u}]")
    if config.samples:
        if u < 3:
            raise ConfigError("arc diagnostics need u >= 3")
        try:
            cm.build_arcs(u, config.B)
        except ValueError as err:
            raise ConfigError(f"arc precondition: {err}") from None
    try:
        return ConstructionParams(
            A=config.A, u=max(u, MIN_U), basis_override=config.basis_override, B=config.B
        )
    except ValueError as err:
        raise ConfigError(str(err)) from None


def parse_m_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise ConfigError(f"m range must look like LO:HI, got {text!r}")
    try:
        return int(lo), int(hi)
    except ValueError:
        raise ConfigError(f"m range must look like LO:HI, got {text!r}") from None


_INT_KEYS = {"A", "u", "B", "cutoff", "nodes", "seed", "samples", "threads"}


def config_from_mapping(raw: dict[str, str], base: ExperimentConfig | None = None) -> ExperimentConfig:
    unknown = set(raw) - _INT_KEYS - {"basis_override", "m_range", "output_path"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kwargs: dict = asdict(base) if base is not None else {}
    try:
        for key in _INT_KEYS & set(raw):
            kwargs[key] = int(raw[key])
        if "basis_override" in raw:
            kwargs["basis_override"] = parse_prime_list(raw["basis_override"]) or None
        if "m_range" in raw:
            kwargs["m_range"] = parse_m_range(raw["m_range"])
        if "output_path" in raw:
            kwargs["output_path"] = raw["output_path"] or None
    except ValueError as err:
        raise ConfigError(str(err)) from None
    return ExperimentConfig(**kwargs)


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err.strerror}") from None
    try:
        raw = parse_key_values(text)
    except ValueError as err:
        raise ConfigError(f"{path}: {err}") from None
    return config_from_mapping(raw)


@dataclass(frozen=True)
class Row:
    m: int
    unweighted: int
    weighted: float
    H: float
    sigma_prime: float
    main_term: float
    ratio: float | None


@dataclass
class RunReport:
    config: dict
    system: dict
    sparsity: dict
    failing_m: list[int]
    rows: list[Row]
    summary: dict
    checks: dict
    arcs: dict | None
    quadrature: dict
    timings: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failing_m and all(self.checks.values())

    def to_dict(self) -> dict:
        """Everything except timings (which vary between runs)."""
        return {
            "config": self.config,
            "system": self.system,
            "sparsity": self.sparsity,
            "failing_m": self.failing_m,
            "summary": self.summary,
            "checks": self.checks,
            "arcs": self.arcs,
            "quadrature": self.quadrature,
            "rows": [asdict(r) for r in self.rows],
        }


def _stage(module: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (ConfigError, StageError):
        raise
    except Exception as err:
        raise StageError(module, err) from err


def system_summary(system: AdmissibleSystem) -> dict:
    return {
        "z": system.z,
        "primes": list(system.primes),
        "q0": system.q0,
        "R0_size": len(system.R0),
        "covers": [
            {"p": c.p, "a": c.a, "raw_size": len(c.raw_elements), "units": len(c.unit_residues)}
            for c in system.covers
        ],
    }


def _summary(rows: list[Row]) -> dict:
    ratios = [r.ratio for r in rows if r.ratio is not None]
    if not ratios:
        return {"rows": len(rows), "ratios": 0}
    lo, hi = RATIO_BAND
    inside = sum(lo <= x <= hi for x in ratios)
    return {
        "rows": len(rows),
        "ratios": len(ratios),
        "ratio_median": statistics.median(ratios),
        "ratio_min": min(ratios),
        "ratio_max": max(ratios),
        "ratio_band": [lo, hi],
        "fraction_in_band": inside / len(ratios),
    }


def _quadrature(window: rp.WeightedWindow, weighted: np.ndarray, nodes: int | None) -> dict:
    N = cm.exactness_nodes(window.u) if nodes is None else nodes
    via_integral = cm.integral_R_all(window, N)
    diff = np.abs(via_integral - weighted)
    scale = max(float(np.max(np.abs(weighted), initial=0.0)), 1.0)
    return {"nodes": N, "max_abs_diff": float(np.max(diff, initial=0.0)), "scale": scale}


def run_experiment(config: ExperimentConfig) -> RunReport:
    params = validate(config)
    u = config.u
    timings: dict[str, float] = {}

    def timed(name, module, fn, *args, **kwargs):
        t0 = time.perf_counter()
        out = _stage(module, fn, *args, **kwargs)
        timings[name] = time.perf_counter() - t0
        return out

    system = timed("construct", "residue_system", build_system, params)
    window = timed("sieve", "restricted_primes", rp.weighted_window, system, u)
    primes = timed("restrict", "restricted_primes", rp.restricted_set, system, u)
    sparsity = timed("sparsity", "restricted_primes", rp.sparsity_report, system, u, primes)
    profile = timed(
        "count", "representation_counts", rc.build_profile, window, primes, "auto", config.threads
    )
    failing = rc.verify_window(system, u, profile)

    def table():
        rows = []
        logu3 = math.log(u) ** 3
        positivity = True
        for m in config.odd_ms():
            sp = ss.sigma_prime(m, u, system, config.cutoff)
            H = rc.profile_H(m, u)
            main = u * u * sp
            w = profile.weighted_at(m)
            n = profile.unweighted_at(m)
            if n > 0 and w < logu3 * (1 - 1e-12):
                positivity = False
            rows.append(Row(m, n, w, H, sp, main, w / main if sp != 0 else None))
        return rows, positivity

    rows, positivity = timed("singular_series", "singular_series", table)
    quad = timed(
        "quadrature", "circle_method", _quadrature, window, profile.weighted, config.nodes
    )
    arcs = None
    if config.samples:
        arcs = timed(
            "arcs",
            "circle_method",
            lambda: cm.minor_arc_diagnostic(u, config.B, window, config.samples, config.seed).to_dict(),
        )
    checks = {
        "weighted_at_least_log_u_cubed": positivity,
        "quadrature_matches_convolution": quad["max_abs_diff"] <= 1e-6 * quad["scale"],
    }
    return RunReport(
        config=config.to_dict(),
        system=system_summary(system),
        sparsity=sparsity.to_dict(),
        failing_m=failing,
        rows=rows,
        summary=_summary(rows),
        checks=checks,
        arcs=arcs,
        quadrature=quad,
        timings=timings,
    )


# output


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def render_csv(report: RunReport) -> str:
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for r in report.rows:
        buf.write(",".join(_fmt(getattr(r, c)) for c in CSV_COLUMNS) + "\n")
    return buf.getvalue()


def render_json(report: RunReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"


def atomic_write(path: str | Path, text: str) -> None:
    """Write via a temp file in the target directory, then rename over."""
    path = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            os.unlink(tmp)
            raise
    except OSError as err:
        raise OSError(f"cannot write {path}: {err.strerror or err}") from err


def emit_csv(report: RunReport, path: str | Path) -> None:
    atomic_write(path, render_csv(report))


def emit_json(report: RunReport, path: str | Path) -> None:
    atomic_write(path, render_json(report))


def emit_timings(report: RunReport, path: str | Path) -> None:
    atomic_write(path, json.dumps(report.timings, indent=2, sort_keys=True) + "\n")


def write_report(report: RunReport, json_path: str | Path) -> tuple[Path, Path, Path]:
    """JSON at json_path, CSV and timings next to it."""
    json_path = Path(json_path)
    csv_path = json_path.with_suffix(".csv")
    timing_path = json_path.with_suffix(".timings.json")
    emit_json(report, json_path)
    emit_csv(report, csv_path)
    emit_timings(report, timing_path)
    return json_path, csv_path, timing_path
