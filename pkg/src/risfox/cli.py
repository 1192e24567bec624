"""Command-line experiment runner.

Each run reads a scenario file, sweeps one variable, evaluates the requested
methods and writes one CSV per metric (``sweep,method,value,err,meta``) next
to a ``manifest.json`` holding the scenario hash, seed and tool version.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .cascade import direct_layout, risd_snr
from .errors import (ConfigError, DimensionLimitError, NonConvergentIntegralError, QuadratureError,
                     RisFoxError, TruncationError)
from .mc import MCConfig, SampleSet, ScenarioConfig, db_to_linear, empirical_ber, empirical_outage, simulate
from .metrics import MODULATIONS, Modulation, layout_ber, ber, outage
from .scenario import LoadedScenario, load_scenario
from .validation import validate

METRICS = ("outage", "ber", "pdf", "cdf")
METHODS = ("exact", "bound", "asymptotic", "mc")
LINKS = ("scenario", "ris", "direct", "combined")
EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
NUMERIC_ERRORS = (NonConvergentIntegralError, QuadratureError, TruncationError)


def _level(v) -> Optional[int]:
    if v is None or str(v).strip().lower() in ("perfect", "none", "inf"):
        return None
    return int(v)


# sweep name -> (scenario field, converter, numeric)
SWEEPS = {
    "P_t": ("P_t", float, True),
    "N": ("N", int, True),
    "L": ("phase_L", _level, False),
    "a": ("a", float, True),
    "topology": ("topology", str, False),
    "gamma_th": ("gamma_th_db", float, True),
}


@dataclass(frozen=True)
class Series:
    """One curve of an experiment: scenario overrides plus which link is measured.

    ``link="direct"`` measures the direct transmission alone, ``"ris"`` and
    ``"combined"`` force omega to 0 and 1, ``"scenario"`` keeps the file value.
    """

    label: str = ""
    overrides: tuple = ()
    link: str = "scenario"

    def __post_init__(self):
        if self.link not in LINKS:
            raise ConfigError(f"unknown link {self.link!r}", field="link")

    def apply(self, sc: ScenarioConfig) -> ScenarioConfig:
        ch = dict(self.overrides)
        if self.link == "ris":
            ch["omega"] = 0
        elif self.link in ("direct", "combined"):
            ch["omega"] = 1
        return sc.with_(**ch) if ch else sc


@dataclass(frozen=True)
class ExperimentSpec:
    """A sweep of one scenario variable for one metric over several methods."""

    metric: str
    sweep: str
    grid: tuple
    methods: tuple = ("mc",)
    out: str = "."
    scenario: Optional[str] = None
    modulation: str = "bpsk"
    seed: Optional[int] = None
    trials: Optional[int] = None
    threads: int = 1
    projection: Optional[str] = None
    series: tuple = (Series(),)
    name: Optional[str] = None

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ConfigError(f"unknown metric {self.metric!r}", field="metric")
        if self.sweep not in SWEEPS:
            raise ConfigError(f"unknown sweep variable {self.sweep!r}; choose from {', '.join(SWEEPS)}",
                              field="sweep")
        if not self.grid:
            raise ConfigError("sweep grid is empty", field="grid")
        _, conv, numeric = SWEEPS[self.sweep]
        try:
            vals = [conv(v) for v in self.grid]
        except (TypeError, ValueError) as e:
            raise ConfigError(f"bad sweep value: {e}", field="grid") from None
        if numeric and any(b < a for a, b in zip(vals, vals[1:])):
            raise ConfigError("sweep grid must be sorted", field="grid")
        bad = [m for m in self.methods if m not in METHODS]
        if bad or not self.methods:
            raise ConfigError(f"unknown method(s) {bad}; choose from {', '.join(METHODS)}", field="method")
        if self.metric in ("ber", "pdf") and "asymptotic" in self.methods:
            raise ConfigError(f"asymptotic method is available for outage and cdf, not {self.metric}",
                              field="method")
        if self.modulation.lower() not in MODULATIONS:
            raise ConfigError(f"unknown modulation {self.modulation!r}", field="modulation")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1", field="threads")

    @property
    def values(self) -> list:
        conv = SWEEPS[self.sweep][1]
        return [conv(v) for v in self.grid]

    @property
    def mod(self) -> Modulation:
        return MODULATIONS[self.modulation.lower()]

    @property
    def filename(self) -> str:
        return f"{self.name or self.metric}.csv"


# --------------------------------------------------------------------------- evaluation


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float) and math.isnan(v):
        return "nan"
    if isinstance(v, float):
        return repr(float(v))
    return "perfect" if v is None else str(v)


def _meta(d: dict) -> str:
    return ";".join(f"{k}={_fmt(v)}" for k, v in d.items())


def _analytic(sc: ScenarioConfig, spec: ExperimentSpec, method: str, link: str):
    """(value, error estimate) of one analytic evaluation."""
    s = sc.snr_config()
    g = sc.gamma_th
    if link == "direct":
        if method == "asymptotic":
            raise DimensionLimitError("no asymptotic form for the direct link alone")
        which = "pdf" if spec.metric == "pdf" else "cdf"
        lay = direct_layout(s, which)
        if spec.metric == "ber":
            r = layout_ber(lay, spec.mod)
            return r.value, r.error
        r = lay.evaluate([g])
        return float(r.value[0]), float(r.error[0])
    cfgs = sc.elements()
    if spec.metric in ("outage", "cdf"):
        r = outage(s, cfgs, g, method, with_error=True)
    elif spec.metric == "pdf":
        r = risd_snr(s, cfgs, g, "pdf", method, with_error=True)
    else:
        r = ber(s, cfgs, spec.mod, method, with_error=True)
    return float(np.ravel(r.value)[0]), float(np.ravel(r.error)[0])


def _mc_estimate(snr: np.ndarray, spec: ExperimentSpec, g: float):
    if spec.metric in ("outage", "cdf"):
        p, se = empirical_outage(snr, g)
        return float(p), float(se)
    if spec.metric == "ber":
        return empirical_ber(snr, spec.mod)
    # density from counts in a +-0.1 dB window around g
    lo, hi = g * 10 ** -0.01, g * 10 ** 0.01
    k = np.count_nonzero((snr > lo) & (snr <= hi))
    n = snr.size
    return k / (n * (hi - lo)), math.sqrt(k) / (n * (hi - lo))


class _SampleCache:
    """Reuses one simulation per scenario; P_t and threshold sweeps only rescale SNRs."""

    def __init__(self, mc: MCConfig):
        self.mc = mc
        self.store: dict = {}

    def snr(self, sc: ScenarioConfig, link: str) -> np.ndarray:
        key = sc.with_(P_t=0.0, gamma_th_db=0.0)
        if key not in self.store:
            self.store[key] = simulate(key, self.mc)
        ss: SampleSet = self.store[key]
        f = float(db_to_linear(sc.P_t))
        if link == "direct":
            return ss.gbar_d * f * ss.zd ** 2
        return ss.snr * f


def run_experiment(spec: ExperimentSpec, loaded: Optional[LoadedScenario] = None) -> dict:
    """Evaluate the experiment and write its CSV; returns a summary for the manifest.

    Dimension limits and non-convergence are recorded per row (value ``nan``
    with ``error=...`` in ``meta``); the remaining methods are still emitted.
    """
    loaded = loaded or load_scenario(spec.scenario)
    base = loaded.scenario
    mc = loaded.mc
    ch = {}
    if spec.seed is not None:
        ch["seed"] = spec.seed
    if spec.trials is not None:
        ch["trials"] = spec.trials
    if spec.projection is not None:
        ch["projection"] = spec.projection
    mc = MCConfig(**{**dict(trials=mc.trials, seed=mc.seed, streams=mc.streams, projection=mc.projection,
                            chunk=mc.chunk), **ch, "threads": spec.threads})
    cache = _SampleCache(mc)
    target = SWEEPS[spec.sweep][0]
    rows = []
    counts = {"rows": 0, "dimension_limit": 0, "nonconvergent": 0}
    for ser in spec.series:
        for v in spec.values:
            try:
                sc = ser.apply(base).with_(**{target: v})
            except TypeError as e:
                raise ConfigError(str(e), field=spec.sweep) from None
            for method in spec.methods:
                meta = {}
                if ser.label:
                    meta["series"] = ser.label
                if spec.metric == "ber":
                    meta["mod"] = spec.mod.name
                else:
                    meta["gamma_th_db"] = sc.gamma_th_db
                try:
                    if method == "mc":
                        val, err = _mc_estimate(cache.snr(sc, ser.link), spec, sc.gamma_th)
                        meta.update(n=mc.trials, seed=mc.seed, projection=mc.projection)
                    else:
                        val, err = _analytic(sc, spec, method, ser.link)
                except DimensionLimitError as e:
                    val = err = math.nan
                    meta["error"] = "dimension-limit"
                    meta["detail"] = str(e).replace(";", ",").replace(",", " ")
                    counts["dimension_limit"] += 1
                except NUMERIC_ERRORS as e:
                    val = err = math.nan
                    meta["error"] = "nonconvergent"
                    meta["detail"] = type(e).__name__
                    counts["nonconvergent"] += 1
                rows.append((v, method, float(val), float(err), _meta(meta)))
    out = Path(spec.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / spec.filename
    with open(path, "w", newline="") as fh:
        fh.write("sweep,method,value,err,meta\n")
        for v, method, val, err, meta in rows:
            fh.write(f"{_fmt(v)},{method},{_fmt(val)},{_fmt(err)},{meta}\n")
    counts["rows"] = len(rows)
    return {"file": path.name, "metric": spec.metric, "sweep": spec.sweep, "methods": list(spec.methods),
            "trials": mc.trials, "seed": mc.seed, "projection": mc.projection, **counts}


def write_manifest(out, loaded: LoadedScenario, command: str, runs: Sequence[dict], seed: int) -> Path:
    p = Path(out) / "manifest.json"
    doc = {"tool": "risfox", "version": __version__, "command": command, "scenario": loaded.source,
           "scenario_sha256": loaded.digest, "seed": seed, "artifacts": list(runs)}
    Path(out).mkdir(parents=True, exist_ok=True)
    p.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return p


# --------------------------------------------------------------------------- figures

_PT = tuple(float(v) for v in range(0, 41, 2))


def _s(label, link="scenario", **ov):
    return Series(label, tuple(sorted(ov.items())), link)


def figure_specs(fig: int, methods, out, **kw) -> list:
    """Experiment specs reproducing one of the result figures (2..7) as P_t sweeps."""
    common = dict(sweep="P_t", grid=_PT, methods=tuple(methods), out=out, **kw)
    if fig == 2:
        ser = [_s(f"N={n} {t} L={L or 'perfect'}", N=n, topology=t, phase_L=L, omega=0)
               for n in (10, 20) for t in ("1d", "3d", "static") for L in (1, None)]
        return [ExperimentSpec("outage", series=tuple(ser), name="fig2_outage", **common)]
    if fig == 3:
        ser = [_s(f"a={a} {t}", N=10, a=a, topology=t, phase_L=1, omega=0)
               for a in (2.0, 2.5, 3.0) for t in ("1d", "static")]
        return [ExperimentSpec("ber", series=tuple(ser), name="fig3_ber", **common)]
    if fig in (4, 5):
        ns = (10, 20) if fig == 4 else (10, 20, 50)
        ser = [_s(f"N={n} L={L or 'perfect'}", N=n, phase_L=L, topology="1d", omega=0)
               for n in ns for L in (1, 2, None)]
        ser.append(_s("N=10 static L=perfect", N=10, phase_L=None, topology="static", omega=0))
        metric = "outage" if fig == 4 else "ber"
        return [ExperimentSpec(metric, series=tuple(ser), name=f"fig{fig}_{metric}", **common)]
    if fig in (6, 7):
        ser = [_s("DT", "direct", N=1, topology="1d")]
        for n in (10, 20):
            ser.append(_s(f"RIS N={n} L=1", "ris", N=n, phase_L=1, topology="1d"))
            for L in (1, 2):
                ser.append(_s(f"RIS+DT N={n} L={L}", "combined", N=n, phase_L=L, topology="1d"))
        ser.append(_s("RIS+DT N=10 L=1 3d", "combined", N=10, phase_L=1, topology="3d"))
        metric = "outage" if fig == 6 else "ber"
        return [ExperimentSpec(metric, series=tuple(ser), name=f"fig{fig}_{metric}", **common)]
    raise ConfigError(f"figures 2..7 are available, got {fig}", field="figure")


# --------------------------------------------------------------------------- argparse


def _grid(text: str) -> tuple:
    """``lo:hi:step`` (inclusive) or a comma-separated list."""
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise argparse.ArgumentTypeError("range grids are lo:hi:step with step > 0")
        lo, hi, st = parts
        n = int(math.floor((hi - lo) / st + 1e-9)) + 1
        return tuple(round(lo + k * st, 12) for k in range(n))
    return tuple(p.strip() for p in text.split(",") if p.strip())


def _methods(text: str) -> tuple:
    return tuple(m.strip() for m in text.split(",") if m.strip())


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    v = int(float(text))
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="risfox", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", help="scenario file (default: packaged default scenario)")
    common.add_argument("--seed", type=_u64, help="Monte Carlo seed (overrides mc.seed)")
    common.add_argument("--trials", type=_positive, help="Monte Carlo trials (overrides mc.trials)")
    common.add_argument("--out", default=".", help="output directory (default: %(default)s)")
    common.add_argument("--threads", type=_positive, default=1, help="worker threads for Monte Carlo streams")
    sub = ap.add_subparsers(dest="command", required=True)
    for metric, default_grid in (("outage", "0:40:2"), ("ber", "0:40:2"), ("pdf", "-10:30:2"), ("cdf", "-10:30:2")):
        p = sub.add_parser(metric, parents=[common], help=f"{metric} sweep")
        p.add_argument("--method", type=_methods, default=("bound", "mc"),
                       help="comma-separated subset of exact,bound,asymptotic,mc (default: bound,mc)")
        p.add_argument("--sweep", default="P_t" if metric in ("outage", "ber") else "gamma_th",
                       choices=sorted(SWEEPS), help="swept variable (default: %(default)s)")
        p.add_argument("--grid", type=_grid, default=_grid(default_grid),
                       help=f"lo:hi:step or comma list (default: {default_grid})")
        p.add_argument("--projection", choices=("magnitude", "inphase"),
                       help="Monte Carlo RIS amplitude construction (overrides mc.projection)")
        if metric == "ber":
            p.add_argument("--modulation", default="bpsk", choices=sorted(MODULATIONS))
    v = sub.add_parser("validate", parents=[common], help="run the oracle validation suite")
    v.add_argument("--suite", choices=("fast", "full"), default="fast")
    v.add_argument("--inject", choices=("contour",), help="inject a fault to exercise failure reporting")
    v.add_argument("--json", action="store_true", help="print the JSON report instead of text")
    f = sub.add_parser("reproduce-figure", parents=[common], help="P_t sweep data of a result figure")
    f.add_argument("figure", type=int, choices=range(2, 8), metavar="{2..7}")
    f.add_argument("--method", type=_methods, default=("mc", "bound"),
                   help="comma-separated methods (default: mc,bound)")
    f.add_argument("--projection", choices=("magnitude", "inphase"))
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    command = " ".join(["risfox", *(sys.argv[1:] if argv is None else argv)])
    try:
        loaded = load_scenario(args.scenario)
        seed = args.seed if args.seed is not None else loaded.mc.seed
        if args.command == "validate":
            trials = args.trials or 1_000_000
            rep = validate(args.suite, args.inject, seed=seed, trials=trials)
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            (out / "validation.json").write_text(rep.to_json() + "\n")
            (out / "validation.txt").write_text(rep.to_text())
            write_manifest(out, loaded, command, [{"file": "validation.json", "suite": args.suite,
                                                   "passed": rep.passed}], seed)
            sys.stdout.write(rep.to_json() + "\n" if args.json else rep.to_text())
            return EXIT_OK if rep.passed else EXIT_VALIDATION
        kw = dict(seed=args.seed, trials=args.trials, threads=args.threads, projection=args.projection)
        if args.command == "reproduce-figure":
            specs = figure_specs(args.figure, args.method, args.out, **kw)
        else:
            specs = [ExperimentSpec(args.command, args.sweep, args.grid, args.method, args.out,
                                    modulation=getattr(args, "modulation", "bpsk"), **kw)]
        runs = [run_experiment(s, loaded) for s in specs]
        write_manifest(args.out, loaded, command, runs, seed)
        for r in runs:
            print(f"wrote {Path(args.out) / r['file']} ({r['rows']} rows)")
        if any(r["nonconvergent"] for r in runs):
            print("warning: some evaluations did not converge (rows with error=nonconvergent)", file=sys.stderr)
            return EXIT_NUMERIC
        return EXIT_OK
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as e:
        print(f"numerical error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except RisFoxError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
