"""Command-line front end: ``ngmoe sweep|crossing|search|selftest``.

Exit codes: 0 ok, 1 selftest failure, 2 invalid configuration, 3 write
failure, 4 sampler exhaustion.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .entropy import crossing_curve, entropy_sweep, random_search, t_star_closed_form
from .fock import ChannelParams
from .selftest import format_table, run_selftest
from .states import SamplingError
from .svg import line_chart

SWEEP_COLUMNS = ["epsilon", "t", "family", "M", "mu", "K", "N", "entropy_bits"]
COMMANDS = ("sweep", "crossing", "search", "selftest")


class ConfigError(ValueError):
    pass


def fmt(x) -> str:
    """12 significant digits; integers and strings pass through."""
    if x is None:
        return ""
    if isinstance(x, (bool, str)):
        return str(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".12g")


def _num(x):
    return float(fmt(x))


@dataclass
class RunConfig:
    command: str
    n_mean: float = 0.6
    truncation: int = 3
    eps_grid: tuple = (0.0, 1.0, 51)
    times: list = field(default_factory=lambda: [0.5, 1.5])
    t_bracket: tuple = (0.1, 3.0)
    samples: int = 100_000
    seed: int = 0
    out: str = "."
    format: str = "csv"
    plot: bool = False
    log_base: str = "2"
    workers: int = 1

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        start, stop, count = self.eps_grid
        if int(count) < 1:
            raise ConfigError("epsilon grid count must be >= 1")
        if not (0.0 <= start <= 1.0 and 0.0 <= stop <= 1.0):
            raise ConfigError("epsilon grid must lie in [0, 1]")
        if self.truncation < 1:
            raise ConfigError("truncation must be >= 1")
        if not 0.0 < self.n_mean <= self.truncation:
            raise ConfigError("need 0 < N <= K")
        if self.command in ("sweep", "search") and (not self.times or min(self.times) < 0):
            raise ConfigError("need at least one non-negative --time")
        lo, hi = self.t_bracket
        if self.command == "crossing" and not 0.0 <= lo < hi:
            raise ConfigError("t bracket must satisfy 0 <= lo < hi")
        if self.command == "search":
            if self.samples < 1:
                raise ConfigError("--samples must be >= 1")
            if self.n_mean >= self.truncation:
                raise ConfigError("the constrained sampler needs N < K")
            if self.seed is None:
                raise ConfigError("--seed is required for search")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if self.log_base not in ("2", "e"):
            raise ConfigError("log base must be 2 or e")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    @property
    def epsilons(self) -> list[float]:
        start, stop, count = self.eps_grid
        if int(count) == 1:
            return [float(start)]
        return [float(e) for e in np.linspace(start, stop, int(count))]

    @property
    def base(self) -> float:
        return 2 if self.log_base == "2" else math.e

    def to_dict(self) -> dict:
        d = asdict(self)
        d["eps_grid"] = list(self.eps_grid)
        d["t_bracket"] = list(self.t_bracket)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        d["eps_grid"] = tuple(d["eps_grid"])
        d["t_bracket"] = tuple(d["t_bracket"])
        d["times"] = list(d["times"])
        return cls(**d)


def _meta(cfg: RunConfig) -> dict:
    return {"tool": "ngmoe", "version": __version__, "config": cfg.to_dict(), "seed": cfg.seed}


def _write(path: str, text: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _write_json(path: str, obj) -> None:
    _write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _write_table(cfg: RunConfig, stem: str, header, rows) -> list[str]:
    """Write a data table as CSV (plus a metadata sidecar) or as self-describing JSON."""
    if cfg.format == "csv":
        path = os.path.join(cfg.out, stem + ".csv")
        _write(path, _csv_text(header, rows))
        meta_path = path + ".meta.json"
        _write_json(meta_path, _meta(cfg) | {"data_file": os.path.basename(path), "columns": header})
        return [path, meta_path]
    path = os.path.join(cfg.out, stem + ".json")
    records = [{h: (_num(v) if isinstance(v, float) else v) for h, v in zip(header, row)} for row in rows]
    _write_json(path, {"meta": _meta(cfg), "columns": header, "rows": records})
    return [path]


def _tag(t: float) -> str:
    return format(t, "g")


def cmd_sweep(cfg: RunConfig) -> list[str]:
    written = []
    column = "entropy_bits" if cfg.log_base == "2" else "entropy_nats"
    header = SWEEP_COLUMNS[:-1] + [column]
    scale = 1.0 if cfg.log_base == "2" else math.log(2)
    for t in cfg.times:
        records = entropy_sweep(cfg.n_mean, cfg.truncation, t, cfg.epsilons, workers=cfg.workers)
        rows = []
        for r in records:
            M = r.params.get("M")
            mu = r.params.get("mu")
            rows.append([r.epsilon, r.time, r.family, M, mu, r.K, r.N, r.entropy_bits * scale])
        written += _write_table(cfg, f"sweep_t{_tag(t)}", header, rows)
        if cfg.plot:
            series = []
            for fam, name, dashed in (("binomial", "binomial |B>", True), ("kappa", "kappa_0", False)):
                pts = [(r.epsilon, r.entropy_bits * scale) for r in records if r.family == fam]
                series.append({"name": name, "x": [p[0] for p in pts], "y": [p[1] for p in pts],
                               "dashed": dashed})
            path = os.path.join(cfg.out, f"sweep_t{_tag(t)}.svg")
            _write(path, line_chart(series, f"Output entropy, N={fmt(cfg.n_mean)}, K={cfg.truncation}, "
                                            f"t={fmt(t)}", "epsilon", column, metadata=_meta(cfg)))
            written.append(path)
    return written


def cmd_crossing(cfg: RunConfig) -> tuple[list[str], dict]:
    curve = crossing_curve(cfg.n_mean, cfg.truncation, cfg.epsilons, cfg.t_bracket)
    try:
        t_cf = t_star_closed_form(cfg.n_mean, cfg.truncation, cfg.epsilons, cfg.t_bracket)
    except ValueError:
        t_cf = None
    written = _write_table(cfg, "crossing", ["epsilon", "t_cross"], [list(p) for p in curve.points])
    summary = {
        "meta": _meta(cfg),
        "n_points": len(curve.points),
        "t_star": None if curve.t_star is None else _num(curve.t_star),
        "t_star_closed_form": None if t_cf is None else _num(t_cf),
        "warning": curve.warning,
    }
    path = os.path.join(cfg.out, "crossing_summary.json")
    _write_json(path, summary)
    written.append(path)
    if cfg.plot:
        series = [{"name": "S(B) = S(kappa_0)", "x": [p[0] for p in curve.points],
                   "y": [p[1] for p in curve.points], "markers": True}]
        hlines = [] if curve.t_star is None else [(curve.t_star, f"t* = {curve.t_star:.4g}")]
        path = os.path.join(cfg.out, "crossing.svg")
        _write(path, line_chart(series, f"Crossing curve, N={fmt(cfg.n_mean)}, K={cfg.truncation}",
                                "epsilon", "t", hlines=hlines, metadata=_meta(cfg)))
        written.append(path)
    return written, summary


def search_reports(cfg: RunConfig) -> list[dict]:
    reports = []
    for eps in cfg.epsilons:
        for t in cfg.times:
            rep = random_search(cfg.n_mean, cfg.truncation, ChannelParams(eps, t), cfg.samples, cfg.seed,
                                workers=cfg.workers, base=cfg.base)
            d = rep.to_dict()
            for key in ("N", "epsilon", "t", "min_entropy", "kappa_entropy", "binomial_entropy",
                        "acceptance_rate"):
                d[key] = _num(d[key])
            d["binomial_params"] = {"M": d["binomial_params"]["M"], "mu": _num(d["binomial_params"]["mu"])}
            d["argmin_amplitudes"] = [[_num(a), _num(b)] for a, b in d["argmin_amplitudes"]]
            reports.append(d)
    return reports


def cmd_search(cfg: RunConfig) -> tuple[list[str], dict]:
    reports = search_reports(cfg)
    doc = {"meta": _meta(cfg), "entropy_unit": "bits" if cfg.log_base == "2" else "nats",
           "all_verdicts": all(r["verdict"] for r in reports), "reports": reports}
    path = os.path.join(cfg.out, "search.json")
    _write_json(path, doc)
    return [path], doc


def _pair(text: str, n: int, name: str):
    parts = text.split(":")
    if len(parts) != n:
        raise argparse.ArgumentTypeError(f"{name} expects {n} colon-separated values, got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _eps_grid(text):
    start, stop, count = _pair(text, 3, "--eps-grid")
    if count != int(count):
        raise argparse.ArgumentTypeError("grid count must be an integer")
    return start, stop, int(count)


def _bracket(text):
    return _pair(text, 2, "--t-bracket")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ngmoe", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"ngmoe {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    defaults = {
        "sweep": dict(eps_grid=(0.0, 1.0, 51), times=[0.5, 1.5]),
        "crossing": dict(eps_grid=(0.0, 1.0, 51), times=[]),
        "search": dict(eps_grid=(0.0, 1.0, 3), times=[0.5, 1.0, 1.5]),
        "selftest": dict(eps_grid=(0.0, 1.0, 1), times=[]),
    }
    helps = {
        "sweep": "output entropy of kappa_0 and the best binomial state across epsilon",
        "crossing": "curve in the (epsilon, t) plane where the two entropies coincide",
        "search": "random search over energy-constrained pure states",
        "selftest": "run the channel and entropy invariant suite",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--n-mean", type=float, default=0.6, help="mean photon number N")
        p.add_argument("--truncation", type=int, default=None, help="highest Fock level K")
        p.add_argument("--eps-grid", type=_eps_grid, default=defaults[name]["eps_grid"],
                       metavar="START:STOP:COUNT")
        p.add_argument("--time", type=float, action="append", dest="times", metavar="T")
        p.add_argument("--t-bracket", type=_bracket, default=(0.1, 3.0), metavar="LO:HI")
        p.add_argument("--samples", type=int, default=100_000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--plot", action="store_true", help="also write SVG figures")
        p.add_argument("--log-base", choices=["2", "e"], default="2")
        p.add_argument("--workers", type=int, default=1)
        p.set_defaults(default_times=defaults[name]["times"])
    return parser


def config_from_args(args) -> RunConfig:
    return RunConfig(
        command=args.command, n_mean=args.n_mean,
        truncation=3 if args.truncation is None else args.truncation,
        eps_grid=tuple(args.eps_grid), times=list(args.times or args.default_times),
        t_bracket=tuple(args.t_bracket), samples=args.samples, seed=args.seed, out=args.out,
        format=args.format, plot=args.plot, log_base=args.log_base, workers=args.workers,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "selftest":
        truncations = (1, 3, 8) if args.truncation is None else (args.truncation,)
        results = run_selftest(truncations, seed=args.seed)
        print(format_table(results))
        failed = [r for r in results if not r.passed]
        if failed:
            print(f"\n{len(failed)} check(s) failed:", file=sys.stderr)
            for r in failed:
                print(f"  {r.name} (K={r.K}): residual {r.residual:.3e} > {r.tolerance:.1e}", file=sys.stderr)
            return 1
        print(f"\nall {len(results)} checks passed")
        return 0

    cfg = config_from_args(args)
    try:
        cfg.validate()
    except ConfigError as exc:
        print(f"ngmoe: invalid configuration: {exc}", file=sys.stderr)
        return 2

    try:
        os.makedirs(cfg.out, exist_ok=True)
        if cfg.command == "sweep":
            written = cmd_sweep(cfg)
        elif cfg.command == "crossing":
            written, summary = cmd_crossing(cfg)
            if summary["warning"]:
                print(f"ngmoe: warning: {summary['warning']}", file=sys.stderr)
            print(f"t_star = {fmt(summary['t_star'])}  t_star_closed_form = {fmt(summary['t_star_closed_form'])}")
        else:
            written, doc = cmd_search(cfg)
            for r in doc["reports"]:
                print(f"eps={fmt(r['epsilon'])} t={fmt(r['t'])} min={fmt(r['min_entropy'])} "
                      f"baseline={fmt(min(r['kappa_entropy'], r['binomial_entropy']))} verdict={r['verdict']}")
    except SamplingError as exc:
        print(f"ngmoe: sampler exhausted: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"ngmoe: write failed: {exc}", file=sys.stderr)
        return 3
    for path in written:
        print(path)
    return 0


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
