"""Batch driver: config parsing, pipeline orchestration, caching, and
report/plot emission.

Config files are flat `key = value` text under `[section]` headers.
Exit codes: 0 success, 2 config error, 3 numerical failure,
4 incomplete counting window.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np
from filelock import FileLock

from . import germs, groups, growth, spectra, stretch, thermo
from ._plot import line_plot_svg
from .errors import ConfigError, IncompleteWindow, StageFailed, StretchLabError
from .selftest import run_selftests

_SCHEMA: dict[str, dict[str, type]] = {
    "group": {"rank": int, "separation": float, "eps": float, "seed": int},
    "spectrum": {"n_max": int},
    "entropy": {"poincare_levels": int},
    "stretch": {
        "truncation": str,
        "slack_factor": float,
        "proportionality_tol": float,
        "rigidity_tol": float,
    },
    "germ": {
        "grid": int,
        "beta": str,
        "c": float,
        "t_max": float,
        "steps": int,
        "fine_steps": int,
        "fine_dt": float,
    },
    "output": {"out": str, "cache": str},
}

_DEFAULTS = {
    "group": {"rank": 2, "separation": 4.0, "eps": 0.0, "seed": 0},
    "spectrum": {"n_max": 10},
    "entropy": {"poincare_levels": 10},
    "stretch": {
        "truncation": "auto",
        "slack_factor": 3.0,
        "proportionality_tol": 1e-6,
        "rigidity_tol": 1e-3,
    },
    "germ": {
        "grid": 24,
        "beta": "constant",
        "c": 1.0,
        "t_max": 0.5,
        "steps": 100,
        "fine_steps": 6,
        "fine_dt": 0.0025,
    },
    "output": {"out": "out", "cache": "cache"},
}


@dataclass
class RunConfig:
    command: str
    out_dir: str
    cache_dir: str
    threads: int = 1
    verbose: bool = False
    values: dict = field(default_factory=dict)

    def __getitem__(self, key: tuple[str, str]):
        section, name = key
        return self.values[section][name]


def load_config(path: str | None, command: str, args) -> RunConfig:
    values = {s: dict(d) for s, d in _DEFAULTS.items()}
    if path is not None:
        parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        read = parser.read(path)
        if not read:
            raise ConfigError(f"cannot read config file {path}")
        for section in parser.sections():
            if section not in _SCHEMA:
                raise ConfigError(f"unknown config section [{section}]")
            for key, raw in parser.items(section):
                if key not in _SCHEMA[section]:
                    raise ConfigError(f"unknown key {key!r} in [{section}]")
                typ = _SCHEMA[section][key]
                try:
                    values[section][key] = typ(raw)
                except ValueError as exc:
                    raise ConfigError(
                        f"bad value for {section}.{key}: {raw!r}"
                    ) from exc
    _validate(values)
    out_dir = args.out or values["output"]["out"]
    cache_dir = args.cache or values["output"]["cache"]
    return RunConfig(
        command=command,
        out_dir=out_dir,
        cache_dir=cache_dir,
        threads=args.threads,
        verbose=args.verbose,
        values=values,
    )


def _validate(values: dict) -> None:
    g = values["group"]
    if g["rank"] < 2:
        raise ConfigError("group.rank must be at least 2")
    if g["separation"] <= 0:
        raise ConfigError("group.separation must be positive")
    if g["eps"] < 0:
        raise ConfigError("group.eps must be nonnegative")
    if values["spectrum"]["n_max"] < 1:
        raise ConfigError("spectrum.n_max must be at least 1")
    if values["entropy"]["poincare_levels"] < 6:
        raise ConfigError("entropy.poincare_levels must be at least 6")
    tr = values["stretch"]["truncation"]
    if tr != "auto":
        try:
            if float(tr) <= 0:
                raise ValueError
        except ValueError:
            raise ConfigError("stretch.truncation must be 'auto' or positive")
    ge = values["germ"]
    if ge["grid"] < 4:
        raise ConfigError("germ.grid must be at least 4")
    if ge["beta"] not in ("constant", "sinusoidal"):
        raise ConfigError("germ.beta must be 'constant' or 'sinusoidal'")
    if ge["c"] < 0:
        raise ConfigError("germ.c must be nonnegative")
    if ge["t_max"] <= 0 or ge["steps"] < 4 or ge["fine_steps"] < 4:
        raise ConfigError("germ ray parameters out of range")


# ---------------------------------------------------------------------------
# helpers

def _write_text(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as f:
        f.write(text)
    os.replace(tmp, path)


def _write_json(path: str, obj) -> None:
    _write_text(path, json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _log(cfg: RunConfig, msg: str) -> None:
    if cfg.verbose:
        print(msg, file=sys.stderr)


def _build_spec(cfg: RunConfig) -> groups.GroupSpec:
    g = cfg.values["group"]
    spec = groups.schottky_fuchsian(g["rank"], g["separation"], g["seed"])
    if g["eps"] > 0:
        spec = groups.perturb(spec, g["eps"], g["seed"])
    return spec


def _cert_dict(cert: groups.PingPongCertificate) -> dict:
    return {
        "ok": cert.ok,
        "failure": cert.failure,
        "min_disk_gap": cert.min_disk_gap,
        "sides": {
            name: {
                "mapping_margins": list(side.mapping_margins),
                "iso_drifts": list(side.iso_drifts),
                "letter_bound": side.letter_bound,
                "loxodromic": side.loxodromic,
            }
            for name, side in cert.sides.items()
        },
    }


def _cached_spectrum(cfg: RunConfig, spec, n_max) -> spectra.PairedSpectrum:
    os.makedirs(cfg.cache_dir, exist_ok=True)
    with FileLock(os.path.join(cfg.cache_dir, ".lock")):
        return spectra.build_paired_spectrum(
            spec, n_max, cache_dir=cfg.cache_dir, threads=cfg.threads
        )


# ---------------------------------------------------------------------------
# subcommands

def cmd_gen(cfg: RunConfig) -> int:
    spec = _build_spec(cfg)
    cert = groups.verify_ping_pong(spec)
    os.makedirs(cfg.out_dir, exist_ok=True)
    _write_text(os.path.join(cfg.out_dir, "spec.txt"), groups.spec_to_text(spec))
    _write_json(
        os.path.join(cfg.out_dir, "certificate.json"),
        {"spec_hash": groups.spec_hash(spec)} | _cert_dict(cert),
    )
    _log(cfg, f"spec {groups.spec_hash(spec)} verified: {cert.ok}")
    return 0


def cmd_spectrum(cfg: RunConfig) -> int:
    spec = _build_spec(cfg)
    n_max = cfg.values["spectrum"]["n_max"]
    ps = _cached_spectrum(cfg, spec, n_max)
    os.makedirs(cfg.out_dir, exist_ok=True)
    spectra.write_spectrum_csv(ps, os.path.join(cfg.out_dir, "spectrum.csv"))
    _log(cfg, f"{len(ps.entries)} classes up to word length {n_max}")
    return 0


def cmd_entropy(cfg: RunConfig) -> int:
    spec = _build_spec(cfg)
    cert = groups.verify_ping_pong(spec)
    if not cert.ok:
        raise StageFailed("verify", RuntimeError(cert.failure))
    n_max = cfg.values["spectrum"]["n_max"]
    ps = _cached_spectrum(cfg, spec, n_max)
    out = {}
    for side in ("g", "h"):
        bowen = growth.bowen_root(ps, side)
        counting = growth.counting_estimate_auto(ps, side, cert)
        out[side] = {
            "bowen_root": bowen.to_dict(),
            "counting_fit": counting.to_dict(),
        }
    out["h"]["poincare_sweep"] = growth.poincare_estimate(
        spec, "h", cfg.values["entropy"]["poincare_levels"]
    ).to_dict()
    out["provenance"] = {"spec_hash": groups.spec_hash(spec), "n_max": n_max}
    os.makedirs(cfg.out_dir, exist_ok=True)
    _write_json(os.path.join(cfg.out_dir, "entropy.json"), out)
    return 0


def _stretch_report(cfg: RunConfig) -> stretch.StretchReport:
    spec = _build_spec(cfg)
    st = cfg.values["stretch"]
    n_max = cfg.values["spectrum"]["n_max"]
    report = stretch.inequality_report(
        spec,
        n_max,
        cache_dir=cfg.cache_dir,
        threads=cfg.threads,
        slack_factor=st["slack_factor"],
        prop_tol=st["proportionality_tol"],
        rigidity_tol=st["rigidity_tol"],
    )
    if st["truncation"] != "auto":
        # Override the truncated sums at the requested horizon.
        t = float(st["truncation"])
        ps = _cached_spectrum(cfg, spec, n_max)
        cert = groups.verify_ping_pong(spec)
        c1 = stretch.c1_truncated(ps, t, growth.completeness_horizon(cert, "h", n_max))
        c2 = stretch.c2_truncated(ps, t, growth.completeness_horizon(cert, "g", n_max))
        report = stretch.StretchReport(
            **{
                **{k: getattr(report, k) for k in report.__dataclass_fields__},
                "c1_sum": c1,
                "c2_sum": c2,
            }
        )
    return report


def cmd_stretch(cfg: RunConfig) -> int:
    report = _stretch_report(cfg)
    os.makedirs(cfg.out_dir, exist_ok=True)
    _write_text(os.path.join(cfg.out_dir, "stretch.json"), report.to_json())
    _log(
        cfg,
        f"C1 = {report.c1_der:.6g}, C2 = {report.c2_der:.6g}, "
        f"h = {report.entropy_g.value:.6g}, delta = {report.exponent_h.value:.6g}",
    )
    return 0


def cmd_thermo_selftest(cfg: RunConfig) -> int:
    results = run_selftests()
    failed = 0
    for r in results:
        mark = "PASS" if r.ok else "FAIL"
        print(f"{mark} {r.name}: {r.detail}")
        failed += 0 if r.ok else 1
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 3


def _beta_grid(cfg: RunConfig) -> np.ndarray:
    ge = cfg.values["germ"]
    n = ge["grid"]
    if ge["beta"] == "constant":
        return np.full((n, n), ge["c"])
    x = 2.0 * math.pi * np.arange(n) / n
    return ge["c"] * (1.0 + 0.5 * np.sin(x))[:, None] * np.ones((1, n))


def cmd_germ(cfg: RunConfig) -> int:
    ge = cfg.values["germ"]
    beta = _beta_grid(cfg)
    os.makedirs(cfg.out_dir, exist_ok=True)
    fine = germs.build_ray(beta, ge["fine_dt"] * ge["fine_steps"], ge["fine_steps"])
    diag = germs.ray_diagnostics(fine)
    sweep = germs.build_ray(beta, ge["t_max"], ge["steps"])
    germs.export_ray_csv(sweep, diag, os.path.join(cfg.out_dir, "germ_ray.csv"))
    germs.export_uddot0_csv(diag, os.path.join(cfg.out_dir, "germ_uddot0.csv"))
    payload = {
        "grid": ge["grid"],
        "beta": ge["beta"],
        "c": ge["c"],
        "kappa": diag.kappa,
        "fuchsian_point": diag.fuchsian,
        "udot0_max_abs": diag.udot0_max_abs,
        "udot_all_negative": bool((diag.udot_max < 0.0).all()),
        "max_residual": float(sweep.residuals.max()),
        "normalization_note": germs.AF_FACTOR_NOTE,
    }
    if float(beta.max()) > 0.0:
        fold = germs.locate_fold(beta)
        payload["fold_t_squared"] = fold.tau
    _write_json(os.path.join(cfg.out_dir, "germ.json"), payload)
    _log(cfg, f"kappa = {diag.kappa}")
    return 0


def cmd_report(cfg: RunConfig) -> int:
    spec = _build_spec(cfg)
    cert = groups.verify_ping_pong(spec)
    if not cert.ok:
        raise StageFailed("verify", RuntimeError(cert.failure))
    n_max = cfg.values["spectrum"]["n_max"]
    ps = _cached_spectrum(cfg, spec, n_max)
    report = _stretch_report(cfg)
    os.makedirs(cfg.out_dir, exist_ok=True)

    # log N(T) against T for both sides, clipped to the horizons.
    series = []
    for side in ("g", "h"):
        horizon = growth.completeness_horizon(cert, side, n_max)
        lengths = np.sort(ps.lengths(side, primitive_only=True))
        keep = lengths <= horizon
        xs = lengths[keep].tolist()
        ys = np.log(np.arange(1, len(lengths) + 1)[keep]).tolist()
        series.append((f"side {side}", xs, ys))
    line_plot_svg(
        os.path.join(cfg.out_dir, "log_counts.svg"),
        series,
        "Class counting functions",
        "T",
        "log N(T)",
    )

    pd = spectra.period_data(ps)
    s_hi = 1.5 * max(report.entropy_g.value, report.exponent_h.value)
    ss = np.linspace(0.0, s_hi, 60)
    series = [
        (
            f"side {side}",
            ss.tolist(),
            [thermo.orbit_pressure(pd, side, float(s), n_max) for s in ss],
        )
        for side in ("g", "h")
    ]
    line_plot_svg(
        os.path.join(cfg.out_dir, "orbit_pressure.svg"),
        series,
        f"Periodic-orbit pressure at level {n_max}",
        "s",
        "pressure",
    )

    aggregate = {
        "spec_hash": groups.spec_hash(spec),
        "certificate": _cert_dict(cert),
        "stretch": report.to_dict(),
        "group": cfg.values["group"],
        "n_max": n_max,
        "model_notes": [
            "surface groups are modeled by rank-k free Schottky groups; all "
            "reported quantities depend only on the paired marked length "
            "spectrum and convex cocompactness",
        ],
    }
    _write_json(os.path.join(cfg.out_dir, "report.json"), aggregate)
    return 0


_COMMANDS = {
    "gen": cmd_gen,
    "spectrum": cmd_spectrum,
    "entropy": cmd_entropy,
    "stretch": cmd_stretch,
    "thermo-selftest": cmd_thermo_selftest,
    "germ": cmd_germ,
    "report": cmd_report,
}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stretchlab",
        description="paired length spectra, growth rates, stretch constants",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="path to config file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--cache", default=None, help="cache directory")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.command, args)
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except IncompleteWindow as exc:
        print(f"incomplete window: {exc}", file=sys.stderr)
        return 4
    except StageFailed as exc:
        code = 4 if isinstance(exc.cause, IncompleteWindow) else 3
        print(f"error: {exc}", file=sys.stderr)
        return code
    except StretchLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
