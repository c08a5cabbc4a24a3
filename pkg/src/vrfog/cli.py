"""Command-line entry point: ``vrfog --scenario cs1|cs2|cs3|custom``."""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from .config import SimConfig
from .policy import PlacementSplit
from .scenarios import PRESETS, Preset, run_sweep, write_curve, write_sweep_summary

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3, 4

log = logging.getLogger("vrfog")


class ConfigError(ValueError):
    pass


# key -> (section, attribute, type); section None means a SimConfig field
KEYS = {
    "M": ("topology", "n_fog", int),
    "L_ba_mbps": ("topology", "backhaul_total", float),
    "L_wi_mbps": ("topology", "wireless_total", float),
    "C_vr_ghz": ("topology", "device_cpu", float),
    "C_fg_ghz": ("topology", "fog_cpu", float),
    "C_cl_ghz": ("topology", "cloud_cpu", float),
    "T_max_ms": ("workload", "horizon", float),
    "T_ms": ("workload", "dwell", float),
    "lambda_per_ms": ("workload", "arrival_density", float),
    "mu_tasks": ("workload", "tasks_per_device_mean", float),
    "alpha": ("workload", "tasks_per_device_exponent", float),
    "mu_co_gcycles": ("compute_spec", "mean", float),
    "alpha_co": ("compute_spec", "exponent", float),
    "mu_de_mbit": ("delivery_spec", "mean", float),
    "alpha_de": ("delivery_spec", "exponent", float),
    "mu_dl_ms": ("deadline_spec", "mean", float),
    "alpha_dl": ("deadline_spec", "exponent", float),
    "catalog_n": (None, "catalog_n", int),
    "pareto_ratio": ("demand_ratio", "ratio", float),
    "pareto_ratio_dl": ("deadline_spec", "ratio", float),
    "cache_s": (None, "cache_s", float),
    "congestion": (None, "congestion", float),
    "p_local": ("split", "p_local", float),
    "p_fog": ("split", "p_fog", float),
    "p_cloud": ("split", "p_cloud", float),
}

_RANGES = {
    "cache_s": (0.0, 1.0, "cache_s must lie in [0, 1]"),
    "p_local": (0.0, 1.0, "probability p_local must lie in [0, 1]"),
    "p_fog": (0.0, 1.0, "probability p_fog must lie in [0, 1]"),
    "p_cloud": (0.0, 1.0, "probability p_cloud must lie in [0, 1]"),
}


def parse_config(text: str) -> dict:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (s.strip() for s in line.partition("="))
        if not sep or not key or not value:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        typ = KEYS[key][2]
        try:
            val = typ(value) if typ is float else int(value, 10)
        except ValueError:
            raise ConfigError(f"line {lineno}: {key} expects {typ.__name__}, got {value!r}") from None
        if key in _RANGES:
            lo, hi, msg = _RANGES[key]
            if not lo <= val <= hi:
                raise ConfigError(f"line {lineno}: {msg}, got {val}")
        out[key] = val
    return out


def apply_overrides(overrides: dict, base: Optional[SimConfig] = None) -> SimConfig:
    """Fold parsed overrides into ``base``; invariant violations become ConfigError."""
    cfg = base or SimConfig()
    groups: dict = {}
    for key, val in overrides.items():
        section, attr, _ = KEYS[key]
        groups.setdefault(section, {})[attr] = val
    try:
        topo = dataclasses.replace(cfg.topology, **groups.get("topology", {}))
        wp = cfg.workload
        specs = {}
        ratio = groups.get("demand_ratio", {}).get("ratio")
        for name in ("compute_spec", "delivery_spec", "deadline_spec"):
            changes = dict(groups.get(name, {}))
            if ratio is not None and name != "deadline_spec":
                changes["ratio"] = ratio
            specs[name] = dataclasses.replace(getattr(wp, name), **changes)
        wp = dataclasses.replace(wp, **groups.get("workload", {}), **specs)
        split = cfg.split
        if "split" in groups:
            probs = {**dataclasses.asdict(split), **groups["split"]}
            if len(groups["split"]) < 3:
                # one or two given: the rest must make up the difference exactly
                missing = [k for k in ("p_local", "p_fog", "p_cloud") if k not in groups["split"]]
                if len(missing) == 1:
                    given = sum(v for k, v in probs.items() if k != missing[0])
                    probs[missing[0]] = 1.0 - given
            split = PlacementSplit(**probs)
        return dataclasses.replace(cfg, topology=topo, workload=wp, split=split,
                                   **groups.get(None, {}))
    except ValueError as exc:
        raise ConfigError(f"invalid configuration: {exc}") from None


def load_config(text: str, base: Optional[SimConfig] = None) -> SimConfig:
    return apply_overrides(parse_config(text), base)


def format_config(cfg: SimConfig) -> str:
    """Serialize every key; ``load_config(format_config(c)) == c``."""
    values = {
        "M": cfg.topology.n_fog,
        "L_ba_mbps": cfg.topology.backhaul_total,
        "L_wi_mbps": cfg.topology.wireless_total,
        "C_vr_ghz": cfg.topology.device_cpu,
        "C_fg_ghz": cfg.topology.fog_cpu,
        "C_cl_ghz": cfg.topology.cloud_cpu,
        "T_max_ms": cfg.workload.horizon,
        "T_ms": cfg.workload.dwell,
        "lambda_per_ms": cfg.workload.arrival_density,
        "mu_tasks": cfg.workload.tasks_per_device_mean,
        "alpha": cfg.workload.tasks_per_device_exponent,
        "mu_co_gcycles": cfg.workload.compute_spec.mean,
        "alpha_co": cfg.workload.compute_spec.exponent,
        "mu_de_mbit": cfg.workload.delivery_spec.mean,
        "alpha_de": cfg.workload.delivery_spec.exponent,
        "mu_dl_ms": cfg.workload.deadline_spec.mean,
        "alpha_dl": cfg.workload.deadline_spec.exponent,
        "catalog_n": cfg.catalog_n,
        "pareto_ratio": cfg.workload.compute_spec.ratio,
        "pareto_ratio_dl": cfg.workload.deadline_spec.ratio,
        "cache_s": cfg.cache_s,
        "congestion": cfg.congestion,
        "p_local": cfg.split.p_local,
        "p_fog": cfg.split.p_fog,
        "p_cloud": cfg.split.p_cloud,
    }
    if cfg.workload.compute_spec.ratio != cfg.workload.delivery_spec.ratio:
        raise ValueError("compute and delivery laws must share one pareto_ratio to serialize")
    return "".join(f"{k} = {v!r}\n" for k, v in values.items())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vrfog", description=__doc__)
    p.add_argument("--scenario", required=True, choices=["cs1", "cs2", "cs3", "custom"])
    p.add_argument("--config", type=Path, help="flat key = value parameter file")
    p.add_argument("--preset", action="append", dest="presets", metavar="NAME",
                   help="restrict to these presets (repeatable)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replications", type=int, default=None)
    p.add_argument("--horizon-ms", type=float, default=None)
    p.add_argument("--out-dir", type=Path, default=Path("results"))
    p.add_argument("--format", choices=["csv", "json", "both"], default="csv")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _custom_preset(cfg: SimConfig) -> Preset:
    return Preset("custom", "custom", cfg, "arrival_density", (cfg.workload.arrival_density,))


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.scenario == "custom" and args.config is None:
        parser.print_usage(sys.stderr)
        print("vrfog: error: --scenario custom requires --config", file=sys.stderr)
        return EXIT_USAGE
    if args.seed < 0 or (args.replications is not None and args.replications < 1) or args.jobs < 1:
        print("vrfog: error: --seed must be >= 0, --replications and --jobs >= 1", file=sys.stderr)
        return EXIT_USAGE

    try:
        base = SimConfig()
        if args.config is not None:
            try:
                text = args.config.read_text(encoding="utf-8")
            except OSError as exc:
                raise ConfigError(f"cannot read {args.config}: {exc}") from None
            base = load_config(text, base)
        changes = {"seed": args.seed}
        if args.replications is not None:
            changes["replications"] = args.replications
        base = base.replace(**changes)
        if args.horizon_ms is not None:
            base = apply_overrides({"T_max_ms": args.horizon_ms}, base)

        if args.scenario == "custom":
            chosen = [_custom_preset(base)]
        else:
            factory, names = PRESETS[args.scenario]
            wanted = args.presets or list(names)
            unknown = [n for n in wanted if n not in names]
            if unknown:
                raise ConfigError(f"unknown {args.scenario} preset(s) {unknown}; choose from {list(names)}")
            chosen = [factory(n, base) for n in wanted]
    except ConfigError as exc:
        print(f"vrfog: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    failed = False
    curves = []
    try:
        for preset in chosen:
            t0 = time.perf_counter()
            curve = run_sweep(preset, jobs=args.jobs)
            paths = write_curve(curve, args.out_dir, args.format)
            curves.append(curve)
            bad = [p.x for p in curve.points if not p.ok]
            failed |= bool(bad)
            ies = [r[1] for r in curve.rows()]
            span = f"IE {max(ies):.3f}..{min(ies):.3f}" if ies else "no points"
            print(f"{preset.scenario} {preset.name}: {len(curve.rows())} points, {span}, "
                  f"{time.perf_counter() - t0:.1f}s -> {paths[0]}"
                  + (f" (failed at {bad})" if bad else ""))
        write_sweep_summary(curves, args.out_dir, args.scenario)
    except OSError as exc:
        print(f"vrfog: cannot write output: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_RUNTIME if failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
