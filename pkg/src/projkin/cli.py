"""Command-line front end.

Every subcommand reads an optional YAML file of flat dotted keys
(``model.lambda: 0.5``) and applies ``--set key=value`` overrides on top.
Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from . import harness, spectral
from .integrate import IntegrationError, TableauError, get_tableau
from .model import ParameterError
from .problems import CATALOG_NAMES, catalog

__all__ = ["main", "RunConfig", "ConfigError", "load_config", "parse_overrides", "KEYS"]

log = logging.getLogger("projkin")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class ConfigError(ValueError):
    """Invalid configuration; ``errors`` lists field-level messages."""

    def __init__(self, errors: list[str]) -> None:
        super().__init__("; ".join(errors))
        self.errors = errors


def _float(v: Any) -> float:
    out = float(v)
    if not math.isfinite(out):
        raise ValueError("must be finite")
    return out


def _int(v: Any) -> int:
    if isinstance(v, float) and not v.is_integer():
        raise ValueError("must be an integer")
    return int(v)


def _floats(v: Any) -> list[float]:
    if isinstance(v, str):
        v = [x for x in v.replace(",", " ").split() if x]
    if not isinstance(v, (list, tuple)):
        v = [v]
    return [_float(x) for x in v]


def _ints(v: Any) -> list[int]:
    if isinstance(v, str):
        v = [x for x in v.replace(",", " ").split() if x]
    if not isinstance(v, (list, tuple)):
        v = [v]
    return [_int(x) for x in v]


def _str(v: Any) -> str:
    return str(v)


def _bool(v: Any) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError("must be a boolean")


def _scheme_order(v: Any) -> str | int:
    s = str(v).strip().lower()
    if s == "cweno3":
        return s
    n = int(s)
    if n not in (1, 3, 4):
        raise ValueError("must be 1, 3, 4 or cweno3")
    return n


# key -> (parser, default)
KEYS: dict[str, tuple[Any, Any]] = {
    "problem": (_str, "viscous_lwr"),
    "problem.xi": (_float, None),
    "problem.g": (_float, None),
    "problem.a": (_float, None),
    "problem.t_end": (_float, None),
    "model.kind": (_str, "auto"),
    "model.lambda": (_float, None),
    "model.lambda_m": (_float, None),
    "model.lambda_p": (_float, None),
    "model.lambda1": (_float, None),
    "model.lambda2": (_float, None),
    "model.theta": (_float, None),
    "model.mu": (_float, None),
    "scheme.order": (_scheme_order, None),
    "grid.cells": (_int, None),
    "time.epsilon": (_float, None),
    "time.delta_t": (_float, None),
    "time.Delta_t": (_float, None),
    "time.K": (_int, 2),
    "time.cfl_C": (_float, None),
    "time.tableau": (_str, None),
    "time.output_times": (_floats, None),
    "space.grids": (_ints, [32, 64, 128, 256]),
    "time.ladder": (_floats, None),
    "spectrum.epsilon": (_float, 1e-7),
    "spectrum.cells": (_int, 32),
    "spectrum.lambda": (_float, 2.0),
    "spectrum.theta": (_float, math.sqrt(2.0)),
    "spectrum.mu": (_float, 0.0),
    "spectrum.hyperbolic_order": (_int, 3),
    "spectrum.parabolic_order": (_int, 4),
    "region.method": (_str, "pfe"),
    "region.ratio": (_float, 10.0),
    "region.K": (_int, 2),
    "region.resolution": (_int, 512),
    "region.window": (_floats, [-2.0, 2.0, -2.0, 2.0]),
    "bench.eps_list": (_floats, [1e-5, 1e-7]),
    "bench.repeats": (_int, 3),
    "bench.direct_budget": (_int, 10**8),
    "bench.imex": (_bool, True),
    "runtime.workers": (_int, 1),
    "runtime.threads": (_int, None),
}


@dataclass
class RunConfig:
    """Validated flat configuration with every known key present."""

    values: dict[str, Any] = field(default_factory=dict)

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    def get(self, key: str, default: Any = None) -> Any:
        v = self.values.get(key)
        return default if v is None else v

    def dump(self) -> dict[str, Any]:
        return {k: v for k, v in sorted(self.values.items()) if v is not None}

    @classmethod
    def from_mapping(cls, raw: dict[str, Any]) -> "RunConfig":
        errors: list[str] = []
        values = {k: d for k, (_, d) in KEYS.items()}
        for key, raw_value in raw.items():
            if key not in KEYS:
                errors.append(f"{key}: unknown key")
                continue
            parser = KEYS[key][0]
            if raw_value is None:
                values[key] = None
                continue
            try:
                values[key] = parser(raw_value)
            except (TypeError, ValueError) as exc:
                errors.append(f"{key}: invalid value {raw_value!r} ({exc})")
        if values["problem"] not in CATALOG_NAMES:
            errors.append(f"problem: unknown problem {values['problem']!r} (choose from {', '.join(CATALOG_NAMES)})")
        for key in ("time.epsilon", "spectrum.epsilon"):
            v = values.get(key)
            if v is not None and not v > 0:
                errors.append(f"{key}: must be positive; the relaxation is integrated explicitly with steps of "
                              "order epsilon, so epsilon = 0 is not supported")
        for key in ("time.delta_t", "time.Delta_t", "time.cfl_C", "problem.t_end", "region.ratio"):
            v = values.get(key)
            if v is not None and not v > 0:
                errors.append(f"{key}: must be positive")
        if values["time.K"] is not None and values["time.K"] < 0:
            errors.append("time.K: must be nonnegative")
        if values["time.tableau"] is not None:
            try:
                get_tableau(values["time.tableau"])
            except TableauError as exc:
                errors.append(f"time.tableau: {exc}")
        if values["model.kind"] not in ("auto", "drm1_1d", "drm2_1d", "ovm_1d", "drm1_2d"):
            errors.append(f"model.kind: unknown model kind {values['model.kind']!r}")
        if len(values["region.window"]) != 4:
            errors.append("region.window: needs four numbers (re_min re_max im_min im_max)")
        if errors:
            raise ConfigError(errors)
        return cls(values)


def _flatten(data: Any, prefix: str = "") -> dict[str, Any]:
    out: dict[str, Any] = {}
    if isinstance(data, dict):
        for k, v in data.items():
            key = f"{prefix}.{k}" if prefix else str(k)
            if isinstance(v, dict):
                out.update(_flatten(v, key))
            else:
                out[key] = v
    return out


def load_config(path: str | Path | None) -> dict[str, Any]:
    """Read a YAML mapping; nested mappings are flattened to dotted keys."""
    if path is None:
        return {}
    try:
        data = yaml.safe_load(Path(path).read_text())
    except OSError as exc:
        raise ConfigError([f"--config: cannot read {path}: {exc}"]) from exc
    except yaml.YAMLError as exc:
        raise ConfigError([f"--config: malformed YAML: {exc}"]) from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(["--config: top level must be a mapping of keys to values"])
    return _flatten(data)


def parse_overrides(items: Sequence[str]) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for item in items:
        if "=" not in item:
            raise ConfigError([f"--set {item!r}: expected key=value"])
        k, v = item.split("=", 1)
        out[k.strip()] = yaml.safe_load(v) if v.strip() else None
    return out


# ----------------------------------------------------------------------------
# helpers


def _problem(cfg: RunConfig):
    options = {}
    name = cfg["problem"]
    for key in ("xi", "g", "a"):
        v = cfg.get(f"problem.{key}")
        if v is not None:
            options[key] = v
    try:
        return catalog(name, **options)
    except TypeError as exc:
        raise ConfigError([f"problem.{next(iter(options))}: not a variant option of {name!r}"]) from exc


def _model_overrides(cfg: RunConfig) -> dict[str, float]:
    keys = {"model.lambda": "lambda", "model.lambda_m": "lambda_m", "model.lambda_p": "lambda_p",
            "model.lambda1": "lambda1", "model.lambda2": "lambda2", "model.theta": "theta", "model.mu": "mu"}
    return {name: cfg[k] for k, name in keys.items() if cfg.get(k) is not None}


def _run_options(cfg: RunConfig, problem) -> dict[str, Any]:
    opts: dict[str, Any] = {
        "cells": cfg.get("grid.cells"),
        "scheme": cfg.get("scheme.order"),
        "epsilon": cfg.get("time.epsilon"),
        "Delta_t": cfg.get("time.Delta_t"),
        "delta_t": cfg.get("time.delta_t"),
        "K": cfg["time.K"],
        "tableau": cfg.get("time.tableau"),
        "cfl_C": cfg.get("time.cfl_C"),
        "t_end": cfg.get("problem.t_end"),
        "model_overrides": _model_overrides(cfg),
    }
    if cfg["model.kind"] not in ("auto", problem.model_kind.value):
        raise ConfigError([f"model.kind: problem {problem.name!r} uses {problem.model_kind.value}"])
    return opts


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(out: Path, command: str, cfg: RunConfig, extra: dict[str, Any] | None = None) -> None:
    manifest = {"command": command, "config": cfg.dump()}
    if extra:
        manifest.update(extra)
    (out / f"{command}_config.yaml").write_text(yaml.safe_dump(cfg.dump(), sort_keys=True))
    (out / f"{command}_manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str))


# ----------------------------------------------------------------------------
# subcommands


def cmd_solve(cfg: RunConfig, args) -> int:
    problem = _problem(cfg)
    out = _out_dir(args)
    opts = _run_options(cfg, problem)
    times = cfg.get("time.output_times")
    res = harness.snapshot_run(problem, out, output_times=times, **opts)
    _write_manifest(out, "solve", cfg)
    m0, m1 = res.mass[0][1], res.mass[-1][1]
    print(f"solved {problem.name} on {res.grid.cells} cells to t = {problem.t_end if opts['t_end'] is None else opts['t_end']:.17g}")
    print(f"mass drift {np.max(np.abs(m1 - m0)):.17g}")
    return EXIT_OK


def cmd_converge(cfg: RunConfig, args, mode: str) -> int:
    problem = _problem(cfg)
    out = _out_dir(args)
    opts = _run_options(cfg, problem)
    eps = opts["epsilon"] if opts["epsilon"] is not None else problem.epsilon
    if opts["model_overrides"]:
        problem = _with_params(problem, opts["model_overrides"])
    workers = cfg["runtime.workers"]
    if mode == "space":
        Dt = opts["Delta_t"] if opts["Delta_t"] is not None else 1e-7
        table = harness.spatial_convergence(problem, opts["scheme"] or 3, cfg["space.grids"], Delta_t=Dt,
                                            epsilon=eps, t_end=opts["t_end"],
                                            tableau=opts["tableau"] or "rk4", K=opts["K"], workers=workers,
                                            model_overrides=opts["model_overrides"] or None)
    else:
        ladder = cfg.get("time.ladder")
        if ladder is None:
            raise ConfigError(["time.ladder: required for converge-time"])
        table = harness.temporal_convergence(problem, opts["tableau"] or "rk4", ladder,
                                             cells=opts["cells"] or problem.cells[0], epsilon=eps,
                                             t_end=opts["t_end"], scheme=opts["scheme"], K=opts["K"],
                                             workers=workers)
    path = table.to_csv(out / f"converge_{mode}.csv")
    _write_manifest(out, f"converge-{mode}", cfg, {"table": path.name})
    print(f"# {table.label}")
    print(",".join(table.HEADER))
    for row in table.to_rows():
        print(",".join("" if v is None else ("%.17g" % v if isinstance(v, float) else str(int(v) if isinstance(v, bool) else v))
                       for v in row))
    print("fitted orders (pre-plateau): " + " ".join(f"{n}={table.fitted_order(n):.17g}" for n in harness.NORMS))
    return EXIT_OK


def _with_params(problem, overrides):
    return replace(problem, model_params={**problem.model_params, **overrides})


def cmd_spectrum(cfg: RunConfig, args) -> int:
    out = _out_dir(args)
    n = cfg["spectrum.cells"]
    eps = cfg["spectrum.epsilon"]
    sym = spectral.fourier_symbols(spectral.grid_modes(n), 1.0 / n, cfg["spectrum.lambda"], cfg["spectrum.theta"],
                                   cfg["spectrum.mu"], eps, cfg["spectrum.hyperbolic_order"],
                                   cfg["spectrum.parabolic_order"])
    rep = spectral.analytic_spectrum(sym)
    rows = []
    for k, z in enumerate(rep.zeta):
        rows.append((z, rep.dominant[k].real, rep.dominant[k].imag, "dominant"))
        rows.extend((z, e.real, e.imag, "fast") for e in rep.fast[k])
    harness.write_csv(out / "spectrum.csv", ["zeta", "re", "im", "class"], rows)
    _write_manifest(out, "spectrum", cfg, {"C": rep.C, "within_bound": rep.within_bound})
    print(f"fitted radius constant C = {rep.C:.17g}; all fast eigenvalues within bound: {rep.within_bound}")
    print(f"spectral gap {spectral.spectral_gap(rep):.17g}")
    return EXIT_OK


def cmd_region(cfg: RunConfig, args) -> int:
    out = _out_dir(args)
    method = cfg["region.method"]
    if method.lower() not in ("pfe", "euler"):
        try:
            get_tableau(method)
        except TableauError as exc:
            raise ConfigError([f"region.method: {exc}"]) from exc
    ratio, K = cfg["region.ratio"], cfg["region.K"]
    w = cfg["region.window"]
    res = cfg["region.resolution"]
    (c1, r1), (c2, r2) = spectral.stability_disks(ratio, K)
    clusters = [(c1 - 1.5 * r1, c1 + 1.5 * r1, res // 2), (c2 - 1.5 * r2, c2 + 1.5 * r2, res // 2)]
    re = spectral.graded_axis(w[0], w[1], res, clusters)
    im = spectral.graded_axis(w[2], w[3], res, [(-1.5 * r1, 1.5 * r1, res // 2), (-1.5 * r2, 1.5 * r2, res // 2)])
    raster = spectral.stability_region(method, ratio, K, re_axis=re, im_axis=im)
    harness.write_csv(out / "region.csv", ["re", "im", "stable"], raster.to_rows())
    _write_manifest(out, "region", cfg, {"components": raster.n_components})
    print(f"{raster.method} ratio={ratio:.17g} K={K}: {raster.n_components} stable component(s)")
    return EXIT_OK


def cmd_bench(cfg: RunConfig, args) -> int:
    problem = _problem(cfg)
    out = _out_dir(args)
    cells = cfg.get("grid.cells")
    rows = harness.speedup_bench(problem, cfg["bench.eps_list"], cells=cells, cfl_C=cfg.get("time.cfl_C"),
                                 K=max(cfg["time.K"], 2), t_end=cfg.get("problem.t_end"),
                                 repeats=cfg["bench.repeats"], direct_budget=cfg["bench.direct_budget"])
    harness.write_csv(out / "speedup.csv", harness.SpeedupRow.HEADER, [r.to_row() for r in rows])
    for r in rows:
        flag = " (direct estimated)" if r.direct_estimated else ""
        print(f"eps={r.epsilon:.17g} theoretical={r.theoretical_factor:.17g} real={r.real_factor:.17g}{flag}")
    if cfg["bench.imex"]:
        irows = harness.imex_comparison(problem, cfg["bench.eps_list"], cells=cells, cfl_C=cfg.get("time.cfl_C"),
                                        K=max(cfg["time.K"], 2), t_end=cfg.get("problem.t_end"),
                                        repeats=cfg["bench.repeats"])
        harness.write_csv(out / "imex.csv", harness.ImexRow.HEADER, [r.to_row() for r in irows])
        for r in irows:
            print(f"eps={r.epsilon:.17g} cpu_pi={r.cpu_pi:.17g} cpu_imex={r.cpu_imex:.17g} L1={r.l1_distance:.17g}")
    _write_manifest(out, "bench", cfg)
    return EXIT_OK


def cmd_catalog(cfg: RunConfig, args) -> int:
    doc = {name: catalog(name).describe() for name in CATALOG_NAMES}
    text = yaml.safe_dump(doc, sort_keys=False)
    if args.out:
        out = _out_dir(args)
        (out / "catalog.yaml").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "converge-space": lambda c, a: cmd_converge(c, a, "space"),
    "converge-time": lambda c, a: cmd_converge(c, a, "time"),
    "spectrum": cmd_spectrum,
    "region": cmd_region,
    "bench": cmd_bench,
    "catalog": cmd_catalog,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="projkin", description="Projective integration of kinetic relaxation schemes")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="YAML file of flat dotted keys")
        p.add_argument("--out", default=None if name == "catalog" else "out", help="output directory")
        p.add_argument("--threads", type=int, default=None, help="threads for internal numerical libraries")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse usage errors are configuration errors
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        raw = load_config(args.config)
        raw.update(parse_overrides(args.set))
        if args.threads is not None:
            raw["runtime.threads"] = args.threads
        cfg = RunConfig.from_mapping(raw)
        threads = cfg.get("runtime.threads")
        if threads is not None:
            from threadpoolctl import threadpool_limits

            with threadpool_limits(limits=threads):
                return COMMANDS[args.command](cfg, args)
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except ParameterError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, FloatingPointError, RuntimeError) as exc:
        where = ""
        if isinstance(exc, IntegrationError) and exc.time is not None:
            where = f" (step {exc.step}, t = {exc.time:.17g})"
        print(f"runtime error: {exc}{where}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
