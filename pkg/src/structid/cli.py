"""Command-line entry points.

    structid simulate <system> [--config F] [--out PATH] [--full-scale]
    structid identify --data D [--dictionary baseline|prior] [--form strong|weak] --out model.json
    structid benchmark --config F --out DIR
    structid plot --report R.json --out DIR

Exit codes: 0 success, 1 configuration error, 2 runtime failure.
Config files are plain ``key = value`` lines; '#' starts a comment.  Keys
prefixed ``sim.`` and ``pipeline.`` override simulator and pipeline fields.
"""

from __future__ import annotations

import argparse
import json
import sys

from .benchmarks import CONFIGURATIONS, benchmark, run_configuration
from .data import load_dataset, model_to_json, save_dataset
from .harness import ExperimentConfig, emit_plots, report_from_json, run_experiment, save_report
from .libraries import SYSTEMS
from .simulate import simulate


class ConfigError(ValueError):
    pass


def _parse_value(text: str):
    text = text.strip()
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        pass
    if "," in text:
        return [_parse_value(tok) for tok in text.split(",") if tok.strip()]
    return text


def parse_config_file(path) -> dict:
    out = {}
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key = value")
                key, val = line.split("=", 1)
                out[key.strip()] = _parse_value(val)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    return out


def _split_overrides(conf: dict, prefix: str) -> dict:
    out = {}
    for key, val in conf.items():
        if key.startswith(prefix):
            out[key[len(prefix):]] = val
    return out


def _as_tuple(val):
    if isinstance(val, (list, tuple)):
        return tuple(val)
    return (val,)


def cmd_simulate(args) -> int:
    conf = parse_config_file(args.config) if args.config else {}
    system = args.system or conf.get("system")
    if system not in SYSTEMS:
        raise ConfigError(f"unknown system {system!r}; choose from {SYSTEMS}")
    overrides = _split_overrides(conf, "sim.")
    bench = benchmark(system, full_scale=args.full_scale, **overrides)
    d = simulate(bench.sim)
    save_dataset(d, args.out)
    if args.verbose:
        print(f"wrote {args.out}: values {d.values.shape}, dt={d.dt}")
    return 0


def cmd_identify(args) -> int:
    d = load_dataset(args.data)
    system = args.system or d.meta_get("system")
    if system not in SYSTEMS:
        raise ConfigError("dataset does not name a known system; pass --system")
    conf_map = {("baseline", "strong"): "conf1", ("baseline", "weak"): "conf2",
                ("prior", "strong"): "conf3", ("prior", "weak"): "conf4"}
    conf = conf_map[(args.dictionary, args.form)]
    bench = benchmark(system)
    model, dictionary = run_configuration(bench, d, conf)
    with open(args.out, "w") as fh:
        fh.write(model_to_json(model, dictionary.term_names()))
    if args.verbose:
        names = [dictionary.terms[j].name for j in model.support]
        print(f"identified {len(names)} terms: {names}")
    return 0


def cmd_benchmark(args) -> int:
    conf = parse_config_file(args.config) if args.config else {}
    system = args.system or conf.get("system")
    if system not in SYSTEMS:
        raise ConfigError(f"config must name a system; choose from {SYSTEMS}")
    noise = conf.get("noise_levels")
    cfg = ExperimentConfig(
        system=system,
        configurations=tuple(str(c) for c in _as_tuple(conf.get("configurations", list(CONFIGURATIONS)))),
        noise_levels=tuple(float(x) for x in _as_tuple(noise)) if noise is not None else None,
        trials=int(conf.get("trials", 20)),
        base_seed=int(args.seed if args.seed is not None else conf.get("base_seed", 0)),
        sigma_mode=str(conf.get("noise.sigma", "rms")),
        resimulate_state_error=bool(conf.get("resimulate", False)),
        full_scale=bool(conf.get("full_scale", False)),
        threads=int(args.threads),
        sim_overrides=tuple(_split_overrides(conf, "sim.").items()),
        pipeline_overrides=tuple(_split_overrides(conf, "pipeline.").items()),
    )
    report = run_experiment(cfg)
    paths = save_report(report, args.out)
    paths["plots"] = emit_plots(report, args.out)
    if args.verbose:
        for config in report.configurations:
            meds = {f"{int(100*n)}%": report.median_tpr(config, n) for n in report.noise_levels}
            print(f"{config}: median TPR {meds}")
        print(f"wrote {paths}")
    return 0


def cmd_plot(args) -> int:
    with open(args.report) as fh:
        report = report_from_json(fh.read())
    paths = emit_plots(report, args.out)
    if args.verbose:
        print(f"wrote {paths}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="base random seed")
    common.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")
    common.add_argument("--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="structid", parents=[common],
                                description="structure-constrained equation discovery")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("simulate", parents=[common],
                        help="generate a clean benchmark dataset")
    ps.add_argument("system", nargs="?", choices=SYSTEMS)
    ps.add_argument("--config", help="key=value config file")
    ps.add_argument("--out", required=True, help="output dataset container")
    ps.add_argument("--full-scale", action="store_true",
                    help="use the full reference resolution instead of the desk-scale preset")
    ps.set_defaults(func=cmd_simulate)

    pi = sub.add_parser("identify", parents=[common],
                        help="identify a model from a dataset")
    pi.add_argument("--data", required=True)
    pi.add_argument("--dictionary", choices=("baseline", "prior"), default="prior")
    pi.add_argument("--form", choices=("strong", "weak"), default="weak")
    pi.add_argument("--system", choices=SYSTEMS, default=None)
    pi.add_argument("--out", required=True, help="output model JSON")
    pi.set_defaults(func=cmd_identify)

    pb = sub.add_parser("benchmark", parents=[common],
                        help="run a full noise-sweep experiment")
    pb.add_argument("--config", help="key=value config file")
    pb.add_argument("--system", choices=SYSTEMS, default=None)
    pb.add_argument("--out", required=True, help="output directory")
    pb.set_defaults(func=cmd_benchmark)

    pp = sub.add_parser("plot", parents=[common],
                        help="render TPR boxplots from a report")
    pp.add_argument("--report", required=True, help="report JSON path")
    pp.add_argument("--out", required=True, help="output directory")
    pp.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
