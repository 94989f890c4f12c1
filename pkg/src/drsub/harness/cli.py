"""Command line entry point.

::

    drsub run <config>            offline or online experiment -> CSV
    drsub verify <config>         property suites -> PASS/FAIL report
    drsub project-bench <config>  projection timings -> CSV
    drsub gen <spec> --out PATH   write one generated instance as JSON

``<spec>`` for ``gen`` is either a config file (its ``[generator]`` section
is used) or ``family:key=value,...``, e.g. ``quadratic_uniform:n=6,m=6,seed=3``.

Exit codes: 0 success, 1 verification or run failure, 2 usage error.
"""

import argparse
import logging
import os
import sys

from ..instances import GeneratorSpec, generate
from .config import ConfigError, load_config
from .io import write_instance
from .runner import BenchError, RunError, run, run_project_bench, run_verify

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _parser():
    p = argparse.ArgumentParser(prog="drsub", description="DR-submodular maximization experiments")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "run an offline or online experiment"),
                        ("verify", "run the property suites"),
                        ("project-bench", "time the projection algorithms")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("config")
        sp.add_argument("--seed", type=lambda s: int(s, 0), help="override [experiment] master_seed")
        sp.add_argument("--out", help="override [experiment] out")
        sp.add_argument("--repeats", type=int, help="override [experiment] repeats")
        sp.add_argument("--T", dest="T", type=int, help="override [algorithm] T")
    g = sub.add_parser("gen", help="write one generated instance")
    g.add_argument("spec")
    g.add_argument("--out", required=True)
    g.add_argument("--seed", type=lambda s: int(s, 0), help="override the generator seed")
    return p


def _apply_overrides(cfg, args):
    if args.seed is not None:
        cfg.set("experiment", "master_seed", args.seed)
    if args.out is not None:
        cfg.set("experiment", "out", args.out)
    if args.repeats is not None:
        cfg.set("experiment", "repeats", args.repeats)
    if args.T is not None:
        cfg.set("algorithm", "T", args.T)


def parse_spec(text):
    """``family:key=value,...`` or a config file path -> GeneratorSpec."""
    if os.path.exists(text):
        cfg = load_config(text)
        g = cfg["generator"]
        return GeneratorSpec(g["family"], g["n"], g["m"], cfg["experiment"]["master_seed"], cfg.generator_params())
    family, _, rest = text.partition(":")
    kw = {}
    for part in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, val = part.partition("=")
        if not eq:
            raise ConfigError(f"bad generator spec item {part!r}; expected key=value")
        kw[key.strip()] = val.strip()
    try:
        n = int(kw.pop("n", 6))
        m = int(kw.pop("m", n))
        seed = int(kw.pop("seed", "0"), 0)
    except ValueError as exc:
        raise ConfigError(f"bad generator spec {text!r}: {exc}") from None
    for key in ("p", "avg_degree"):
        if key in kw:
            kw[key] = float(kw[key])
    try:
        return GeneratorSpec(family, n, m, seed, kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def main(argv=None):
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "gen":
            spec = parse_spec(args.spec)
            if args.seed is not None:
                spec.seed = args.seed
            F, P = generate(spec)
            write_instance(args.out, F, P, spec)
            return EXIT_OK
        cfg = load_config(args.config)
        _apply_overrides(cfg, args)
        expected = {"verify": ("verify",), "project-bench": ("project-bench",)}
        if args.command in expected and cfg.kind not in expected[args.command]:
            raise ConfigError(f"'drsub {args.command}' needs kind = {args.command}, got {cfg.kind!r}")
        if args.command == "verify":
            text, ok = run_verify(cfg)
            sys.stdout.write(text)
            return EXIT_OK if ok else EXIT_FAIL
        if args.command == "project-bench":
            run_project_bench(cfg)
            return EXIT_OK
        run(cfg)
        return EXIT_OK
    except ConfigError as exc:
        print(f"drsub: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RunError, BenchError) as exc:
        print(f"drsub: failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (OSError, ValueError) as exc:
        print(f"drsub: failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
