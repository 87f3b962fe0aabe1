"""Command-line front end: hypstructures <subcommand> [flags]"""
import argparse
import json
import logging
import sys
from typing import List, Optional

from schemas.run_config import SUBCOMMANDS, RunConfig
from services.errors import ConfigError
from services.runner import run
from services.settings import get_settings

logger = logging.getLogger("hypstructures")

HELP = {
    "classify": "classify isometries by trace and by orbit growth",
    "confining": "verify confining subsets Q_eps and the density claim",
    "axioms": "check projection axioms on families",
    "complex": "build the projection graph and quasi-tree of spaces, run the bottleneck check",
    "flip": "build a flip tree, export its families and run the bounded projection scan",
    "poset": "assemble the poset of hyperbolic structures of an Anosov mapping torus",
    "mainlemma": "certify incomparability from commuting elements",
    "qm": "estimate quasimorphism defects, homogenizations and Busemann values",
}


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--phi", help="Anosov matrix as a,b,c,d")
    parser.add_argument("--isometry", help="isometry matrix as a,b,c,d")
    parser.add_argument("--reversing", action="store_true", default=None, help="precompose with z -> -conj(z)")
    parser.add_argument("--eps", type=float)
    parser.add_argument("--delta", type=float)
    parser.add_argument("--box", type=int)
    parser.add_argument("--k-cap", dest="k_cap", type=int)
    parser.add_argument("--depth", type=int)
    parser.add_argument("--radius", type=int)
    parser.add_argument("--samples", type=int)
    parser.add_argument("--count", type=int)
    parser.add_argument("--R", dest="R", type=float)
    parser.add_argument("--K", dest="K", type=float)
    parser.add_argument("--L", dest="L", type=float)
    parser.add_argument("--lengths", help="Schottky translation lengths as l1,l2")
    parser.add_argument("--word-cap", dest="word_cap", type=int)
    parser.add_argument("--scan-bound", dest="scan_bound", type=int)
    parser.add_argument("--instance", help="main lemma instance: z2, bs22 or broken")
    parser.add_argument("--qm", help="quasimorphism descriptor as JSON")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--input", dest="inputs", action="append", help="family or geodesic configuration JSON")
    parser.add_argument("--format", choices=["json", "dot", "text"], default="json")
    parser.add_argument("--out", help="write the report to PATH instead of stdout")
    parser.add_argument("--log-level", dest="log_level", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hypstructures",
                                     description="Hyperbolic actions, projection complexes and structure posets")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        _add_common(sub.add_parser(name, help=HELP[name]))
    serve = sub.add_parser("serve", help="start the HTTP API")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--log-level", dest="log_level", default=None)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = {k: v for k, v in vars(args).items() if k != "log_level"}
    if values.get("qm") is not None:
        try:
            values["qm"] = json.loads(values["qm"])
        except json.JSONDecodeError as e:
            raise ConfigError(f"--qm is not valid JSON: {e.msg}", field="qm", line=e.lineno)
    if values.get("seed") is None:
        values["seed"] = get_settings().seed
    return RunConfig.build(**values)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = (args.log_level or get_settings().log_level).upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO), stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    if args.subcommand == "serve":
        import uvicorn
        uvicorn.run("backend.backend:app", host=args.host, port=args.port)
        return 0

    try:
        config = config_from_args(args)
        report = run(config)
        report.write(config.format, config.out, stream=sys.stdout)
        return report.exit_code
    except ConfigError as e:
        logger.error("Configuration error (%s): %s", e.field, e.message)
        sys.stderr.write(json.dumps(e.to_record(), sort_keys=True) + "\n")
        return 2
    except Exception:
        logger.exception("Unexpected failure in %s", args.subcommand)
        return 1


if __name__ == "__main__":
    sys.exit(main())
