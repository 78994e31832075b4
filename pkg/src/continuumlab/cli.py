"""Command-line experiment runner.

One subcommand per experiment; a JSON manifest file supplies overrides for
the documented defaults, and `--seed` / `--out` / `--workers` adjust the
master seed, output directory, and worker-pool size.  Exit codes: 0 all
statistical gates passed, 1 a gate failed, 2 usage or manifest error,
3 a resource cap cut the run short (partial results are still written).

The output directory may also be set with the CONTINUUMLAB_OUT environment
variable; the `--out` flag wins.  Reports and CSVs embed the manifest hash
and contain no timestamps, so reruns of the same manifest are byte-identical
regardless of worker count.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .experiments import DEFAULTS, run_experiment
from .manifest import ExperimentManifest
from .walks import EnumerationOverflowError, TruncationError

__all__ = ["main", "build_parser"]

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="continuumlab",
        description="Experiments on towers of composed Brownian paths, their "
                    "limit intervals, and the combinatorial walk model.",
    )
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="EXPERIMENT")
    blurbs = {
        "limit-interval": "probe-independence of composed images as depth grows",
        "witness": "positivity statistics of the two-sided reach of limit intervals",
        "oscillation-law": "composed image length vs the power-product form (KS)",
        "log-moments": "slope of mean log image length against log t",
        "reflection": "running-maximum law of a single path",
        "claim2-tails": "escape and non-covering probabilities vs explicit bounds",
        "walk-model": "walk tower sizes, thread counts, relation-graph connectivity",
        "threads": "sample threads from one tower and dump unit coordinates",
    }
    for name, blurb in blurbs.items():
        p = sub.add_parser(name, help=blurb, description=blurb)
        p.add_argument("--manifest", metavar="PATH",
                       help="JSON manifest with overrides for the defaults")
        p.add_argument("--out", metavar="DIR",
                       help="output directory (default: manifest out_dir, or "
                            "$CONTINUUMLAB_OUT)")
        p.add_argument("--workers", type=int, default=1, metavar="N",
                       help="worker processes (default 1; results identical "
                            "for any value)")
        p.add_argument("--seed", type=int, metavar="U64",
                       help="override the manifest master seed")
    return parser


def _load_manifest(args) -> ExperimentManifest:
    defaults = DEFAULTS[args.experiment]
    if args.manifest:
        m = ExperimentManifest.from_file(args.manifest, args.experiment, defaults)
    else:
        m = ExperimentManifest.from_dict(args.experiment, {}, defaults)
    if args.seed is not None:
        m.master_seed = args.seed
    if args.out:
        m.out_dir = args.out
    elif os.environ.get("CONTINUUMLAB_OUT"):
        m.out_dir = os.environ["CONTINUUMLAB_OUT"]
    return m


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        manifest = _load_manifest(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"manifest error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    problems = manifest.validate()
    if problems:
        for p in problems:
            print(f"manifest error: {p}", file=sys.stderr)
        return EXIT_USAGE
    if args.workers < 1:
        print("usage error: --workers must be >= 1", file=sys.stderr)
        return EXIT_USAGE

    try:
        result = run_experiment(manifest, workers=args.workers)
    except (EnumerationOverflowError, TruncationError) as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ValueError as exc:
        print(f"manifest error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    os.makedirs(manifest.out_dir, exist_ok=True)
    for name, content in sorted(result.files.items()):
        path = os.path.join(manifest.out_dir, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(content)
        print(f"wrote {path}")
    for entry in result.report["tests"]:
        status = "PASS" if entry["pass"] else "FAIL"
        print(f"{status} {entry['test']}: statistic={entry['statistic']:.6g} "
              f"threshold={entry['threshold']:.6g}")
    print(f"manifest_hash={manifest.sha256()}")

    if result.resource_capped:
        return EXIT_RESOURCE
    return EXIT_PASS if result.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
