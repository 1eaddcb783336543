"""Command line entry point: ``stratlearn {generate,pair,infer,bound}``.

Every option can also be set through an environment variable named
``STRATLEARN_<OPTION>`` (upper case, dashes as underscores); explicit flags win.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from .inference import MODES, default_mode, pair_test, strata_clusters
from .persistence.diagrams import render_svg
from .pointcloud import (PointCloud, PointCloudError, SamplingError, SamplingModel, SpaceSpec,
                         covering_radius, generate_synthetic, load_points, sample, save_points)
from .sampling_bounds import sampling_bound

ENV_PREFIX = "STRATLEARN_"
EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

SHAPES = {"cross": "cross2d", "plane-line": "plane_line3d", "two-planes": "two_planes3d",
          "segment": "segment"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _env(name: str, default=None):
    return os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"), default)


def _add(p, flag: str, **kw):
    """``add_argument`` with the environment override as default."""
    kw.setdefault("default", None)
    kw["default"] = _env(flag.lstrip("-"), kw["default"])
    p.add_argument(flag, **kw)


def _spec_flags(p, required=False):
    _add(p, "--shape", choices=sorted(SHAPES), required=required and _env("shape") is None)
    _add(p, "--extent", type=float, default=None, help="half-length of arms/planes (default 1)")
    _add(p, "--spacing", type=float, default=0.1, help="grid spacing of the synthetic sample")


def _input_flags(p):
    _add(p, "--input", help="point file (csv); alternative to --shape")
    _spec_flags(p)
    _add(p, "--radius", type=float, required=_env("radius") is None)
    _add(p, "--epsilon", type=float, help="sampling density; measured when --shape is used")
    _add(p, "--alpha-cap", type=float)
    _add(p, "--mode", choices=MODES)
    _add(p, "--out", default=".")
    _add(p, "--seed", type=int, default=0)


def _spec(args) -> SpaceSpec:
    kind = SHAPES[args.shape]
    params = {}
    if args.extent is not None:
        if kind == "segment":
            params = {"start": -args.extent, "end": args.extent}
        else:
            params = {"a": args.extent}
    return SpaceSpec(kind, params, grid_spacing=args.spacing)


def _load(args):
    """``(cloud, eps)`` from exactly one input source."""
    if (args.input is None) == (args.shape is None):
        raise UsageError("give exactly one of --input or --shape")
    if args.input is not None:
        if args.epsilon is None:
            raise UsageError("--epsilon is required with --input")
        return load_points(args.input), args.epsilon
    spec = _spec(args)
    cloud = generate_synthetic(spec)
    eps = args.epsilon if args.epsilon is not None else covering_radius(cloud, spec)
    return cloud, eps


def _mode(args, cloud: PointCloud) -> str:
    mode = args.mode or default_mode(cloud.dim)
    if cloud.dim == 3 and mode != "cubical":
        raise UsageError("3D input needs --mode cubical")
    return mode


def cmd_generate(args) -> int:
    spec = _spec(args)
    if args.n is None:
        cloud = generate_synthetic(spec)
    else:
        cloud = sample(spec, SamplingModel(args.model, args.delta, args.seed), args.n)
    if args.out == "-":
        np.savetxt(sys.stdout, cloud.points, delimiter=",", fmt="%.17g")
    else:
        save_points(cloud, args.out)
        print(f"wrote {len(cloud)} points to {args.out}")
    return EXIT_OK


def cmd_pair(args) -> int:
    cloud, eps = _load(args)
    mode = _mode(args, cloud)
    n = len(cloud)
    for k in (args.p, args.q):
        if not 0 <= k < n:
            raise PointCloudError(f"point index {k} out of range (0..{n - 1})")
    res = pair_test(cloud, args.p, args.q, args.radius, eps, mode, alpha_cap=args.alpha_cap)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for d in res.directions:
        for name, dg in (("ker", d.kernel), ("cok", d.cokernel)):
            stem = f"{name}_{d.p}_{d.q}"
            dg.save(out / f"{stem}.csv")
            if args.svg:
                (out / f"{stem}.svg").write_text(render_svg(dg, eps))
        print(f"direction {d.p}->{d.q}: kernel window {len(d.kernel_window)}, "
              f"cokernel window {len(d.cokernel_window)}")
    print(f"epsilon: {eps!r}")
    print(f"pair: {res.reason}")
    print(f"equivalent: {'true' if res.weight else 'false'}")
    return EXIT_OK


def _parse_pairs(text: str | None, n: int):
    if text is None or text == "all":
        return None
    src = Path(text).read_text() if Path(text).is_file() else text.replace(";", "\n").replace(",", "\n")
    pairs = []
    for tok in src.split():
        a, _, b = tok.partition("-")
        try:
            pairs.append((int(a), int(b)))
        except ValueError:
            raise UsageError(f"bad pair {tok!r}; use i-j") from None
    for i, j in pairs:
        if not (0 <= i < n and 0 <= j < n):
            raise PointCloudError(f"pair {i}-{j} out of range (0..{n - 1})")
    return pairs


def cmd_infer(args) -> int:
    cloud, eps = _load(args)
    mode = _mode(args, cloud)
    pairs = _parse_pairs(args.pairs, len(cloud))
    res = strata_clusters(cloud, args.radius, eps, mode, pairs, args.alpha_cap,
                          jobs=max(1, args.jobs), spectral=args.spectral)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "labels.csv").write_text(res.labels_csv())
    (out / "weights.csv").write_text(res.weights_csv())
    summary = f"epsilon: {eps!r}\n" + res.summary()
    (out / "summary.txt").write_text(summary)
    sys.stdout.write(summary)
    return EXIT_OK


def cmd_bound(args) -> int:
    if not 0 < args.xi < 1:
        raise UsageError("--xi must lie in (0, 1)")
    if not args.rho > 0:
        raise UsageError("--rho must be positive")
    report = sampling_bound(_spec(args), args.rho, args.xi, args.resolution)
    sys.stdout.write(report.to_text())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="stratlearn", description="Local strata inference from point samples.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a synthetic point cloud")
    _spec_flags(g, required=True)
    _add(g, "--n", type=int, help="draw n random points instead of the grid")
    _add(g, "--model", choices=("M1", "M2"), default="M2")
    _add(g, "--delta", type=float, help="thickening for M1")
    _add(g, "--seed", type=int, default=0)
    _add(g, "--out", default="-")
    g.set_defaults(func=cmd_generate)

    p = sub.add_parser("pair", help="window test for one pair of points")
    p.add_argument("p", type=int)
    p.add_argument("q", type=int)
    _input_flags(p)
    p.add_argument("--svg", action="store_true", help="also render diagrams")
    p.set_defaults(func=cmd_pair)

    i = sub.add_parser("infer", help="cluster all points into strata")
    _input_flags(i)
    _add(i, "--pairs", help="'all' (default), 'i-j,k-l' or a file of i-j tokens")
    _add(i, "--jobs", type=int, default=1)
    i.add_argument("--spectral", action="store_true", default=_env("spectral") in ("1", "true"))
    i.set_defaults(func=cmd_infer)

    b = sub.add_parser("bound", help="sample size for a feature size rho")
    _spec_flags(b, required=True)
    _add(b, "--rho", type=float, required=_env("rho") is None)
    _add(b, "--xi", type=float, default=0.05)
    _add(b, "--resolution", type=float)
    b.set_defaults(func=cmd_bound)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"stratlearn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PointCloudError, OSError, IndexError) as exc:
        print(f"stratlearn: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (SamplingError, AssertionError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"stratlearn: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"stratlearn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
