"""``msgrad`` command line: generate, msc, convergence, kde, rotate-sweep, hausdorff, render."""
from __future__ import annotations

import argparse
import math
import os
import sys

from . import analytic, evaluation
from .cellgrid import read_msg1, write_msg1
from .morse import compute_gradient, extract_ms_complex
from .serialize import dumps, load_msc, msc_to_json

STRATEGIES = ("steepest", "probabilistic")
_LIST_OPTIONS = ("--domain", "--center")


def _u64(text):
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _finite(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError("must be finite")
    return v


def _floats(n):
    def parse(text):
        parts = text.split(",")
        if len(parts) != n:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {text!r}")
        return tuple(_finite(p) for p in parts)

    return parse


def _resolution(text):
    parts = text.lower().split("x")
    if len(parts) == 1:
        parts = parts * 2
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"resolution must look like 512 or 512x256, got {text!r}")
    w, h = (_positive_int(p) for p in parts)
    if w < 2 or h < 2:
        raise argparse.ArgumentTypeError("resolution must be at least 2x2")
    return w, h


def _resolutions(text):
    return [_resolution(t) for t in text.split(",")]


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=_positive_int, default=None,
                        help="worker threads (default: $MSGRAD_THREADS or 1); never changes output")

    strat = argparse.ArgumentParser(add_help=False)
    strat.add_argument("--strategy", choices=STRATEGIES, default="steepest")
    strat.add_argument("--seed", type=_u64, default=0)

    loop = argparse.ArgumentParser(add_help=False)
    loop.add_argument("--center", type=_floats(2), default=(0.0, 0.0))
    loop.add_argument("--radius", type=_finite, default=1.0)
    loop.add_argument("--annulus-width", type=_finite, default=None,
                      help="half-width of the band around the circle (default radius/2)")

    p = argparse.ArgumentParser(prog="msgrad", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="sample an analytic function to an MSG1 file")
    g.add_argument("--fn", choices=("circle", "rotated", "random"), required=True)
    g.add_argument("--alpha", type=_finite)
    g.add_argument("--theta", type=_finite)
    g.add_argument("--seed", type=_u64)
    g.add_argument("--domain", type=_floats(4))
    g.add_argument("--res", type=_resolution, required=True)
    g.add_argument("--out", required=True)

    m = sub.add_parser("msc", parents=[common, strat], help="extract the Morse-Smale complex of an MSG1 grid")
    m.add_argument("--in", dest="input", required=True)
    m.add_argument("--out", required=True)

    c = sub.add_parser("convergence", parents=[common, strat, loop], help="Hausdorff error under refinement")
    c.add_argument("--alpha", type=_finite, default=1.0)
    c.add_argument("--res", type=_resolutions, default=[(64, 64), (128, 128), (256, 256), (512, 512)])
    c.add_argument("--runs", type=_positive_int, default=20)
    c.add_argument("--reference", choices=("circle", "separatrix"), default="circle")
    c.add_argument("--csv", required=True)

    k = sub.add_parser("kde", parents=[common], help="kernel density of Hausdorff errors per resolution")
    k.add_argument("--csv", required=True)
    k.add_argument("--out", required=True)
    k.add_argument("--bandwidth", type=_finite, default=None)
    k.add_argument("--num", type=_positive_int, default=256)

    r = sub.add_parser("rotate-sweep", parents=[common, strat, loop], help="loops of rotated copies, back-rotated")
    r.add_argument("--alpha", type=_finite, default=1.0)
    r.add_argument("--res", type=_resolution, default=(1024, 1024))
    r.add_argument("--steps", type=_positive_int, default=64)
    r.add_argument("--out", required=True)

    hd = sub.add_parser("hausdorff", parents=[common, loop], help="Hausdorff error of the loop in an MSC file")
    hd.add_argument("--msc", required=True)

    v = sub.add_parser("render", parents=[common], help="SVG overlay of an MSC file")
    v.add_argument("--msc", required=True)
    v.add_argument("--svg", required=True)
    v.add_argument("--size", type=_positive_int, default=800)
    v.add_argument("--reference-circle", type=_floats(3), default=None, metavar="CX,CY,R")
    return p


def _join_list_options(argv):
    # "--domain -2,2,-2,2" would otherwise be read as an unknown flag
    out = []
    it = iter(argv)
    for a in it:
        if a in _LIST_OPTIONS:
            nxt = next(it, None)
            out.append(a if nxt is None else f"{a}={nxt}")
        else:
            out.append(a)
    return out


def parse_args(argv=None) -> argparse.Namespace:
    """Parse and validate; usage errors exit with status 2."""
    parser = _build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    cfg = parser.parse_args(_join_list_options(argv))
    if cfg.command == "generate":
        if cfg.fn in ("circle", "rotated") and cfg.alpha is None:
            parser.error(f"--fn {cfg.fn} requires --alpha")
        if cfg.alpha is not None and cfg.alpha <= 0:
            parser.error("--alpha must be positive")
        if cfg.fn == "rotated" and cfg.theta is None:
            parser.error("--fn rotated requires --theta")
        if cfg.fn == "random" and cfg.seed is None:
            parser.error("--fn random requires --seed")
        if cfg.domain is None:
            cfg.domain = (-math.pi, math.pi, -math.pi, math.pi) if cfg.fn == "random" else analytic.DEFAULT_DOMAIN
        if not (cfg.domain[1] > cfg.domain[0] and cfg.domain[3] > cfg.domain[2]):
            parser.error(f"degenerate domain {cfg.domain}")
    if cfg.command in ("convergence", "rotate-sweep") and cfg.alpha <= 0:
        parser.error("--alpha must be positive")
    source = {"msc": "input", "kde": "csv", "hausdorff": "msc", "render": "msc"}.get(cfg.command)
    path = getattr(cfg, source) if source else None
    if path is not None and path != "-" and not os.path.exists(path):
        parser.error(f"input file does not exist: {path}")
    return cfg


def _write_text(path, text):
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _cmd_generate(cfg):
    if cfg.fn == "circle":
        fn = analytic.CircleFn(cfg.alpha)
    elif cfg.fn == "rotated":
        fn = analytic.CircleFn(cfg.alpha, cfg.theta)
    else:
        fn = analytic.gen_coeffs(cfg.seed)
    grid = analytic.sample_to_grid(fn, cfg.domain, cfg.res)
    write_msg1(grid, sys.stdout.buffer if cfg.out == "-" else cfg.out)


def _cmd_msc(cfg):
    grid = read_msg1(sys.stdin.buffer if cfg.input == "-" else cfg.input)
    V = compute_gradient(grid, cfg.strategy, seed=cfg.seed, threads=cfg.threads)
    _write_text(cfg.out, msc_to_json(extract_ms_complex(grid, V)))


def _cmd_convergence(cfg):
    res = []
    for w, h in cfg.res:
        if w != h:
            raise ValueError("convergence studies use square resolutions")
        res.append(w)
    records = evaluation.convergence_study(
        cfg.alpha, res, cfg.runs, cfg.strategy, cfg.seed,
        center=cfg.center, radius=cfg.radius, half_width=cfg.annulus_width,
        threads=cfg.threads, reference=cfg.reference,
    )
    for r, (mean, std, n) in evaluation.summarize(records).items():
        print(f"resolution {r}: mean {mean:.6g} std {std:.6g} ({n} finite)", file=sys.stderr)
    if cfg.csv == "-":
        evaluation.write_records_csv(records, sys.stdout)
    else:
        evaluation.write_records_csv(records, cfg.csv)


def _cmd_kde(cfg):
    records = evaluation.read_records_csv(cfg.csv)
    lines = ["resolution,x,density"]
    for res in sorted({r.resolution for r in records}):
        vals = [r.hausdorff for r in records if r.resolution == res and not math.isnan(r.hausdorff)]
        try:
            est = evaluation.kde(vals, cfg.bandwidth, cfg.num)
        except ValueError as exc:
            print(f"resolution {res}: skipped ({exc})", file=sys.stderr)
            continue
        for x, d in zip(est.x, est.density):
            lines.append(f"{res},{evaluation.format_float(x)},{evaluation.format_float(d)}")
    _write_text(cfg.out, "\n".join(lines) + "\n")


def _cmd_rotate_sweep(cfg):
    slices = evaluation.rotation_sweep(
        cfg.alpha, cfg.res, cfg.steps, cfg.strategy, cfg.seed,
        radius=cfg.radius, half_width=cfg.annulus_width, threads=cfg.threads,
    )
    doc = {
        "alpha": cfg.alpha,
        "resolution": list(cfg.res),
        "strategy": cfg.strategy,
        "seed": cfg.seed,
        "slices": [
            {
                "theta": s.theta,
                "closed": None if s.loop is None else s.loop.closed,
                "hausdorff": None if math.isnan(s.hausdorff) else s.hausdorff,
                "points": [] if s.loop is None else s.loop.points,
            }
            for s in slices
        ],
    }
    _write_text(cfg.out, dumps(doc) + "\n")


def _cmd_hausdorff(cfg):
    msc = load_msc(cfg.msc)
    loop = evaluation.extract_circle_loop(msc, cfg.center, cfg.radius, cfg.annulus_width)
    hd = evaluation.hausdorff_to_circle(loop.points, cfg.center, cfg.radius)
    print(f"{evaluation.format_float(hd)} closed={str(loop.closed).lower()} points={len(loop.points)}")


def _cmd_render(cfg):
    from .render import render_svg

    _write_text(cfg.svg, render_svg(load_msc(cfg.msc), cfg.size, cfg.reference_circle))


_COMMANDS = {
    "generate": _cmd_generate,
    "msc": _cmd_msc,
    "convergence": _cmd_convergence,
    "kde": _cmd_kde,
    "rotate-sweep": _cmd_rotate_sweep,
    "hausdorff": _cmd_hausdorff,
    "render": _cmd_render,
}


def run(cfg: argparse.Namespace) -> int:
    """Execute a parsed command: 0 on success, 1 on a runtime failure."""
    try:
        _COMMANDS[cfg.command](cfg)
    except evaluation.FeatureNotFound as exc:
        print(f"msgrad {cfg.command}: feature not found: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError) as exc:
        print(f"msgrad {cfg.command}: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    return run(parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
