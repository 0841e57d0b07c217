"""Command-line entry point: ``wweuie <subcommand> ...``."""

import argparse
import csv
import statistics
import sys
import time
from dataclasses import dataclass, replace

import numpy as np
from threadpoolctl import threadpool_limits

from . import colorspace, losses, metrics, priors
from .image import load_image, save_image
from .losses import LossWeights
from .network import (REFERENCE_FLOPS_G, REFERENCE_PARAMS_M, NetConfig, count_cost, init_random, load_weights,
                      model_forward)
from .synthetic import degrade_underwater, make_scene
from .validation import FormatError


class UsageError(Exception):
    pass


@dataclass
class BenchStats:
    runs: int
    mean_ms: float
    std_ms: float
    min_ms: float
    max_ms: float
    input_size: int
    thread_mode: str

    def rows(self):
        return [("runs", self.runs), ("mean_ms", self.mean_ms), ("std_ms", self.std_ms),
                ("min_ms", self.min_ms), ("max_ms", self.max_ms),
                ("input_size", f"{self.input_size}x{self.input_size}"), ("thread_mode", self.thread_mode)]


def emit(rows, as_csv, header=("name", "value"), out=None):
    """Print rows as aligned text or CSV."""
    out = out or sys.stdout
    if as_csv:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return
    cells = [[_fmt(v) for v in row] for row in rows]
    widths = [max(len(str(h)), *(len(r[i]) for r in cells)) for i, h in enumerate(header)]
    out.write("  ".join(str(h).ljust(w) for h, w in zip(header, widths)).rstrip() + "\n")
    for r in cells:
        out.write("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() + "\n")


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return f"{v:.6g}"
    return str(v)


def _config_from_args(args):
    cfg = NetConfig(seed=args.seed if args.seed is not None else 0)
    if getattr(args, "base_channels", None):
        cfg = replace(cfg, base_channels=args.base_channels)
    if getattr(args, "num_scales", None):
        cfg = replace(cfg, num_scales=args.num_scales)
    if getattr(args, "order", None):
        cfg = replace(cfg, block_order=args.order)
    for item in getattr(args, "disable", None) or []:
        key = {"wb": "enable_wb_prior", "web": "enable_web", "sgfb": "enable_sgfb",
               "sgfb-grad": "enable_sgfb_gradient_branch"}[item]
        cfg = replace(cfg, **{key: False})
    return cfg


def _weights_from_args(args, required):
    if args.weights:
        return load_weights(args.weights)
    if args.seed is None and required:
        raise UsageError("either --weights or --seed is required")
    return init_random(_config_from_args(args))


def cost_rows(report):
    return [("params", report.parameter_count), ("params_M", report.parameter_count / 1e6),
            ("flops", report.flop_count), ("flops_G", report.flop_count / 1e9)]


def reference_comparison_rows(report):
    pm, fg = report.parameter_count / 1e6, report.flop_count / 1e9
    return [("params_M", pm, REFERENCE_PARAMS_M, 100 * (pm - REFERENCE_PARAMS_M) / REFERENCE_PARAMS_M),
            ("flops_G", fg, REFERENCE_FLOPS_G, 100 * (fg - REFERENCE_FLOPS_G) / REFERENCE_FLOPS_G)]


def cmd_enhance(args):
    store = _weights_from_args(args, required=True)
    img = load_image(args.input)
    out = model_forward(img, store)
    save_image(out, args.output)
    emit(cost_rows(count_cost(store.config, img.shape[0], img.shape[1])), args.csv)
    return 0


def run_bench(store, runs=1000, size=256, threads=1, warmup=10, seed=0):
    """Time ``runs`` forward passes on a fixed random input after ``warmup`` untimed ones."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    x = np.random.default_rng(seed).uniform(0.0, 1.0, size=(size, size, 3))
    mode = "single-thread" if threads == 1 else f"{threads} threads"
    with threadpool_limits(limits=threads):
        for _ in range(warmup):
            model_forward(x, store)
        times = []
        for _ in range(runs):
            t0 = time.perf_counter()
            model_forward(x, store)
            times.append((time.perf_counter() - t0) * 1e3)
    return BenchStats(runs, statistics.fmean(times), statistics.pstdev(times), min(times), max(times),
                      size, mode)


def cmd_bench(args):
    store = _weights_from_args(args, required=False)
    stats = run_bench(store, args.runs, args.size, args.threads, args.warmup)
    report = count_cost(store.config, args.size, args.size)
    emit(stats.rows() + cost_rows(report), args.csv)
    if not args.csv:
        print("(CPU timing; not comparable with GPU latency figures)")
    return 0


def cmd_cost(args):
    config = load_weights(args.weights).config if args.weights else _config_from_args(args)
    report = count_cost(config, args.size, args.size)
    emit(reference_comparison_rows(report), args.csv, header=("quantity", "ours", "reference", "deviation_pct"))
    return 0


def cmd_wb(args):
    save_image(priors.white_balance(load_image(args.input)), args.output)
    return 0


def cmd_dwt(args):
    for path in priors.save_subbands(priors.haar_dwt2(load_image(args.input)), args.output):
        print(path)
    return 0


def cmd_metrics(args):
    img = load_image(args.test)
    if args.ref:
        ref = load_image(args.ref)
        rows = [("psnr_db", metrics.psnr(ref, img)), ("ssim", metrics.ssim(ref, img))]
    else:
        rows = [("uciqe", metrics.uciqe(img))]
    emit(rows, args.csv)
    return 0


def _parse_triple(text):
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise UsageError(f"expected three comma-separated numbers, got {text!r}")
    return parts


def cmd_ciede(args):
    if args.lab1 or args.lab2:
        if not (args.lab1 and args.lab2):
            raise UsageError("--lab1 and --lab2 go together")
        rows = [("delta_e00", float(colorspace.ciede2000(_parse_triple(args.lab1), _parse_triple(args.lab2))))]
    else:
        if not (args.input and args.patches):
            raise UsageError("give --input and --patches, or --lab1 and --lab2")
        mean, per_patch = metrics.chart_eval(load_image(args.input), metrics.PatchSpec.from_csv(args.patches),
                                             return_per_patch=True)
        rows = [(f"patch{i}", float(v)) for i, v in enumerate(per_patch)] + [("mean", mean)]
    emit(rows, args.csv)
    return 0


def cmd_gradcheck(args):
    names = args.losses.split(",") if args.losses else None
    rows = losses.grad_check(names, trials=args.trials, seed=args.seed or 0)
    emit([(n, e, t, "pass" if ok else "FAIL") for n, e, t, ok in rows], args.csv,
         header=("loss", "max_rel_error", "tolerance", "status"))
    return 0 if all(r[3] for r in rows) else 1


def cmd_fit(args):
    weights = LossWeights.parse(args.lw) if args.lw else LossWeights()
    if args.demo:
        reference = make_scene(args.demo, args.demo, seed=args.seed or 0)
        init = degrade_underwater(reference, seed=args.seed or 0)
    else:
        if not (args.input and args.ref):
            raise UsageError("give --input and --ref, or --demo SIZE")
        init, reference = load_image(args.input), load_image(args.ref)
    out, trace = losses.fit_image(init, reference, weights, iters=args.iters, step=args.step)
    if args.output:
        save_image(out, args.output)
    if args.trace:
        with open(args.trace, "w") as fh:
            emit(list(enumerate(trace)), True, header=("iteration", "loss"), out=fh)
    emit([("psnr_init_db", metrics.psnr(reference, init)), ("psnr_final_db", metrics.psnr(reference, out)),
          ("loss_first", float(trace[0]) if len(trace) else float("nan")),
          ("loss_final", float(trace[-1]) if len(trace) else float("nan"))], args.csv)
    return 0


def cmd_xyy(args):
    n = colorspace.write_xyy_csv(load_image(args.input), args.output, stride=args.stride)
    print(f"wrote {n} rows to {args.output}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="wweuie", description="Underwater image enhancement toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, csv_flag=True):
        if csv_flag:
            p.add_argument("--csv", action="store_true", help="emit tabular output as CSV")
        return p

    def net_flags(p):
        p.add_argument("--weights", help="WWEW weight file")
        p.add_argument("--seed", type=int, help="seed for random initialization")
        p.add_argument("--order", choices=("web-sgfb", "sgfb-web"))
        p.add_argument("--disable", action="append", choices=("wb", "web", "sgfb", "sgfb-grad"))
        p.add_argument("--base-channels", type=int)
        p.add_argument("--num-scales", type=int)

    p = common(sub.add_parser("enhance", help="run the network on an image"))
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    net_flags(p)
    p.set_defaults(func=cmd_enhance)

    p = common(sub.add_parser("bench", help="latency benchmark"))
    p.add_argument("--runs", type=int, default=1000)
    p.add_argument("--size", type=int, default=256)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--warmup", type=int, default=10)
    net_flags(p)
    p.set_defaults(func=cmd_bench)

    p = common(sub.add_parser("cost", help="parameter/FLOP count against the reference totals"))
    p.add_argument("--size", type=int, default=256)
    net_flags(p)
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("wb", help="white balance")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_wb)

    p = sub.add_parser("dwt", help="one-level Haar transform into four PFM files")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True, help="output prefix")
    p.set_defaults(func=cmd_dwt)

    p = common(sub.add_parser("metrics", help="PSNR/SSIM against --ref, else UCIQE"))
    p.add_argument("-i", "--input", "--test", dest="test", required=True)
    p.add_argument("--ref")
    p.set_defaults(func=cmd_metrics)

    p = common(sub.add_parser("ciede", help="CIEDE2000 chart score or a single Lab pair"))
    p.add_argument("-i", "--input")
    p.add_argument("--patches")
    p.add_argument("--lab1")
    p.add_argument("--lab2")
    p.set_defaults(func=cmd_ciede)

    p = common(sub.add_parser("gradcheck", help="finite-difference check of the loss gradients"))
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--losses", help="comma-separated subset of charbonnier,edge,ssim,hvi")
    p.set_defaults(func=cmd_gradcheck)

    p = common(sub.add_parser("fit", help="optimize an image's pixels against a reference"))
    p.add_argument("-i", "--input")
    p.add_argument("--ref")
    p.add_argument("--demo", type=int, metavar="SIZE", help="use a synthetic degraded SIZE x SIZE scene")
    p.add_argument("-o", "--output")
    p.add_argument("--trace", help="write the per-iteration loss as CSV")
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--step", type=float, default=0.05)
    p.add_argument("--lw", help="loss weights c,vgg,ssim,edge,hvi")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("xyy", help="export CIE xyY chromaticities as CSV")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--stride", type=int, default=1)
    p.set_defaults(func=cmd_xyy)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"wweuie {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, FormatError, FloatingPointError) as exc:
        print(f"wweuie {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
