"""Command-line front end.

Exit status is 0 on success, 2 for usage errors and 1 for I/O or numeric
failures, which are reported as one line on stderr.
"""
import argparse
import json
import logging
import os
import sys

from bwfusion import __version__, atrous
from bwfusion.errors import FusionError
from bwfusion.fileio import load_band, load_pgm, load_stack, save_brs, save_pgm
from bwfusion.fusion import METHODS, FusionConfig, pansharpen
from bwfusion.harness import TABLE_ORDER, ExperimentSpec, generate_scene, run_experiment
from bwfusion.metrics import WindowSpec, evaluate_stack, reports_to_csv
from bwfusion.raster import KERNELS, BandStack

log = logging.getLogger("bwfusion")


def _levels(text):
    if text in ("auto", "ratio"):
        return text
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, 'auto' or 'ratio', got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"levels must be >= 1, got {n}")
    return n


def _positive_int(text):
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {n}")
    return n


def _method_list(text):
    methods = [m.strip() for m in text.split(",") if m.strip()]
    for m in methods:
        if m not in METHODS:
            raise argparse.ArgumentTypeError(f"unknown method {m!r}; choose from {','.join(METHODS)}")
    if not methods:
        raise argparse.ArgumentTypeError("empty method list")
    return methods


def _pan_match(text):
    return None if text is None else text.replace("-", "_")


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _sidecar(path):
    return os.path.splitext(path)[0] + ".json"


def cmd_fuse(args):
    pan = load_band(args.pan)
    ms = load_stack(args.ms)
    ratio = args.ratio
    if ratio is None:
        ratio = pan.shape[1] // ms.width if ms.shape != pan.shape else 1
        ratio = max(ratio, 1)
    cfg = FusionConfig(
        method=args.method,
        levels=args.levels,
        ratio=ratio,
        denom_epsilon=args.eps,
        pan_match=_pan_match(args.pan_match),
    )
    result = pansharpen(pan, ms, cfg, kernel=args.resample)
    save_brs(args.out, result.fused)
    _write_json(_sidecar(args.out), {
        "command": "fuse",
        "config": result.config_echo.to_dict(),
        "resample": args.resample,
        "bands": list(result.fused.band_names),
    })


def cmd_evaluate(args):
    fused = load_stack(args.fused)
    reference = load_stack(args.reference)
    window = WindowSpec(args.window, args.stride)
    report = evaluate_stack(fused, reference, window)
    with open(args.out, "w", newline="") as fh:
        fh.write(reports_to_csv({args.method: report}))
    _write_json(_sidecar(args.out), {"command": "evaluate", args.method: report.to_dict()})


def cmd_experiment(args):
    pan = load_band(args.pan)
    reference = load_stack(args.reference)
    spec = ExperimentSpec(
        methods=args.methods,
        ratio=args.ratio,
        window=WindowSpec(args.window, args.stride),
        kernel=args.resample,
        output=args.out,
        levels=args.levels,
        pan_match=_pan_match(args.pan_match),
    )
    os.makedirs(args.out, exist_ok=True)
    fused = {} if args.dump else None
    reports = run_experiment(pan, reference, spec, fused_out=fused)
    with open(os.path.join(args.out, "report.csv"), "w", newline="") as fh:
        fh.write(reports_to_csv(reports))
    _write_json(os.path.join(args.out, "report.json"), {
        "command": "experiment",
        "spec": spec.to_dict(),
        "reports": {m: r.to_dict() for m, r in reports.items()},
    })
    for method, stack in (fused or {}).items():
        save_brs(os.path.join(args.out, f"fused_{method}.brs"), stack)


def cmd_synth(args):
    scene = generate_scene(args.width, args.height, args.bands, args.ratio, args.seed)
    os.makedirs(args.out, exist_ok=True)
    save_brs(os.path.join(args.out, "pan.brs"), BandStack(scene.pan))
    save_brs(os.path.join(args.out, "ms.brs"), scene.ms)
    save_brs(os.path.join(args.out, "reference.brs"), scene.reference)
    _write_json(os.path.join(args.out, "scene.json"), {
        "command": "synth",
        "width": args.width, "height": args.height, "bands": args.bands,
        "ratio": args.ratio, "seed": args.seed,
    })


def cmd_decompose(args):
    stack = load_stack(args.input)
    decomps = [atrous.decompose(b, args.levels) for b in stack]
    os.makedirs(args.out, exist_ok=True)
    for j in range(decomps[0].levels):
        save_brs(os.path.join(args.out, f"plane_{j + 1}.brs"), BandStack([d.planes[j] for d in decomps]))
    save_brs(os.path.join(args.out, "residual.brs"), BandStack([d.residual for d in decomps]))


def cmd_import_pgm(args):
    bands = [load_pgm(p, scale=args.scale) for p in args.inputs]
    save_brs(args.out, BandStack.from_bands(bands))


def cmd_export_pgm(args):
    stack = load_stack(args.input)
    os.makedirs(args.out, exist_ok=True)
    for i, band in enumerate(stack):
        save_pgm(os.path.join(args.out, f"band_{i + 1}.pgm"), band, args.maxval, args.scale)


def build_parser():
    p = argparse.ArgumentParser(prog="bwfusion", description="Brovey-wavelet pansharpening toolkit")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def fusion_flags(sp):
        sp.add_argument("--levels", type=_levels, default="auto",
                        help="wavelet levels: N, 'auto' (log2 ratio) or 'ratio'")
        sp.add_argument("--pan-match", choices=("none", "mean-std"), default=None,
                        help="PAN histogram matching for aw/sw (default mean-std)")
        sp.add_argument("--resample", choices=KERNELS, default="bicubic")

    sp = sub.add_parser("fuse", help="pansharpen one MS stack")
    sp.add_argument("--method", required=True, choices=METHODS)
    sp.add_argument("--pan", required=True)
    sp.add_argument("--ms", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--ratio", type=_positive_int, default=None,
                    help="PAN/MS resolution ratio (default: from the file sizes)")
    sp.add_argument("--eps", type=float, default=None, help="Brovey denominator guard")
    fusion_flags(sp)
    sp.set_defaults(func=cmd_fuse)

    sp = sub.add_parser("evaluate", help="windowed CC/UIQI against a reference")
    sp.add_argument("--fused", required=True)
    sp.add_argument("--reference", required=True)
    sp.add_argument("--window", type=_positive_int, default=8)
    sp.add_argument("--stride", type=_positive_int, default=1)
    sp.add_argument("--method", default="fused", help="label for the method column")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("experiment", help="degrade, fuse with every method, score")
    sp.add_argument("--pan", required=True)
    sp.add_argument("--reference", required=True)
    sp.add_argument("--methods", type=_method_list, default=list(TABLE_ORDER),
                    help="comma-separated methods (default: all, in table order)")
    sp.add_argument("--ratio", type=_positive_int, default=4)
    sp.add_argument("--window", type=_positive_int, default=8)
    sp.add_argument("--stride", type=_positive_int, default=1)
    sp.add_argument("--dump", action="store_true", help="also write every fused stack")
    sp.add_argument("--out", required=True)
    fusion_flags(sp)
    sp.set_defaults(func=cmd_experiment)

    sp = sub.add_parser("synth", help="write a seeded synthetic scene")
    sp.add_argument("--width", type=_positive_int, default=128)
    sp.add_argument("--height", type=_positive_int, default=128)
    sp.add_argument("--bands", type=_positive_int, default=4)
    sp.add_argument("--ratio", type=_positive_int, default=4)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("decompose", help="dump a trous planes of every band")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--levels", type=_positive_int, required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_decompose)

    sp = sub.add_parser("import-pgm", help="stack PGM files into one BRS file")
    sp.add_argument("--in", dest="inputs", nargs="+", required=True)
    sp.add_argument("--scale", action="store_true", help="divide samples by maxval")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_import_pgm)

    sp = sub.add_parser("export-pgm", help="write each band of a BRS file as PGM")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--maxval", type=_positive_int, default=255)
    sp.add_argument("--scale", action="store_true", help="multiply samples by maxval first")
    sp.add_argument("--out", required=True, help="output directory")
    sp.set_defaults(func=cmd_export_pgm)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        args.func(args)
    except (FusionError, OSError) as exc:
        print(f"bwfusion: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
