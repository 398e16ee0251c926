"""Command-line toolchain: encode inputs, simulate, sweep widths, estimate
resources, emit VHDL.

Exit codes: 0 on success, 2 for configuration or usage problems, 3 for
malformed data files.  Diagnostics go to stderr; machine-readable output
(class lines, CSV, JSON) goes to stdout or the requested file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .codec import (
    ConfigError,
    DataError,
    encode_batch,
    load_dataset,
    load_network,
    load_raster,
    load_vectors,
    save_dataset,
    save_network,
)
from .estimate import estimate_network, get_device, predict_latency
from .hdlgen import write_bundle
from .network import LayerActivity, run
from .quant import FloatNetwork, quantize
from .quant import sweep as sweep_widths

_POOL: dict = {}


def _pool_init(spec) -> None:
    _POOL["spec"] = spec


def _pool_run(stream) -> dict:
    return run(_POOL["spec"], stream).to_dict()


def _require_fixed(net, what: str):
    if isinstance(net, FloatNetwork):
        raise ConfigError(
            f"{what} needs fixed-point parameters; this config is float "
            "(quantize it, e.g. via 'hdl --neuron-bits ...' or 'sweep')"
        )
    return net


def cmd_sim(args) -> int:
    net = _require_fixed(load_network(args.config), "sim")
    if args.mode:
        net = replace(net, propagation=args.mode)
    if args.input:
        samples = [(Path(args.input).name, load_raster(args.input), None)]
    else:
        samples = load_dataset(args.dataset)

    jobs = args.jobs if args.jobs is not None else (os.cpu_count() or 1)
    if jobs > 1 and len(samples) > 1:
        with ProcessPoolExecutor(
            max_workers=jobs, initializer=_pool_init, initargs=(net,)
        ) as ex:
            reports = list(ex.map(_pool_run, [s for _, s, _ in samples]))
    else:
        reports = [run(net, s).to_dict() for _, s, _ in samples]

    hits = labeled = 0
    out_samples = []
    for (name, _stream, label), rep in zip(samples, reports):
        cls = rep["predicted_class"]
        us = rep["predicted_cycles"] / args.fclk * 1e6
        line = (
            f"{name} class={cls} cycles={rep['predicted_cycles']} "
            f"latency_us={us:.2f} counts={','.join(map(str, rep['out_counts']))}"
        )
        if rep["no_activity"]:
            line += " no_activity"
        if label is not None:
            line += f" label={label}"
            hits += int(cls == label)
            labeled += 1
        print(line)
        rep.update(name=name, label=label, latency_us=us)
        out_samples.append(rep)

    payload = {
        "config": str(args.config),
        "f_clk_hz": args.fclk,
        "n_samples": len(samples),
        "samples": out_samples,
    }
    if labeled:
        payload["accuracy"] = hits / labeled
        print(f"accuracy: {hits / labeled:.4f} ({hits}/{labeled})")
    if args.report:
        Path(args.report).write_text(json.dumps(payload, indent=2) + "\n")
    return 0


def cmd_encode(args) -> int:
    vectors, labels = load_vectors(args.vectors, label_col=args.label_col)
    if args.normalize:
        peak = float(np.max(vectors)) if vectors.size else 0.0
        if peak > 0:
            vectors = vectors / peak
    try:
        streams = encode_batch(vectors, args.steps, args.seed)
    except ValueError as e:
        raise DataError(f"{args.vectors}: {e}") from e
    names = save_dataset(args.out_dir, streams, labels=labels, fmt=args.format)
    print(f"wrote {len(names)} rasters to {args.out_dir}")
    return 0


def _mean_activity(report_path, n_layers: int) -> list[LayerActivity]:
    try:
        data = json.loads(Path(report_path).read_text())
        samples = data["samples"]
        acts = [s["per_layer_activity"] for s in samples]
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as e:
        raise DataError(f"{report_path}: not a sim report: {e}") from e
    if not acts or any(len(a) != n_layers for a in acts):
        raise DataError(f"{report_path}: report does not cover {n_layers} layers")
    out = []
    for k in range(n_layers):
        ff = float(np.mean([a[k]["ff_frac"] for a in acts]))
        anyf = float(np.mean([a[k]["any_frac"] for a in acts]))
        fbs = [a[k]["fb_frac"] for a in acts]
        fb = None if fbs[0] is None else float(np.mean([x for x in fbs]))
        out.append(LayerActivity(ff_frac=ff, fb_frac=fb, any_frac=anyf))
    return out


def cmd_estimate(args) -> int:
    net = _require_fixed(load_network(args.config), "estimate")
    device = get_device(args.device) if args.device else None
    report = estimate_network(net, device=device)
    activity = (
        _mean_activity(args.activity, len(net.layers)) if args.activity else 1.0
    )
    latency = predict_latency(net, activity=activity, f_clk_hz=args.fclk)
    if args.json:
        print(json.dumps({**report.to_dict(), "latency": latency.to_dict()}, indent=2))
    else:
        print(report.to_text())
        print(
            f"predicted latency: {latency.cycles:.0f} cycles = "
            f"{latency.seconds * 1e6:.2f} us at {args.fclk / 1e6:g} MHz"
        )
    if report.fits is False:
        print(f"warning: design does not fit {device.name}", file=sys.stderr)
    return 0


def cmd_sweep(args) -> int:
    net = load_network(args.config)
    if not isinstance(net, FloatNetwork):
        raise ConfigError("sweep needs a float config (parameters: \"float\")")
    items = load_dataset(args.dataset)
    missing = [name for name, _s, lab in items if lab is None]
    if missing:
        raise DataError(f"{args.dataset}: unlabeled rasters: {', '.join(missing[:5])}")
    eval_set = [(s, lab) for _name, s, lab in items]
    widths = [int(w) for w in args.widths.split(",")] if args.widths else None
    result = sweep_widths(net, eval_set, args.dim, widths=widths,
                          base_bits=args.base_bits)
    print(
        f"reference accuracy (all dimensions at base width): "
        f"{result.reference.accuracy:.4f}",
        file=sys.stderr,
    )
    csv_text = result.to_csv()
    if args.csv:
        Path(args.csv).write_text(csv_text)
    if args.json:
        Path(args.json).write_text(json.dumps(result.to_dict(), indent=2) + "\n")
    if not args.csv and not args.json:
        print(csv_text, end="")
    return 0


def cmd_hdl(args) -> int:
    net = load_network(args.config)
    out = Path(args.out)
    if isinstance(net, FloatNetwork):
        if args.neuron_bits is None or args.ff_bits is None:
            raise ConfigError(
                "float config: pass --neuron-bits and --ff-bits "
                "(and --fb-bits for recurrent nets) to quantize for hardware"
            )
        net = quantize(net, args.neuron_bits, args.ff_bits, args.fb_bits)
        out.mkdir(parents=True, exist_ok=True)
        save_network(net, out / f"{net.name}_quantized.json")
    stimulus = load_raster(args.stimulus) if args.stimulus else None
    names = write_bundle(net, out, stimulus=stimulus)
    for name in names:
        print(name)
    print(f"wrote {len(names)} files to {out}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="snnforge",
        description="spiking-network fixed-point simulation and FPGA toolchain",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("sim", help="run a fixed-point network on spike rasters")
    sim.add_argument("config")
    src = sim.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="single raster file")
    src.add_argument("--dataset", help="directory of .rst rasters (+ labels.csv)")
    sim.add_argument("--mode", choices=["pipelined", "immediate"],
                     help="override the config's propagation mode")
    sim.add_argument("--fclk", type=float, default=100e6,
                     help="clock for latency reporting (Hz, default 100e6)")
    sim.add_argument("--jobs", type=int, default=None,
                     help="parallel workers (default: cpu count)")
    sim.add_argument("--report", help="write a JSON report here")
    sim.set_defaults(func=cmd_sim)

    enc = sub.add_parser("encode", help="rate-encode sample vectors into rasters")
    enc.add_argument("vectors", help=".csv or .npy of per-sample rates")
    enc.add_argument("out_dir")
    enc.add_argument("--steps", type=int, required=True)
    enc.add_argument("--seed", type=int, default=0)
    enc.add_argument("--label-col", type=int, default=None,
                     help="csv column holding the class label")
    enc.add_argument("--normalize", action="store_true",
                     help="divide by the peak value to map into [0, 1]")
    enc.add_argument("--format", choices=["text", "binary"], default="text")
    enc.set_defaults(func=cmd_encode)

    est = sub.add_parser("estimate", help="block-RAM budget and latency prediction")
    est.add_argument("config")
    est.add_argument("--device", help="device name (see SNNFORGE_DEVICES)")
    est.add_argument("--fclk", type=float, default=100e6)
    est.add_argument("--activity",
                     help="sim --report JSON to take measured activity from")
    est.add_argument("--json", action="store_true")
    est.set_defaults(func=cmd_estimate)

    sw = sub.add_parser("sweep", help="accuracy across bit widths of one dimension")
    sw.add_argument("config", help="float-parameter config")
    sw.add_argument("--dataset", required=True,
                    help="labeled raster directory for accuracy evaluation")
    sw.add_argument("--dim", choices=["neuron", "ff", "fb"], required=True)
    sw.add_argument("--widths", help="comma-separated bit widths (default 32..1)")
    sw.add_argument("--base-bits", type=int, default=None,
                    help="width for the non-swept dimensions")
    sw.add_argument("--csv", help="write the sweep table here")
    sw.add_argument("--json", help="write the full result here")
    sw.set_defaults(func=cmd_sweep)

    hdl = sub.add_parser("hdl", help="emit a synthesizable VHDL bundle")
    hdl.add_argument("config")
    hdl.add_argument("--out", required=True)
    hdl.add_argument("--stimulus", help="raster to bake into the testbench")
    hdl.add_argument("--neuron-bits", type=int, default=None)
    hdl.add_argument("--ff-bits", type=int, default=None)
    hdl.add_argument("--fb-bits", type=int, default=None)
    hdl.set_defaults(func=cmd_hdl)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DataError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except (ConfigError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
