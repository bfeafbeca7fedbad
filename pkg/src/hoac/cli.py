# -*- coding: utf-8 -*-
"""Command-line front end: encode, decode, inspect, measure, render.

Exit codes: 0 success, 2 usage/input errors, 3 unsupported or malformed
format, 4 stream corruption.  All commands are deterministic given their
inputs, so pipelines built from them are scriptable and reproducible.
"""
import argparse
import json
import sys
from pathlib import Path

import numpy as np
import yaml

from . import bitstream, codec, metrics, params, plotting, scenes, \
    transport, wavio
from .entropy import EntropyDecodeError
from .errors import CorruptStreamError, FormatError, HoacError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FORMAT = 3
EXIT_CORRUPT = 4


class UsageError(HoacError):
    pass


def _load_band_table(path, downsample):
    with open(path, "r", encoding="utf-8") as fp:
        cfg = yaml.safe_load(fp)
    if not isinstance(cfg, dict) or "edges_hz" not in cfg:
        raise UsageError(f"band table file {path} needs an 'edges_hz' list")
    ds = cfg.get("downsample", downsample)
    return params.default_band_table(downsample=ds,
                                     edges_hz=cfg["edges_hz"])


def cmd_encode(args):
    try:
        pcm, sr = wavio.read_wav(args.input)
    except FormatError as exc:
        raise UsageError(str(exc)) from exc
    if args.order is not None:
        need = (args.order + 1) ** 2
        if pcm.shape[0] < need:
            raise UsageError(f"input has {pcm.shape[0]} channels, "
                             f"order {args.order} needs {need}")
        pcm = pcm[:need]

    preset = codec.TIER_PRESETS[args.tier] if args.tier else None
    num_sectors = args.sectors or (preset.num_sectors if preset else 12)
    kbps = args.kbps if args.kbps is not None else \
        (preset.kbps_per_channel if preset else 0.0)
    downsample = preset.downsample if preset else None
    if args.coder == transport.KIND_EXTERNAL and not args.coder_cmd:
        raise UsageError("--coder external requires --coder-cmd")
    coder = transport.CoderSpec(kind=args.coder, kbps_per_channel=kbps,
                                bits=args.bits, command=args.coder_cmd)
    if args.band_table:
        table = _load_band_table(args.band_table, downsample)
    else:
        table = params.default_band_table(downsample=downsample)

    try:
        header, records = codec.encode(pcm, sr, num_sectors=num_sectors,
                                       coder=coder, band_table=table)
    except FormatError as exc:
        raise UsageError(str(exc)) from exc
    bitstream.write_stream(args.output, header, records)
    rates = bitstream.measure_rates(args.output)
    print(f"tc_kbps {rates['tc_kbps']:.1f}  "
          f"metadata_kbps {rates['metadata_kbps']:.2f}  "
          f"total_kbps {rates['total_kbps']:.1f}")
    return EXIT_OK


def cmd_decode(args):
    pcm, header, error = codec.decode(args.input, on_error="partial")
    wavio.write_wav(args.output, pcm, header.sample_rate)
    if error is not None:
        print(f"error: {error}", file=sys.stderr)
        print(f"partial output written: {pcm.shape[1]} samples",
              file=sys.stderr)
        raise error
    return EXIT_OK


def cmd_info(args):
    header, frames = bitstream.read_stream(args.input)
    hdr = {
        "order": header.order,
        "channels": header.num_channels,
        "num_sectors": header.num_sectors,
        "n_tilde": header.n_tilde,
        "sector_grid": header.sector_grid_id,
        "num_bands": len(header.band_downsample),
        "band_edges_bins": np.asarray(header.band_edges).tolist(),
        "band_downsample": np.asarray(header.band_downsample).tolist(),
        "doa_grid": f"{header.doa_grid_id}:{header.doa_grid_size}",
        "diff_bins": header.diff_bins,
        "diff_exp_factor": round(header.diff_exp_factor, 6),
        "zeroing_threshold": round(header.zeroing_threshold, 6),
        "coder": header.coder.kind,
        "kbps_per_channel": header.coder.kbps_per_channel,
        "sample_rate": header.sample_rate,
        "frame_samples": header.frame_samples,
        "num_samples": header.num_samples,
    }
    if args.machine:
        print(json.dumps({"type": "header", **hdr}))
    else:
        print(f"J={header.num_sectors}, {len(header.band_downsample)} bands, "
              f"grid {header.doa_grid_size}")
        for k, v in hdr.items():
            print(f"  {k}: {v}")
    count = 0
    try:
        for rec in frames:
            if args.machine:
                print(json.dumps({"type": "frame", "index": rec.index,
                                  "tc_bytes": len(rec.tc_payload),
                                  "md_bytes": len(rec.md_payload)}))
            else:
                print(f"  frame {rec.index:5d}: tc {len(rec.tc_payload):7d} B"
                      f"  metadata {len(rec.md_payload):5d} B")
            count += 1
    except CorruptStreamError:
        print(f"frames decoded before error/EOF: {count}", file=sys.stderr)
        raise
    return EXIT_OK


def cmd_metrics(args):
    ref, sr_ref = wavio.read_wav(args.reference)
    test, sr_test = wavio.read_wav(args.test)
    if sr_ref != sr_test:
        raise UsageError("sample rate mismatch between files")
    diff = abs(ref.shape[1] - test.shape[1])
    if ref.shape[0] != test.shape[0] or diff > args.length_tolerance:
        raise UsageError(f"length mismatch beyond allowance: "
                         f"{ref.shape} vs {test.shape}")
    n = min(ref.shape[1], test.shape[1])
    skip = int(round(args.skip_ms * sr_ref / 1000.0))
    report = metrics.rmse_per_order(ref[:, :n], test[:, :n],
                                    skip_samples=skip)
    for order, db in enumerate(report.ratio_db):
        print(f"order {order}: {db:+.3f} dB")
    if report.excluded_channels:
        print(f"excluded silent channels: {report.excluded_channels}")
    if args.csv:
        metrics.write_metrics_csv(args.csv, report)
        plot_path = args.plot or str(Path(args.csv).with_suffix(".png"))
        plotting.plot_order_rmse(report, plot_path)
        print(f"report written: {args.csv}, {plot_path}")
    elif args.plot:
        plotting.plot_order_rmse(report, args.plot)
        print(f"figure written: {args.plot}")
    return EXIT_OK


def cmd_scene(args):
    try:
        spec = scenes.SceneSpec.from_file(args.spec)
    except (ValueError, TypeError, yaml.YAMLError) as exc:
        raise UsageError(f"bad scene spec: {exc}") from exc
    pcm = scenes.render_scene(spec, args.order)
    wavio.write_wav(args.output, pcm, 48000)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="hoac",
                                description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    enc = sub.add_parser("encode", help="encode a float HOA WAV")
    enc.add_argument("input")
    enc.add_argument("output")
    enc.add_argument("--tier", choices=sorted(codec.TIER_PRESETS))
    enc.add_argument("--order", type=int,
                     help="truncate input to this HOA order")
    enc.add_argument("--sectors", type=int,
                     help="transport channel count J")
    enc.add_argument("--coder", choices=transport.KINDS,
                     default=transport.KIND_PASSTHROUGH)
    enc.add_argument("--kbps", type=float,
                     help="per-channel accounting rate")
    enc.add_argument("--bits", type=int, default=16,
                     help="uniform coder quantizer depth")
    enc.add_argument("--coder-cmd", default="",
                     help="external coder command line")
    enc.add_argument("--band-table",
                     help="YAML/JSON file with edges_hz/downsample")
    enc.set_defaults(func=cmd_encode)

    dec = sub.add_parser("decode", help="decode a stream to WAV")
    dec.add_argument("input")
    dec.add_argument("output")
    dec.set_defaults(func=cmd_decode)

    info = sub.add_parser("info", help="print header and rate table")
    info.add_argument("input")
    info.add_argument("--machine", action="store_true",
                      help="JSON-lines output")
    info.set_defaults(func=cmd_info)

    met = sub.add_parser("metrics", help="per-order RMSE report")
    met.add_argument("reference")
    met.add_argument("test")
    met.add_argument("--csv", help="write CSV report here")
    met.add_argument("--plot", help="write figure here (default: next to "
                     "the CSV)")
    met.add_argument("--skip-ms", type=float, default=0.0,
                     help="leading interval to exclude")
    met.add_argument("--length-tolerance", type=int, default=0,
                     help="allowed sample-count mismatch")
    met.set_defaults(func=cmd_metrics)

    sc = sub.add_parser("scene", help="render a scene config to HOA WAV")
    sc.add_argument("spec")
    sc.add_argument("output")
    sc.add_argument("--order", type=int, default=5)
    sc.set_defaults(func=cmd_scene)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (EntropyDecodeError, CorruptStreamError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CORRUPT
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
