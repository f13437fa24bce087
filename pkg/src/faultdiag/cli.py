"""Command-line front end.

Subcommands: simulate, spectrum, dataset, train, evaluate, diagnose, benchmark.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import dataset as dsmod
from . import pipeline
from .config import ConfigError, load_config
from .features import preprocess
from .metrics import render_table
from .sigsim import save_signal_csv
from .spectral import fft_magnitude, multitaper_psd, park_vector_spectrum, save_spectrum_csv

log = logging.getLogger("faultdiag")

CONDITIONS = ("healthy", "unbalance", "misalignment", "combined")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration (defaults fill missing fields)")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output directory (default from config: out)")
    common.add_argument("--model", choices=pipeline.MODEL_TITLES)
    common.add_argument("--criterion", choices=("gini", "entropy"))
    common.add_argument("--max-depth", type=int)
    common.add_argument("--k", type=int, help="neighbour count for ML-kNN")
    common.add_argument("--split", type=float, help="training fraction")
    common.add_argument("--drop-distances", action="store_true", default=None,
                        help="train without the three signature-distance features")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="faultdiag", description="Multi-label fault diagnosis pipeline")
    sub = p.add_subparsers(dest="command", required=True)

    for name in ("simulate", "spectrum"):
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("--condition", choices=CONDITIONS, default="healthy")
        sp.add_argument("--disturbed", action="store_true", help="inject random disturbance tones")
        sp.add_argument("--sample-id", type=int, default=0)
    sub.add_parser("dataset", parents=[common])
    sub.add_parser("train", parents=[common])
    sub.add_parser("evaluate", parents=[common])
    sp = sub.add_parser("diagnose", parents=[common])
    sp.add_argument("--condition", choices=CONDITIONS, default="healthy")
    sp.add_argument("--disturbed", action="store_true")
    sp.add_argument("--sample-id", type=int, default=0,
                    help="random stream id of the simulated observation")
    sp = sub.add_parser("benchmark", parents=[common])
    sp.add_argument("--k-max", type=int, default=10, help="ML-kNN tries k = 1..k-max")
    return p


def _config(args):
    cfg = load_config(args.config)
    return cfg.override(**{
        "seed": args.seed,
        "out": args.out,
        "split": args.split,
        "classifier.model": args.model,
        "classifier.criterion": args.criterion,
        "classifier.max_depth": args.max_depth,
        "classifier.knn_k": args.k,
        "classifier.drop_distances": args.drop_distances,
    })


def _outdir(cfg) -> Path:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _run_channels(cfg, args):
    scen = {s.name: s for s in cfg.scenarios()}[args.condition]
    return dsmod.simulate_run(cfg.setup(), scen, cfg.current_noise(), cfg.seed, args.sample_id, args.disturbed)


def cmd_simulate(cfg, args):
    out = _outdir(cfg)
    currents, vibrations = _run_channels(cfg, args)
    for sig in currents + vibrations:
        path = save_signal_csv(sig, out / f"{args.condition}_{sig.channel_id}.csv")
        print(path)


def cmd_spectrum(cfg, args):
    out = _outdir(cfg)
    setup = cfg.setup()
    currents, vibrations = _run_channels(cfg, args)
    for m, machine in enumerate(setup.machines):
        phases = currents[3 * m : 3 * m + 3]
        for sig in phases + [vibrations[m]]:
            supply = machine.supply_freq_hz if sig.units == "ampere" else None
            stem = f"{args.condition}_{sig.channel_id}"
            print(save_spectrum_csv(fft_magnitude(sig), out / f"{stem}_fft.csv"))
            psd = multitaper_psd(preprocess(sig, supply), setup.nw, setup.k)
            print(save_spectrum_csv(psd, out / f"{stem}_multitaper.csv"))
        print(save_spectrum_csv(park_vector_spectrum(*phases), out / f"{args.condition}_{machine.name}_park.csv"))


def cmd_dataset(cfg, args):
    out = _outdir(cfg)
    ds = pipeline.build(cfg)
    csv_path = dsmod.save_csv(ds, out / "dataset.csv")
    (out / "manifest.json").write_text(json.dumps(pipeline.manifest(cfg, csv_path), indent=2, sort_keys=True))
    print(f"{csv_path}: {len(ds)} samples, {len(ds.feature_names)} features")


def _load_dataset(cfg):
    return dsmod.load_csv(Path(cfg["out"]) / "dataset.csv")


def _bundle_path(cfg, name):
    return Path(cfg["out"]) / f"model_{name}.json"


def cmd_train(cfg, args):
    ds = _load_dataset(cfg)
    bundle = pipeline.fit(ds, cfg)
    manifest_path = Path(cfg["out"]) / "manifest.json"
    if manifest_path.exists():
        doc = json.loads(manifest_path.read_text())
        doc["scaler"] = bundle.scaler.to_dict()
        manifest_path.write_text(json.dumps(doc, indent=2, sort_keys=True))
    print(pipeline.save_bundle(bundle, _bundle_path(cfg, bundle.name)))


def cmd_evaluate(cfg, args):
    ds = _load_dataset(cfg)
    bundle = pipeline.load_bundle(_bundle_path(cfg, cfg.classifier["model"]))
    report = pipeline.evaluate(bundle, ds)
    path = Path(cfg["out"]) / f"report_{bundle.name}.json"
    path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    print(report.render())


def cmd_diagnose(cfg, args):
    bundle = pipeline.load_bundle(_bundle_path(cfg, cfg.classifier["model"]))
    res = pipeline.diagnose_observation(bundle, cfg, args.condition, args.sample_id, args.disturbed)
    print(json.dumps(res, sort_keys=True))
    print(
        f"{res['condition']} #{res['sample_id']}: isUnbalance={res['isUnbalance']} "
        f"isMisalignment={res['isMisalignment']} severity={res['severity']} "
        f"(vibration RMS {res['vib_rms_mm_s']:.3f} mm/s)"
    )


def cmd_benchmark(cfg, args):
    out = _outdir(cfg)
    reports = pipeline.run_benchmark(cfg, k_values=range(1, args.k_max + 1))
    (out / "benchmark.json").write_text(
        json.dumps({k: r.to_dict() for k, r in reports.items()}, indent=2, sort_keys=True)
    )
    print(render_table(reports.values()))


COMMANDS = {
    "simulate": cmd_simulate,
    "spectrum": cmd_spectrum,
    "dataset": cmd_dataset,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "diagnose": cmd_diagnose,
    "benchmark": cmd_benchmark,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = _config(args)
        COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
