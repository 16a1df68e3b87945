"""Command line entry point: train, eval, zero-shot and bench."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import RunConfig
from .errors import ConfigurationError, DataLoadError, DivergenceError, SplitError
from .evaluation import predict, report_for
from .experiments import ABLATION_HORIZONS, run_ablation, run_zero_shot
from .model import attach_ids, featurize
from .outputs import emit_outputs
from .training import load_checkpoint, load_split, save_checkpoint, train


def _default_out(cfg: RunConfig, tag: str = "") -> Path:
    return Path("runs") / f"{cfg.dataset}{tag}-{cfg.config_hash()}"


def cmd_train(args) -> int:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    if args.ablation:
        cfg = cfg.with_ablations(args.ablation.split(","))
    if args.few_shot is not None:
        cfg = cfg.replace(few_shot=args.few_shot)
        cfg.validate()
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    out = Path(args.out) if args.out else _default_out(cfg)
    run = train(cfg, verbose=not args.quiet)
    ckpt = save_checkpoint(run, out / "checkpoint.npz")
    prepared = run.prepared
    fc = predict(run.model, prepared.split.test, prepared.features["test"], cfg.eval_batch_size)
    report = report_for(fc, prepared.spec.name)
    emit_outputs(out, cfg, report, fc, plot=not args.no_plot,
                 extra={"dataset": prepared.spec.name, "train_log": run.log.to_dict(),
                        "provider_fingerprint": run.model.provider.fingerprint()})
    print(report.as_text())
    print(f"checkpoint: {ckpt}")
    return 0


def cmd_eval(args) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    cfg = ckpt.config
    spec, split = load_split(cfg, args.dataset)
    books = ckpt.codebooks if spec.name == ckpt.dataset.get("name") else None
    if books is None:
        report = run_zero_shot(ckpt, args.dataset, cfg.eval_batch_size)
        fc = None
    else:
        feats = attach_ids(featurize(split.test, spec.description, books, None), ckpt.provider)
        fc = predict(ckpt.model, split.test, feats, cfg.eval_batch_size)
        report = report_for(fc, spec.name)
    out = Path(args.out) if args.out else Path(args.checkpoint).parent / f"eval-{spec.name}"
    emit_outputs(out, cfg, report, fc, plot=not args.no_plot, extra={"dataset": spec.name})
    print(report.as_text())
    return 0


def cmd_zero_shot(args) -> int:
    ckpt = load_checkpoint(args.source)
    report = run_zero_shot(ckpt, args.target, ckpt.config.eval_batch_size)
    out = Path(args.out) if args.out else Path(args.source).parent / f"zero-shot-{args.target}"
    emit_outputs(out, ckpt.config, report, extra={"source": ckpt.dataset.get("name"), "target": args.target})
    print(report.as_text())
    return 0


def cmd_bench(args) -> int:
    if args.suite != "table6":
        raise ConfigurationError(f"unknown suite {args.suite!r}; available: table6")
    cfg = RunConfig.load(args.config) if args.config else RunConfig(synthetic_rows=8000, d_model=64, max_epochs=5)
    horizons = [int(h) for h in args.horizons.split(",")] if args.horizons else ABLATION_HORIZONS
    report = run_ablation(cfg, horizons, verbose=not args.quiet)
    out = Path(args.out) if args.out else _default_out(cfg, "-table6")
    out.mkdir(parents=True, exist_ok=True)
    report.to_csv(out / "ablation.csv")
    (out / "ablation.txt").write_text(report.as_text() + "\n")
    print(report.as_text())
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tristat", description="Tri-modal forecasting experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train one model and evaluate it on the test split")
    t.add_argument("--config", help="key=value config file (defaults apply when omitted)")
    t.add_argument("--ablation", help="comma list of no_trl,no_srl,no_vat,no_adf")
    t.add_argument("--few-shot", type=float, dest="few_shot", help="fraction of the training prefix to keep")
    t.add_argument("--seed", type=int)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="evaluate a checkpoint on a dataset's test split")
    e.add_argument("--checkpoint", required=True)
    e.add_argument("--dataset", required=True)
    e.set_defaults(func=cmd_eval)

    z = sub.add_parser("zero-shot", help="evaluate a checkpoint on an unseen dataset")
    z.add_argument("--source", required=True, help="source checkpoint")
    z.add_argument("--target", required=True, help="target dataset name")
    z.set_defaults(func=cmd_zero_shot)

    b = sub.add_parser("bench", help="run a benchmark suite")
    b.add_argument("--suite", required=True)
    b.add_argument("--config")
    b.add_argument("--horizons", help="comma list, default 96,192,336,720")
    b.set_defaults(func=cmd_bench)

    for s in (t, e, z, b):
        s.add_argument("--out", help="output directory")
        s.add_argument("--quiet", action="store_true")
        s.add_argument("--no-plot", action="store_true", dest="no_plot")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, DataLoadError, SplitError, DivergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
