"""Training CLI: stage A corpus registration, stage C head training/export."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import pgwt
from .training import (
    DivergenceError,
    StageOrderError,
    export_pgwt,
    load_corpus,
    prepare_stage_a,
    require_stage_a,
    train_crp_head,
)


def cmd_prepare(args) -> int:
    marker = prepare_stage_a(Path(args.features), Path(args.manifest), Path(args.out))
    print(json.dumps(marker, sort_keys=True))
    return 0


def cmd_train_crp(args) -> int:
    marker = require_stage_a(Path(args.stage_a) if args.stage_a else None)
    corpus = load_corpus(Path(marker["features"]), Path(marker["manifest"]))
    hidden = tuple(int(h) for h in args.hidden.split(",") if h)
    params, report = train_crp_head(
        corpus,
        hidden_dims=hidden,
        dropout_rate=args.dropout,
        seed=args.seed,
        epochs=args.epochs,
        learning_rate=args.lr,
        batch_size=args.batch_size,
        weight_decay=args.weight_decay,
    )
    export_pgwt(params, Path(args.out), half=args.f16)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(report.to_json_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")
    print(
        f"train_acc={report.train_accuracy:.4f} test_acc={report.test_accuracy:.4f} "
        f"loss={report.final_loss:.6f} -> {args.out}",
        file=sys.stderr,
    )
    print(json.dumps(report.to_json_dict(), sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modelforge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="register a feature corpus as the stage A artifact")
    p.add_argument("--features", required=True, help="features.pgwt dump")
    p.add_argument("--manifest", required=True, help="manifest.jsonl with crp labels")
    p.add_argument("--out", required=True, help="stage A marker JSON path")
    p.set_defaults(fn=cmd_prepare)

    p = sub.add_parser("train-crp", help="train the credential-page head (stage C)")
    p.add_argument("--stage-a", required=True, help="stage A marker from 'prepare'")
    p.add_argument("--out", required=True, help="PGWT export path")
    p.add_argument("--report", help="training report JSON path")
    p.add_argument("--hidden", default="32", help="comma-separated hidden widths")
    p.add_argument("--dropout", type=float, default=0.2)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--lr", type=float, default=2e-3)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--weight-decay", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--f16", action="store_true", help="narrow the export to half precision")
    p.set_defaults(fn=cmd_train_crp)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except (StageOrderError, DivergenceError, pgwt.PgwtError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
