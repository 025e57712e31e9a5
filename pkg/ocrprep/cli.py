"""
Command-line interface

    ocrprep generate-data      render the synthetic train/val/test splits
    ocrprep pretrain-approx    CTC-pretrain the approximator on raw crops
    ocrprep pretrain-identity  pretrain the preprocessor to reproduce its input
    ocrprep train-nn           train the preprocessor through the approximator
    ocrprep train-sfe          train the preprocessor with the mirrored SFE
    ocrprep evaluate           baseline or preprocessed recognition metrics
    ocrprep compare            pair a baseline report with a treated report
    ocrprep cross-eval         preprocessor trained with one engine, tested with another
    ocrprep export-images      side-by-side input/output PNGs
    ocrprep rerun              repeat a command from its run manifest

Every command accepts --config FILE and repeatable --set section.key=value
overrides. Training and evaluation commands write run_manifest.json into their
output directory (<out_dir>/<command> unless --out is given).

Exit status: 0 success, 1 runtime failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Optional, Sequence

from .config import RunConfig, dump_config, load_config, validate_config
from .data.dataset import generate_dataset, load_dataset, split_manifest
from .data.glyphs import get_atlas
from .data.render import Sample
from .errors import ConfigError, OcrPrepError
from .eval.evaluate import cross_engine_eval, evaluate, export_images
from .eval.report import MetricsReport, before_after_table, compare, cross_engine_table, report_table
from .kernel import file_sha256
from .losses.vocab import UNKNOWN_CHAR, CharVocab
from .models.approximator import ApproximatorNet
from .models.io import load_model, save_model
from .models.preprocessor import PreprocessorNet
from .recognizers.factory import ENGINES, build_recognizer
from .training.manifest import RunManifest
from .training.metric_log import MetricLog
from .training.nn_approx import train_nn_approx
from .training.pretrain import pretrain_approximator, pretrain_preprocessor_identity
from .training.sfe import train_sfe

logger = logging.getLogger(__name__)

MANIFEST_NAME = "run_manifest.json"
# Flags folded into the config snapshot; a rerun replays the rest of the command line.
CONFIG_FLAGS = ("--config", "--set", "--out")


class Run:
    """Parsed arguments, validated config and the output directory of one command"""

    def __init__(self, args: argparse.Namespace, cfg: RunConfig, argv: Sequence[str]):
        self.args = args
        self.cfg = cfg
        self.argv = list(argv)
        self.out_dir = Path(cfg.out_dir) / args.command
        self.checkpoints: dict[str, str] = {}
        self.outputs: dict[str, str] = {}

    @property
    def progress(self) -> bool:
        return self.cfg.progress and not self.args.no_progress

    def path(self, name: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self.out_dir / name

    def record_input(self, path: Path) -> None:
        self.checkpoints[str(path)] = file_sha256(path)

    def record_output(self, path: Path, digest: str = "") -> None:
        self.outputs[str(path)] = digest or file_sha256(path)

    def write_manifest(self) -> Path:
        cfg = self.cfg
        manifest = RunManifest(
            command=replay_argv(self.argv),
            config=cfg.snapshot(),
            seeds={
                "data": cfg.data.seed,
                "model": cfg.model.seed,
                "pretrain": cfg.pretrain.seed,
                "nn": cfg.nn.seed,
                "sfe": cfg.sfe.seed,
            },
            checkpoints=self.checkpoints,
            outputs=self.outputs,
        )
        path = manifest.save(self.path(MANIFEST_NAME))
        dump_config(cfg, self.path("config.yaml"))
        logger.info("Wrote run manifest %s", path)
        return path


def replay_argv(argv: Sequence[str]) -> list[str]:
    """argv without config flags and their values"""
    out: list[str] = []
    skip = False
    for arg in argv:
        if skip:
            skip = False
            continue
        name = arg.split("=", 1)[0]
        if name in CONFIG_FLAGS:
            skip = "=" not in arg
            continue
        out.append(arg)
    return out


# ============================================================================
# Shared helpers
# ============================================================================

def load_split(cfg: RunConfig, split: str) -> list[Sample]:
    samples = load_dataset(split_manifest(cfg.data.root, split))
    logger.info("Loaded %d %s samples from %s", len(samples), split, cfg.data.root)
    return samples


def dataset_id(cfg: RunConfig, split: str) -> str:
    return f"{Path(cfg.data.root).name}/{split}"


def approximator_vocab(cfg: RunConfig) -> CharVocab:
    return CharVocab.from_chars(cfg.data.charset, UNKNOWN_CHAR if cfg.model.unknown_char else None)


def new_preprocessor(cfg: RunConfig) -> PreprocessorNet:
    return PreprocessorNet(widths=cfg.model.pre_widths, seed=cfg.model.seed)


def new_approximator(cfg: RunConfig) -> ApproximatorNet:
    return ApproximatorNet(
        vocab=approximator_vocab(cfg),
        widths=cfg.model.approx_widths,
        hidden=cfg.model.hidden,
        bidirectional=cfg.model.bidirectional,
        seed=cfg.model.seed,
    )


def load_preprocessor(run: Run, path: str) -> PreprocessorNet:
    net = load_model(path, expect=PreprocessorNet.kind)
    run.record_input(Path(path))
    return net  # type: ignore[return-value]


def load_approximator(run: Run, path: str) -> ApproximatorNet:
    net = load_model(path, expect=ApproximatorNet.kind)
    run.record_input(Path(path))
    return net  # type: ignore[return-value]


def save(run: Run, net: PreprocessorNet | ApproximatorNet, name: str) -> Path:
    path = run.path(name)
    run.record_output(path, save_model(net, path))
    return path


def identity_pretrained(run: Run, train: list[Sample], val: list[Sample]) -> PreprocessorNet:
    net = new_preprocessor(run.cfg)
    log = MetricLog(run.path("pretrain_identity_metrics.tsv"))
    pretrain_preprocessor_identity(net, train, run.cfg.pretrain, val, log, run.progress)
    save(run, net, "preprocessor_identity.ckpt")
    return net


def write_report(run: Run, report: MetricsReport, name: str = "report.tsv") -> None:
    path = report.save(run.path(name))
    run.record_output(path)
    print(report_table([report]))


# ============================================================================
# Commands
# ============================================================================

def cmd_generate_data(run: Run) -> int:
    cfg = run.cfg
    manifests = generate_dataset(
        cfg.data.root,
        counts=cfg.data.counts(),
        deg=cfg.degradation,
        seed=cfg.data.seed,
        charset=cfg.data.charset,
        atlas=get_atlas(cfg.data.atlas),
        word_list=run.args.word_list or cfg.data.word_list,
        workers=cfg.data.workers,
        progress=run.progress,
    )
    for split, manifest in manifests.items():
        run.record_output(manifest.path)
        print(f"✓ {split}: {len(manifest.entries)} samples → {manifest.path}")
    run.write_manifest()
    return 0


def cmd_pretrain_approx(run: Run) -> int:
    train, val = load_split(run.cfg, "train"), load_split(run.cfg, "val")
    net = new_approximator(run.cfg)
    log = MetricLog(run.path("metrics.tsv"))
    pretrain_approximator(net, train, run.cfg.pretrain, val, log, run.progress)
    save(run, net, "approximator.ckpt")
    run.write_manifest()
    return 0


def cmd_pretrain_identity(run: Run) -> int:
    train, val = load_split(run.cfg, "train"), load_split(run.cfg, "val")
    identity_pretrained(run, train, val)
    run.write_manifest()
    return 0


def cmd_train_nn(run: Run) -> int:
    cfg, args = run.cfg, run.args
    train, val = load_split(cfg, "train"), load_split(cfg, "val")
    recognizer = build_recognizer(cfg.recognizer)

    if args.preprocessor:
        preprocessor = load_preprocessor(run, args.preprocessor)
    else:
        logger.info("No preprocessor checkpoint given; identity-pretraining a fresh one")
        preprocessor = identity_pretrained(run, train, val)
    if args.approximator:
        approximator = load_approximator(run, args.approximator)
    else:
        logger.info("No approximator checkpoint given; CTC-pretraining a fresh one")
        approximator = new_approximator(cfg)
        pretrain_approximator(
            approximator, train, cfg.pretrain, val, MetricLog(run.path("pretrain_approx_metrics.tsv")), run.progress
        )
        save(run, approximator, "approximator_pretrained.ckpt")

    metrics = run.path("metrics.tsv")
    log = MetricLog(metrics)
    result = train_nn_approx(preprocessor, approximator, train, cfg.nn, recognizer, val, log, run.progress)
    save(run, result.preprocessor, "preprocessor.ckpt")
    if result.approximator is not None:
        save(run, result.approximator, "approximator.ckpt")
    run.record_output(metrics)
    run.write_manifest()
    return 0


def cmd_train_sfe(run: Run) -> int:
    cfg, args = run.cfg, run.args
    train, val = load_split(cfg, "train"), load_split(cfg, "val")
    recognizer = build_recognizer(cfg.recognizer)
    if args.preprocessor:
        preprocessor = load_preprocessor(run, args.preprocessor)
    else:
        logger.info("No preprocessor checkpoint given; identity-pretraining a fresh one")
        preprocessor = identity_pretrained(run, train, val)

    metrics = run.path("metrics.tsv")
    log = MetricLog(metrics)
    result = train_sfe(preprocessor, train, cfg.sfe, recognizer, val, log, run.progress)
    save(run, result.preprocessor, "preprocessor.ckpt")
    run.record_output(metrics)
    run.write_manifest()
    return 0


def cmd_evaluate(run: Run) -> int:
    cfg, args = run.cfg, run.args
    split = args.split or cfg.eval.split
    samples = load_split(cfg, split)
    recognizer = build_recognizer(cfg.recognizer, args.engine or "")
    preprocessor = load_preprocessor(run, args.preprocessor) if args.preprocessor else None
    report = evaluate(
        recognizer, preprocessor, samples,
        dataset_id=dataset_id(cfg, split),
        preprocessor_id=args.preprocessor or None,
        progress=run.progress,
    )
    write_report(run, report)
    run.write_manifest()
    return 0


def cmd_cross_eval(run: Run) -> int:
    cfg, args = run.cfg, run.args
    split = args.split or cfg.eval.split
    samples = load_split(cfg, split)
    recognizer = build_recognizer(cfg.recognizer, args.engine)
    preprocessor = load_preprocessor(run, args.preprocessor)
    report = cross_engine_eval(
        preprocessor, args.trained_with, recognizer, samples,
        dataset_id=dataset_id(cfg, split),
        preprocessor_id=args.preprocessor,
        progress=run.progress,
    )
    report.save(run.path("report.tsv"))
    run.record_output(run.path("report.tsv"))
    baselines = {}
    if args.baseline:
        base = MetricsReport.load(args.baseline)
        baselines[base.recognizer_id] = base
    print(cross_engine_table([report], baselines))
    run.write_manifest()
    return 0


def cmd_compare(run: Run) -> int:
    paired = compare(MetricsReport.load(run.args.baseline), MetricsReport.load(run.args.treated))
    path = run.path("compare.tsv")
    path.write_text(paired.to_tsv(), encoding="utf-8")
    print(before_after_table([paired]))
    return 0


def cmd_export_images(run: Run) -> int:
    cfg, args = run.cfg, run.args
    samples = load_split(cfg, args.split or cfg.eval.split)
    preprocessor = load_preprocessor(run, args.preprocessor)
    count = args.count or cfg.eval.export_count
    for path in export_images(preprocessor, samples, run.path("images"), count):
        run.record_output(path)
    print(f"✓ {count} image pairs → {run.out_dir / 'images'}")
    run.write_manifest()
    return 0


COMMANDS: dict[str, Callable[[Run], int]] = {
    "generate-data": cmd_generate_data,
    "pretrain-approx": cmd_pretrain_approx,
    "pretrain-identity": cmd_pretrain_identity,
    "train-nn": cmd_train_nn,
    "train-sfe": cmd_train_sfe,
    "evaluate": cmd_evaluate,
    "compare": cmd_compare,
    "cross-eval": cmd_cross_eval,
    "export-images": cmd_export_images,
}


# ============================================================================
# Parser and entry point
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run configuration")
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override one config value (repeatable)")
    common.add_argument("--out", help="output root (overrides out_dir)")
    common.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    common.add_argument("--no-progress", action="store_true", help="disable progress bars")

    parser = argparse.ArgumentParser(
        prog="ocrprep",
        description="Train image preprocessors for unknown-box OCR engines",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate-data", parents=[common], help="render the synthetic dataset")
    p.add_argument("--word-list", help="draw words from this file instead of random strings")

    sub.add_parser("pretrain-approx", parents=[common], help="CTC-pretrain the approximator")
    sub.add_parser("pretrain-identity", parents=[common], help="identity-pretrain the preprocessor")

    p = sub.add_parser("train-nn", parents=[common], help="train through the approximator")
    p.add_argument("--preprocessor", help="identity-pretrained preprocessor checkpoint")
    p.add_argument("--approximator", help="pretrained approximator checkpoint")

    p = sub.add_parser("train-sfe", parents=[common], help="train with the mirrored SFE")
    p.add_argument("--preprocessor", help="identity-pretrained preprocessor checkpoint")

    p = sub.add_parser("evaluate", parents=[common], help="recognition metrics")
    p.add_argument("--preprocessor", help="preprocessor checkpoint (omit for the baseline)")
    p.add_argument("--engine", choices=ENGINES, help="recognizer engine (default: recognizer.engine)")
    p.add_argument("--split", choices=["train", "val", "test"])

    p = sub.add_parser("compare", parents=[common], help="baseline vs treated reports")
    p.add_argument("baseline", help="baseline report.tsv")
    p.add_argument("treated", help="treated report.tsv")

    p = sub.add_parser("cross-eval", parents=[common], help="train with one engine, test with another")
    p.add_argument("--preprocessor", required=True)
    p.add_argument("--trained-with", required=True, help="engine the preprocessor was trained with")
    p.add_argument("--engine", required=True, choices=ENGINES, help="engine to test with")
    p.add_argument("--baseline", help="test engine's baseline report.tsv")
    p.add_argument("--split", choices=["train", "val", "test"])

    p = sub.add_parser("export-images", parents=[common], help="input/output image pairs")
    p.add_argument("--preprocessor", required=True)
    p.add_argument("--count", type=int, help="number of pairs (default: eval.export_count)")
    p.add_argument("--split", choices=["train", "val", "test"])

    p = sub.add_parser(
        "rerun", parents=[common],
        help="repeat a command from its run manifest (writes to <out_dir>/rerun unless --out is given)",
    )
    p.add_argument("manifest", help="run_manifest.json")

    return parser


def configure_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        datefmt="%H:%M:%S",
    )


def resolve(args: argparse.Namespace, argv: Sequence[str]) -> Run:
    """Build the Run for parsed args; rerun swaps in the recorded command and config"""
    if args.command != "rerun":
        cfg = load_config(args.config, args.set)
        if args.out:
            cfg = cfg.model_copy(update={"out_dir": args.out})
        return Run(args, cfg, argv)

    manifest = RunManifest.load(args.manifest)
    recorded = build_parser().parse_args(manifest.command)
    cfg = validate_config(manifest.config)
    # Without --out the replay lands beside the recorded run, never on top of it.
    out_dir = args.out or str(Path(cfg.out_dir) / "rerun")
    cfg = cfg.model_copy(update={"out_dir": out_dir})
    recorded.no_progress = recorded.no_progress or args.no_progress
    logger.info("Rerunning %s from %s", " ".join(manifest.command), args.manifest)
    return Run(recorded, cfg, manifest.command)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    configure_logging(args.log_level)

    try:
        run = resolve(args, argv)
    except ConfigError as e:
        print(f"ocrprep: configuration error: {e}", file=sys.stderr)
        return 2
    except (OSError, ValueError, TypeError, KeyError) as e:
        print(f"ocrprep: cannot read run manifest: {e}", file=sys.stderr)
        return 2

    try:
        return COMMANDS[run.args.command](run)
    except (OcrPrepError, OSError, ValueError) as e:
        logger.debug("Command failed", exc_info=True)
        print(f"ocrprep {run.args.command}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
