#!/usr/bin/env python3
"""
End-to-end desk-scale experiments

  1. generate the dataset and pretrain both networks once
  2. per template engine: baseline, surrogate-trained preprocessor, evaluation
  3. SFE-trained preprocessor for the first engine at the same recognizer-call budget
  4. cross-engine evaluation (trained with one engine, tested with the other)

Prints the before/after, NN-vs-SFE and cross-engine tables and checks the
expected orderings. Every step goes through `ocrprep` commands, so each
output directory carries its own run manifest. Expect hours on a CPU.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from ocrprep.cli import main as ocrprep
from ocrprep.config import load_config
from ocrprep.eval import MetricsReport, before_after_table, compare, cross_engine_table, nn_vs_sfe_table

ENGINES = ("template-a", "template-b")


def step(*argv):
    print(f"\n$ ocrprep {' '.join(argv)}")
    status = ocrprep(list(argv))
    if status != 0:
        raise SystemExit(f"✗ ocrprep {argv[0]} failed with exit status {status}")


def run_experiments(config_path, out_root, skip_data=False, epochs=None):
    overrides = [f"nn.epochs={epochs}", f"pretrain.approx_epochs={epochs}"] if epochs is not None else []
    common = ["--config", config_path, "--no-progress"]
    for override in overrides:
        common += ["--set", override]
    cfg = load_config(config_path, overrides)
    out = Path(out_root)

    if not skip_data:
        step("generate-data", *common)
    step("pretrain-identity", *common, "--out", str(out / "shared"))
    step("pretrain-approx", *common, "--out", str(out / "shared"))
    identity = out / "shared" / "pretrain-identity" / "preprocessor_identity.ckpt"
    approximator = out / "shared" / "pretrain-approx" / "approximator.ckpt"

    baselines, treated, trained = {}, {}, {}
    for engine in ENGINES:
        engine_set = ["--set", f"recognizer.engine={engine}"]
        step("evaluate", *common, *engine_set, "--out", str(out / engine / "baseline"))
        step("train-nn", *common, *engine_set, "--out", str(out / engine),
             "--preprocessor", str(identity), "--approximator", str(approximator))
        trained[engine] = out / engine / "train-nn" / "preprocessor.ckpt"
        step("evaluate", *common, *engine_set, "--out", str(out / engine / "nn"), "--preprocessor", str(trained[engine]))
        baselines[engine] = MetricsReport.load(out / engine / "baseline" / "evaluate" / "report.tsv")
        treated[engine] = MetricsReport.load(out / engine / "nn" / "evaluate" / "report.tsv")

    # Equal recognizer calls: S per image per NN epoch vs 2n per image per SFE epoch
    first = ENGINES[0]
    nn_calls = cfg.nn.S * cfg.nn.epochs
    sfe_epochs = max(1, nn_calls // (2 * cfg.sfe.n))
    step("train-sfe", *common, "--set", f"recognizer.engine={first}", "--set", f"sfe.epochs={sfe_epochs}",
         "--out", str(out / first), "--preprocessor", str(identity))
    step("evaluate", *common, "--set", f"recognizer.engine={first}", "--out", str(out / first / "sfe"),
         "--preprocessor", str(out / first / "train-sfe" / "preprocessor.ckpt"))
    sfe = MetricsReport.load(out / first / "sfe" / "evaluate" / "report.tsv")

    cross = []
    for trained_with, tested_with in (ENGINES, ENGINES[::-1]):
        step("cross-eval", *common, "--out", str(out / f"{trained_with}_on_{tested_with}"),
             "--preprocessor", str(trained[trained_with]), "--trained-with", trained_with, "--engine", tested_with)
        cross.append(MetricsReport.load(out / f"{trained_with}_on_{tested_with}" / "cross-eval" / "report.tsv"))

    pairs = [compare(baselines[e], treated[e]) for e in ENGINES]
    print()
    print(before_after_table(pairs))
    print()
    print(nn_vs_sfe_table([(baselines[first], treated[first], sfe)]))
    print()
    print(cross_engine_table(cross, baselines))

    print("\nExpected orderings")
    checks = [
        (f"{first}: NN gain >= 15 points", pairs[0].gain >= 15.0),
        (f"{first}: CER reduced", pairs[0].cer_reduction > 0),
        (f"{first}: NN accuracy >= SFE accuracy", treated[first].word_accuracy >= sfe.word_accuracy),
    ]
    for report in cross:
        engine = report.recognizer_id
        own = treated[engine].word_accuracy
        base = baselines[engine].word_accuracy
        checks.append((
            f"trained with {report.trained_with}, tested with {engine}: baseline < accuracy < own-trained",
            base < report.word_accuracy < own,
        ))
    for label, ok in checks:
        print(f"  {'✓' if ok else '✗'} {label}")
    return all(ok for _, ok in checks)


if __name__ == "__main__":
    import argparse

    parser = argparse.ArgumentParser(description="Desk-scale before/after, NN-vs-SFE and cross-engine runs")
    parser.add_argument("--config", default="configs/desk.yaml")
    parser.add_argument("--out", default="runs/desk-experiments")
    parser.add_argument("--skip-data", action="store_true", help="reuse an existing dataset")
    parser.add_argument("--epochs", type=int, help="override training epochs (smoke runs)")

    args = parser.parse_args()
    sys.exit(0 if run_experiments(args.config, args.out, args.skip_data, args.epochs) else 1)
