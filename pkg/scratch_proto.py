"""Prototype: margins for the robustness-gain and degradation criteria."""
import sys
import time

import numpy as np

from sidaug.augment import AugmentationSet, OperatorKind
from sidaug.corpus import CorpusConfig, generate_corpus, split_train_val
from sidaug.model import LossConfig, TrainConfig, train
from sidaug.scenarios import builtin_scenarios, evaluate_model

n_train = int(sys.argv[1]) if len(sys.argv) > 1 else 500
n_eval = int(sys.argv[2]) if len(sys.argv) > 2 else 250
epochs = int(sys.argv[3]) if len(sys.argv) > 3 else 25
seeds = [int(s) for s in sys.argv[4].split(",")] if len(sys.argv) > 4 else [1, 2, 3]

t0 = time.time()
cfg = CorpusConfig(n_train_per_class=n_train, n_eval_per_class=n_eval, seed=2024)
train_full, eval_sets = generate_corpus(cfg)
train_set, val_set = split_train_val(train_full)
print(f"corpus: {len(train_set)} train / {len(val_set)} val / {len(eval_sets)}x{len(eval_sets[0])} eval "
      f"({time.time()-t0:.1f}s)")

best_set = AugmentationSet.from_kinds(
    [OperatorKind.JpegCompress, OperatorKind.GaussianBlur, OperatorKind.ColorInvert]
)
baseline_set = AugmentationSet()
scen = {s.name: s for s in builtin_scenarios()}

for seed in seeds:
    for tag, aug in [("base", baseline_set), ("aug ", best_set)]:
        t0 = time.time()
        tc = TrainConfig(epochs=epochs, train_augmentations=aug, seed=seed)
        m, hist = train(train_set, val_set, tc, LossConfig())
        t_train = time.time() - t0
        t0 = time.time()
        maps = {}
        for name in ("clean", "jpeg", "blur", "noise", "combined", "resize"):
            maps[name] = evaluate_model(m, eval_sets, scen[name]).map
        t_eval = time.time() - t0
        row = " ".join(f"{k}={v:.3f}" for k, v in maps.items())
        print(f"seed={seed} {tag} ep={len(hist.epochs)}({hist.stop_reason[:5]}) "
              f"best_val={max(e.val_accuracy for e in hist.epochs):.3f} {row} "
              f"[train {t_train:.0f}s eval {t_eval:.0f}s]")
