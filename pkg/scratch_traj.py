"""Trace eval-mAP trajectories over epochs for baseline vs augmented training."""
import sys
import time

import numpy as np

from sidaug.augment import AugmentationSet, OperatorKind, apply_pipeline
from sidaug.corpus import CorpusConfig, generate_corpus, split_train_val
from sidaug.model import Adam, LossConfig, Model, TrainConfig, backward, learning_rate
from sidaug.rng import Rng
from sidaug.scenarios import builtin_scenario, evaluate_model

n_train = int(sys.argv[1]) if len(sys.argv) > 1 else 1000
epochs = int(sys.argv[2]) if len(sys.argv) > 2 else 30
seed = int(sys.argv[3]) if len(sys.argv) > 3 else 1
every = int(sys.argv[4]) if len(sys.argv) > 4 else 3

cfg = CorpusConfig(n_train_per_class=n_train, n_eval_per_class=200, seed=2024)
train_full, eval_sets = generate_corpus(cfg)
train_set, val_set = split_train_val(train_full)
clean = builtin_scenario("clean")
combined = builtin_scenario("combined")

best_set = AugmentationSet.from_kinds(
    [OperatorKind.JpegCompress, OperatorKind.GaussianBlur, OperatorKind.ColorInvert]
)

for tag, aug in [("base", AugmentationSet()), ("aug ", best_set)]:
    tc = TrainConfig(epochs=epochs, train_augmentations=aug, seed=seed)
    loss_cfg = LossConfig()
    rng = Rng(tc.seed)
    model = Model.init(rng.split("init"))
    opt = Adam(tc)
    labels = np.asarray(train_set.labels, dtype=np.float64)
    n = len(train_set.images)
    x_val = np.stack([model.preprocess(img) for img in val_set.images])
    y_val = np.asarray(val_set.labels)
    t0 = time.time()
    for epoch in range(epochs):
        lr = learning_rate(tc, epoch)
        order = rng.split(("shuffle", epoch)).shuffled_indices(n)
        for start in range(0, n, tc.batch_size):
            batch = order[start:start + tc.batch_size]
            imgs = [apply_pipeline(aug, train_set.images[j], rng.split(("aug", epoch, j))) for j in batch]
            grads, _ = backward(model, imgs, labels[batch], loss_cfg, rng.split(("ft", epoch, start)))
            opt.step(model, grads, lr)
        if epoch % every == every - 1 or epoch == 0:
            _, logits = model._forward_batch(x_val)
            vacc = float(((logits > 0).astype(int) == y_val).mean())
            mc = evaluate_model(model, eval_sets, clean).map
            mb = evaluate_model(model, eval_sets, combined).map
            print(f"{tag} ep {epoch:2d} lr {lr:g} val {vacc:.3f} clean {mc:.3f} combined {mb:.3f} "
                  f"({time.time()-t0:.0f}s)", flush=True)
