"""Evaluation-time perturbation scenarios.

A Scenario is a fixed, ordered recipe of perturbation steps applied to
eval images. Noise steps derive their seed from (scenario salt, image
index, step position), so evaluation is deterministic and image-wise
independent no matter how the loop is scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import augment
from .errors import ParameterError
from .image import Image
from .metrics import MetricsReport, ScoredSet, accuracy, average_precision, mean_average_precision
from .rng import Rng, fnv1a64, mix64

STEP_OPS = ("JpegCompress", "GaussianBlur", "GaussianNoise", "Resize")


@dataclass(frozen=True)
class Step:
    op: str
    value: float

    def __post_init__(self):
        if self.op not in STEP_OPS:
            raise ParameterError(f"unknown scenario step op {self.op!r}; valid: {STEP_OPS}")
        if self.op == "JpegCompress" and not (1 <= int(self.value) <= 100 and self.value == int(self.value)):
            raise ParameterError(f"scenario jpeg qf must be an integer in [1, 100], got {self.value}")
        if self.op in ("GaussianBlur", "GaussianNoise") and self.value < 0:
            raise ParameterError(f"scenario {self.op} sigma must be >= 0, got {self.value}")
        if self.op == "Resize" and not (self.value >= 8 and self.value == int(self.value)):
            raise ParameterError(f"scenario resize target must be an integer >= 8, got {self.value}")

    def to_config(self) -> dict:
        key = {"JpegCompress": "qf", "GaussianBlur": "sigma", "GaussianNoise": "sigma", "Resize": "target"}[self.op]
        value = int(self.value) if self.op in ("JpegCompress", "Resize") else self.value
        return {"op": self.op, key: value}


@dataclass(frozen=True)
class Scenario:
    """Named deterministic perturbation recipe; empty steps = unperturbed."""

    name: str
    steps: tuple[Step, ...] = ()
    seed_salt: int = field(default=-1)

    def __post_init__(self):
        if not self.name:
            raise ParameterError("scenario name must be nonempty")
        if self.seed_salt == -1:
            object.__setattr__(self, "seed_salt", fnv1a64(self.name))
        object.__setattr__(self, "steps", tuple(self.steps))

    def to_config(self) -> dict:
        return {
            "name": self.name,
            "steps": [s.to_config() for s in self.steps],
            "seed_salt": int(self.seed_salt),
        }


def builtin_scenarios() -> list[Scenario]:
    """The six standard evaluation conditions.

    Fixed mid-range magnitudes; `combined` chains blur -> noise -> jpeg,
    modeling capture-then-upload, and `resize` maps onto the large
    resize target (the hardest condition for the studied detectors).
    """
    return [
        Scenario("clean"),
        Scenario("jpeg", (Step("JpegCompress", 65),)),
        Scenario("blur", (Step("GaussianBlur", 1.0),)),
        Scenario("noise", (Step("GaussianNoise", 1.0),)),
        Scenario(
            "combined",
            (Step("GaussianBlur", 1.0), Step("GaussianNoise", 1.0), Step("JpegCompress", 65)),
        ),
        Scenario("resize", (Step("Resize", 64),)),
    ]


def builtin_scenario(name: str) -> Scenario:
    for s in builtin_scenarios():
        if s.name == name:
            return s
    raise ParameterError(f"no builtin scenario named {name!r}")


def apply_scenario(scenario: Scenario, image: Image, image_index: int) -> Image:
    """Apply the recipe's steps in order with index-derived noise seeds."""
    out = image
    for pos, step in enumerate(scenario.steps):
        if step.op == "JpegCompress":
            out = augment.jpeg_compress(out, int(step.value))
        elif step.op == "GaussianBlur":
            out = augment.gaussian_blur(out, step.value)
        elif step.op == "GaussianNoise":
            rng = Rng(mix64(scenario.seed_salt ^ mix64(image_index))).split(("step", pos))
            out = augment.gaussian_noise(out, step.value, rng)
        elif step.op == "Resize":
            out = augment.resize(out, int(step.value))
    return out


def scenario_from_config(block: dict) -> Scenario:
    if not isinstance(block, dict):
        raise ParameterError("scenario entry must be a mapping")
    unknown = set(block) - {"name", "steps", "seed_salt"}
    if unknown:
        raise ParameterError(f"unknown scenario keys: {sorted(unknown)}")
    if "name" not in block:
        raise ParameterError("scenario entry needs a name")
    steps = []
    for raw in block.get("steps", []) or []:
        if not isinstance(raw, dict) or "op" not in raw:
            raise ParameterError(f"scenario step must be a mapping with an 'op': {raw!r}")
        op = raw["op"]
        extra = set(raw) - {"op", "qf", "sigma", "target"}
        if extra:
            raise ParameterError(f"unknown scenario step keys: {sorted(extra)}")
        if op == "JpegCompress":
            value = raw.get("qf")
        elif op in ("GaussianBlur", "GaussianNoise"):
            value = raw.get("sigma")
        elif op == "Resize":
            value = raw.get("target")
        else:
            raise ParameterError(f"unknown scenario step op {op!r}")
        if value is None:
            raise ParameterError(f"scenario step {op} is missing its parameter")
        steps.append(Step(op, float(value)))
    salt = block.get("seed_salt", -1)
    return Scenario(block["name"], tuple(steps), int(salt))


def score_dataset(model, dataset, scenario: Scenario) -> np.ndarray:
    """Sigmoid probabilities for every (perturbed) image of one dataset."""
    probs = np.empty(len(dataset.images))
    for idx, img in enumerate(dataset.images):
        perturbed = apply_scenario(scenario, img, idx)
        _, logit = model.forward(perturbed)
        probs[idx] = 1.0 / (1.0 + np.exp(-logit))
    return probs


def evaluate_model(model, eval_sets, scenario: Scenario) -> MetricsReport:
    """Score every dataset under one scenario and assemble the report."""
    per_ap: dict[str, float] = {}
    per_acc: dict[str, float] = {}
    for ds in eval_sets:
        probs = score_dataset(model, ds, scenario)
        scored = ScoredSet(scores=probs, labels=np.asarray(ds.labels), dataset_name=ds.name)
        per_ap[ds.name] = average_precision(scored)
        per_acc[ds.name] = accuracy(scored)
    return MetricsReport(
        scenario_name=scenario.name,
        per_dataset_ap=per_ap,
        accuracy_per_dataset=per_acc,
        map=mean_average_precision(list(per_ap.values())),
    )


def feature_shift(model, eval_sets, scenario: Scenario, kind: str) -> float:
    """Mean feature-space loss between original and perturbed eval images."""
    from .model import feature_loss

    total = 0.0
    count = 0
    for ds in eval_sets:
        for idx, img in enumerate(ds.images):
            f_orig, _ = model.forward(img)
            f_pert, _ = model.forward(apply_scenario(scenario, img, idx))
            total += feature_loss(f_orig, f_pert, kind)
            count += 1
    return total / count
