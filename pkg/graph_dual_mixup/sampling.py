"""
Difficulty-aware pair sampling.

A classifier pre-trained on the original graphs tags every graph as low or
high difficulty, either by prediction correctness ("acc") or by prediction
entropy against the median ("unc"). Generation then draws three equal-size
subsets of pairs: (low, low), (low, high) and (high, high). Every generated
graph carries the provenance needed to replay it bitwise.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict

from .classifier import ClassifierModel, forward
from .errors import ContractViolation
from .graphs import Graph, GraphDataset
from .gsae import GsaeModel
from .mixup import MixupConfig, dual_mixup, sample_lambda
from .seeding import derive_seed

logger = logging.getLogger(__name__)

DifficultyPolicy = Literal["acc", "unc"]
DifficultyLevel = Literal["low", "high"]
SubsetName = Literal["low", "medium", "high", "random"]

BALANCED_SUBSETS: tuple[SubsetName, ...] = ("low", "medium", "high")
SUBSET_RECIPES: dict[str, tuple[DifficultyLevel, DifficultyLevel]] = {
    "low": ("low", "low"),
    "medium": ("low", "high"),
    "high": ("high", "high"),
}
_SUBSET_KEYS = {"low": 0, "medium": 1, "high": 2, "random": 3}


@dataclass(frozen=True)
class DifficultyTag:
    """Difficulty of one graph: score is 0/1 correctness for "acc", entropy for "unc"."""

    index: int
    level: DifficultyLevel
    policy: DifficultyPolicy
    score: float


def prediction_entropy(probs: NDArray[np.float64]) -> float:
    """Shannon entropy in nats, with 0·ln 0 taken as 0."""
    p = np.asarray(probs, dtype=np.float64)
    nonzero = p[p > 0]
    return float(-(nonzero * np.log(nonzero)).sum())


def tag_by_accuracy(probs: Sequence[NDArray[np.float64]], labels: Sequence[NDArray[np.float64]]) -> list[DifficultyTag]:
    """Low iff the predicted class equals the label's class (argmax ties go to the lowest index)."""
    tags = []
    for index, (p, y) in enumerate(zip(probs, labels, strict=True)):
        correct = int(np.argmax(p)) == int(np.argmax(y))
        tags.append(DifficultyTag(index, "low" if correct else "high", "acc", float(correct)))
    return tags


def tag_by_uncertainty(probs: Sequence[NDArray[np.float64]]) -> list[DifficultyTag]:
    """Low iff the prediction entropy is at most the median entropy.

    For an even count the median is the mean of the two middle entropies.
    """
    entropies = [prediction_entropy(p) for p in probs]
    if not entropies:
        return []
    median = float(np.median(entropies))
    return [
        DifficultyTag(index, "low" if entropy <= median else "high", "unc", entropy)
        for index, entropy in enumerate(entropies)
    ]


def assess_difficulty(
    model: ClassifierModel, dataset: GraphDataset | Sequence[Graph], policy: DifficultyPolicy
) -> list[DifficultyTag]:
    """Tag every graph of `dataset` using the (pre-trained) classifier.

    Raises:
        ContractViolation: On an unknown policy
    """
    graphs = list(dataset)
    probs = [forward(model, g).probs for g in graphs]
    if policy == "acc":
        tags = tag_by_accuracy(probs, [g.label for g in graphs])
    elif policy == "unc":
        tags = tag_by_uncertainty(probs)
    else:
        raise ContractViolation(f"difficulty policy must be 'acc' or 'unc', got {policy!r}")
    low = sum(tag.level == "low" for tag in tags)
    logger.info(f"Difficulty ({policy}): {low} low, {len(tags) - low} high")
    return tags


class MixupProvenance(BaseModel):
    """Everything needed to regenerate one mixup graph.

    Attributes:
        position: Index of the graph in its generated set
        subset: Recipe that produced it
        source_i: Dataset index of the first source (weight lam)
        source_j: Dataset index of the second source (weight 1 - lam)
        lam: Mixing coefficient
        seed: Seed of the node permutations
        fallback: True when random pairing replaced an empty difficulty class
    """

    model_config = ConfigDict(frozen=True)

    position: int
    subset: SubsetName
    source_i: int
    source_j: int
    lam: float
    seed: int
    fallback: bool = False


@dataclass(frozen=True)
class GeneratedGraph:
    graph: Graph
    provenance: MixupProvenance


@dataclass(frozen=True)
class GenerationPlan:
    """Drawn pairs for one generation run; `m` is the per-subset count."""

    m: int
    subsets: tuple[SubsetName, ...]
    seed: int
    draws: tuple[MixupProvenance, ...]

    def __len__(self) -> int:
        return len(self.draws)

    def count(self, subset: SubsetName) -> int:
        return sum(draw.subset == subset for draw in self.draws)


def _draw(
    subset: SubsetName, position: int, k: int, i: int, j: int, cfg: MixupConfig, seed: int, fallback: bool = False
) -> MixupProvenance:
    pair_seed = derive_seed(seed, _SUBSET_KEYS[subset], k)
    lam = sample_lambda(cfg, np.random.default_rng(derive_seed(pair_seed, 1)))
    return MixupProvenance(
        position=position, subset=subset, source_i=i, source_j=j, lam=lam, seed=pair_seed, fallback=fallback
    )


def draw_random_pairs(size: int, count: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Ordered pairs drawn uniformly with replacement from range(size)."""
    if count and size < 1:
        raise ContractViolation("cannot draw pairs from an empty dataset")
    return [(int(rng.integers(size)), int(rng.integers(size))) for _ in range(count)]


def _draw_from_pools(pool_i: list[int], pool_j: list[int], rng: np.random.Generator) -> tuple[int, int]:
    i = pool_i[int(rng.integers(len(pool_i)))]
    if pool_i is pool_j and len(pool_j) > 1:
        others = [index for index in pool_j if index != i]
        return i, others[int(rng.integers(len(others)))]
    return i, pool_j[int(rng.integers(len(pool_j)))]


def plan_balanced(
    tags: Sequence[DifficultyTag],
    cfg: MixupConfig,
    m: int,
    seed: int,
    subsets: Sequence[SubsetName] = BALANCED_SUBSETS,
) -> GenerationPlan:
    """Draw m pairs for each enabled subset.

    A graph is paired with itself only when its difficulty class has a single
    member. When a subset needs an empty class, its pairs are drawn uniformly
    from all graphs instead and flagged as fallback.
    """
    if m < 0:
        raise ContractViolation(f"per-subset count must be non-negative, got {m}")
    pools: dict[str, list[int]] = {
        "low": [tag.index for tag in tags if tag.level == "low"],
        "high": [tag.index for tag in tags if tag.level == "high"],
    }
    draws: list[MixupProvenance] = []
    for subset in subsets:
        if subset not in SUBSET_RECIPES:
            raise ContractViolation(f"unknown balanced subset {subset!r}")
        level_i, level_j = SUBSET_RECIPES[subset]
        rng = np.random.default_rng(derive_seed(seed, _SUBSET_KEYS[subset]))
        fallback = not pools[level_i] or not pools[level_j]
        if fallback and m:
            logger.warning(
                f"No {level_i if not pools[level_i] else level_j}-difficulty graphs for the {subset} subset; "
                "falling back to random pairing"
            )
        for k in range(m):
            if fallback:
                (i, j), = draw_random_pairs(len(tags), 1, rng)
            else:
                i, j = _draw_from_pools(pools[level_i], pools[level_j], rng)
            draws.append(_draw(subset, len(draws), k, i, j, cfg, seed, fallback))
    return GenerationPlan(m=m, subsets=tuple(subsets), seed=seed, draws=tuple(draws))


def plan_random(size: int, cfg: MixupConfig, count: int, seed: int) -> GenerationPlan:
    rng = np.random.default_rng(derive_seed(seed, _SUBSET_KEYS["random"]))
    draws = tuple(
        _draw("random", k, k, i, j, cfg, seed) for k, (i, j) in enumerate(draw_random_pairs(size, count, rng))
    )
    return GenerationPlan(m=count, subsets=("random",), seed=seed, draws=draws)


def replay(
    gsae: GsaeModel, dataset: GraphDataset | Sequence[Graph], provenance: MixupProvenance, cfg: MixupConfig
) -> Graph:
    """Regenerate the graph described by `provenance`."""
    return dual_mixup(
        gsae, dataset[provenance.source_i], dataset[provenance.source_j], provenance.lam, cfg, provenance.seed
    )


def realize(
    gsae: GsaeModel, dataset: GraphDataset | Sequence[Graph], plan: GenerationPlan, cfg: MixupConfig
) -> list[GeneratedGraph]:
    """Run dual mixup for every draw of `plan`, in plan order."""
    generated = [GeneratedGraph(replay(gsae, dataset, draw, cfg), draw) for draw in plan.draws]
    logger.debug(f"Generated {len(generated)} graphs ({', '.join(plan.subsets)})")
    return generated


def generate_balanced(
    gsae: GsaeModel,
    dataset: GraphDataset | Sequence[Graph],
    tags: Sequence[DifficultyTag],
    cfg: MixupConfig,
    m: int,
    seed: int,
    subsets: Sequence[SubsetName] = BALANCED_SUBSETS,
) -> list[GeneratedGraph]:
    """m graphs per enabled subset (3m with all subsets) from difficulty-matched pairs."""
    if len(tags) != len(dataset):
        raise ContractViolation(f"{len(tags)} difficulty tags for {len(dataset)} graphs")
    return realize(gsae, dataset, plan_balanced(tags, cfg, m, seed, subsets), cfg)


def generate_random(
    gsae: GsaeModel, dataset: GraphDataset | Sequence[Graph], cfg: MixupConfig, count: int, seed: int
) -> list[GeneratedGraph]:
    """`count` graphs from uniformly drawn ordered pairs (with replacement)."""
    return realize(gsae, dataset, plan_random(len(dataset), cfg, count, seed), cfg)


__all__ = [
    "DifficultyTag",
    "DifficultyPolicy",
    "DifficultyLevel",
    "SubsetName",
    "BALANCED_SUBSETS",
    "SUBSET_RECIPES",
    "prediction_entropy",
    "tag_by_accuracy",
    "tag_by_uncertainty",
    "assess_difficulty",
    "MixupProvenance",
    "GeneratedGraph",
    "GenerationPlan",
    "draw_random_pairs",
    "plan_balanced",
    "plan_random",
    "replay",
    "realize",
    "generate_balanced",
    "generate_random",
]
