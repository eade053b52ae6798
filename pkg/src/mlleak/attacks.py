"""
Membership inference, attribute inference and model stealing.

Attack classifiers are small branch networks trained with the shared zoo
training loop: every input feature goes through its own branch before the
branch outputs are concatenated and fed to a head. All hidden layers are
64 units wide and every attack classifier trains with Adam (lr 1e-3, batch
64, 50 epochs by default).

## Usage Example

```python
from mlleak.attacks import mia_train_shadow, mia_evaluate, steal_model, agreement
from mlleak.threat import grant_access

threat = ThreatModel.parse("black_box/shadow")
attack = mia_train_shadow(split, target.architecture, threat, target.train_config, seed=5)
access = grant_access(target, threat)
print(mia_evaluate(attack, access, split.target_train, split.target_test))
```
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .base import make_rng
from .data import FourWaySplit, LabeledDataset, sample
from .engine import Parameters, Tensor, concat, relu, softmax, softmax_cross_entropy
from .exceptions import (
    MLLeakBalanceError,
    MLLeakCapabilityError,
    MLLeakConfigurationError,
    MLLeakDataError,
    MLLeakDimensionError,
    MLLeakDisjointnessError,
    MLLeakSizeError,
)
from .schemas import (
    Architecture,
    AttackVariant,
    Auxiliary,
    ThreatModel,
    TrainConfig,
    attack_train_config,
)
from .threat import (
    TargetAccess,
    blackbox_features,
    embeddings,
    grant_access,
    query,
    whitebox_features,
)
from .zoo import EpochRecord, TrainedModel, dense, dense_params, fit, predict, train

_log = logging.getLogger(__name__)

HIDDEN_UNITS = 64
_MIA_BRANCH = (HIDDEN_UNITS, HIDDEN_UNITS)
_MIA_HEAD = (HIDDEN_UNITS, HIDDEN_UNITS, HIDDEN_UNITS, 2)
_ATTRIBUTE_HEAD = (HIDDEN_UNITS, 2)


# Attack classifiers


@dataclass(frozen=True)
class AttackNetShape:
    """
    Layout of a branch network.

    Attributes:
        inputs: Width of each input branch
        branch_units: Dense layer widths inside every branch (ReLU after each)
        head_units: Dense layer widths of the head; the last one is the
            output and has no activation
    """

    inputs: tuple[int, ...]
    branch_units: tuple[int, ...]
    head_units: tuple[int, ...]

    def describe(self) -> str:
        branches = " | ".join(
            "->".join(str(w) for w in (width, *self.branch_units)) for width in self.inputs
        )
        return f"[{branches}] -> {'->'.join(str(u) for u in self.head_units)}"


def _init_attack_net(shape: AttackNetShape, seed: int) -> Parameters:
    rng = make_rng(seed)
    params = Parameters()
    head_in = 0
    for b, width in enumerate(shape.inputs):
        fan_in = width
        for j, units in enumerate(shape.branch_units):
            dense_params(params, f"branch{b}.{j}", fan_in, units, rng)
            fan_in = units
        head_in += fan_in
    for j, units in enumerate(shape.head_units):
        dense_params(params, f"head.{j}", head_in, units, rng)
        head_in = units
    return params


def _attack_forward(shape: AttackNetShape, params: Parameters, inputs: Sequence[Tensor]) -> Tensor:
    outputs = []
    for b, x in enumerate(inputs):
        for j in range(len(shape.branch_units)):
            x = relu(dense(params, f"branch{b}.{j}", x))
        outputs.append(x)
    x = outputs[0] if len(outputs) == 1 else concat(outputs, axis=1)
    last = len(shape.head_units) - 1
    for j in range(len(shape.head_units)):
        x = dense(params, f"head.{j}", x)
        if j < last:
            x = relu(x)
    return x


def _check_branches(shape: AttackNetShape, branches: Sequence[np.ndarray]) -> list[np.ndarray]:
    arrays = [np.asarray(b, dtype=np.float64) for b in branches]
    widths = tuple(a.shape[1] if a.ndim == 2 else -1 for a in arrays)
    if widths != shape.inputs or len({len(a) for a in arrays}) > 1:
        raise MLLeakDimensionError(
            f"attack expects inputs of widths {shape.inputs}, got {widths}",
            expected=shape.inputs,
            actual=widths,
        )
    return arrays


@dataclass(frozen=True, eq=False)
class AttackModel:
    """
    A trained attack classifier.

    Attributes:
        variant: mia_blackbox, mia_whitebox or attribute
        shape: Branch network layout (the input schema)
        params: Frozen classifier parameters
        history: Per-epoch training record
        shadow: Shadow model the training features came from, if any
    """

    variant: AttackVariant
    shape: AttackNetShape
    params: Parameters
    history: tuple[EpochRecord, ...]
    shadow: TrainedModel | None = None

    @property
    def num_branches(self) -> int:
        return len(self.shape.inputs)

    def predict_proba(self, branches: Sequence[np.ndarray]) -> np.ndarray:
        """(N, 2) class probabilities; column 1 is "member" / attribute set."""
        arrays = _check_branches(self.shape, branches)
        if len(arrays[0]) == 0:
            return np.zeros((0, 2))
        out = _attack_forward(self.shape, self.params, [Tensor(a) for a in arrays])
        return softmax(out).data

    def decide(self, branches: Sequence[np.ndarray]) -> np.ndarray:
        return self.predict_proba(branches).argmax(axis=1)

    def __repr__(self) -> str:
        return f"AttackModel(variant={self.variant.value!r}, shape={self.shape.describe()!r})"


def train_attack_model(
    variant: AttackVariant,
    shape: AttackNetShape,
    branches: Sequence[np.ndarray],
    targets: np.ndarray,
    cfg: TrainConfig,
    seed: int,
    shadow: TrainedModel | None = None,
) -> AttackModel:
    """Fit a branch network to binary targets with the shared training loop."""
    arrays = _check_branches(shape, branches)
    targets = np.asarray(targets, dtype=np.int64)
    params = _init_attack_net(shape, seed)

    def step_loss(positions: np.ndarray) -> tuple[Tensor, int]:
        out = _attack_forward(shape, params, [Tensor(a[positions]) for a in arrays])
        hits = int((out.data.argmax(axis=1) == targets[positions]).sum())
        return softmax_cross_entropy(out, targets[positions]), hits

    history = fit(params, len(targets), step_loss, cfg, label=f"{variant.value} attack")
    return AttackModel(variant, shape, params.frozen(), history, shadow)


# Membership inference


@dataclass(frozen=True, eq=False)
class MembershipExamples:
    """Balanced member / non-member feature set."""

    features: tuple[np.ndarray, ...]
    is_member: np.ndarray

    def __len__(self) -> int:
        return len(self.is_member)

    @property
    def members(self) -> int:
        return int(self.is_member.sum())


def membership_examples(
    access: TargetAccess,
    members: LabeledDataset,
    nonmembers: LabeledDataset,
    *,
    whitebox: bool | None = None,
) -> MembershipExamples:
    """
    Features of members (label 1) followed by non-members (label 0).

    White-box features are used when `whitebox` is set, defaulting to what
    the access level allows.

    Raises:
        MLLeakBalanceError: If the two sets differ in size
    """
    if len(members) != len(nonmembers):
        raise MLLeakBalanceError(
            f"membership sets must be balanced: {len(members)} members, "
            f"{len(nonmembers)} non-members"
        )
    if len(members) == 0:
        raise MLLeakSizeError("membership sets are empty")
    if whitebox is None:
        whitebox = access.white_box
    extract = whitebox_features if whitebox else blackbox_features
    inside = extract(access, members.images, members.class_labels)
    outside = extract(access, nonmembers.images, nonmembers.class_labels)
    features = tuple(np.concatenate([a, b]) for a, b in zip(inside, outside))
    is_member = np.concatenate([np.ones(len(members)), np.zeros(len(nonmembers))]).astype(np.int64)
    return MembershipExamples(features, is_member)


def _mia_shape(examples: MembershipExamples) -> tuple[AttackVariant, AttackNetShape]:
    widths = tuple(f.shape[1] for f in examples.features)
    variant = AttackVariant.MIA_WHITEBOX if len(widths) == 4 else AttackVariant.MIA_BLACKBOX
    return variant, AttackNetShape(widths, _MIA_BRANCH, _MIA_HEAD)


def _fit_membership(
    examples: MembershipExamples,
    cfg: TrainConfig,
    seed: int,
    shadow: TrainedModel | None = None,
) -> AttackModel:
    variant, shape = _mia_shape(examples)
    attack = train_attack_model(
        variant, shape, examples.features, examples.is_member, cfg, seed, shadow
    )
    final = attack.history[-1].accuracy if attack.history else float("nan")
    _log.info(f"Trained {variant.value} attack on {len(examples)} examples (train acc {final:.4f})")
    return attack


def mia_train_shadow(
    shadow_split: FourWaySplit,
    target_arch: Architecture,
    threat: ThreatModel,
    train_cfg: TrainConfig,
    *,
    attack_cfg: TrainConfig | None = None,
    seed: int = 0,
) -> AttackModel:
    """
    Shadow-model membership inference training.

    Trains a shadow model with the target's architecture and recipe on
    shadow_train, labels its features on shadow_train as members and on
    shadow_test as non-members, and trains the attack classifier on them.
    White-box threats yield a four-branch classifier, black-box threats a
    two-branch one.

    Args:
        shadow_split: Split whose shadow_train / shadow_test parts are used
        target_arch: Architecture of the target (assumed known)
        threat: A threat model with shadow auxiliary data
        train_cfg: Target training recipe, reused for the shadow model
        attack_cfg: Attack classifier recipe (default: Adam, 50 epochs)
        seed: Seed for the shadow model and the attack classifier

    Raises:
        MLLeakConfigurationError: If the threat model is not a shadow one
        MLLeakBalanceError: If shadow_train and shadow_test differ in size
    """
    if threat.auxiliary != Auxiliary.SHADOW:
        raise MLLeakConfigurationError(f"mia_train_shadow needs a shadow threat, got {threat}")
    shadow_train, shadow_test = shadow_split.shadow_train, shadow_split.shadow_test
    if len(shadow_train) != len(shadow_test):
        raise MLLeakBalanceError(
            f"shadow halves differ in size: {len(shadow_train)} vs {len(shadow_test)}"
        )
    shadow = train(target_arch, shadow_train, train_cfg, seed)
    # the adversary owns the shadow model, so its own access level applies
    examples = membership_examples(grant_access(shadow, threat), shadow_train, shadow_test)
    return _fit_membership(examples, attack_cfg or attack_train_config(), seed, shadow)


def mia_train_partial(
    partial_set: LabeledDataset,
    nonmember_pool: LabeledDataset,
    target_access: TargetAccess,
    *,
    attack_cfg: TrainConfig | None = None,
    seed: int = 0,
) -> AttackModel:
    """
    Partial-data membership inference training.

    Features come from the target itself: partial_set as members and an
    equal-size seeded draw from nonmember_pool as non-members.

    Raises:
        MLLeakConfigurationError: If the access's threat is not a partial one
        MLLeakDisjointnessError: If the pool shares samples with partial_set
        MLLeakBalanceError: If the pool is smaller than partial_set
    """
    threat = target_access.threat
    if threat.auxiliary != Auxiliary.PARTIAL:
        raise MLLeakConfigurationError(f"mia_train_partial needs a partial threat, got {threat}")
    overlap = np.intersect1d(partial_set.indices, nonmember_pool.indices).size
    if overlap:
        raise MLLeakDisjointnessError(
            f"non-member pool shares {overlap} samples with the partial set", overlap=overlap
        )
    if len(nonmember_pool) < len(partial_set):
        raise MLLeakBalanceError(
            f"non-member pool has {len(nonmember_pool)} samples, "
            f"partial set needs {len(partial_set)}"
        )
    nonmembers = sample(nonmember_pool, len(partial_set), seed, name=f"{nonmember_pool.name}:draw")
    examples = membership_examples(target_access, partial_set, nonmembers)
    return _fit_membership(examples, attack_cfg or attack_train_config(), seed)


def mia_evaluate(
    attack: AttackModel,
    target_access: TargetAccess,
    target_train: LabeledDataset,
    target_test: LabeledDataset,
    *,
    exclude: LabeledDataset | None = None,
) -> float:
    """
    Membership attack accuracy on a balanced evaluation set.

    Members are the first samples of target_train and non-members the first
    of target_test, both truncated to the smaller size, so chance is 0.5.
    Samples of `exclude` (the partial set a partial-data attack was trained
    on) never serve as evaluation members.

    Raises:
        MLLeakCapabilityError: If a white-box attack is given black-box access
        MLLeakSizeError: If no member or non-member is left to evaluate
    """
    if attack.variant == AttackVariant.MIA_WHITEBOX and not target_access.white_box:
        raise MLLeakCapabilityError(
            "a white-box membership attack needs white-box access to evaluate",
            required="white_box",
        )
    if attack.variant not in (AttackVariant.MIA_BLACKBOX, AttackVariant.MIA_WHITEBOX):
        raise MLLeakConfigurationError(f"{attack.variant.value} is not a membership attack")
    members = unseen_members(target_train, exclude)
    count = min(len(members), len(target_test))
    if count == 0:
        raise MLLeakSizeError(
            f"no evaluation samples: {len(members)} unseen members, "
            f"{len(target_test)} non-members"
        )
    positions = np.arange(count)
    examples = membership_examples(
        target_access,
        members.subset(positions),
        target_test.subset(positions),
        whitebox=attack.variant == AttackVariant.MIA_WHITEBOX,
    )
    decisions = attack.decide(examples.features)
    score = float((decisions == examples.is_member).mean())
    _log.info(f"{attack.variant.value} accuracy under {target_access.threat}: {score:.4f}")
    return score


def unseen_members(
    target_train: LabeledDataset, exclude: LabeledDataset | None = None
) -> LabeledDataset:
    """target_train without the samples of exclude, in their original order."""
    if exclude is None:
        return target_train
    keep = np.flatnonzero(~np.isin(target_train.indices, exclude.indices))
    return target_train.subset(keep, name=f"{target_train.name}:unseen")


# Attribute inference


def attribute_attack(
    target_access: TargetAccess,
    aux_set: LabeledDataset,
    holdout: LabeledDataset,
    *,
    attack_cfg: TrainConfig | None = None,
    seed: int = 0,
) -> float:
    """
    Infer the hidden binary attribute from target embeddings.

    A two-layer perceptron maps embeddings of aux_set to its attribute
    labels; the score is its accuracy on holdout. Compare against
    data.majority_baseline(holdout).

    Raises:
        MLLeakCapabilityError: If access is black-box
        MLLeakDataError: If either set lacks attribute labels
        MLLeakDisjointnessError: If aux_set and holdout share samples
    """
    for ds in (aux_set, holdout):
        if ds.attribute_labels is None:
            raise MLLeakDataError(f"{ds.name} has no attribute labels")
        if len(ds) == 0:
            raise MLLeakSizeError(f"{ds.name} is empty")
    overlap = np.intersect1d(aux_set.indices, holdout.indices).size
    if overlap:
        raise MLLeakDisjointnessError(
            f"attribute aux set and holdout share {overlap} samples", overlap=overlap
        )
    train_emb = embeddings(target_access, aux_set.images)
    test_emb = embeddings(target_access, holdout.images)
    shape = AttackNetShape((train_emb.shape[1],), (), _ATTRIBUTE_HEAD)
    assert aux_set.attribute_labels is not None and holdout.attribute_labels is not None
    attack = train_attack_model(
        AttackVariant.ATTRIBUTE,
        shape,
        [train_emb],
        aux_set.attribute_labels,
        attack_cfg or attack_train_config(),
        seed,
    )
    score = float((attack.decide([test_emb]) == holdout.attribute_labels).mean())
    _log.info(f"attribute accuracy under {target_access.threat}: {score:.4f}")
    return score


# Model stealing


def steal_model(
    target_access: TargetAccess,
    aux_set: LabeledDataset,
    surrogate_arch: Architecture,
    cfg: TrainConfig,
    *,
    seed: int = 0,
    initial_params: Parameters | None = None,
) -> TrainedModel:
    """
    Train a surrogate on the target's posteriors.

    The target is queried on aux_set and the surrogate minimizes
    cross-entropy against the full posterior vectors. Class labels of
    aux_set are not used.

    Args:
        target_access: Any access level
        aux_set: Query samples
        surrogate_arch: Surrogate architecture (same output width as the target)
        cfg: Surrogate training recipe
        seed: Surrogate initialization seed
        initial_params: Optional starting parameters for the surrogate

    Raises:
        MLLeakSizeError: If aux_set is empty
    """
    if len(aux_set) == 0:
        raise MLLeakSizeError("cannot steal a model with an empty query set")
    posteriors = query(target_access, aux_set.images)
    surrogate = train(
        surrogate_arch,
        aux_set,
        cfg,
        seed,
        soft_targets=posteriors,
        initial_params=initial_params,
    )
    _log.info(f"Trained {surrogate_arch.name} surrogate on {len(aux_set)} target queries")
    return surrogate


def agreement_from_posteriors(target: np.ndarray, surrogate: np.ndarray) -> float:
    """Fraction of rows whose argmaxes coincide."""
    if target.shape != surrogate.shape:
        raise MLLeakDimensionError(
            "posterior matrices differ in shape", expected=target.shape, actual=surrogate.shape
        )
    if len(target) == 0:
        raise MLLeakSizeError("agreement of an empty set is undefined")
    return float((target.argmax(axis=1) == surrogate.argmax(axis=1)).mean())


def agreement(
    target_access: TargetAccess, surrogate: TrainedModel, eval_set: LabeledDataset
) -> float:
    """Fraction of eval_set samples on which surrogate and target predict the same class."""
    if len(eval_set) == 0:
        raise MLLeakSizeError("agreement of an empty set is undefined")
    return agreement_from_posteriors(
        query(target_access, eval_set.images), predict(surrogate, eval_set.images)
    )
