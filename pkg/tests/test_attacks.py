"""Tests for membership inference, attribute inference and model stealing."""

import numpy as np
import pytest

from mlleak.attacks import (
    AttackNetShape,
    agreement,
    agreement_from_posteriors,
    attribute_attack,
    membership_examples,
    mia_evaluate,
    mia_train_partial,
    mia_train_shadow,
    steal_model,
    train_attack_model,
    unseen_members,
)
from mlleak.data import four_way_split, partial_subset, synth_generate
from mlleak.exceptions import (
    MLLeakBalanceError,
    MLLeakCapabilityError,
    MLLeakConfigurationError,
    MLLeakDataError,
    MLLeakDimensionError,
    MLLeakDisjointnessError,
    MLLeakSizeError,
)
from mlleak.schemas import (
    AttackVariant,
    OptimizerConfig,
    OptimizerKind,
    SynthSpec,
    ThreatModel,
    TrainConfig,
)
from mlleak.threat import grant_access
from mlleak.zoo import predict, small_mlp, train

from .conftest import make_dataset

BLACK_SHADOW = ThreatModel.parse("black_box/shadow")
WHITE_SHADOW = ThreatModel.parse("white_box/shadow")
BLACK_PARTIAL = ThreatModel.parse("black_box/partial")
WHITE_PARTIAL = ThreatModel.parse("white_box/partial")


@pytest.fixture
def frozen_config():
    """Zero classification head and a zero learning rate: uniform posteriors forever."""
    return TrainConfig(
        batch_size=16,
        epochs=2,
        head_init="zeros",
        optimizer=OptimizerConfig(learning_rate=0.0),
    )


class TestAttackNet:
    """Tests for the branch network classifier."""

    def test_describe(self):
        """Test the layout summary."""
        shape = AttackNetShape((3, 1), (64, 64), (64, 2))
        assert shape.describe() == "[3->64->64 | 1->64->64] -> 64->2"

    def test_wrong_branch_width(self, attack_config):
        """Test inputs must match the branch widths."""
        shape = AttackNetShape((2,), (), (2,))
        attack = train_attack_model(
            AttackVariant.ATTRIBUTE, shape, [np.zeros((4, 2))], np.array([0, 1, 0, 1]),
            attack_config, seed=0,
        )
        assert attack.predict_proba([np.zeros((3, 2))]).shape == (3, 2)
        assert attack.predict_proba([np.zeros((0, 2))]).shape == (0, 2)
        with pytest.raises(MLLeakDimensionError):
            attack.predict_proba([np.zeros((3, 5))])

    def test_parameters_frozen(self, attack_config):
        """Test trained attack parameters are read-only."""
        shape = AttackNetShape((2,), (), (2,))
        attack = train_attack_model(
            AttackVariant.ATTRIBUTE, shape, [np.ones((2, 2))], np.array([0, 1]),
            attack_config, seed=0,
        )
        with pytest.raises(ValueError):
            attack.params["head.0.bias"].data[0] = 1.0


class TestMembershipShadow:
    """Tests for shadow-model membership inference."""

    def test_overfit_shadow_is_more_confident_on_members(self, small_split, attack_config):
        """Test an overfit shadow model gives members a higher mean top posterior."""
        recipe = TrainConfig(
            batch_size=16,
            epochs=200,
            optimizer=OptimizerConfig(
                kind=OptimizerKind.ADAM, learning_rate=0.01, weight_decay=0.0
            ),
        )
        attack = mia_train_shadow(
            small_split, small_mlp(1, 3), BLACK_SHADOW, recipe, attack_cfg=attack_config, seed=1
        )
        assert attack.shadow is not None
        members = predict(attack.shadow, small_split.shadow_train.images).max(axis=1)
        nonmembers = predict(attack.shadow, small_split.shadow_test.images).max(axis=1)
        assert members.mean() > nonmembers.mean()

    def test_blackbox_shape(self, small_split, small_target, attack_config):
        """Test black-box attacks have a posterior and a correctness branch."""
        attack = mia_train_shadow(
            small_split, small_target.architecture, BLACK_SHADOW,
            small_target.train_config, attack_cfg=attack_config, seed=1,
        )
        assert attack.variant == AttackVariant.MIA_BLACKBOX
        assert attack.shape.inputs == (3, 1)
        assert attack.shadow is not None
        assert attack.shadow.architecture == small_target.architecture

    def test_whitebox_shape(self, small_split, small_target, attack_config):
        """Test white-box attacks have four branches including the gradient."""
        attack = mia_train_shadow(
            small_split, small_target.architecture, WHITE_SHADOW,
            small_target.train_config, attack_cfg=attack_config, seed=1,
        )
        assert attack.variant == AttackVariant.MIA_WHITEBOX
        assert attack.shape.inputs == (3, 1, 65 * 3, 3)

    def test_needs_shadow_threat(self, small_split, small_target, attack_config):
        """Test partial threat models are rejected."""
        with pytest.raises(MLLeakConfigurationError):
            mia_train_shadow(
                small_split, small_target.architecture, BLACK_PARTIAL,
                small_target.train_config, attack_cfg=attack_config,
            )

    def test_deterministic(self, small_split, small_target, attack_config):
        """Test equal seeds give identical attacks."""
        args = (small_split, small_target.architecture, BLACK_SHADOW, small_target.train_config)
        a = mia_train_shadow(*args, attack_cfg=attack_config, seed=3)
        b = mia_train_shadow(*args, attack_cfg=attack_config, seed=3)
        assert a.params.equals(b.params)

    @pytest.mark.parametrize("threat", [BLACK_SHADOW, WHITE_SHADOW], ids=str)
    def test_evaluate_range(self, threat, small_split, small_target, attack_config):
        """Test the score is a balanced accuracy over 12 + 12 samples."""
        attack = mia_train_shadow(
            small_split, small_target.architecture, threat,
            small_target.train_config, attack_cfg=attack_config, seed=1,
        )
        access = grant_access(small_target, threat)
        score = mia_evaluate(attack, access, small_split.target_train, small_split.target_test)
        assert 0.0 <= score <= 1.0
        assert score * 24 == pytest.approx(round(score * 24))

    def test_uninformative_features_score_one_half(self, frozen_config, attack_config):
        """Test identical features for every sample give exactly chance accuracy."""
        ds = make_dataset(32, num_classes=2, seed=3, labels=np.zeros(32, dtype=np.int64))
        split = four_way_split(ds, seed=0)
        target = train(small_mlp(1, 2), split.target_train, frozen_config, seed=0)
        attack = mia_train_shadow(
            split, target.architecture, BLACK_SHADOW, frozen_config,
            attack_cfg=attack_config, seed=2,
        )
        access = grant_access(target, BLACK_SHADOW)
        assert mia_evaluate(attack, access, split.target_train, split.target_test) == 0.5

    def test_whitebox_attack_needs_whitebox_access(
        self, small_split, small_target, attack_config
    ):
        """Test a white-box attack cannot be evaluated through queries only."""
        attack = mia_train_shadow(
            small_split, small_target.architecture, WHITE_SHADOW,
            small_target.train_config, attack_cfg=attack_config, seed=1,
        )
        access = grant_access(small_target, BLACK_SHADOW)
        with pytest.raises(MLLeakCapabilityError):
            mia_evaluate(attack, access, small_split.target_train, small_split.target_test)

    def test_evaluate_rejects_attribute_attack(self, small_split, small_target, attack_config):
        """Test only membership attacks are evaluated."""
        shape = AttackNetShape((3, 1), (), (2,))
        attack = train_attack_model(
            AttackVariant.ATTRIBUTE, shape, [np.zeros((2, 3)), np.zeros((2, 1))],
            np.array([0, 1]), attack_config, seed=0,
        )
        access = grant_access(small_target, BLACK_SHADOW)
        with pytest.raises(MLLeakConfigurationError):
            mia_evaluate(attack, access, small_split.target_train, small_split.target_test)


class TestMembershipPartial:
    """Tests for partial-data membership inference."""

    @pytest.mark.parametrize("threat", [BLACK_PARTIAL, WHITE_PARTIAL], ids=str)
    def test_train_and_evaluate(self, threat, small_split, small_target, attack_config):
        """Test features come from the target itself."""
        access = grant_access(small_target, threat)
        partial = partial_subset(small_split.target_train, 0.7, seed=4)
        attack = mia_train_partial(
            partial, small_split.shadow_test, access, attack_cfg=attack_config, seed=1
        )
        assert attack.shadow is None
        assert attack.num_branches == (4 if threat.white_box else 2)
        score = mia_evaluate(
            attack, access, small_split.target_train, small_split.target_test, exclude=partial
        )
        assert 0.0 <= score <= 1.0

    def test_evaluation_members_unseen_by_attack(self):
        """Test evaluation members exclude the partial set the attack was trained on."""
        ds = synth_generate(SynthSpec(num_classes=4, samples_per_class=50, seed=1))
        split = four_way_split(ds, seed=3)
        partial = partial_subset(split.target_train, 0.7, seed=5)
        unseen = unseen_members(split.target_train, partial)
        assert np.intersect1d(unseen.indices, partial.indices).size == 0
        assert len(unseen) + len(partial) == len(split.target_train)
        kept = np.isin(split.target_train.indices, unseen.indices)
        assert np.array_equal(split.target_train.indices[kept], unseen.indices)

    def test_evaluate_without_unseen_members(self, small_split, small_target, attack_config):
        """Test excluding all of target_train leaves nothing to evaluate."""
        access = grant_access(small_target, BLACK_PARTIAL)
        partial = partial_subset(small_split.target_train, 0.7, seed=4)
        attack = mia_train_partial(
            partial, small_split.shadow_test, access, attack_cfg=attack_config, seed=1
        )
        with pytest.raises(MLLeakSizeError):
            mia_evaluate(
                attack,
                access,
                small_split.target_train,
                small_split.target_test,
                exclude=small_split.target_train,
            )

    def test_needs_partial_threat(self, small_split, small_target, attack_config):
        """Test shadow threat models are rejected."""
        access = grant_access(small_target, BLACK_SHADOW)
        partial = partial_subset(small_split.target_train, 0.7, seed=4)
        with pytest.raises(MLLeakConfigurationError):
            mia_train_partial(partial, small_split.shadow_test, access, attack_cfg=attack_config)

    def test_pool_must_be_disjoint(self, small_split, small_target, attack_config):
        """Test members cannot be drawn as non-members."""
        access = grant_access(small_target, BLACK_PARTIAL)
        partial = partial_subset(small_split.target_train, 0.7, seed=4)
        with pytest.raises(MLLeakDisjointnessError) as exc_info:
            mia_train_partial(
                partial, small_split.target_train, access, attack_cfg=attack_config
            )
        assert exc_info.value.overlap == len(partial)

    def test_pool_must_be_large_enough(self, small_split, small_target, attack_config):
        """Test the pool must cover the partial set."""
        access = grant_access(small_target, BLACK_PARTIAL)
        partial = partial_subset(small_split.target_train, 0.7, seed=4)
        pool = small_split.shadow_test.subset(np.arange(3))
        with pytest.raises(MLLeakBalanceError):
            mia_train_partial(partial, pool, access, attack_cfg=attack_config)


class TestMembershipExamples:
    """Tests for membership feature sets."""

    def test_members_first(self, small_split, small_target):
        """Test labels are ones then zeros."""
        access = grant_access(small_target, BLACK_SHADOW)
        examples = membership_examples(access, small_split.target_train, small_split.target_test)
        assert len(examples) == 24
        assert examples.members == 12
        assert list(examples.is_member[:12]) == [1] * 12
        assert [f.shape for f in examples.features] == [(24, 3), (24, 1)]

    def test_unbalanced(self, small_split, small_target):
        """Test unequal member and non-member counts are rejected."""
        access = grant_access(small_target, BLACK_SHADOW)
        nonmembers = small_split.target_test.subset(np.arange(8))
        with pytest.raises(MLLeakBalanceError):
            membership_examples(access, small_split.target_train, nonmembers)

    def test_whitebox_override_needs_access(self, small_split, small_target):
        """Test requesting white-box features through queries fails."""
        access = grant_access(small_target, BLACK_PARTIAL)
        with pytest.raises(MLLeakCapabilityError):
            membership_examples(
                access, small_split.target_train, small_split.target_test, whitebox=True
            )


class TestAttributeAttack:
    """Tests for attribute inference."""

    def test_score_range(self, small_split, small_target, attack_config):
        """Test attribute accuracy is a fraction of the holdout."""
        access = grant_access(small_target, WHITE_SHADOW)
        score = attribute_attack(
            access, small_split.shadow_train, small_split.target_test,
            attack_cfg=attack_config, seed=1,
        )
        assert 0.0 <= score <= 1.0
        assert score * 12 == pytest.approx(round(score * 12))

    def test_needs_white_box(self, small_split, small_target, attack_config):
        """Test embeddings are unavailable under black-box access."""
        access = grant_access(small_target, BLACK_SHADOW)
        with pytest.raises(MLLeakCapabilityError):
            attribute_attack(
                access, small_split.shadow_train, small_split.target_test,
                attack_cfg=attack_config,
            )

    def test_needs_attribute_labels(self, small_split, small_target, attack_config):
        """Test datasets without attributes are rejected."""
        access = grant_access(small_target, WHITE_SHADOW)
        plain = make_dataset(6, num_classes=3, seed=8, attributes=False)
        with pytest.raises(MLLeakDataError):
            attribute_attack(access, plain, small_split.target_test, attack_cfg=attack_config)

    def test_sets_must_be_disjoint(self, small_split, small_target, attack_config):
        """Test the holdout cannot overlap the training set."""
        access = grant_access(small_target, WHITE_PARTIAL)
        with pytest.raises(MLLeakDisjointnessError):
            attribute_attack(
                access, small_split.target_test, small_split.target_test,
                attack_cfg=attack_config,
            )


class TestStealing:
    """Tests for model stealing and agreement."""

    def test_surrogate_agreement(self, small_split, small_target, quick_config):
        """Test a surrogate is trained from queries and scored by agreement."""
        access = grant_access(small_target, BLACK_SHADOW)
        surrogate = steal_model(
            access, small_split.shadow_train, small_mlp(1, 3), quick_config, seed=6
        )
        assert surrogate.num_classes == 3
        assert 0.0 <= agreement(access, surrogate, small_split.target_test) <= 1.0

    def test_copied_parameters_agree_fully(self, small_split, small_target):
        """Test a surrogate started from the target's parameters agrees everywhere."""
        access = grant_access(small_target, BLACK_PARTIAL)
        surrogate = steal_model(
            access,
            small_split.shadow_train,
            small_target.architecture,
            TrainConfig(epochs=0),
            initial_params=small_target.params,
        )
        assert agreement(access, surrogate, small_split.target_test) == 1.0

    def test_target_agrees_with_itself(self, small_split, small_target):
        """Test agreement of the target with itself is 1."""
        access = grant_access(small_target, BLACK_SHADOW)
        assert agreement(access, small_target, small_split.target_test) == 1.0

    def test_empty_query_set(self, small_split, small_target, quick_config):
        """Test stealing needs queries."""
        access = grant_access(small_target, BLACK_SHADOW)
        empty = small_split.shadow_train.subset(np.array([], dtype=np.int64))
        with pytest.raises(MLLeakSizeError):
            steal_model(access, empty, small_mlp(1, 3), quick_config)

    def test_agreement_invariant_under_monotone_transform(self):
        """Test only argmaxes matter."""
        rng = np.random.default_rng(0)
        target = rng.random((20, 4))
        surrogate = rng.random((20, 4))
        base = agreement_from_posteriors(target, surrogate)
        assert agreement_from_posteriors(np.exp(3 * target), surrogate**2) == base

    def test_agreement_shape_mismatch(self):
        """Test posterior matrices must align."""
        with pytest.raises(MLLeakDimensionError):
            agreement_from_posteriors(np.ones((2, 3)), np.ones((2, 4)))

    def test_agreement_empty(self):
        """Test an empty evaluation set has no agreement."""
        with pytest.raises(MLLeakSizeError):
            agreement_from_posteriors(np.zeros((0, 3)), np.zeros((0, 3)))
