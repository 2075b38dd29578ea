"""
도메인 엔티티 테스트
"""
import numpy as np
import pytest

from src.domain.entities import (
    CostParams, EmbeddingRecord, EmbeddingSet,
    Trial, TrialLabel, TrialSet
)
from src.domain.errors import (
    BackendError, DimMismatch, InvalidConfig, NoNontargets, NoTargets
)


class TestEmbeddingSet:
    """EmbeddingSet 엔티티 테스트"""

    def test_create(self):
        """생성 테스트"""
        data = EmbeddingSet(2, ["u1", "u2"], ["a", None], [[1.0, 2.0], [3.0, 4.0]])

        assert len(data) == 2
        assert data.dim == 2
        assert data.utterance_ids == ("u1", "u2")
        assert not data.is_labeled

    def test_vectors_read_only(self):
        """내부 행렬은 수정 불가"""
        data = EmbeddingSet(1, ["u1"], ["a"], [[1.0]])

        with pytest.raises(ValueError):
            data.vectors[0, 0] = 5.0

    def test_duplicate_utterance_ids(self):
        """중복 발화 ID는 InvalidConfig"""
        with pytest.raises(InvalidConfig):
            EmbeddingSet(1, ["u1", "u1"], ["a", "a"], [[1.0], [2.0]])

    def test_label_count_mismatch(self):
        """화자 ID 개수가 다르면 DimMismatch"""
        with pytest.raises(DimMismatch):
            EmbeddingSet(1, ["u1", "u2"], ["a"], [[1.0], [2.0]])

    def test_vector_length_not_multiple_of_dim(self):
        """원소 수가 레코드 수 × 차원과 다르면 DimMismatch"""
        with pytest.raises(DimMismatch):
            EmbeddingSet(2, ["u1", "u2"], ["a", "b"], np.zeros(5))

    def test_from_records(self):
        """레코드 목록에서 생성"""
        records = [
            EmbeddingRecord("u1", "a", np.array([1.0, 0.0])),
            EmbeddingRecord("u2", "b", np.array([0.0, 1.0])),
        ]

        data = EmbeddingSet.from_records(2, records)

        assert data.speaker_ids == ("a", "b")
        assert np.array_equal(data.records[1].vector, [0.0, 1.0])

    def test_from_records_wrong_dim(self):
        """레코드 차원이 다르면 DimMismatch"""
        with pytest.raises(DimMismatch):
            EmbeddingSet.from_records(2, [EmbeddingRecord("u1", "a", np.zeros(3))])

    def test_speaker_groups_sorted(self):
        """화자 ID 정렬 순서, 레이블 없는 레코드 제외"""
        data = EmbeddingSet(1, ["u1", "u2", "u3", "u4"], ["b", "a", None, "b"], np.zeros((4, 1)))

        groups = data.speaker_groups()

        assert list(groups) == ["a", "b"]
        assert groups["b"] == [0, 3]

    def test_index_of(self):
        """발화 ID 조회"""
        data = EmbeddingSet(1, ["x", "y"], [None, None], np.zeros((2, 1)))

        assert data.index_of("y") == 1
        assert data.index_of("z") is None

    def test_without_labels(self):
        """레이블 제거"""
        data = EmbeddingSet(1, ["u1"], ["a"], [[1.0]])

        assert data.without_labels().speaker_ids == (None,)
        assert data.is_labeled

    def test_with_vectors_changes_dim(self):
        """벡터 교체 시 차원도 바뀔 수 있음"""
        data = EmbeddingSet(3, ["u1", "u2"], ["a", "b"], np.zeros((2, 3)))

        projected = data.with_vectors(np.ones((2, 1)))

        assert projected.dim == 1
        assert projected.speaker_ids == data.speaker_ids

    def test_with_vectors_wrong_rows(self):
        """행 수가 다르면 DimMismatch"""
        data = EmbeddingSet(1, ["u1"], ["a"], [[1.0]])

        with pytest.raises(DimMismatch):
            data.with_vectors(np.ones((2, 1)))


class TestTrialSet:
    """TrialSet 엔티티 테스트"""

    def test_label_values(self):
        """레이블 문자열"""
        assert TrialLabel("target") is TrialLabel.TARGET
        assert TrialLabel.NONTARGET.value == "nontarget"

    def test_with_scores(self):
        """점수를 채운 새 목록, 원본은 그대로"""
        trials = TrialSet([Trial("e", "t1", TrialLabel.TARGET), Trial("e", "t2", TrialLabel.NONTARGET)])

        scored = trials.with_scores([1.5, -0.5])

        assert [t.score for t in scored] == [1.5, -0.5]
        assert trials.trials[0].score is None

    def test_with_scores_count_mismatch(self):
        """점수 개수가 다르면 DimMismatch"""
        with pytest.raises(DimMismatch):
            TrialSet([Trial("e", "t")]).with_scores([1.0, 2.0])

    def test_split_scores(self):
        """target/nontarget 점수 분리"""
        trials = TrialSet([
            Trial("e", "t1", TrialLabel.TARGET, 2.0),
            Trial("e", "t2", TrialLabel.NONTARGET, -1.0),
            Trial("e", "t3", TrialLabel.TARGET, 1.0),
        ])

        targets, nontargets = trials.split_scores()

        assert list(targets) == [2.0, 1.0]
        assert list(nontargets) == [-1.0]

    def test_split_requires_labels(self):
        """레이블 없는 trial은 InvalidConfig"""
        with pytest.raises(InvalidConfig):
            TrialSet([Trial("e", "t", None, 1.0)]).split_scores()

    def test_split_rejects_non_finite(self):
        """NaN 점수는 InvalidConfig"""
        trials = TrialSet([
            Trial("e", "t1", TrialLabel.TARGET, float("nan")),
            Trial("e", "t2", TrialLabel.NONTARGET, 0.0),
        ])

        with pytest.raises(InvalidConfig):
            trials.split_scores()

    def test_split_needs_both_classes(self):
        """한쪽 클래스가 없으면 NoTargets / NoNontargets"""
        with pytest.raises(NoTargets):
            TrialSet([Trial("e", "t", TrialLabel.NONTARGET, 0.0)]).split_scores()
        with pytest.raises(NoNontargets):
            TrialSet([Trial("e", "t", TrialLabel.TARGET, 0.0)]).split_scores()


class TestCostParams:
    """CostParams 엔티티 테스트"""

    def test_defaults(self):
        """기본값"""
        params = CostParams()

        assert params.p_targets == (0.01, 0.005)
        assert params.c_miss == 1.0
        assert params.c_fa == 1.0

    @pytest.mark.parametrize("kwargs", [
        {"p_targets": ()},
        {"p_targets": (0.0,)},
        {"p_targets": (1.0,)},
        {"c_miss": 0.0},
        {"c_fa": -1.0},
    ])
    def test_invalid(self, kwargs):
        """범위를 벗어난 값은 InvalidConfig"""
        with pytest.raises(InvalidConfig):
            CostParams(**kwargs)

    def test_errors_share_base(self):
        """도메인 오류는 BackendError이자 ValueError"""
        with pytest.raises(BackendError) as excinfo:
            CostParams(c_miss=0.0)

        assert isinstance(excinfo.value, ValueError)
        assert excinfo.value.kind == "InvalidConfig"
