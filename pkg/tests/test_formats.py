"""
파일 형식 / Repository 테스트
텍스트 형식 읽기/쓰기, 형식 오류 위치, 백엔드 디렉토리 저장/로드
"""
import numpy as np
import pytest

from src.data import formats
from src.data.formats import FORMAT_VERSION, VERSION_LINE, FormatError
from src.data.repository import DirectoryBackendRepository, TrainedBackend
from src.domain.entities import EmbeddingSet, Trial, TrialLabel, TrialSet
from src.domain.errors import BackendError, DimMismatch
from src.linalg.symmat import SymMatrix
from src.metrics.detection import MetricReport, curve_from_scores
from src.plda.model import PldaModel
from src.preprocess.lda import LdaProjection


def random_spd(rng, dim):
    x = rng.standard_normal((dim, dim))
    return SymMatrix(x @ x.T + 0.1 * np.eye(dim))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(55)


@pytest.fixture
def plda(rng) -> PldaModel:
    return PldaModel(mu=rng.standard_normal(3), phi_b=random_spd(rng, 3), phi_w=random_spd(rng, 3))


# ============================================================================
# 공통 규칙 테스트
# ============================================================================

class TestFormatConventions:
    """버전 헤더와 오류 위치 테스트"""

    def test_version_header(self, tmp_path, plda):
        """모든 파일은 버전 줄로 시작"""
        path = formats.write_plda(tmp_path / "model.txt", plda)

        assert path.read_text().splitlines()[0] == VERSION_LINE
        assert FORMAT_VERSION == 1

    def test_error_carries_location(self, tmp_path):
        """FormatError는 경로와 줄 번호를 가짐"""
        path = tmp_path / "bad.txt"
        path.write_text("# format-version 1\nsymmatrix 2\n1.0 2.0\n3.0 oops\n")

        with pytest.raises(FormatError) as excinfo:
            formats.read_symmatrix(path)

        assert excinfo.value.line == 4
        assert excinfo.value.path == str(path)
        assert str(excinfo.value).startswith(f"{path}:4:")
        assert isinstance(excinfo.value, BackendError)
        assert excinfo.value.kind == "FormatError"

    def test_missing_file(self, tmp_path):
        """없는 파일은 FormatError"""
        with pytest.raises(FormatError):
            formats.read_vector(tmp_path / "missing.txt")

    def test_trailing_content_rejected(self, tmp_path):
        """추가 내용이 있으면 FormatError"""
        path = tmp_path / "vector.txt"
        path.write_text("vector 2\n1.0 2.0\n3.0\n")

        with pytest.raises(FormatError) as excinfo:
            formats.read_vector(path)

        assert excinfo.value.line == 3

    def test_comments_and_blank_lines_skipped(self, tmp_path):
        """주석과 빈 줄은 무시"""
        path = tmp_path / "vector.txt"
        path.write_text("# 설명\n\nvector 2\n  # 중간 주석\n1.5 -2.5\n")

        assert np.array_equal(formats.read_vector(path), [1.5, -2.5])


# ============================================================================
# 행렬 / 모델 테스트
# ============================================================================

class TestMatrices:
    """행렬, 벡터, PLDA, LDA 파일 테스트"""

    def test_plda_is_lossless(self, tmp_path, plda):
        """PLDA 파일은 비트 단위로 복원"""
        path = formats.write_plda(tmp_path / "plda.txt", plda)

        loaded = formats.read_plda(path)

        assert np.array_equal(loaded.mu, plda.mu)
        assert loaded.phi_b.equals(plda.phi_b)
        assert loaded.phi_w.equals(plda.phi_w)

    def test_plda_dim_mismatch(self, tmp_path):
        """블록 차원이 헤더와 다르면 FormatError"""
        path = tmp_path / "plda.txt"
        path.write_text(
            "plda 2\nmu 0.0 0.0\nphi_b\nsymmatrix 1\n1.0\nphi_w\nsymmatrix 2\n1.0 0.0\n0.0 1.0\n"
        )

        with pytest.raises(FormatError) as excinfo:
            formats.read_plda(path)

        assert excinfo.value.line == 4

    def test_symmatrix_symmetrized_on_read(self, tmp_path):
        """비대칭 입력은 (M + Mᵀ)/2"""
        path = tmp_path / "m.txt"
        path.write_text("symmatrix 2\n1.0 2.0\n0.0 1.0\n")

        assert formats.read_symmatrix(path).entries[1, 0] == 1.0

    def test_general_matrix(self, tmp_path, rng):
        """비대칭 행렬 파일"""
        matrix = rng.standard_normal((2, 3))

        loaded = formats.read_matrix(formats.write_matrix(tmp_path / "a.txt", matrix))

        assert np.array_equal(loaded, matrix)

    def test_lda_without_eigvals(self, tmp_path):
        """eigvals 줄은 선택"""
        path = tmp_path / "lda.txt"
        path.write_text("lda 3 2\n0.0 0.0 0.0\n1.0 0.0 0.0\n0.0 1.0 0.0\n")

        projection = formats.read_lda(path)

        assert projection.in_dim == 3
        assert projection.out_dim == 2
        assert np.array_equal(projection.eigvals, [0.0, 0.0])

    def test_lda_out_dim_too_large(self, tmp_path):
        """출력 차원 > 입력 차원이면 FormatError"""
        path = tmp_path / "lda.txt"
        path.write_text("lda 2 3\n0.0 0.0\n")

        with pytest.raises(FormatError):
            formats.read_lda(path)


# ============================================================================
# 임베딩 / trial 테스트
# ============================================================================

class TestEmbeddings:
    """임베딩 파일 테스트"""

    def test_labels_and_unlabeled(self, tmp_path):
        """'-' 화자는 레이블 없음"""
        data = EmbeddingSet(2, ["u1", "u2"], ["spk", None], np.array([[0.1, 0.2], [1e-300, -3.5]]))

        loaded = formats.read_embeddings(formats.write_embeddings(tmp_path / "e.txt", data))

        assert loaded.speaker_ids == ("spk", None)
        assert np.array_equal(loaded.vectors, data.vectors)

    def test_wrong_dim(self, tmp_path):
        """값 개수가 차원과 다르면 해당 줄에서 FormatError"""
        path = tmp_path / "e.txt"
        path.write_text("embeddings 2\nu1 s 1.0 2.0\nu2 s 1.0\n")

        with pytest.raises(FormatError) as excinfo:
            formats.read_embeddings(path)

        assert excinfo.value.line == 3

    def test_duplicate_utterance(self, tmp_path):
        """중복 발화 ID는 FormatError"""
        path = tmp_path / "e.txt"
        path.write_text("embeddings 1\nu1 s 1.0\nu1 s 2.0\n")

        with pytest.raises(FormatError) as excinfo:
            formats.read_embeddings(path)

        assert excinfo.value.line == 3

    def test_bad_header(self, tmp_path):
        """헤더가 없으면 FormatError"""
        path = tmp_path / "e.txt"
        path.write_text("u1 s 1.0\n")

        with pytest.raises(FormatError):
            formats.read_embeddings(path)

    def test_empty_set(self, tmp_path):
        """레코드 없는 파일"""
        path = tmp_path / "e.txt"
        path.write_text("embeddings 4\n")

        loaded = formats.read_embeddings(path)

        assert len(loaded) == 0
        assert loaded.dim == 4


class TestTrials:
    """trial 파일 테스트"""

    def test_labels_and_scores(self, tmp_path):
        """레이블/점수 선택 필드"""
        trials = TrialSet([
            Trial("e1", "t1", TrialLabel.TARGET, 1.25),
            Trial("e1", "t2", TrialLabel.NONTARGET),
            Trial("e2", "t1", None, -0.5),
        ])

        loaded = formats.read_trials(formats.write_trials(tmp_path / "trials.txt", trials))

        assert loaded.trials == trials.trials

    def test_unknown_label(self, tmp_path):
        """알 수 없는 레이블은 FormatError"""
        path = tmp_path / "trials.txt"
        path.write_text("e1 t1 maybe\n")

        with pytest.raises(FormatError) as excinfo:
            formats.read_trials(path)

        assert excinfo.value.line == 1

    def test_empty(self, tmp_path):
        """빈 trial 파일"""
        path = formats.write_trials(tmp_path / "trials.txt", TrialSet([]))

        assert len(formats.read_trials(path)) == 0


# ============================================================================
# 리포트 / 설정 테스트
# ============================================================================

class TestReports:
    """리포트, DET, sweep, 설정 파일 테스트"""

    def test_report(self, tmp_path):
        """`eer <값>` / `min_cprimary <값>` 줄"""
        report = MetricReport(eer=0.125, min_cprimary=0.5, n_targets=3, n_nontargets=7)

        path = formats.write_report(tmp_path / "report.txt", report)

        lines = path.read_text().splitlines()
        assert "eer 0.125" in lines
        assert "min_cprimary 0.5" in lines
        assert formats.read_report(path) == report

    def test_det_tsv(self, tmp_path):
        """DET TSV는 헤더 + 임계값별 한 줄"""
        curve = curve_from_scores(np.array([1.0, 2.0]), np.array([0.0]))

        lines = formats.write_det_tsv(tmp_path / "det.tsv", curve).read_text().splitlines()

        assert lines[0] == "threshold\tp_miss\tp_fa"
        assert len(lines) == 1 + len(curve.thresholds)
        assert lines[1] == "-inf\t0.0\t1.0"

    def test_sweep_tsv(self, tmp_path):
        """sweep 표 헤더와 행"""
        rows = [(0.0, "lip", 0.1, 0.4), (0.5, "lip", 0.05, 0.3)]

        path = formats.write_sweep_tsv(tmp_path / "sweep.tsv", rows)

        assert path.read_text().splitlines()[0] == "alpha\trecipe\teer\tmin_cprimary"
        assert formats.read_sweep_tsv(path) == rows

    def test_sweep_bad_header(self, tmp_path):
        """헤더가 다르면 1번 줄 FormatError"""
        path = tmp_path / "sweep.tsv"
        path.write_text("a\tb\n")

        with pytest.raises(FormatError) as excinfo:
            formats.read_sweep_tsv(path)

        assert excinfo.value.line == 1

    def test_key_values(self, tmp_path):
        """`key = value`, 키의 '-'는 '_'로"""
        path = tmp_path / "config.txt"
        path.write_text("# 설정\nlda-dim = 20\nmodel_dir = out/model\n")

        assert formats.read_key_values(path) == {"lda_dim": "20", "model_dir": "out/model"}

    def test_key_values_duplicate(self, tmp_path):
        """중복 키는 FormatError"""
        path = tmp_path / "config.txt"
        path.write_text("seed = 1\nseed = 2\n")

        with pytest.raises(FormatError) as excinfo:
            formats.read_key_values(path)

        assert excinfo.value.line == 2

    def test_key_values_malformed(self, tmp_path):
        """구분자가 없으면 FormatError"""
        path = tmp_path / "config.txt"
        path.write_text("seed 1\n")

        with pytest.raises(FormatError):
            formats.read_key_values(path)


# ============================================================================
# Repository 테스트
# ============================================================================

class TestDirectoryBackendRepository:
    """백엔드 디렉토리 저장/로드 테스트"""

    @pytest.fixture
    def backend(self, rng, plda) -> TrainedBackend:
        return TrainedBackend(
            ood_mean=rng.standard_normal(3),
            ind_mean=rng.standard_normal(3),
            plda_ood=plda,
            cov_ood=random_spd(rng, 3),
            cov_ind=random_spd(rng, 3),
            plda_ind=PldaModel(mu=np.zeros(3), phi_b=random_spd(rng, 3), phi_w=random_spd(rng, 3)),
            lda=LdaProjection(basis=rng.standard_normal((3, 5)), mean=rng.standard_normal(5)),
        )

    def test_save_and_load(self, tmp_path, backend):
        """저장 후 로드하면 같은 값"""
        repository = DirectoryBackendRepository(str(tmp_path / "model"))

        repository.save(backend)
        loaded = repository.load()

        assert np.array_equal(loaded.ood_mean, backend.ood_mean)
        assert loaded.cov_ind.equals(backend.cov_ind)
        assert loaded.plda_ind.phi_w.equals(backend.plda_ind.phi_w)
        assert np.array_equal(loaded.lda.basis, backend.lda.basis)

    def test_unsupervised_backend_removes_stale_files(self, tmp_path, backend):
        """InD PLDA/LDA 없는 백엔드를 저장하면 이전 파일 삭제"""
        repository = DirectoryBackendRepository(str(tmp_path / "model"))
        repository.save(backend)

        unsupervised = TrainedBackend(
            ood_mean=backend.ood_mean, ind_mean=backend.ind_mean, plda_ood=backend.plda_ood,
            cov_ood=backend.cov_ood, cov_ind=backend.cov_ind,
        )
        repository.save(unsupervised)
        loaded = repository.load()

        assert loaded.plda_ind is None
        assert loaded.lda is None
        assert not repository.path(DirectoryBackendRepository.PLDA_IND).exists()

    def test_missing_directory(self, tmp_path):
        """디렉토리가 없으면 FormatError"""
        with pytest.raises(FormatError):
            DirectoryBackendRepository(str(tmp_path / "nowhere")).load()

    def test_catalog(self, backend):
        """카탈로그는 OOD/InD PLDA와 전체 공분산으로 구성"""
        catalog = backend.catalog()

        assert catalog.has_ind_model
        assert catalog.phi_o_b is backend.plda_ood.phi_b

    def test_dim_mismatch(self, rng, plda):
        """구성 요소 차원이 다르면 DimMismatch"""
        with pytest.raises(DimMismatch):
            TrainedBackend(
                ood_mean=np.zeros(3), ind_mean=np.zeros(4), plda_ood=plda,
                cov_ood=random_spd(rng, 3), cov_ind=random_spd(rng, 3),
            )
