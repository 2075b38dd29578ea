"""
텍스트 파일 형식 읽기/쓰기
행렬, 임베딩, PLDA 모델, LDA 투영, 평균 벡터, trial, 설정, 리포트

모든 파일은 `# format-version 1` 주석 줄로 시작하며 (TSV 표 제외),
읽을 때는 `#` 주석 줄과 빈 줄을 건너뜀. 실수는 repr로 써서 손실 없이 복원됨
"""
import logging
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.domain.entities import EmbeddingSet, Trial, TrialLabel, TrialSet
from src.domain.errors import BackendError
from src.linalg.symmat import SymMatrix
from src.metrics.detection import ErrorCurve, MetricReport
from src.plda.model import PldaModel
from src.preprocess.lda import LdaProjection


logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
VERSION_LINE = f"# format-version {FORMAT_VERSION}"

PathLike = Union[str, Path]


class FormatError(BackendError):
    """
    파일 형식 오류

    Attributes:
        path: 파일 경로
        line: 줄 번호 (1부터, 파일 단위 오류는 None)
    """

    def __init__(self, message: str, path: PathLike, line: Optional[int] = None):
        self.path = str(path)
        self.line = line
        location = self.path if line is None else f"{self.path}:{line}"
        super().__init__(f"{location}: {message}")


def _fmt(value: float) -> str:
    return repr(float(value))


def _fmt_row(values) -> str:
    return " ".join(_fmt(v) for v in values)


class _LineReader:
    """주석/빈 줄을 건너뛰며 (줄 번호, 토큰) 단위로 읽는 도우미"""

    def __init__(self, path: PathLike):
        self.path = Path(path)
        try:
            text = self.path.read_text(encoding="utf-8")
        except OSError as e:
            raise FormatError(f"파일을 읽을 수 없습니다 ({e.strerror})", self.path)
        self._lines: List[Tuple[int, List[str]]] = [
            (number, line.split())
            for number, line in enumerate(text.splitlines(), start=1)
            if line.strip() and not line.lstrip().startswith("#")
        ]
        self._pos = 0

    @property
    def line(self) -> Optional[int]:
        if self._pos < len(self._lines):
            return self._lines[self._pos][0]
        return self._lines[-1][0] if self._lines else None

    def fail(self, message: str, line: Optional[int] = None) -> FormatError:
        return FormatError(message, self.path, line if line is not None else self.line)

    def has_more(self) -> bool:
        return self._pos < len(self._lines)

    def next(self, what: str) -> Tuple[int, List[str]]:
        if not self.has_more():
            raise self.fail(f"{what} 줄이 필요하지만 파일이 끝났습니다")
        item = self._lines[self._pos]
        self._pos += 1
        return item

    def expect_end(self):
        if self.has_more():
            raise self.fail("예상하지 못한 추가 내용이 있습니다")

    def header(self, tag: str, n_values: int) -> List[int]:
        number, tokens = self.next(f"'{tag}' 헤더")
        if tokens[0] != tag or len(tokens) != n_values + 1:
            raise self.fail(f"'{tag}' 헤더가 필요합니다: {' '.join(tokens)}", number)
        try:
            values = [int(t) for t in tokens[1:]]
        except ValueError:
            raise self.fail(f"헤더의 크기 값이 정수가 아닙니다: {' '.join(tokens)}", number)
        if any(v < 1 for v in values):
            raise self.fail(f"헤더의 크기 값은 1 이상이어야 합니다: {' '.join(tokens)}", number)
        return values

    def floats(self, tokens: Sequence[str], count: int, number: int) -> np.ndarray:
        if len(tokens) != count:
            raise self.fail(f"실수 {count}개가 필요합니다 (현재: {len(tokens)}개)", number)
        try:
            return np.array([float(t) for t in tokens], dtype=np.float64)
        except ValueError:
            raise self.fail(f"실수로 읽을 수 없는 값이 있습니다: {' '.join(tokens)}", number)

    def tagged_floats(self, tag: str, count: int) -> np.ndarray:
        number, tokens = self.next(f"'{tag}'")
        if tokens[0] != tag:
            raise self.fail(f"'{tag}' 줄이 필요합니다", number)
        return self.floats(tokens[1:], count, number)

    def tag(self, tag: str):
        number, tokens = self.next(f"'{tag}'")
        if tokens != [tag]:
            raise self.fail(f"'{tag}' 줄이 필요합니다", number)

    def rows(self, n_rows: int, n_cols: int) -> np.ndarray:
        matrix = np.empty((n_rows, n_cols))
        for i in range(n_rows):
            number, tokens = self.next("행렬 행")
            matrix[i] = self.floats(tokens, n_cols, number)
        return matrix


def _write_lines(path: PathLike, lines: Sequence[str], versioned: bool = True) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = list(lines)
    if versioned:
        body.insert(0, VERSION_LINE)
    path.write_text("\n".join(body) + "\n", encoding="utf-8")
    logger.debug(f"파일 저장: {path} ({len(body)}줄)")
    return path


def _symmatrix_lines(matrix: SymMatrix) -> List[str]:
    return [f"symmatrix {matrix.dim}"] + [_fmt_row(row) for row in matrix.entries]


def _read_symmatrix_block(reader: _LineReader, dim: Optional[int] = None) -> SymMatrix:
    start = reader.line
    (size,) = reader.header("symmatrix", 1)
    if dim is not None and size != dim:
        raise reader.fail(f"행렬 차원 {size}이 기대값 {dim}과 다릅니다", start)
    return SymMatrix(reader.rows(size, size))


# ----------------------------------------------------------------------
# 행렬 / 벡터
# ----------------------------------------------------------------------

def write_symmatrix(path: PathLike, matrix: SymMatrix) -> Path:
    return _write_lines(path, _symmatrix_lines(matrix))


def read_symmatrix(path: PathLike) -> SymMatrix:
    """대칭 행렬 파일 읽기 (M과 Mᵀ 평균으로 대칭화)"""
    reader = _LineReader(path)
    matrix = _read_symmatrix_block(reader)
    reader.expect_end()
    return matrix


def write_matrix(path: PathLike, matrix: np.ndarray) -> Path:
    """일반 행렬 (shift 행렬 등)"""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    rows, cols = matrix.shape
    return _write_lines(path, [f"matrix {rows} {cols}"] + [_fmt_row(r) for r in matrix])


def read_matrix(path: PathLike) -> np.ndarray:
    reader = _LineReader(path)
    rows, cols = reader.header("matrix", 2)
    matrix = reader.rows(rows, cols)
    reader.expect_end()
    return matrix


def write_vector(path: PathLike, vector: np.ndarray) -> Path:
    vector = np.asarray(vector, dtype=np.float64).reshape(-1)
    return _write_lines(path, [f"vector {vector.shape[0]}", _fmt_row(vector)])


def read_vector(path: PathLike) -> np.ndarray:
    reader = _LineReader(path)
    (dim,) = reader.header("vector", 1)
    number, tokens = reader.next("벡터 값")
    vector = reader.floats(tokens, dim, number)
    reader.expect_end()
    return vector


# ----------------------------------------------------------------------
# 임베딩
# ----------------------------------------------------------------------

def write_embeddings(path: PathLike, data: EmbeddingSet) -> Path:
    """임베딩 파일: `embeddings <dim>` 후 `<발화 ID> <화자 ID|-> <실수들>`"""
    lines = [f"embeddings {data.dim}"]
    for utt, spk, vector in zip(data.utterance_ids, data.speaker_ids, data.vectors):
        lines.append(f"{utt} {spk if spk is not None else '-'} {_fmt_row(vector)}")
    return _write_lines(path, lines)


def read_embeddings(path: PathLike) -> EmbeddingSet:
    """
    임베딩 파일 읽기

    Raises:
        FormatError: 형식 오류, 차원 불일치, 중복 발화 ID
    """
    reader = _LineReader(path)
    (dim,) = reader.header("embeddings", 1)

    utterance_ids: List[str] = []
    speaker_ids: List[Optional[str]] = []
    vectors: List[np.ndarray] = []
    seen: Dict[str, int] = {}
    while reader.has_more():
        number, tokens = reader.next("임베딩 레코드")
        if len(tokens) < 2:
            raise reader.fail("발화 ID와 화자 ID가 필요합니다", number)
        utt, spk = tokens[0], tokens[1]
        if utt in seen:
            raise reader.fail(f"중복된 발화 ID: {utt} (처음: {seen[utt]}번째 줄)", number)
        seen[utt] = number
        vectors.append(reader.floats(tokens[2:], dim, number))
        utterance_ids.append(utt)
        speaker_ids.append(None if spk == "-" else spk)

    matrix = np.array(vectors, dtype=np.float64).reshape(len(vectors), dim)
    logger.debug(f"임베딩 로드: {path} ({len(utterance_ids)}개, {dim}차원)")
    return EmbeddingSet(dim, utterance_ids, speaker_ids, matrix)


# ----------------------------------------------------------------------
# 모델
# ----------------------------------------------------------------------

def write_plda(path: PathLike, model: PldaModel) -> Path:
    lines = [f"plda {model.dim}", "mu " + _fmt_row(model.mu), "phi_b"]
    lines += _symmatrix_lines(model.phi_b)
    lines.append("phi_w")
    lines += _symmatrix_lines(model.phi_w)
    return _write_lines(path, lines)


def read_plda(path: PathLike) -> PldaModel:
    reader = _LineReader(path)
    (dim,) = reader.header("plda", 1)
    mu = reader.tagged_floats("mu", dim)
    reader.tag("phi_b")
    phi_b = _read_symmatrix_block(reader, dim)
    reader.tag("phi_w")
    phi_w = _read_symmatrix_block(reader, dim)
    reader.expect_end()
    return PldaModel(mu=mu, phi_b=phi_b, phi_w=phi_w)


def write_lda(path: PathLike, projection: LdaProjection) -> Path:
    """LDA 파일: `lda <in> <out>`, 평균 줄, out_dim개 행, 고유값 줄"""
    lines = [f"lda {projection.in_dim} {projection.out_dim}", _fmt_row(projection.mean)]
    lines += [_fmt_row(row) for row in projection.basis]
    lines.append("eigvals " + _fmt_row(projection.eigvals))
    return _write_lines(path, lines)


def read_lda(path: PathLike) -> LdaProjection:
    reader = _LineReader(path)
    in_dim, out_dim = reader.header("lda", 2)
    if out_dim > in_dim:
        raise reader.fail(f"출력 차원 {out_dim}이 입력 차원 {in_dim}보다 큽니다")
    number, tokens = reader.next("평균")
    mean = reader.floats(tokens, in_dim, number)
    basis = reader.rows(out_dim, in_dim)
    eigvals = reader.tagged_floats("eigvals", out_dim) if reader.has_more() else None
    reader.expect_end()
    return LdaProjection(basis=basis, mean=mean, eigvals=eigvals)


# ----------------------------------------------------------------------
# trial / 리포트
# ----------------------------------------------------------------------

def write_trials(path: PathLike, trials: TrialSet) -> Path:
    """trial 파일: `<등록 ID> <테스트 ID> <target|nontarget|-> [점수]`"""
    lines = []
    for trial in trials:
        label = trial.label.value if trial.label is not None else "-"
        line = f"{trial.enroll_id} {trial.test_id} {label}"
        if trial.score is not None:
            line += f" {_fmt(trial.score)}"
        lines.append(line)
    return _write_lines(path, lines)


def read_trials(path: PathLike) -> TrialSet:
    reader = _LineReader(path)
    trials: List[Trial] = []
    while reader.has_more():
        number, tokens = reader.next("trial")
        if len(tokens) not in (3, 4):
            raise reader.fail("`<등록> <테스트> <레이블> [점수]` 형식이어야 합니다", number)
        label_text = tokens[2]
        if label_text == "-":
            label = None
        else:
            try:
                label = TrialLabel(label_text)
            except ValueError:
                raise reader.fail(f"알 수 없는 레이블: {label_text}", number)
        score = float(reader.floats(tokens[3:], 1, number)[0]) if len(tokens) == 4 else None
        trials.append(Trial(tokens[0], tokens[1], label, score))
    return TrialSet(trials)


def write_report(path: PathLike, report: MetricReport) -> Path:
    return _write_lines(path, [
        f"eer {_fmt(report.eer)}",
        f"min_cprimary {_fmt(report.min_cprimary)}",
        f"n_targets {report.n_targets}",
        f"n_nontargets {report.n_nontargets}",
    ])


def read_report(path: PathLike) -> MetricReport:
    values = read_key_values(path, separator=None)
    try:
        return MetricReport(
            eer=float(values["eer"]),
            min_cprimary=float(values["min_cprimary"]),
            n_targets=int(values["n_targets"]),
            n_nontargets=int(values["n_nontargets"]),
        )
    except (KeyError, ValueError) as e:
        raise FormatError(f"리포트 항목이 없거나 잘못되었습니다 ({e})", path)


def write_det_tsv(path: PathLike, curve: ErrorCurve) -> Path:
    lines = ["threshold\tp_miss\tp_fa"]
    lines += [f"{_fmt(t)}\t{_fmt(m)}\t{_fmt(f)}" for t, m, f in curve.points()]
    return _write_lines(path, lines, versioned=False)


SWEEP_HEADER = "alpha\trecipe\teer\tmin_cprimary"


def write_sweep_tsv(path: PathLike, rows: Sequence[Tuple[float, str, float, float]]) -> Path:
    lines = [SWEEP_HEADER]
    lines += [f"{_fmt(a)}\t{name}\t{_fmt(e)}\t{_fmt(c)}" for a, name, e, c in rows]
    return _write_lines(path, lines, versioned=False)


def read_sweep_tsv(path: PathLike) -> List[Tuple[float, str, float, float]]:
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise FormatError(f"파일을 읽을 수 없습니다 ({e.strerror})", path)
    if not lines or lines[0] != SWEEP_HEADER:
        raise FormatError("sweep 헤더가 잘못되었습니다", path, 1)
    rows = []
    for number, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != 4:
            raise FormatError("열이 4개여야 합니다", path, number)
        try:
            rows.append((float(fields[0]), fields[1], float(fields[2]), float(fields[3])))
        except ValueError:
            raise FormatError(f"실수로 읽을 수 없는 값: {line}", path, number)
    return rows


# ----------------------------------------------------------------------
# 설정
# ----------------------------------------------------------------------

def _iter_key_values(path: PathLike, separator: Optional[str]) -> Iterator[Tuple[int, str, str]]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise FormatError(f"파일을 읽을 수 없습니다 ({e.strerror})", path)
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if separator is None:
            parts = line.split(None, 1)
        else:
            parts = [p.strip() for p in line.split(separator, 1)]
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise FormatError(f"`키 값` 형식이 아닙니다: {line}", path, number)
        yield number, parts[0], parts[1]


def read_key_values(path: PathLike, separator: Optional[str] = "=") -> Dict[str, str]:
    """
    `key = value` 설정 파일 읽기

    키의 '-'는 '_'로 바꿔서 반환

    Raises:
        FormatError: 형식 오류 또는 중복 키
    """
    values: Dict[str, str] = {}
    for number, key, value in _iter_key_values(path, separator):
        key = key.replace("-", "_")
        if key in values:
            raise FormatError(f"중복된 키: {key}", path, number)
        values[key] = value
    return values


def write_key_values(path: PathLike, values: Dict[str, object]) -> Path:
    return _write_lines(path, [f"{key} = {value}" for key, value in values.items()])
