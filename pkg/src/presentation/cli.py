"""
명령행 인터페이스
train | adapt | score | eval | sweep | synth 하위 명령
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from src.adapt.recipe import PRESET_NAMES, AdaptRecipe, parse_role, preset
from src.data import formats
from src.domain.entities import CostParams
from src.domain.errors import BackendError, InvalidConfig, InvalidRecipe
from src.scorenorm.as_norm import DEFAULT_TOP_K
from src.service.pipeline_service import (
    CENTER_EVAL_CHOICES,
    CENTER_OOD_CHOICES,
    LDA_SOURCES,
    PipelineConfig,
    PipelineService,
    ScoringOptions,
    parse_alpha_grid,
    synth_config_from_values,
)


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_BACKEND_ERROR = 2

# 하위 명령별 필수 옵션 (설정 파일로도 채울 수 있어 argparse required 대신 직접 검사)
REQUIRED: Dict[str, Sequence[str]] = {
    "train": ("ood", "ind", "model_dir"),
    "adapt": ("model_dir", "out"),
    "score": ("model_dir", "enroll", "test", "trials", "out"),
    "eval": ("scores",),
    "sweep": ("model_dir", "enroll", "test", "trials", "out"),
    "synth": ("out_dir",),
}


class _Parser(argparse.ArgumentParser):
    """사용법 오류를 BackendError로 바꾸는 파서"""

    def error(self, message):
        raise InvalidConfig(f"명령행 인자 오류: {message}")


def _p_targets(text: str):
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"p_target 목록을 읽을 수 없습니다: {text}")


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", default=None, help="key = value 설정 파일 (명령행 옵션이 우선)")
    parser.add_argument("--verbose", action="store_true", help="DEBUG 로그 출력")
    parser.add_argument("--quiet", action="store_true", help="WARNING 이상만 출력")


def _add_scoring(parser: argparse.ArgumentParser):
    parser.add_argument("--model-dir", dest="model_dir", help="train 산출물 디렉토리")
    parser.add_argument("--enroll", help="등록 임베딩 파일")
    parser.add_argument("--test", help="테스트 임베딩 파일")
    parser.add_argument("--trials", help="trial 파일")
    parser.add_argument("--out", help="출력 파일")
    parser.add_argument("--cohort", default=None, help="AS-norm 코호트 임베딩 파일")
    parser.add_argument("--snorm-k", dest="snorm_k", type=int, default=DEFAULT_TOP_K, help="AS-norm top-K")
    parser.add_argument("--workers", type=int, default=1, help="병렬 워커 수")
    parser.add_argument(
        "--center-eval", dest="center_eval", choices=CENTER_EVAL_CHOICES, default="ind",
        help="등록/테스트/코호트 센터링 기준 평균",
    )


def _add_cost(parser: argparse.ArgumentParser):
    defaults = CostParams()
    parser.add_argument(
        "--p-targets", dest="p_targets", type=_p_targets,
        default=",".join(str(p) for p in defaults.p_targets), help="쉼표로 구분한 target 사전확률"
    )
    parser.add_argument("--c-miss", dest="c_miss", type=float, default=defaults.c_miss)
    parser.add_argument("--c-fa", dest="c_fa", type=float, default=defaults.c_fa)


def build_parser() -> argparse.ArgumentParser:
    """전체 명령행 파서 생성"""
    parser = _Parser(
        prog="app.py",
        description="PLDA 도메인 적응 백엔드",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True

    train = subparsers.add_parser("train", help="LDA/PLDA 학습 및 전체 공분산 추정")
    _add_common(train)
    train.add_argument("--ood", help="레이블된 OOD 임베딩 파일")
    train.add_argument("--ind", help="InD 임베딩 파일 (레이블 선택)")
    train.add_argument("--model-dir", dest="model_dir", help="산출물 디렉토리")
    train.add_argument("--lda-dim", dest="lda_dim", type=int, default=150, help="LDA 출력 차원 (0이면 비활성화)")
    train.add_argument("--lda-source", dest="lda_source", choices=LDA_SOURCES, default="ood", help="LDA 학습 데이터")
    train.add_argument(
        "--center-ood", dest="center_ood", choices=CENTER_OOD_CHOICES, default="ood",
        help="OOD 학습 데이터 센터링 기준 평균",
    )

    adapt = subparsers.add_parser("adapt", help="레시피로 적응 PLDA 생성")
    _add_common(adapt)
    adapt.add_argument("--model-dir", dest="model_dir", help="train 산출물 디렉토리")
    adapt.add_argument("--out", help="적응 모델 파일")
    adapt.add_argument("--recipe", default=None, help=f"프리셋 ({', '.join(PRESET_NAMES)})")
    adapt.add_argument("--phi0", default=None, help="base 역할 (예: IND)")
    adapt.add_argument("--phi1", default=None, help="developer 역할 (예: PSEUDO, GAMMA(PSEUDO,OOD))")
    adapt.add_argument("--phi2", default=None, help="reference 역할 (예: IND)")
    adapt.add_argument("--alpha", type=float, default=0.5, help="보간 가중치")
    adapt.add_argument("--alpha-between", dest="alpha_between", type=float, default=None)
    adapt.add_argument("--alpha-within", dest="alpha_within", type=float, default=None)

    score = subparsers.add_parser("score", help="trial 채점 (선택적으로 AS-norm)")
    _add_common(score)
    _add_scoring(score)
    score.add_argument("--model", default=None, help="PLDA 모델 파일 (없으면 OOD PLDA)")

    evaluate = subparsers.add_parser("eval", help="EER/minC_primary 계산")
    _add_common(evaluate)
    evaluate.add_argument("--scores", help="채점된 trial 파일")
    evaluate.add_argument("--out", default=None, help="리포트 파일")
    evaluate.add_argument("--det-out", dest="det_out", default=None, help="DET 점 TSV 파일")
    _add_cost(evaluate)

    sweep = subparsers.add_parser("sweep", help="레시피 × α 격자 평가")
    _add_common(sweep)
    _add_scoring(sweep)
    sweep.add_argument("--alpha-grid", dest="alpha_grid", default="0:1:0.1", help="start:stop:step 또는 쉼표 목록")
    sweep.add_argument("--recipes", default="", help="쉼표로 구분한 프리셋 (비우면 가능한 전체)")
    _add_cost(sweep)

    synth = subparsers.add_parser("synth", help="합성 코퍼스 생성")
    _add_common(synth)
    synth.add_argument("--out-dir", dest="out_dir", help="출력 디렉토리")
    synth.add_argument("--seed", type=int, default=None, help="설정 파일의 seed 덮어쓰기")

    parser.subcommands = subparsers.choices
    return parser


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """
    명령행 파싱

    --config 파일이 있으면 그 값을 하위 명령의 기본값으로 두고 다시 파싱하므로
    명령행 옵션이 항상 우선함 (synth의 --config는 합성 설정 파일)
    """
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.config is not None and args.command != "synth":
        values = formats.read_key_values(args.config)
        subparser = parser.subcommands[args.command]
        known = {action.dest for action in subparser._actions}
        unknown = sorted(set(values) - known - {"config", "verbose", "quiet", "help"})
        if unknown:
            raise InvalidConfig(f"{args.command}에서 쓸 수 없는 설정 키: {', '.join(unknown)}")
        subparser.set_defaults(**{k: v for k, v in values.items() if k in known})
        args = parser.parse_args(argv)

    missing = [name for name in REQUIRED[args.command] if getattr(args, name, None) is None]
    if missing:
        flags = ", ".join("--" + name.replace("_", "-") for name in missing)
        raise InvalidConfig(f"{args.command}: 필수 옵션이 없습니다 ({flags})")
    return args


def recipe_from_args(args: argparse.Namespace) -> AdaptRecipe:
    """--recipe 또는 --phi0/--phi1/--phi2로 레시피 구성"""
    roles = (args.phi0, args.phi1, args.phi2)
    alpha = args.alpha_between if args.alpha_between is not None else args.alpha

    if args.recipe is not None:
        if any(role is not None for role in roles):
            raise InvalidRecipe("--recipe와 --phi0/--phi1/--phi2는 함께 쓸 수 없습니다")
        return preset(args.recipe, alpha, args.alpha_within)

    if any(role is None for role in roles):
        raise InvalidRecipe("--recipe 또는 --phi0, --phi1, --phi2 세 가지가 모두 필요합니다")
    return AdaptRecipe(
        parse_role(args.phi0),
        parse_role(args.phi1),
        parse_role(args.phi2),
        alpha=alpha,
        alpha_within=args.alpha_within,
    )


def _pipeline_config(args: argparse.Namespace) -> PipelineConfig:
    kwargs = {}
    if hasattr(args, "lda_dim"):
        kwargs.update(lda_dim=args.lda_dim, lda_source=args.lda_source, center_ood=args.center_ood)
    if hasattr(args, "workers"):
        kwargs["scoring"] = ScoringOptions(snorm_k=args.snorm_k, workers=args.workers)
        kwargs["center_eval"] = args.center_eval
    if hasattr(args, "p_targets"):
        kwargs["cost"] = CostParams(p_targets=args.p_targets, c_miss=args.c_miss, c_fa=args.c_fa)
    if hasattr(args, "alpha_grid"):
        kwargs["alpha_grid"] = parse_alpha_grid(args.alpha_grid)
        names = tuple(name.strip() for name in args.recipes.split(",") if name.strip())
        for name in names:
            preset(name, 0.5)
        kwargs["recipes"] = names
    return PipelineConfig(**kwargs)


def run(args: argparse.Namespace) -> None:
    """하위 명령 실행"""
    service = PipelineService(_pipeline_config(args))

    if args.command == "train":
        service.train(args.ood, args.ind, args.model_dir)
    elif args.command == "adapt":
        service.adapt(args.model_dir, recipe_from_args(args), args.out)
    elif args.command == "score":
        service.score(
            args.model_dir, args.enroll, args.test, args.trials, args.out,
            model_path=args.model, cohort_path=args.cohort,
        )
    elif args.command == "eval":
        report = service.evaluate(args.scores, out_path=args.out, det_path=args.det_out)
        print(f"eer {report.eer!r}")
        print(f"min_cprimary {report.min_cprimary!r}")
    elif args.command == "sweep":
        service.sweep(
            args.model_dir, args.enroll, args.test, args.trials, args.out,
            cohort_path=args.cohort,
        )
    elif args.command == "synth":
        values = {}
        base_dir = None
        if args.config is not None:
            values = formats.read_key_values(args.config)
            base_dir = Path(args.config).parent
        if args.seed is not None:
            values["seed"] = str(args.seed)
        service.synth(synth_config_from_values(values, base_dir), args.out_dir)


def _error_line(kind: str, error: Exception) -> str:
    message = " ".join(str(error).split())
    return f"error\t{kind}\t{message}"


def main(argv: Optional[List[str]] = None) -> int:
    """
    CLI 진입점

    Returns:
        종료 코드 (0: 성공, 2: 백엔드 오류, 1: 예기치 못한 오류)
    """
    try:
        args = parse_args(argv)
        if args.verbose:
            logging.getLogger().setLevel(logging.DEBUG)
        elif args.quiet:
            logging.getLogger().setLevel(logging.WARNING)
        run(args)
        return EXIT_OK
    except BackendError as e:
        print(_error_line(e.kind, e), file=sys.stderr)
        return EXIT_BACKEND_ERROR
    except Exception as e:
        logger.debug("예기치 못한 오류", exc_info=True)
        print(_error_line("Internal", e), file=sys.stderr)
        return EXIT_INTERNAL
