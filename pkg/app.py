"""
PLDA 도메인 적응 백엔드 메인 진입점
사용법: python app.py <train|adapt|score|eval|sweep|synth> [옵션]
"""
import logging
import sys

from src.presentation.cli import main


if __name__ == "__main__":
    # 로그는 stderr로 출력해 데이터 출력과 분리
    logging.basicConfig(
        level=logging.INFO,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    sys.exit(main())
