import logging
import sys

import dotenv

# 환경 변수 로딩을 최우선으로 처리
dotenv.load_dotenv(override=True)

from atomion_dw.cli import configure_logging, main  # noqa: E402

configure_logging()
logger = logging.getLogger(__name__)


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\n👋 Stopped by user")
        sys.exit(130)
