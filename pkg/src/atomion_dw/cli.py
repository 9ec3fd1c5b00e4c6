from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import dotenv

from atomion_dw import __version__
from atomion_dw.commands.config import parse_config
from atomion_dw.commands.plots import FIGURES
from atomion_dw.commands.runner import SUBCOMMANDS, emit_plots, run
from atomion_dw.core.errors import (
    EXIT_CONFIG,
    EXIT_OK,
    AtomIonError,
    ConfigError,
    ConvergenceWarning,
    exit_code_for,
)
from atomion_dw.core.settings import debug_enabled, debug_errors_enabled

logger = logging.getLogger(__name__)


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML 실행 설정")
    common.add_argument("--out", type=Path, default=Path("results"), help="결과 디렉터리")
    common.add_argument("--threads", type=int, default=None, help="작업 스레드 수")
    common.add_argument("--seed", type=int, default=None, help="난수 시드 (설정값을 덮어씀)")
    common.add_argument("--tier", choices=("acceptance", "paper"), default=None)
    common.add_argument(
        "--strict", action="store_true", help="ConvergenceWarning 을 오류(종료 코드 4)로 승격"
    )
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(
        prog="atomion-dw",
        description="Atom in a double well next to a trapped ion: spectra, dynamics, control.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "spectrum-2body":
            p.add_argument(
                "--density-d",
                dest="density_d",
                type=float,
                nargs="+",
                default=None,
                metavar="D_NM",
                help="밀도 격자 CSV 를 쓸 d [nm] (설정의 sweep.density_d_nm 을 덮어씀)",
            )
    plots = sub.add_parser("emit-plots", parents=[common])
    plots.add_argument(
        "figures", nargs="*", help=f"figure ids ({', '.join(FIGURES)}); 기본값은 설정의 figures"
    )
    return parser


def _emit(args: argparse.Namespace) -> None:
    figures = list(getattr(args, "figures", []) or [])
    if not figures and args.config is not None:
        figures = parse_config(args.config).output.figures
    if not figures:
        raise ConfigError(f"no figure ids given (available: {', '.join(FIGURES)})")
    for path in emit_plots(args.out, figures):
        print(path)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is not None and args.threads < 1:
        logger.error("--threads must be >= 1, got %s", args.threads)
        return EXIT_CONFIG
    try:
        if args.subcommand == "emit-plots":
            _emit(args)
            return EXIT_OK
        if args.config is None:
            raise ConfigError(f"{args.subcommand} needs --config PATH")
        config = parse_config(args.config, {"seed": args.seed})
        density_d = getattr(args, "density_d", None)
        if density_d:
            sweep = config.sweep.model_copy(update={"density_d_nm": list(density_d)})
            config = config.model_copy(update={"sweep": sweep})
        archive = run(
            config,
            args.subcommand,
            args.out,
            tier=args.tier,
            threads=args.threads,
            strict=args.strict,
        )
        print(f"{archive.run_id} -> {archive.directory}")
        return EXIT_OK
    except (AtomIonError, ConvergenceWarning) as e:
        if debug_errors_enabled():
            logger.exception("%s failed", args.subcommand)
        else:
            logger.error("%s failed: %s: %s", args.subcommand, type(e).__name__, e)
        return exit_code_for(e)
    except Exception:
        logger.exception("unexpected failure in %s", args.subcommand)
        return exit_code_for(Exception())


def configure_logging() -> None:
    logging.basicConfig(
        level=logging.DEBUG if debug_enabled() else logging.INFO,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[logging.StreamHandler(sys.stdout)],
    )


def entrypoint() -> None:
    """console script: .env 로딩 → 로깅 설정 → main."""
    dotenv.load_dotenv(override=True)
    configure_logging()
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
