"""패키지 공통 예외/경고 계층과 CLI 종료 코드 매핑."""

from __future__ import annotations


class AtomIonError(Exception):
    """패키지에서 의도적으로 발생시키는 모든 예외의 베이스."""


class ConfigError(AtomIonError, ValueError):
    """설정 파일/설정 값 오류 (키 이름을 메시지에 포함)."""


class DomainError(AtomIonError, ValueError):
    """물리적으로 허용되지 않는 입력 (음수 질량, q ≥ 0.91 등)."""


class NumericalError(AtomIonError, RuntimeError):
    """수치 계산 단계의 실패."""


class SolverError(NumericalError):
    """고유값 탐색 실패 (bracket 실패, 매칭 실패 등)."""


class PreconditionError(NumericalError):
    """격자/기저가 요청된 계산을 감당하지 못하는 경우."""


class IntegratorError(NumericalError):
    """시간 전개 스텝 제어 실패."""


class OptimizationError(NumericalError):
    """최적화가 유효한 후보를 하나도 찾지 못한 경우."""


class ConvergenceWarning(UserWarning):
    """수렴 검사 경고. --strict 에서 오류로 승격됩니다."""


class BasisSupportWarning(ConvergenceWarning):
    """요청 격자가 기저 함수의 지지 영역을 벗어나는 경우."""


EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_CONVERGENCE = 4


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, (DomainError, NumericalError)):
        return EXIT_NUMERICAL
    if isinstance(exc, ConvergenceWarning):
        return EXIT_CONVERGENCE
    return EXIT_UNEXPECTED
