"""atomion-doublewell: 트랩된 이온 옆 이중 우물 원자의 스펙트럼/동역학 계산 패키지.

`python src/main.py <subcommand> --config run.toml` 실행을 기준으로 구성되어 있으며,
모든 수치 계산은 무차원 단위(R*, E*, ħ = 1)에서 수행됩니다.
"""

__all__ = ["__version__"]

__version__ = "0.1.0"
