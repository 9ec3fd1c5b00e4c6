from __future__ import annotations

import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Mapping, Optional

from pydantic import ValidationError

from atomion_dw.commands.models import RunConfig
from atomion_dw.core.errors import ConfigError

logger = logging.getLogger(__name__)


def _format_validation_error(e: ValidationError) -> str:
    parts = []
    for err in e.errors():
        loc = ".".join(str(x) for x in err.get("loc", ()) if x != "__root__") or "<root>"
        msg = str(err.get("msg", "invalid value")).removeprefix("Value error, ")
        if err.get("type") == "extra_forbidden":
            msg = "unknown key"
        parts.append(f"{loc}: {msg}")
    return "; ".join(parts)


def config_from_mapping(data: Mapping[str, Any]) -> RunConfig:
    try:
        return RunConfig.model_validate(dict(data))
    except ValidationError as e:
        raise ConfigError(f"invalid config: {_format_validation_error(e)}") from e


def parse_config(path: Path, overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """TOML 설정을 읽어 검증합니다. overrides 는 최상위 키(seed, tier)를 덮어씁니다."""
    p = Path(path)
    try:
        with p.open("rb") as f:
            data = tomllib.load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {p}") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"malformed config {p}: {e}") from e
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    config = config_from_mapping(data)
    logger.info("config loaded: %s", p)
    return config
