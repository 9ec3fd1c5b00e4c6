"""결과 아카이브: CSV(수치), JSON(메타데이터), 실패 마커."""

from __future__ import annotations

import json
import logging
import threading
import time
import traceback
from pathlib import Path
from typing import Any, Optional

import pandas as pd

from atomion_dw import __version__
from atomion_dw.commands.models import RunConfig
from atomion_dw.core.cache import content_hash
from atomion_dw.core.json_safety import to_jsonable
from atomion_dw.core.settings import debug_errors_enabled

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"
METADATA_FILE = "metadata.json"
FAILED_FILE = "FAILED.json"


def run_id_for(config: RunConfig) -> str:
    return content_hash({"config": config.model_dump(mode="json"), "version": __version__})[:16]


class ResultArchive:
    def __init__(self, directory: Path, config: Optional[RunConfig] = None) -> None:
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.config = config
        self.run_id = run_id_for(config) if config is not None else "adhoc"
        self.artifacts: list[str] = []
        self.metadata: dict[str, Any] = {}
        self._lock = threading.Lock()
        self._started = time.perf_counter()

    def path(self, name: str) -> Path:
        return self.directory / name

    def write_csv(self, name: str, frame: pd.DataFrame) -> Path:
        p = self.path(name)
        with self._lock:
            frame.to_csv(p, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
            if name not in self.artifacts:
                self.artifacts.append(name)
        logger.info("wrote %s (%d rows)", p, len(frame))
        return p

    def read_csv(self, name: str) -> pd.DataFrame:
        return pd.read_csv(self.path(name))

    def write_json(self, name: str, data: Any) -> Path:
        p = self.path(name)
        text = json.dumps(to_jsonable(data), indent=2, sort_keys=True, ensure_ascii=False)
        with self._lock:
            p.write_text(text + "\n", encoding="utf-8")
            if name not in self.artifacts and name != METADATA_FILE:
                self.artifacts.append(name)
        return p

    def add_metadata(self, **items: Any) -> None:
        with self._lock:
            self.metadata.update(items)

    def finalize(self, subcommand: str) -> Path:
        """메타데이터 JSON. 실행 시간은 CSV 와 분리해 재실행 비교를 방해하지 않습니다."""
        payload = {
            "run_id": self.run_id,
            "version": __version__,
            "subcommand": subcommand,
            "artifacts": sorted(self.artifacts),
            "elapsed_s": time.perf_counter() - self._started,
            "config": self.config.model_dump(mode="json") if self.config is not None else None,
            **self.metadata,
        }
        return self.write_json(METADATA_FILE, payload)

    def mark_failed(self, subcommand: str, exc: BaseException) -> Path:
        payload: dict[str, Any] = {
            "run_id": self.run_id,
            "subcommand": subcommand,
            "error_type": type(exc).__name__,
            "message": str(exc),
            "artifacts": sorted(self.artifacts),
        }
        if debug_errors_enabled():
            payload["traceback"] = "".join(
                traceback.format_exception(type(exc), exc, exc.__traceback__)
            )
        logger.error("run %s failed: %s: %s", self.run_id, type(exc).__name__, exc)
        return self.write_json(FAILED_FILE, payload)
